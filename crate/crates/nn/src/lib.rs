//! Small feed-forward Q-networks: dense and noisy layers, plain and
//! duelling heads, Adam, finite-difference gradient checks and binary
//! checkpoints. All arithmetic is `f64`.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod layer;
pub mod network;

pub use adam::{adam_step, AdamState};
pub use layer::{DenseLayer, Layer, NoisyLayer};
pub use network::{duelling_aggregate, Activation, Gradients, Head, Network, NetworkSpec, NoisyPlacement, Trace};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("network has no noisy layers")]
    NoNoisyLayers,
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for NnError {
    fn from(e: std::io::Error) -> Self {
        NnError::Io(e.to_string())
    }
}
