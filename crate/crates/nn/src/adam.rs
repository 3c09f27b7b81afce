use serde::{Deserialize, Serialize};

use crate::network::{Gradients, Network};
use crate::NnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(shapes: &[usize], alpha: f64) -> Self {
        Self {
            alpha,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn for_network(net: &Network, alpha: f64) -> Self {
        let shapes: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
        Self::new(&shapes, alpha)
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn update(&mut self, params: Vec<&mut [f64]>, grads: &Gradients) -> Result<(), NnError> {
        if params.len() != self.m.len() || grads.tensors.len() != self.m.len() {
            return Err(NnError::DimensionMismatch { expected: self.m.len(), got: params.len() });
        }
        for ((p, g), m) in params.iter().zip(&grads.tensors).zip(&self.m) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(NnError::DimensionMismatch { expected: m.len(), got: p.len().min(g.len()) });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, alpha, eps) = (self.beta1, self.beta2, self.alpha, self.eps);
        for (((p, g), m), v) in params.into_iter().zip(&grads.tensors).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= alpha * mh / (vh.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Apply one Adam step to every parameter of `net`.
pub fn adam_step(net: &mut Network, grads: &Gradients, st: &mut AdamState) -> Result<(), NnError> {
    st.update(net.params_mut(), grads)
}
