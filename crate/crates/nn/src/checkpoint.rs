//! Binary checkpoint format.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        4 bytes  "LCQN"
//! version      u32      1
//! activation   u8       0 relu, 1 tanh
//! head         u8       0 plain, 1 duelling
//! noise        u8       1 if noisy layers sample noise
//! checksum     [u8; 8]  first 8 bytes of SHA-256(layout descriptor)
//! layers       u32      hidden layers + head layers
//! per layer:
//!   length     u64      bytes that follow in this record
//!   kind       u8       0 dense, 1 noisy
//!   in, out    u32, u32
//!   dense:     weights (out·in, row-major), bias (out)
//!   noisy:     mu_w, sigma_w, mu_b, sigma_b, noise_in (in), noise_out (out)
//! ```
//!
//! Head layers follow the hidden layers: one for a plain head, value then
//! advantage for a duelling head. The layout descriptor is
//! `activation;head;kind:INxOUT;...` over all layers.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::layer::{DenseLayer, Layer, NoisyLayer};
use crate::network::{Activation, Head, Network};
use crate::NnError;

pub const MAGIC: &[u8; 4] = b"LCQN";
pub const VERSION: u32 = 1;

pub fn layout_checksum(net: &Network) -> [u8; 8] {
    let digest = Sha256::digest(net.layout_descriptor().as_bytes());
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    out
}

fn put_f64s(buf: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
}

fn layer_record(l: &Layer) -> Vec<u8> {
    let mut rec = Vec::new();
    rec.push(u8::from(l.is_noisy()));
    rec.extend_from_slice(&(l.in_dim() as u32).to_le_bytes());
    rec.extend_from_slice(&(l.out_dim() as u32).to_le_bytes());
    match l {
        Layer::Dense(d) => {
            put_f64s(&mut rec, d.weights.as_slice().unwrap());
            put_f64s(&mut rec, d.bias.as_slice().unwrap());
        }
        Layer::Noisy(n) => {
            for t in [&n.mu_w, &n.sigma_w] {
                put_f64s(&mut rec, t.as_slice().unwrap());
            }
            for t in [&n.mu_b, &n.sigma_b, &n.noise_in, &n.noise_out] {
                put_f64s(&mut rec, t.as_slice().unwrap());
            }
        }
    }
    rec
}

pub fn to_bytes(net: &Network) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(match net.activation {
        Activation::Relu => 0,
        Activation::Tanh => 1,
    });
    buf.push(u8::from(net.is_duelling()));
    buf.push(u8::from(net.noise_enabled()));
    buf.extend_from_slice(&layout_checksum(net));
    let layers = net.layers();
    buf.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for l in layers {
        let rec = layer_record(l);
        buf.extend_from_slice(&(rec.len() as u64).to_le_bytes());
        buf.extend_from_slice(&rec);
    }
    buf
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| NnError::Checkpoint("truncated checkpoint".into()))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, NnError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, NnError> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| NnError::Checkpoint("layer too large".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn read_layer(c: &mut Cursor<'_>) -> Result<Layer, NnError> {
    let len = c.u64()? as usize;
    let start = c.pos;
    let kind = c.u8()?;
    let (inp, out) = (c.u32()? as usize, c.u32()? as usize);
    let mat = |c: &mut Cursor<'_>| -> Result<Array2<f64>, NnError> {
        Ok(Array2::from_shape_vec((out, inp), c.f64s(out * inp)?).expect("sized"))
    };
    let layer = match kind {
        0 => {
            let weights = mat(c)?;
            let bias = Array1::from(c.f64s(out)?);
            Layer::Dense(DenseLayer { weights, bias })
        }
        1 => {
            let mu_w = mat(c)?;
            let sigma_w = mat(c)?;
            let mu_b = Array1::from(c.f64s(out)?);
            let sigma_b = Array1::from(c.f64s(out)?);
            let noise_in = Array1::from(c.f64s(inp)?);
            let noise_out = Array1::from(c.f64s(out)?);
            Layer::Noisy(NoisyLayer { mu_w, sigma_w, mu_b, sigma_b, noise_in, noise_out })
        }
        k => return Err(NnError::Checkpoint(format!("unknown layer kind {k}"))),
    };
    if c.pos - start != len {
        return Err(NnError::Checkpoint("layer record length mismatch".into()));
    }
    Ok(layer)
}

pub fn from_bytes(data: &[u8]) -> Result<Network, NnError> {
    let mut c = Cursor { data, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let activation = match c.u8()? {
        0 => Activation::Relu,
        1 => Activation::Tanh,
        k => return Err(NnError::Checkpoint(format!("unknown activation {k}"))),
    };
    let duelling = match c.u8()? {
        0 => false,
        1 => true,
        k => return Err(NnError::Checkpoint(format!("unknown head {k}"))),
    };
    let noise = c.u8()? != 0;
    let checksum: [u8; 8] = c.take(8)?.try_into().unwrap();
    let count = c.u32()? as usize;
    let head_layers = if duelling { 2 } else { 1 };
    if count < head_layers {
        return Err(NnError::Checkpoint("too few layers".into()));
    }
    let mut layers = (0..count).map(|_| read_layer(&mut c)).collect::<Result<Vec<_>, _>>()?;
    if c.pos != data.len() {
        return Err(NnError::Checkpoint("trailing bytes".into()));
    }
    let head = if duelling {
        let advantage = layers.pop().unwrap();
        let value = layers.pop().unwrap();
        Head::Duelling { value, advantage }
    } else {
        Head::Plain(layers.pop().unwrap())
    };
    let mut net = Network::from_parts(layers, head, activation)?;
    net.set_noise_enabled(noise);
    if layout_checksum(&net) != checksum {
        return Err(NnError::Checkpoint("layout checksum mismatch".into()));
    }
    Ok(net)
}

pub fn save(net: &Network, path: &Path) -> Result<(), NnError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(net))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network, NnError> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    from_bytes(&data)
}
