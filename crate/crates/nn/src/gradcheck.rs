//! Central finite-difference verification of analytic gradients.

use ndarray::ArrayView2;

use crate::network::{Gradients, Network};
use crate::NnError;

pub const DEFAULT_STEP: f64 = 1e-5;

fn objective(net: &Network, x: &[f64], grad_out: &[f64]) -> Result<f64, NnError> {
    let q = net.forward(x)?;
    Ok(q.iter().zip(grad_out).map(|(a, b)| a * b).sum())
}

/// Gradients of `q(x)·grad_out` estimated by central differences.
pub fn numerical_gradients(net: &Network, x: &[f64], grad_out: &[f64], step: f64) -> Result<Gradients, NnError> {
    let mut probe = net.clone();
    let shapes: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
    let mut tensors = Vec::with_capacity(shapes.len());
    for (t, &n) in shapes.iter().enumerate() {
        let mut g = vec![0.0; n];
        for (i, gi) in g.iter_mut().enumerate() {
            let orig = probe.params()[t][i];
            probe.params_mut()[t][i] = orig + step;
            let plus = objective(&probe, x, grad_out)?;
            probe.params_mut()[t][i] = orig - step;
            let minus = objective(&probe, x, grad_out)?;
            probe.params_mut()[t][i] = orig;
            *gi = (plus - minus) / (2.0 * step);
        }
        tensors.push(g);
    }
    Ok(Gradients { tensors })
}

/// `|a − n| / max(|a|, |n|, floor)`
pub fn relative_error(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

pub fn max_relative_error(analytic: &Gradients, numeric: &Gradients, floor: f64) -> f64 {
    analytic
        .tensors
        .iter()
        .flatten()
        .zip(numeric.tensors.iter().flatten())
        .map(|(&a, &n)| relative_error(a, n, floor))
        .fold(0.0, f64::max)
}

/// Smallest `|preactivation|` of any hidden unit at input `x`. Points close
/// to a rectifier kink make finite differences meaningless.
pub fn min_abs_preactivation(net: &Network, x: &[f64]) -> Result<f64, NnError> {
    let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
    Ok(net.forward_trace(view)?.1.min_abs_preactivation())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub max_relative_error: f64,
    pub parameters: usize,
}

/// Compare analytic and numerical gradients at `x`. Returns `None` when the
/// point lies within `kink` of a rectifier kink.
pub fn check(net: &Network, x: &[f64], grad_out: &[f64], kink: f64) -> Result<Option<CheckReport>, NnError> {
    if min_abs_preactivation(net, x)? < kink {
        return Ok(None);
    }
    let analytic = net.backward(x, grad_out)?;
    let numeric = numerical_gradients(net, x, grad_out, DEFAULT_STEP)?;
    Ok(Some(CheckReport {
        max_relative_error: max_relative_error(&analytic, &numeric, 1e-6),
        parameters: analytic.len(),
    }))
}
