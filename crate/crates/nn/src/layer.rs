use std::borrow::Cow;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

/// Initial noise scale numerator; sigma starts at `SIGMA0 / sqrt(fan_in)`.
pub const SIGMA0: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `(out, in)`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Linear layer with factorized Gaussian parameter noise.
///
/// Effective weights are `mu_w + sigma_w ⊙ (noise_out ⊗ noise_in)` and the
/// effective bias is `mu_b + sigma_b ⊙ noise_out`, where the noise vectors
/// hold `sign(e)·sqrt(|e|)` of standard normal draws `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyLayer {
    pub mu_w: Array2<f64>,
    pub sigma_w: Array2<f64>,
    pub mu_b: Array1<f64>,
    pub sigma_b: Array1<f64>,
    pub noise_in: Array1<f64>,
    pub noise_out: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    Noisy(NoisyLayer),
}

fn uniform_matrix<R: Rng + ?Sized>(out: usize, inp: usize, bound: f64, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((out, inp), || rng.random_range(-bound..=bound))
}

fn uniform_vector<R: Rng + ?Sized>(n: usize, bound: f64, rng: &mut R) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || rng.random_range(-bound..=bound))
}

/// `sign(x)·sqrt(|x|)`
pub fn scale_noise(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

impl DenseLayer {
    pub fn new<R: Rng + ?Sized>(inp: usize, out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inp as f64).sqrt();
        Self {
            weights: uniform_matrix(out, inp, bound, rng),
            bias: uniform_vector(out, bound, rng),
        }
    }

    pub fn zeros(inp: usize, out: usize) -> Self {
        Self { weights: Array2::zeros((out, inp)), bias: Array1::zeros(out) }
    }
}

impl NoisyLayer {
    pub fn new<R: Rng + ?Sized>(inp: usize, out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inp as f64).sqrt();
        let sigma = SIGMA0 / (inp as f64).sqrt();
        Self {
            mu_w: uniform_matrix(out, inp, bound, rng),
            sigma_w: Array2::from_elem((out, inp), sigma),
            mu_b: uniform_vector(out, bound, rng),
            sigma_b: Array1::from_elem(out, sigma),
            noise_in: Array1::zeros(inp),
            noise_out: Array1::zeros(out),
        }
    }

    /// Rank-one weight noise `noise_out ⊗ noise_in`.
    pub fn epsilon_w(&self) -> Array2<f64> {
        let col = self.noise_out.view().insert_axis(Axis(1));
        let row = self.noise_in.view().insert_axis(Axis(0));
        &col * &row
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in self.noise_in.iter_mut() {
            *v = scale_noise(rng.sample(StandardNormal));
        }
        for v in self.noise_out.iter_mut() {
            *v = scale_noise(rng.sample(StandardNormal));
        }
    }
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        match self {
            Layer::Dense(d) => d.weights.ncols(),
            Layer::Noisy(n) => n.mu_w.ncols(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Layer::Dense(d) => d.weights.nrows(),
            Layer::Noisy(n) => n.mu_w.nrows(),
        }
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self, Layer::Noisy(_))
    }

    fn effective(&self, noise: bool) -> (Cow<'_, Array2<f64>>, Cow<'_, Array1<f64>>) {
        match self {
            Layer::Dense(d) => (Cow::Borrowed(&d.weights), Cow::Borrowed(&d.bias)),
            Layer::Noisy(n) if !noise => (Cow::Borrowed(&n.mu_w), Cow::Borrowed(&n.mu_b)),
            Layer::Noisy(n) => {
                let w = &n.mu_w + &(&n.sigma_w * &n.epsilon_w());
                let b = &n.mu_b + &(&n.sigma_b * &n.noise_out);
                (Cow::Owned(w), Cow::Owned(b))
            }
        }
    }

    /// `x·Wᵀ + b` for a batch of row vectors.
    pub fn forward(&self, x: ArrayView2<'_, f64>, noise: bool) -> Array2<f64> {
        let (w, b) = self.effective(noise);
        let mut y = x.dot(&w.t());
        y += &b.view().insert_axis(Axis(0));
        y
    }

    /// Parameter gradients (in [`Layer::params_mut`] order, summed over the
    /// batch) and the gradient with respect to the input.
    pub fn backward(
        &self,
        x: ArrayView2<'_, f64>,
        dy: ArrayView2<'_, f64>,
        noise: bool,
        grads: &mut Vec<Vec<f64>>,
    ) -> Array2<f64> {
        let dw = dy.t().dot(&x);
        let db = dy.sum_axis(Axis(0));
        let (w, _) = self.effective(noise);
        let dx = dy.dot(&*w);
        match self {
            Layer::Dense(_) => {
                grads.push(dw.into_raw_vec_and_offset().0);
                grads.push(db.into_raw_vec_and_offset().0);
            }
            Layer::Noisy(n) => {
                let (dsw, dsb) = if noise {
                    (&dw * &n.epsilon_w(), &db * &n.noise_out)
                } else {
                    (Array2::zeros(dw.raw_dim()), Array1::zeros(db.len()))
                };
                grads.push(dw.into_raw_vec_and_offset().0);
                grads.push(dsw.into_raw_vec_and_offset().0);
                grads.push(db.into_raw_vec_and_offset().0);
                grads.push(dsb.into_raw_vec_and_offset().0);
            }
        }
        dx
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        fn s2(a: &mut Array2<f64>) -> &mut [f64] {
            a.as_slice_mut().expect("standard layout")
        }
        fn s1(a: &mut Array1<f64>) -> &mut [f64] {
            a.as_slice_mut().expect("standard layout")
        }
        match self {
            Layer::Dense(d) => vec![s2(&mut d.weights), s1(&mut d.bias)],
            Layer::Noisy(n) => vec![s2(&mut n.mu_w), s2(&mut n.sigma_w), s1(&mut n.mu_b), s1(&mut n.sigma_b)],
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Dense(d) => vec![d.weights.as_slice().unwrap(), d.bias.as_slice().unwrap()],
            Layer::Noisy(n) => vec![
                n.mu_w.as_slice().unwrap(),
                n.sigma_w.as_slice().unwrap(),
                n.mu_b.as_slice().unwrap(),
                n.sigma_b.as_slice().unwrap(),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noisy_with_zero_sigma_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut n = NoisyLayer::new(4, 3, &mut rng);
        n.sigma_w.fill(0.0);
        n.sigma_b.fill(0.0);
        n.sample(&mut rng);
        let dense = Layer::Dense(DenseLayer { weights: n.mu_w.clone(), bias: n.mu_b.clone() });
        let x = array![[0.3, -1.2, 2.0, 0.5]];
        assert_eq!(Layer::Noisy(n).forward(x.view(), true), dense.forward(x.view(), true));
    }

    #[test]
    fn noisy_init_scales_sigma_by_fan_in() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = NoisyLayer::new(16, 5, &mut rng);
        assert!(n.sigma_w.iter().all(|&s| s == 0.125));
        assert!(n.sigma_b.iter().all(|&s| s == 0.125));
        assert!(n.mu_w.iter().all(|w| w.abs() <= 0.25));
    }

    #[test]
    fn noise_is_factorized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut n = NoisyLayer::new(5, 4, &mut rng);
        n.sample(&mut rng);
        let eps = n.epsilon_w();
        for i in 0..4 {
            for j in 0..5 {
                assert_eq!(eps[[i, j]], n.noise_out[i] * n.noise_in[j]);
            }
        }
        assert!(n.noise_in.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn scale_noise_keeps_sign() {
        assert_eq!(scale_noise(4.0), 2.0);
        assert_eq!(scale_noise(-9.0), -3.0);
        assert_eq!(scale_noise(0.0), 0.0);
    }
}
