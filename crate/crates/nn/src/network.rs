use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::layer::{DenseLayer, Layer, NoisyLayer};
use crate::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at preactivation `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisyPlacement {
    #[default]
    None,
    /// Last hidden layer and the head.
    FinalTwo,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub duelling: bool,
    pub noisy: NoisyPlacement,
    pub activation: Activation,
}

impl NetworkSpec {
    /// `input → 128 → 128 → 3`, rectifier, plain head.
    pub fn standard(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: vec![128, 128],
            output_dim: 3,
            duelling: false,
            noisy: NoisyPlacement::None,
            activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    Plain(Layer),
    /// Value stream (→1) and advantage stream (→n) combined by
    /// [`duelling_aggregate`].
    Duelling { value: Layer, advantage: Layer },
}

/// `q_a = v + adv_a − mean(adv)`
pub fn duelling_aggregate(v: f64, adv: &[f64]) -> Vec<f64> {
    let mean = adv.iter().sum::<f64>() / adv.len() as f64;
    adv.iter().map(|a| v + a - mean).collect()
}

/// Per-parameter gradients in canonical order: hidden layers first, then
/// the head (plain layer, or value followed by advantage). Each layer
/// contributes its tensors in [`Layer::params`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self { tensors: net.params().iter().map(|p| vec![0.0; p.len()]).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.tensors.iter().flatten().all(|&g| g == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|g| g.is_finite())
    }

    pub fn scale(&mut self, k: f64) {
        self.tensors.iter_mut().flatten().for_each(|g| *g *= k);
    }

    pub fn len(&self) -> usize {
        self.tensors.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Intermediate values kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Input to each hidden layer, then the input to the head.
    inputs: Vec<Array2<f64>>,
    /// Preactivations of each hidden layer.
    preacts: Vec<Array2<f64>>,
}

impl Trace {
    /// Smallest `|z|` over all hidden preactivations.
    pub fn min_abs_preactivation(&self) -> f64 {
        self.preacts.iter().flatten().fold(f64::INFINITY, |m, z| m.min(z.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub hidden: Vec<Layer>,
    pub head: Head,
    pub activation: Activation,
    noise_enabled: bool,
}

impl Network {
    pub fn new<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Self, NnError> {
        if spec.input_dim == 0 || spec.output_dim == 0 || spec.hidden.contains(&0) {
            return Err(NnError::InvalidSpec("layer widths must be positive".into()));
        }
        let n = spec.hidden.len();
        let noisy_hidden = |i: usize| match spec.noisy {
            NoisyPlacement::None => false,
            NoisyPlacement::FinalTwo => i + 1 == n,
            NoisyPlacement::All => true,
        };
        let noisy_head = spec.noisy != NoisyPlacement::None;
        let make = |inp: usize, out: usize, noisy: bool, rng: &mut R| {
            if noisy {
                Layer::Noisy(NoisyLayer::new(inp, out, rng))
            } else {
                Layer::Dense(DenseLayer::new(inp, out, rng))
            }
        };
        let mut hidden = Vec::with_capacity(n);
        let mut width = spec.input_dim;
        for (i, &h) in spec.hidden.iter().enumerate() {
            hidden.push(make(width, h, noisy_hidden(i), rng));
            width = h;
        }
        let head = if spec.duelling {
            let value = make(width, 1, noisy_head, rng);
            let advantage = make(width, spec.output_dim, noisy_head, rng);
            Head::Duelling { value, advantage }
        } else {
            Head::Plain(make(width, spec.output_dim, noisy_head, rng))
        };
        Ok(Self { hidden, head, activation: spec.activation, noise_enabled: true })
    }

    pub fn from_parts(hidden: Vec<Layer>, head: Head, activation: Activation) -> Result<Self, NnError> {
        let mut width = None;
        for l in &hidden {
            if let Some(w) = width {
                if l.in_dim() != w {
                    return Err(NnError::DimensionMismatch { expected: w, got: l.in_dim() });
                }
            }
            width = Some(l.out_dim());
        }
        let check = |l: &Layer| match width {
            Some(w) if l.in_dim() != w => Err(NnError::DimensionMismatch { expected: w, got: l.in_dim() }),
            _ => Ok(()),
        };
        match &head {
            Head::Plain(l) => check(l)?,
            Head::Duelling { value, advantage } => {
                check(value)?;
                check(advantage)?;
                if value.out_dim() != 1 {
                    return Err(NnError::InvalidSpec("value stream must have one output".into()));
                }
                if value.in_dim() != advantage.in_dim() {
                    return Err(NnError::DimensionMismatch { expected: value.in_dim(), got: advantage.in_dim() });
                }
            }
        }
        Ok(Self { hidden, head, activation, noise_enabled: true })
    }

    pub fn input_dim(&self) -> usize {
        match (self.hidden.first(), &self.head) {
            (Some(l), _) => l.in_dim(),
            (None, Head::Plain(l)) => l.in_dim(),
            (None, Head::Duelling { value, .. }) => value.in_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.head {
            Head::Plain(l) => l.out_dim(),
            Head::Duelling { advantage, .. } => advantage.out_dim(),
        }
    }

    pub fn is_duelling(&self) -> bool {
        matches!(self.head, Head::Duelling { .. })
    }

    /// Every layer in canonical parameter order.
    pub fn layers(&self) -> Vec<&Layer> {
        let mut out: Vec<&Layer> = self.hidden.iter().collect();
        match &self.head {
            Head::Plain(l) => out.push(l),
            Head::Duelling { value, advantage } => {
                out.push(value);
                out.push(advantage);
            }
        }
        out
    }

    pub fn layers_mut(&mut self) -> Vec<&mut Layer> {
        let mut out: Vec<&mut Layer> = self.hidden.iter_mut().collect();
        match &mut self.head {
            Head::Plain(l) => out.push(l),
            Head::Duelling { value, advantage } => {
                out.push(value);
                out.push(advantage);
            }
        }
        out
    }

    pub fn has_noisy_layers(&self) -> bool {
        self.layers().iter().any(|l| l.is_noisy())
    }

    /// When disabled, noisy layers evaluate with their mean parameters.
    pub fn set_noise_enabled(&mut self, on: bool) {
        self.noise_enabled = on;
    }

    pub fn noise_enabled(&self) -> bool {
        self.noise_enabled
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers().into_iter().flat_map(Layer::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers_mut().into_iter().flat_map(Layer::params_mut).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Resample factorized noise in every noisy layer, in canonical order.
    pub fn sample_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), NnError> {
        if !self.has_noisy_layers() {
            return Err(NnError::NoNoisyLayers);
        }
        for l in self.layers_mut() {
            if let Layer::Noisy(n) = l {
                n.sample(rng);
            }
        }
        Ok(())
    }

    fn check_input(&self, cols: usize) -> Result<(), NnError> {
        if cols != self.input_dim() {
            return Err(NnError::DimensionMismatch { expected: self.input_dim(), got: cols });
        }
        Ok(())
    }

    fn head_forward(&self, a: ArrayView2<'_, f64>) -> Array2<f64> {
        let noise = self.noise_enabled;
        match &self.head {
            Head::Plain(l) => l.forward(a, noise),
            Head::Duelling { value, advantage } => {
                let v = value.forward(a, noise);
                let mut adv = advantage.forward(a, noise);
                let mean = adv.mean_axis(Axis(1)).expect("non-empty advantage");
                for (mut row, (m, vv)) in adv.rows_mut().into_iter().zip(mean.iter().zip(v.column(0))) {
                    row.mapv_inplace(|q| vv + q - m);
                }
                adv
            }
        }
    }

    /// Q-values for a batch of row-vector inputs.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, NnError> {
        self.check_input(x.ncols())?;
        let mut a = x.to_owned();
        for l in &self.hidden {
            a = l.forward(a.view(), self.noise_enabled);
            a.mapv_inplace(|z| self.activation.apply(z));
        }
        Ok(self.head_forward(a.view()))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(view)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass keeping what [`Network::backward_trace`] needs.
    pub fn forward_trace(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Trace), NnError> {
        self.check_input(x.ncols())?;
        let mut inputs = Vec::with_capacity(self.hidden.len() + 1);
        let mut preacts = Vec::with_capacity(self.hidden.len());
        let mut a = x.to_owned();
        for l in &self.hidden {
            let z = l.forward(a.view(), self.noise_enabled);
            inputs.push(a);
            a = z.mapv(|v| self.activation.apply(v));
            preacts.push(z);
        }
        let q = self.head_forward(a.view());
        inputs.push(a);
        Ok((q, Trace { inputs, preacts }))
    }

    /// Gradients of `Σ_rows q·grad_out` with respect to every parameter,
    /// holding sampled noise fixed.
    pub fn backward_trace(&self, trace: &Trace, grad_out: ArrayView2<'_, f64>) -> Result<Gradients, NnError> {
        let head_in = trace.inputs.last().expect("trace has head input");
        if grad_out.ncols() != self.output_dim() {
            return Err(NnError::DimensionMismatch { expected: self.output_dim(), got: grad_out.ncols() });
        }
        if grad_out.nrows() != head_in.nrows() {
            return Err(NnError::DimensionMismatch { expected: head_in.nrows(), got: grad_out.nrows() });
        }
        let noise = self.noise_enabled;
        let mut head_grads = Vec::new();
        let mut da = match &self.head {
            Head::Plain(l) => l.backward(head_in.view(), grad_out, noise, &mut head_grads),
            Head::Duelling { value, advantage } => {
                let dv = grad_out.sum_axis(Axis(1)).insert_axis(Axis(1));
                let mean = grad_out.mean_axis(Axis(1)).expect("non-empty").insert_axis(Axis(1));
                let dadv = &grad_out - &mean;
                let mut da = value.backward(head_in.view(), dv.view(), noise, &mut head_grads);
                da += &advantage.backward(head_in.view(), dadv.view(), noise, &mut head_grads);
                da
            }
        };
        let mut per_layer: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.hidden.len());
        for (i, l) in self.hidden.iter().enumerate().rev() {
            let z = &trace.preacts[i];
            let act = self.activation;
            ndarray::Zip::from(&mut da).and(z).for_each(|d, &zz| *d *= act.derivative(zz));
            let mut g = Vec::new();
            da = l.backward(trace.inputs[i].view(), da.view(), noise, &mut g);
            per_layer.push(g);
        }
        let mut tensors: Vec<Vec<f64>> = per_layer.into_iter().rev().flatten().collect();
        tensors.extend(head_grads);
        Ok(Gradients { tensors })
    }

    pub fn backward(&self, x: &[f64], grad_out: &[f64]) -> Result<Gradients, NnError> {
        let xv = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        let (_, trace) = self.forward_trace(xv)?;
        let gv = ArrayView2::from_shape((1, grad_out.len()), grad_out).expect("row vector");
        self.backward_trace(&trace, gv)
    }

    /// Textual description of shapes, head and activation, used for the
    /// checkpoint layout checksum.
    pub fn layout_descriptor(&self) -> String {
        let head = if self.is_duelling() { "duelling" } else { "plain" };
        let mut s = format!("{};{}", self.activation.name(), head);
        for l in self.layers() {
            let kind = if l.is_noisy() { "noisy" } else { "dense" };
            s.push_str(&format!(";{kind}:{}x{}", l.in_dim(), l.out_dim()));
        }
        s
    }
}

/// Dense `n → n` identity layer with zero bias.
pub fn identity_layer(n: usize) -> Layer {
    Layer::Dense(DenseLayer { weights: Array2::eye(n), bias: Array1::zeros(n) })
}
