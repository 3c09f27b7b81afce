use std::collections::VecDeque;

use lanecross_core::env::Observation;
use lanecross_core::seeding::{rng_for, stream};
use lanecross_nn::{adam_step, AdamState, Network, NetworkSpec, NoisyPlacement};
use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::replay::{ReplayBuffer, Transition};
use crate::{AgentConfig, DqnError, Variant};

/// Frozen target networks, newest first. Snapshots evaluate noisy layers
/// with their mean weights.
#[derive(Debug, Clone)]
pub struct TargetBank {
    capacity: usize,
    snapshots: VecDeque<Network>,
}

impl TargetBank {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "target bank capacity must be positive");
        Self { capacity, snapshots: VecDeque::with_capacity(capacity) }
    }

    pub fn push(&mut self, net: &Network) {
        let mut frozen = net.clone();
        frozen.set_noise_enabled(false);
        self.snapshots.push_front(frozen);
        self.snapshots.truncate(self.capacity);
    }

    pub fn newest(&self) -> Option<&Network> {
        self.snapshots.front()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Network> {
        self.snapshots.iter()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice over `net`'s Q-values at `x`.
pub fn select_action<R: Rng + ?Sized>(x: &[f64], eps: f64, net: &Network, rng: &mut R) -> Result<usize, DqnError> {
    if x.len() != net.input_dim() {
        return Err(lanecross_nn::NnError::DimensionMismatch { expected: net.input_dim(), got: x.len() }.into());
    }
    if eps > 0.0 && rng.random::<f64>() < eps {
        return Ok(rng.random_range(0..net.output_dim()));
    }
    Ok(argmax(&net.forward(x)?))
}

fn stack<'a>(rows: impl ExactSizeIterator<Item = &'a Observation>, dim: usize) -> Result<Array2<f64>, DqnError> {
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * dim);
    for o in rows {
        if o.features.len() != dim {
            return Err(lanecross_nn::NnError::DimensionMismatch { expected: dim, got: o.features.len() }.into());
        }
        flat.extend_from_slice(&o.features);
    }
    Ok(Array2::from_shape_vec((n, dim), flat).expect("sized"))
}

fn row_max(q: ArrayView2<'_, f64>) -> Vec<f64> {
    q.rows().into_iter().map(|r| r.fold(f64::NEG_INFINITY, |m, &v| m.max(v))).collect()
}

/// Bootstrap targets `y` for each transition of `batch`.
pub fn compute_targets(
    batch: &[&Transition],
    variant: Variant,
    online: &Network,
    bank: &TargetBank,
    gamma: f64,
) -> Result<Vec<f64>, DqnError> {
    let newest = bank.newest().ok_or(DqnError::EmptyBank)?;
    let next = stack(batch.iter().map(|t| &t.s_next), newest.input_dim())?;
    let bootstrap = match variant {
        Variant::Double => {
            let qo = online.forward_batch(next.view())?;
            let qt = newest.forward_batch(next.view())?;
            qo.rows().into_iter().zip(qt.rows()).map(|(o, t)| t[argmax(o.as_slice().unwrap())]).collect()
        }
        Variant::Averaged => {
            let mut snaps = bank.iter();
            let mut sum = snaps.next().expect("non-empty").forward_batch(next.view())?;
            for s in snaps {
                sum += &s.forward_batch(next.view())?;
            }
            if bank.len() > 1 {
                sum /= bank.len() as f64;
            }
            row_max(sum.view())
        }
        Variant::Dqn | Variant::Duelling | Variant::Noisy => row_max(newest.forward_batch(next.view())?.view()),
    };
    Ok(batch
        .iter()
        .zip(bootstrap)
        .map(|(t, v)| if t.terminal { t.r } else { t.r + gamma * v })
        .collect())
}

/// One gradient step on the squared TD error of the taken actions.
/// Returns the mean loss; a non-finite loss leaves the network untouched.
pub fn fit(
    online: &mut Network,
    adam: &mut AdamState,
    bank: &TargetBank,
    variant: Variant,
    gamma: f64,
    batch: &[&Transition],
) -> Result<f64, DqnError> {
    let y = compute_targets(batch, variant, online, bank, gamma)?;
    let x = stack(batch.iter().map(|t| &t.s), online.input_dim())?;
    let (q, trace) = online.forward_trace(x.view())?;
    let n = batch.len() as f64;
    let mut grad = Array2::zeros(q.raw_dim());
    let mut loss = 0.0;
    for (i, t) in batch.iter().enumerate() {
        let d = q[[i, t.a]] - y[i];
        loss += d * d;
        grad[[i, t.a]] = 2.0 * d / n;
    }
    loss /= n;
    if !loss.is_finite() {
        return Ok(loss);
    }
    let grads = online.backward_trace(&trace, grad.view())?;
    adam_step(online, &grads, adam)?;
    Ok(loss)
}

pub struct Agent {
    pub cfg: AgentConfig,
    pub online: Network,
    pub bank: TargetBank,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    pub env_steps: u64,
    pub updates: u64,
}

impl Agent {
    pub fn network_spec(cfg: &AgentConfig, input_dim: usize) -> NetworkSpec {
        let noisy = match (cfg.variant, cfg.noisy_all_layers) {
            (Variant::Noisy, false) => NoisyPlacement::FinalTwo,
            (Variant::Noisy, true) => NoisyPlacement::All,
            _ => NoisyPlacement::None,
        };
        NetworkSpec {
            input_dim,
            hidden: cfg.hidden.clone(),
            output_dim: 3,
            duelling: cfg.variant == Variant::Duelling,
            noisy,
            activation: cfg.activation,
        }
    }

    /// Fresh agent with one initial target snapshot.
    pub fn new(cfg: AgentConfig, input_dim: usize, seed: u64) -> Result<Self, DqnError> {
        cfg.validate()?;
        let mut init = rng_for(seed, &[stream::AGENT, 0]);
        let mut online = Network::new(&Self::network_spec(&cfg, input_dim), &mut init)?;
        let mut rng = rng_for(seed, &[stream::AGENT, 1]);
        if online.has_noisy_layers() {
            online.sample_noise(&mut rng)?;
        }
        Ok(Self::from_network(cfg, online, rng))
    }

    /// Wraps an existing network, e.g. a hand-built one in tests.
    pub fn with_network(cfg: AgentConfig, online: Network, seed: u64) -> Result<Self, DqnError> {
        cfg.validate()?;
        Ok(Self::from_network(cfg, online, rng_for(seed, &[stream::AGENT, 1])))
    }

    fn from_network(cfg: AgentConfig, online: Network, rng: ChaCha8Rng) -> Self {
        let adam = AdamState::for_network(&online, cfg.alpha);
        let mut agent = Self {
            bank: TargetBank::new(cfg.averaged_k),
            buffer: ReplayBuffer::new(cfg.replay_capacity),
            cfg,
            online,
            adam,
            rng,
            env_steps: 0,
            updates: 0,
        };
        agent.sync_target();
        agent
    }

    pub fn input_dim(&self) -> usize {
        self.online.input_dim()
    }

    pub fn sync_target(&mut self) {
        self.bank.push(&self.online);
    }

    /// Behaviour-policy action. Noisy agents resample noise and act
    /// greedily.
    pub fn act(&mut self, obs: &Observation, eps: f64) -> Result<usize, DqnError> {
        let eps = if self.cfg.variant == Variant::Noisy {
            self.online.sample_noise(&mut self.rng)?;
            0.0
        } else {
            eps
        };
        select_action(&obs.features, eps, &self.online, &mut self.rng)
    }

    /// Samples a batch and performs one update.
    pub fn train_step(&mut self) -> Result<f64, DqnError> {
        let need = self.cfg.batch_size;
        if self.buffer.len() < need {
            return Err(DqnError::BufferTooSmall { have: self.buffer.len(), need });
        }
        if self.cfg.variant == Variant::Noisy {
            self.online.sample_noise(&mut self.rng)?;
        }
        let batch = self.buffer.sample(need, &mut self.rng);
        let loss = fit(&mut self.online, &mut self.adam, &self.bank, self.cfg.variant, self.cfg.gamma, &batch)?;
        self.updates += 1;
        Ok(loss)
    }

    /// One update on a caller-chosen batch.
    pub fn train_on(&mut self, batch: &[&Transition]) -> Result<f64, DqnError> {
        let loss = fit(&mut self.online, &mut self.adam, &self.bank, self.cfg.variant, self.cfg.gamma, batch)?;
        self.updates += 1;
        Ok(loss)
    }

    /// Stores `t`, trains once the buffer holds a batch, and syncs the
    /// target every `target_sync_interval` environment steps.
    pub fn observe(&mut self, t: Transition) -> Result<Option<f64>, DqnError> {
        self.buffer.push(t)?;
        let loss = if self.buffer.len() >= self.cfg.batch_size { Some(self.train_step()?) } else { None };
        self.env_steps += 1;
        if self.env_steps % self.cfg.target_sync_interval == 0 {
            self.sync_target();
        }
        Ok(loss)
    }

    /// Frozen greedy policy network with noise switched off.
    pub fn policy(&self) -> Network {
        let mut net = self.online.clone();
        net.set_noise_enabled(false);
        net
    }
}
