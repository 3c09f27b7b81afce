use std::collections::VecDeque;

use lanecross_core::env::Observation;
use rand::Rng;

use crate::DqnError;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Observation,
    pub a: usize,
    pub r: f64,
    pub s_next: Observation,
    pub terminal: bool,
}

/// Fixed-capacity FIFO of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<Transition>,
    layout_version: Option<u32>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, storage: VecDeque::with_capacity(capacity), layout_version: None }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends `t`, evicting the oldest transition when full. Every stored
    /// observation must share one layout version.
    pub fn push(&mut self, t: Transition) -> Result<(), DqnError> {
        let v = t.s.layout_version;
        if t.s_next.layout_version != v || t.a >= 3 {
            return Err(DqnError::LayoutMismatch { expected: v, got: t.s_next.layout_version });
        }
        match self.layout_version {
            Some(expected) if expected != v => return Err(DqnError::LayoutMismatch { expected, got: v }),
            _ => self.layout_version = Some(v),
        }
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(t);
        Ok(())
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.storage.get(i)
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        if self.storage.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| rng.random_range(0..self.storage.len())).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Transition> {
        self.sample_indices(n, rng).into_iter().map(|i| &self.storage[i]).collect()
    }
}
