//! A two-state, three-action deterministic MDP with one-hot observations,
//! small enough to solve exactly.
//!
//! | state | action 0        | action 1        | action 2         |
//! |-------|-----------------|-----------------|------------------|
//! | 0     | r = 1, go to 1  | r = 0, stay     | r = 2, terminal  |
//! | 1     | r = 0, go to 0  | r = 1, terminal | r = -1, stay     |
//!
//! Episodes start in state 0 and are truncated after `max_steps`.

use lanecross_core::env::{Action, EnvError, EpisodicEnv, Observation, Outcome, StepEvents, StepResult};

/// `(reward, next state)`; `None` is terminal.
pub const TRANSITIONS: [[(f64, Option<usize>); 3]; 2] = [
    [(1.0, Some(1)), (0.0, Some(0)), (2.0, None)],
    [(0.0, Some(0)), (1.0, None), (-1.0, Some(1))],
];

#[derive(Debug, Clone)]
pub struct TwoStateMdp {
    pub max_steps: usize,
    state: usize,
    steps: usize,
}

impl TwoStateMdp {
    pub fn new(max_steps: usize) -> Self {
        Self { max_steps, state: 0, steps: 0 }
    }

    pub fn observation(state: usize) -> Observation {
        let mut features = vec![0.0; 2];
        features[state] = 1.0;
        Observation { features, layout_version: 0 }
    }
}

impl EpisodicEnv for TwoStateMdp {
    type Error = EnvError;

    fn begin_episode(&mut self, _episode: usize) -> Result<Observation, EnvError> {
        self.state = 0;
        self.steps = 0;
        Ok(Self::observation(0))
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        let (reward, next) = TRANSITIONS[self.state][action.index()];
        self.steps += 1;
        let outcome = match next {
            None => Outcome::EndOfTrack,
            Some(_) if self.steps >= self.max_steps => Outcome::Truncated,
            Some(_) => Outcome::Running,
        };
        if let Some(s) = next {
            self.state = s;
        }
        Ok(StepResult {
            observation: Self::observation(self.state),
            reward,
            done: outcome != Outcome::Running,
            outcome,
            events: StepEvents { reached_end: next.is_none(), ..StepEvents::default() },
        })
    }
}
