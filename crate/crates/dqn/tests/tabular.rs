use lanecross_dqn::toy::{TwoStateMdp, TRANSITIONS};
use lanecross_dqn::{run_training, Agent, AgentConfig, EpisodeMetrics, TrainOptions};

const GAMMA: f64 = 0.95;

/// Value iteration on the tabular model until the update is below 1e-14.
fn q_star() -> [[f64; 3]; 2] {
    let mut q = [[0.0; 3]; 2];
    loop {
        let v = [q[0].iter().copied().fold(f64::MIN, f64::max), q[1].iter().copied().fold(f64::MIN, f64::max)];
        let mut next = [[0.0; 3]; 2];
        let mut delta: f64 = 0.0;
        for s in 0..2 {
            for a in 0..3 {
                let (r, n) = TRANSITIONS[s][a];
                next[s][a] = r + n.map_or(0.0, |n| GAMMA * v[n]);
                delta = delta.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if delta < 1e-14 {
            return q;
        }
    }
}

#[test]
fn value_iteration_matches_closed_form() {
    // Optimal loop 0 → 1 → 0 ... with reward 1 every other step.
    let q = q_star();
    let v0 = 1.0 / (1.0 - GAMMA * GAMMA);
    assert!((q[0][0] - v0).abs() < 1e-9);
    assert!((q[1][0] - GAMMA * v0).abs() < 1e-9);
    assert!((q[0][2] - 2.0).abs() < 1e-12);
}

fn tabular_config() -> AgentConfig {
    AgentConfig {
        gamma: GAMMA,
        alpha: 1e-3,
        eps_start: 1.0,
        eps_min: 1.0,
        eps_decay: 1.0,
        batch_size: 32,
        target_sync_interval: 5,
        hidden: vec![32],
        ..AgentConfig::default()
    }
}

#[test]
fn dqn_converges_to_the_value_iteration_fixed_point() {
    for seed in 0..3 {
        train_and_check(seed);
    }
}

fn train_and_check(seed: u64) {
    let mut env = TwoStateMdp::new(50);
    let mut agent = Agent::new(tabular_config(), 2, seed).unwrap();
    let mut metrics: Vec<EpisodeMetrics> = Vec::new();
    let mut episodes = 0;
    while agent.env_steps < 5_000 {
        run_training(&mut env, &mut agent, &TrainOptions { episodes: 1, ..Default::default() }, &mut metrics).unwrap();
        episodes += 1;
    }
    let q = q_star();
    let mut worst: f64 = 0.0;
    for s in 0..2 {
        let got = agent.policy().forward(&TwoStateMdp::observation(s).features).unwrap();
        for a in 0..3 {
            worst = worst.max((got[a] - q[s][a]).abs());
        }
    }
    assert!(worst < 1e-2, "max |Q − Q*| = {worst} after {} steps ({episodes} episodes)", agent.env_steps);
}
