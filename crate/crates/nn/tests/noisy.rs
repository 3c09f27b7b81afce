use lanecross_nn::{DenseLayer, Head, Layer, Network, NetworkSpec, NoisyLayer, NoisyPlacement};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn noisy_net(seed: u64) -> Network {
    let spec = NetworkSpec {
        input_dim: 6,
        hidden: vec![8, 8],
        output_dim: 3,
        duelling: false,
        noisy: NoisyPlacement::FinalTwo,
        activation: Default::default(),
    };
    Network::new(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn zero_sigma_net_ignores_sampling() {
    let mut net = noisy_net(1);
    for l in net.layers_mut() {
        if let Layer::Noisy(n) = l {
            n.sigma_w.fill(0.0);
            n.sigma_b.fill(0.0);
        }
    }
    let x = [0.1, 0.2, -0.3, 0.4, 0.9, -1.0];
    let before = net.forward(&x).unwrap();
    net.sample_noise(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(net.forward(&x).unwrap(), before);
}

#[test]
fn same_seed_gives_same_noise() {
    let mut a = noisy_net(2);
    let mut b = a.clone();
    a.sample_noise(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    b.sample_noise(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    b.sample_noise(&mut ChaCha8Rng::seed_from_u64(10)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn sampled_noise_is_rank_one() {
    let mut net = noisy_net(3);
    net.sample_noise(&mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    for l in net.layers() {
        if let Layer::Noisy(n) = l {
            let eps = n.epsilon_w();
            for ((i, j), &e) in eps.indexed_iter() {
                assert_eq!(e, n.noise_out[i] * n.noise_in[j]);
            }
        }
    }
}

/// A single noisy layer is linear in its noise, so the average output over
/// many resamples must approach the mean-parameter output.
#[test]
fn noisy_layer_expectation_matches_mean_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let layer = Layer::Noisy(NoisyLayer::new(6, 3, &mut rng));
    let mut net = Network::from_parts(vec![], Head::Plain(layer), Default::default()).unwrap();
    let x = [0.5, -1.0, 0.25, 2.0, -0.75, 1.0];
    net.set_noise_enabled(false);
    let mean_out = net.forward(&x).unwrap();
    net.set_noise_enabled(true);

    let n = 10_000;
    let mut sum = [0.0; 3];
    let mut sum_sq = [0.0; 3];
    for _ in 0..n {
        net.sample_noise(&mut rng).unwrap();
        let q = net.forward(&x).unwrap();
        for a in 0..3 {
            sum[a] += q[a];
            sum_sq[a] += q[a] * q[a];
        }
    }
    for a in 0..3 {
        let mean = sum[a] / n as f64;
        let var = sum_sq[a] / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!((mean - mean_out[a]).abs() < 3.0 * se, "action {a}: {mean} vs {} (se {se})", mean_out[a]);
    }
}

#[test]
fn mean_mode_matches_dense_with_mu() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut noisy = NoisyLayer::new(4, 3, &mut rng);
    noisy.sample(&mut rng);
    let dense = DenseLayer { weights: noisy.mu_w.clone(), bias: noisy.mu_b.clone() };
    let mut a = Network::from_parts(vec![], Head::Plain(Layer::Noisy(noisy)), Default::default()).unwrap();
    a.set_noise_enabled(false);
    let b = Network::from_parts(vec![], Head::Plain(Layer::Dense(dense)), Default::default()).unwrap();
    let x = [1.0, 2.0, -3.0, 0.5];
    assert_eq!(a.forward(&x).unwrap(), b.forward(&x).unwrap());
}
