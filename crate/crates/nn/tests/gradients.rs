use lanecross_nn::gradcheck::{check, max_relative_error, numerical_gradients, DEFAULT_STEP};
use lanecross_nn::{Activation, Network, NetworkSpec, NoisyPlacement};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOLERANCE: f64 = 1e-4;
/// Evaluation points closer than this to a rectifier kink are skipped.
const KINK: f64 = 1e-3;

fn spec(duelling: bool, noisy: NoisyPlacement, activation: Activation) -> NetworkSpec {
    NetworkSpec { input_dim: 4, hidden: vec![5], output_dim: 3, duelling, noisy, activation }
}

fn noisy_choice() -> impl Strategy<Value = NoisyPlacement> {
    prop_oneof![Just(NoisyPlacement::None), Just(NoisyPlacement::FinalTwo), Just(NoisyPlacement::All)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_gradients_match_central_differences(
        seed in any::<u64>(),
        duelling in any::<bool>(),
        noisy in noisy_choice(),
        tanh in any::<bool>(),
    ) {
        let act = if tanh { Activation::Tanh } else { Activation::Relu };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Network::new(&spec(duelling, noisy, act), &mut rng).unwrap();
        if net.has_noisy_layers() {
            net.sample_noise(&mut rng).unwrap();
        }
        let mut checked = 0;
        for _ in 0..20 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Some(report) = check(&net, &x, &g, KINK).unwrap() {
                prop_assert!(report.max_relative_error < TOLERANCE, "relative error {}", report.max_relative_error);
                checked += 1;
                if checked == 3 {
                    break;
                }
            }
        }
        prop_assert!(checked > 0);
    }
}

#[test]
fn standard_shape_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut spec = NetworkSpec::standard(22);
    spec.hidden = vec![16, 16];
    for (duelling, noisy) in [(false, NoisyPlacement::None), (true, NoisyPlacement::None), (false, NoisyPlacement::FinalTwo)] {
        spec.duelling = duelling;
        spec.noisy = noisy;
        let mut net = Network::new(&spec, &mut rng).unwrap();
        if net.has_noisy_layers() {
            net.sample_noise(&mut rng).unwrap();
        }
        let x: Vec<f64> = (0..22).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = [0.0, 1.0, 0.0];
        let report = check(&net, &x, &g, 1e-4).unwrap().expect("point away from kinks");
        assert!(report.max_relative_error < TOLERANCE, "{duelling} {noisy:?}: {}", report.max_relative_error);
    }
}

#[test]
fn mean_mode_gives_zero_sigma_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut net = Network::new(&spec(false, NoisyPlacement::All, Activation::Tanh), &mut rng).unwrap();
    net.sample_noise(&mut rng).unwrap();
    net.set_noise_enabled(false);
    let x = [0.5, -0.5, 1.0, 0.25];
    let g = [1.0, -1.0, 0.5];
    let analytic = net.backward(&x, &g).unwrap();
    let numeric = numerical_gradients(&net, &x, &g, DEFAULT_STEP).unwrap();
    assert!(max_relative_error(&analytic, &numeric, 1e-6) < TOLERANCE);
    // sigma_w and sigma_b of the first layer
    assert!(analytic.tensors[1].iter().chain(&analytic.tensors[3]).all(|&v| v == 0.0));
}
