use lanecross_nn::checkpoint::{from_bytes, load, save, to_bytes};
use lanecross_nn::{Activation, Network, NetworkSpec, NnError, NoisyPlacement};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn net(seed: u64, duelling: bool, noisy: NoisyPlacement, activation: Activation) -> Network {
    let spec = NetworkSpec { input_dim: 7, hidden: vec![9, 6], output_dim: 3, duelling, noisy, activation };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = Network::new(&spec, &mut rng).unwrap();
    if n.has_noisy_layers() {
        n.sample_noise(&mut rng).unwrap();
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_is_bit_identical(seed in any::<u64>(), duelling in any::<bool>(), noisy in 0..3u8, tanh in any::<bool>()) {
        let noisy = [NoisyPlacement::None, NoisyPlacement::FinalTwo, NoisyPlacement::All][noisy as usize];
        let act = if tanh { Activation::Tanh } else { Activation::Relu };
        let original = net(seed, duelling, noisy, act);
        let restored = from_bytes(&to_bytes(&original)).unwrap();
        prop_assert_eq!(&restored, &original);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x: Vec<f64> = (0..7).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a = original.forward(&x).unwrap();
        let b = restored.forward(&x).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.bin");
    let n = net(4, true, NoisyPlacement::FinalTwo, Activation::Relu);
    save(&n, &path).unwrap();
    assert_eq!(load(&path).unwrap(), n);
}

#[test]
fn corrupted_checkpoints_are_rejected() {
    let bytes = to_bytes(&net(5, false, NoisyPlacement::None, Activation::Relu));
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(from_bytes(&bad_magic), Err(NnError::Checkpoint(_))));
    assert!(matches!(from_bytes(&bytes[..bytes.len() - 3]), Err(NnError::Checkpoint(_))));
    let mut bad_sum = bytes.clone();
    bad_sum[12] ^= 0xff;
    assert!(matches!(from_bytes(&bad_sum), Err(NnError::Checkpoint(_))));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(from_bytes(&extra), Err(NnError::Checkpoint(_))));
}

#[test]
fn header_layout() {
    let bytes = to_bytes(&net(6, true, NoisyPlacement::None, Activation::Tanh));
    assert_eq!(&bytes[..4], b"LCQN");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(&bytes[8..11], &[1, 1, 1]);
    assert_eq!(u32::from_le_bytes(bytes[19..23].try_into().unwrap()), 4);
}
