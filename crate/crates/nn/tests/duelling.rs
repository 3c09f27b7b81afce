use lanecross_nn::duelling_aggregate;
use proptest::prelude::*;

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

proptest! {
    #[test]
    fn aggregate_preserves_advantage_argmax(v in -100.0..100.0f64, adv in prop::array::uniform3(-100.0..100.0f64)) {
        let q = duelling_aggregate(v, &adv);
        let mut sa = adv.to_vec();
        sa.sort_by(f64::total_cmp);
        // Distinct advantages stay distinct after the shift.
        if sa[2] - sa[1] > 1e-9 {
            prop_assert_eq!(argmax(&q), argmax(&adv));
        }
    }

    #[test]
    fn aggregate_mean_is_value(v in -100.0..100.0f64, adv in prop::array::uniform3(-100.0..100.0f64)) {
        let q = duelling_aggregate(v, &adv);
        let mean = q.iter().sum::<f64>() / 3.0;
        prop_assert!((mean - v).abs() < 1e-9);
    }
}
