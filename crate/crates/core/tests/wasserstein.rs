mod common {
    pub mod w1_oracle;
}

use common::w1_oracle::w1_by_quadrature;
use fracheat::montecarlo::wasserstein1_to_std_normal;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn matches_quadrature_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for set in 0..40 {
        let n = 1 + (set * 7) % 60;
        let shift: f64 = rng.gen_range(-2.0..2.0);
        let scale: f64 = rng.gen_range(0.2..3.0);
        let xs: Vec<f64> = (0..n)
            .map(|_| shift + scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let exact = wasserstein1_to_std_normal(&xs).unwrap();
        let quad = w1_by_quadrature(&xs);
        assert!((exact - quad).abs() < 1e-8, "set {set}: {exact} vs {quad}");
    }
}

#[test]
fn ties_and_far_tails() {
    let xs = [0.5, 0.5, 0.5, -7.0, 9.0, 9.0];
    let exact = wasserstein1_to_std_normal(&xs).unwrap();
    assert!((exact - w1_by_quadrature(&xs)).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn nonnegative_and_translation_bounded(xs in prop::collection::vec(-5.0f64..5.0, 1..30), c in -3.0f64..3.0) {
        let w = wasserstein1_to_std_normal(&xs).unwrap();
        prop_assert!(w >= 0.0);
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let ws = wasserstein1_to_std_normal(&shifted).unwrap();
        prop_assert!((ws - w).abs() <= c.abs() + 1e-12);
    }
}
