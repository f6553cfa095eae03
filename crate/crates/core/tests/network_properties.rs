mod common;

use common::*;
use proptest::prelude::*;
use purcell_core::tline::{abcd_line, LineSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_netlists_are_reciprocal_and_passive(seed in any::<u64>(), f in 1e8..1e10f64) {
        let n = random_netlist(&mut ChaCha8Rng::seed_from_u64(seed));
        if let Some(c) = check_network(&n, f) {
            prop_assert!(c.reciprocity_z < 1e-9, "Z asymmetry {}", c.reciprocity_z);
            prop_assert!(c.reciprocity_s < 1e-9, "S asymmetry {}", c.reciprocity_s);
            prop_assert!(c.min_re_y >= -1e-12, "Re Y = {}", c.min_re_y);
        }
    }

    #[test]
    fn transfer_impedance_matches_inverse(seed in any::<u64>(), f in 1e8..1e10f64) {
        let n = random_netlist(&mut ChaCha8Rng::seed_from_u64(seed));
        if let Some(err) = transfer_vs_inverse(&n, f) {
            prop_assert!(err < 1e-10, "relative difference {err}");
        }
    }

    #[test]
    fn line_abcd_is_unimodular(z0 in 1.0..200.0f64, len in 1e-4..0.1f64, f in 1e6..2e10f64) {
        let m = abcd_line(&LineSpec::new(z0, 1.2e8, len).unwrap(), f);
        prop_assert!((m.determinant() - 1.0).norm() < 1e-12);
    }
}

#[test]
fn stamped_line_is_the_ladder_limit() {
    let line = LineSpec::new(50.0, 1.2e8, 0.01).unwrap();
    // βl = 1.2 rad, below a quarter wave
    let f = 1.2 * line.v_phase / (2.0 * std::f64::consts::PI * line.length);
    let coarse = ladder_vs_exact(&line, f, 30.0, 16);
    let fine = ladder_vs_exact(&line, f, 30.0, 128);
    assert!(fine < 1e-3, "{fine}");
    assert!(fine < coarse / 10.0, "ladder does not converge: {coarse} -> {fine}");
    assert!(ladder_abcd_vs_exact(&line, f, 30.0, 4096) < 1e-3);
}
