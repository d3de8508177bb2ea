//! Property-based invariants across the numeric modules.

use proptest::prelude::*;

use warpclass_core::criteria::{exit_time_ball, green_kernel, ExitProfile};
use warpclass_core::minimal::dimension_monotonicity_check;
use warpclass_core::quad::{integrate_finite, QuadratureConfig};
use warpclass_core::warp::{ModelManifold, WarpingFunction};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn spliced() -> ModelManifold {
    ModelManifold::new(
        2,
        WarpingFunction::spliced_exp_power(1.0, 3.0, 1.0).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_additivity(a in 0.0f64..4.0, width in 0.5f64..6.0, frac in 0.05f64..0.95) {
        let b = a + width;
        let c = a + frac * width;
        let f = |t: f64| Ok(t.sin() + 1.0 / (1.0 + t * t) + 0.2 * t);
        let (left, el) = integrate_finite(f, a, c, &cfg()).unwrap();
        let (right, er) = integrate_finite(f, c, b, &cfg()).unwrap();
        let (whole, ew) = integrate_finite(f, a, b, &cfg()).unwrap();
        let slack = 2.0 * (el + er + ew) + 1e-13 * whole.abs();
        prop_assert!(
            (left + right - whole).abs() <= slack,
            "split {} + {} != {}", left, right, whole
        );
    }

    #[test]
    fn ball_volume_monotone(r1 in 0.0f64..6.0, dr in 0.0f64..4.0) {
        let mm = ModelManifold::new(2, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
        let v1 = mm.ball_volume(r1).unwrap();
        let v2 = mm.ball_volume(r1 + dr).unwrap();
        prop_assert!(v2 >= v1 - 1e-9 * v1.abs());
    }

    #[test]
    fn exit_time_closed_form_euclidean(m in 2usize..=6, r_frac in 0.0f64..1.0, big_r in 0.1f64..10.0) {
        let r = r_frac * big_r;
        let mm = ModelManifold::new(m, WarpingFunction::euclidean()).unwrap();
        let got = exit_time_ball(&mm, r, big_r, &cfg()).unwrap();
        let want = (big_r * big_r - r * r) / (2.0 * m as f64);
        prop_assert!((got - want).abs() < 1e-10, "m={}, got {}, want {}", m, got, want);
    }

    #[test]
    fn exit_profile_monotone_in_r_and_big_r(r1 in 0.0f64..3.0, dr in 0.0f64..1.0, big in 4.0f64..10.0, dbig in 0.0f64..6.0) {
        let exit = ExitProfile::new(&spliced(), &cfg());
        let f_a = exit.f_r(r1, big).unwrap();
        let f_b = exit.f_r(r1 + dr, big).unwrap();
        prop_assert!(f_b <= f_a + 1e-10, "nonincreasing in r: {} vs {}", f_a, f_b);
        let f_c = exit.f_r(r1, big + dbig).unwrap();
        prop_assert!(f_c >= f_a - 1e-10, "nondecreasing in R: {} vs {}", f_a, f_c);
    }

    #[test]
    fn green_kernel_nonincreasing(r1 in 0.2f64..4.0, dr in 0.0f64..4.0) {
        let mm = ModelManifold::new(3, WarpingFunction::euclidean()).unwrap();
        let g1 = green_kernel(&mm, r1, &cfg()).unwrap().value().unwrap();
        let g2 = green_kernel(&mm, r1 + dr, &cfg()).unwrap().value().unwrap();
        prop_assert!(g2 <= g1 + 1e-12);
    }
}

#[test]
fn exit_profile_vanishes_on_the_boundary() {
    let exit = ExitProfile::new(&spliced(), &cfg());
    for big_r in [1.0, 2.5, 7.0] {
        assert_eq!(exit.f_r(big_r, big_r).unwrap(), 0.0);
    }
}

#[test]
fn dimension_monotonicity_grid_over_families() {
    // every nondecreasing built-in family, all 2 <= m <= n <= 6
    let families = [
        WarpingFunction::euclidean(),
        WarpingFunction::hyperbolic(1.0).unwrap(),
        WarpingFunction::spliced_exp_power(1.0, 3.0, 1.0).unwrap(),
    ];
    for w in &families {
        for m in 2..=6usize {
            for n in m..=6usize {
                let d = dimension_monotonicity_check(w, m, n, 0.0, 2.0, &cfg()).unwrap();
                assert!(
                    d.holds,
                    "{}: F^{m} < F^{n}: {} vs {}",
                    w.describe(),
                    d.value_low_dim,
                    d.value_high_dim
                );
                if m == n {
                    assert!(d.difference.abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn classification_identity_on_builtin_grid() {
    // the completeness and L1 verdicts coincide on every built-in instance
    use warpclass_core::criteria::{classification_report, TriState};
    let grid: Vec<ModelManifold> = vec![
        ModelManifold::new(2, WarpingFunction::euclidean()).unwrap(),
        ModelManifold::new(3, WarpingFunction::euclidean()).unwrap(),
        ModelManifold::new(2, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap(),
        ModelManifold::new(3, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap(),
        ModelManifold::new(2, WarpingFunction::spliced_exp_power(1.0, 3.0, 1.0).unwrap()).unwrap(),
        ModelManifold::new(3, WarpingFunction::spliced_exp_power(1.0, 2.5, 1.0).unwrap()).unwrap(),
    ];
    for mm in &grid {
        let rep = classification_report(mm, &cfg()).unwrap();
        assert_eq!(
            rep.stochastically_complete, rep.l1_liouville,
            "model identity broken for {}",
            rep.provenance.model
        );
        if rep.parabolic == TriState::Yes {
            assert_eq!(rep.l1_liouville, TriState::Yes);
        }
        if rep.volume_growth_sufficient == TriState::Yes {
            assert_ne!(rep.stochastically_complete, TriState::No);
        }
    }
}
