//! Independent-oracle validation of the classification values.
//!
//! The production path evaluates the completeness integrand through cached
//! adaptive quadrature plus a log-space Laplace expansion. The oracle here
//! is deliberately different machinery: composite Simpson accumulation of
//! `N(t) = ∫₀^t σ` in log space on a uniform grid, Simpson for `∫ g`, and a
//! hand-expanded analytic tail. Values frozen below were produced by this
//! oracle at two resolutions agreeing to well under 1e-6.

use warpclass_core::criteria::{exit_time_ball, global_exit_time, tonelli_check};
use warpclass_core::diffusion::{explosion_probe, SimulationConfig};
use warpclass_core::quad::QuadratureConfig;
use warpclass_core::warp::{Deriv, ModelManifold, WarpingFunction};

fn spliced() -> ModelManifold {
    ModelManifold::new(
        2,
        WarpingFunction::spliced_exp_power(1.0, 3.0, 1.0).unwrap(),
    )
    .unwrap()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Simpson-in-log-space oracle for `v_o(r) = ∫₀^r (∫₀^t σ)/σ dt` on the
/// spliced(1,3,1) warp, on a uniform grid with `n_per_unit` cells per unit.
///
/// Returns `(g_at_grid, v_o cumulative at grid)` up to `t_end`.
fn simpson_oracle(w: &WarpingFunction, t_end: f64, n_per_unit: usize) -> (Vec<f64>, Vec<f64>) {
    let n = (t_end * n_per_unit as f64).round() as usize;
    let h = t_end / n as f64;
    let log_sigma = |t: f64| -> f64 {
        if t == 0.0 {
            f64::NEG_INFINITY
        } else {
            w.log_value(t).unwrap()
        }
    };
    // cumulative log N via composite Simpson per cell
    let mut log_n = vec![f64::NEG_INFINITY; n + 1];
    for i in 0..n {
        let (t0, t1) = (i as f64 * h, (i + 1) as f64 * h);
        let tm = 0.5 * (t0 + t1);
        let piece = log_add_exp(
            log_add_exp(log_sigma(t0), (4.0f64).ln() + log_sigma(tm)),
            log_sigma(t1),
        ) + (h / 6.0).ln();
        log_n[i + 1] = log_add_exp(log_n[i], piece);
    }
    let g: Vec<f64> = (0..=n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                (log_n[i] - log_sigma(i as f64 * h)).exp()
            }
        })
        .collect();
    // cumulative ∫ g by Simpson over pairs of cells (n is kept even)
    assert!(n % 2 == 0);
    let mut v = vec![0.0; n / 2 + 1];
    for k in 0..n / 2 {
        let i = 2 * k;
        v[k + 1] = v[k] + h / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);
    }
    (g, v)
}

/// Analytic tail `∫_T^∞ g` for `ln σ = t³ - 1`:
/// `g = 1/(3t²) + 2/(9t⁵) + 10/(27t⁸) + O(t^{-11})`.
fn spliced_tail(t: f64) -> f64 {
    1.0 / (3.0 * t) + 1.0 / (18.0 * t.powi(4)) + 10.0 / (189.0 * t.powi(7))
}

#[test]
fn oracle_pins_global_exit_time_values() {
    let mm = spliced();
    let w = mm.warp();
    let t_end = 20.0;

    // the integrand's boundary layer at t has width 1/ψ'(t) = 1/(3t²), so
    // the uniform grid must resolve 1/1200 at t_end = 20
    let oracle_f0 = |n_per_unit: usize| -> f64 {
        let (_, v) = simpson_oracle(w, t_end, n_per_unit);
        v.last().unwrap() + spliced_tail(t_end)
    };
    let coarse = oracle_f0(2048);
    let fine = oracle_f0(4096);
    assert!(
        (coarse - fine).abs() <= 1e-6 * fine,
        "oracle not converged: {coarse} vs {fine}"
    );

    // frozen from the oracle
    let frozen_f0 = 0.669745443;
    assert!(
        (fine - frozen_f0).abs() <= 2e-6,
        "oracle {fine} vs frozen {frozen_f0}"
    );

    let cfg = QuadratureConfig::default();
    let impl_f0 = global_exit_time(&mm, 0.0, &cfg).unwrap().value().unwrap();
    assert!(
        (impl_f0 - fine).abs() <= 2e-6,
        "implementation {impl_f0} vs oracle {fine}"
    );
}

#[test]
fn oracle_pins_exit_time_profile() {
    let mm = spliced();
    let w = mm.warp();
    let cfg = QuadratureConfig::default();
    let n_per_unit = 4096;
    let (_, v) = simpson_oracle(w, 16.0, n_per_unit);
    // v is indexed by double-cells: v[k] = v_o(2k·h) with h = 1/n_per_unit
    let v_at = |t: f64| -> f64 {
        let idx = (t * n_per_unit as f64 / 2.0).round() as usize;
        v[idx]
    };
    for (r, big_r) in [(1.0, 2.0), (1.0, 4.0), (1.0, 8.0), (1.0, 16.0), (0.0, 8.0)] {
        let want = v_at(big_r) - v_at(r);
        let got = exit_time_ball(&mm, r, big_r, &cfg).unwrap();
        assert!(
            (got - want).abs() <= 2e-6 * want.max(1.0),
            "F_{big_r}({r}): impl {got} vs oracle {want}"
        );
    }
    // frozen stabilization values (oracle-produced)
    let f8 = exit_time_ball(&mm, 1.0, 8.0, &cfg).unwrap();
    let f16 = exit_time_ball(&mm, 1.0, 16.0, &cfg).unwrap();
    assert!((f8 - 0.366838409).abs() <= 2e-6);
    assert!((f16 - 0.387684483).abs() <= 2e-6);
}

#[test]
fn completeness_value_matches_oracle_at_two_resolutions() {
    // the spliced m=2 completeness integral equals the Green mass up to
    // the unit factor c₂·ω₁; its value is pinned by the oracle above
    let mm = spliced();
    let cfg = QuadratureConfig::default();
    let sc = warpclass_core::criteria::classify_stochastic(&mm, &cfg)
        .unwrap()
        .value()
        .unwrap();
    let l1 = warpclass_core::criteria::classify_l1(&mm, &cfg)
        .unwrap()
        .value()
        .unwrap();
    assert!((sc - l1).abs() <= 1e-12 * sc);
    assert!((sc - 0.669745443).abs() <= 2e-6, "SC mass {sc}");
    // and the double-integral route agrees (independent quadrature route)
    assert!(tonelli_check(&mm, &cfg).unwrap() <= 1e-6);
}

#[test]
fn hyperbolic_ballistic_escape_is_intermediate_at_matched_horizon() {
    // drift → 1 gives ballistic escape at speed ≈ 1: reaching cap = 50
    // from r0 = 1 takes ≈ 49 ± √98 time, so a horizon of 45 leaves the
    // hitting fraction strictly between 0 and 1/2 and the mean hitting
    // time among reachers on the cap/2 scale.
    let mm = ModelManifold::new(2, WarpingFunction::hyperbolic(1.0).unwrap()).unwrap();
    let cfg = SimulationConfig {
        n_paths: 1000,
        step_size: 5e-4,
        master_seed: 2024,
        cap_radius: 50.0,
        horizon: 45.0,
        ..SimulationConfig::default()
    };
    let probe = explosion_probe(&mm, 1.0, &cfg).unwrap();
    assert!(
        probe.fraction > 0.0 && probe.fraction < 0.5,
        "fraction {}",
        probe.fraction
    );
    assert!(
        probe.mean_hit_time.unwrap() >= 25.0,
        "mean hit {}",
        probe.mean_hit_time.unwrap()
    );
}

#[test]
fn oracle_grid_for_sigma_evaluations() {
    // spot values of the spliced warp derived by hand from the
    // construction: identity below t0/2, C e^{a t^p} with C = t0 e^{-a t0^p}
    // beyond t0
    let w = WarpingFunction::spliced_exp_power(1.0, 3.0, 1.0).unwrap();
    assert_eq!(w.eval(0.4, Deriv::Value).unwrap(), 0.4);
    let s2 = w.eval(2.0, Deriv::Value).unwrap();
    assert!(((s2 - 7f64.exp()) / s2).abs() < 1e-14);
    let s3 = w.eval(3.0, Deriv::Value).unwrap();
    assert!(((s3 - 26f64.exp()) / s3).abs() < 1e-13);
}
