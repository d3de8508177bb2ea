//! Adaptive quadrature and a convergence/divergence classifier for improper
//! integrals on `[a, +∞)`.
//!
//! Finite intervals use a 15-point Gauss–Kronrod rule with error-driven
//! bisection; the Kronrod nodes are interior, so integrable endpoint
//! singularities of type `t^{-α}`, `α < 1`, are handled without special
//! casing.
//!
//! The improper classifier integrates up to geometrically doubled cutoffs
//! `R_j = R₀·2^j` and decides from the increments `Δ_j = I_{j+1} - I_j`:
//!
//! * increments decaying geometrically (every ratio in the window at most
//!   [`RATIO_CONV_MAX`]), with the bracketed geometric-tail extrapolation
//!   below tolerance → `Convergent`, the value including the extrapolated
//!   tail. The integrands of interest are regularly varying; doubling
//!   cutoffs turn a `t^{-β}` tail into exactly geometric increments with
//!   ratio `2^{1-β}`, so the threshold 0.8 certifies every `β ≥ 3/2`
//!   (ratios ≤ 2^{-1/2}) while keeping the harmonic family (ratio 1) and
//!   anything slower firmly out;
//! * partial value past the divergence threshold, or increments
//!   non-decreasing over the window while still growing → `Divergent`;
//! * anything else after the cutoff budget → `Inconclusive`, with the full
//!   partial-value/ratio trace attached.
//!
//! Deciding convergence of improper integrals numerically is undecidable in
//! general; the explicit three-way verdict is the honest contract, and
//! callers must surface `Inconclusive` rather than guess.

use serde::Serialize;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and schedule for quadrature and classification.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// First cutoff of the geometric schedule `R_j = r0 · 2^j`.
    pub r0: f64,
    /// Last schedule index.
    pub j_max: u32,
    /// Partial values at or above this are declared divergent.
    pub divergence_threshold: f64,
    /// Number of consecutive doublings the increment tests must hold for.
    pub decay_window: usize,
    /// Bisection budget per finite integral.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            r0: 8.0,
            j_max: 40,
            divergence_threshold: 1e12,
            decay_window: 4,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.r0 > 0.0
            && self.divergence_threshold > 0.0
            && self.decay_window >= 1
            && self.j_max as usize >= self.decay_window + 2
            && self.max_subdivisions >= 4;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "invalid quadrature config: {self:?}"
            )))
        }
    }
}

/// Largest window increment ratio still treated as geometric decay. The
/// `t^{-3/2}` family (the slowest tail any criterion here produces) has
/// ratio `2^{-1/2} ≈ 0.707`; `t^{-1}` has ratio 1.
const RATIO_CONV_MAX: f64 = 0.8;

/// Fraction of the extrapolated tail charged to the error estimate even
/// when the observed ratios are perfectly stable; the geometric model of
/// the tail is trusted only to this level.
const TAIL_TRUST: f64 = 1e-3;

/// Tolerance for "non-decreasing" increments in the divergence test.
const NONDECAY_EPS: f64 = 1e-6;

/// Outcome of an improper-integral test.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum IntegralVerdict {
    Convergent {
        value: f64,
        error_estimate: f64,
    },
    Divergent {
        witness_cutoff: f64,
        partial_value: f64,
    },
    Inconclusive {
        diagnostics: ClassifierTrace,
    },
}

impl IntegralVerdict {
    pub fn is_convergent(&self) -> bool {
        matches!(self, IntegralVerdict::Convergent { .. })
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, IntegralVerdict::Divergent { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, IntegralVerdict::Inconclusive { .. })
    }

    /// Finite value when convergent.
    pub fn value(&self) -> Option<f64> {
        match self {
            IntegralVerdict::Convergent { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn error_estimate(&self) -> Option<f64> {
        match self {
            IntegralVerdict::Convergent { error_estimate, .. } => Some(*error_estimate),
            _ => None,
        }
    }
}

/// Cutoff-by-cutoff record of a classification run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ClassifierTrace {
    pub cutoffs: Vec<f64>,
    /// Partial values `I_j = ∫_a^{R_j} f`.
    pub partials: Vec<f64>,
    /// Per-doubling increments `Δ_j`.
    pub increments: Vec<f64>,
    /// Ratios `Δ_{j+1} / Δ_j`.
    pub increment_ratios: Vec<f64>,
    /// Accumulated finite-quadrature error over all segments.
    pub quad_error: f64,
    pub note: String,
}

// ---------------------------------------------------------------------------
// 15-point Gauss–Kronrod kernel
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod pass over `[a, b]`: returns the K15 estimate and a
/// rescaled error bound following the usual QUADPACK recipe.
fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { at: x, value: v })
        }
    };

    let f_center = eval(center)?;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = f_center * WG[3];
    let mut res_abs = res_kronrod.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = f_center;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            // odd Kronrod indices are the embedded 7-point Gauss nodes
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let result = res_kronrod * half;
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    res_abs *= half.abs();
    res_asc *= half.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

// ---------------------------------------------------------------------------
// Adaptive finite-interval integration
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq)]
struct Piece {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl Eq for Piece {}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// `∫_a^b f` with error-driven bisection. Returns `(value, error_estimate)`;
/// fails with [`Error::AccuracyBudget`] when the subdivision budget runs out
/// before the tolerance is met, carrying the best estimate in the error.
pub fn integrate_finite<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Precondition(format!(
            "integration bounds must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }

    let (val, err) = gk15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { err, a, b, val });
    let mut total_val = val;
    let mut total_err = err;
    // pieces too narrow to bisect in f64: their value and (irreducible)
    // error are banked here and withheld from the heap
    let mut done_val = 0.0;
    let mut done_err = 0.0;

    let tolerance = |v: f64| cfg.abs_tol.max(cfg.rel_tol * v.abs());

    let mut splits = 0;
    while total_err > tolerance(total_val) {
        if splits >= cfg.max_subdivisions {
            return Err(Error::AccuracyBudget {
                estimate: total_val,
                error_estimate: total_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            done_val += worst.val;
            done_err += worst.err;
            total_err = (total_err - worst.err).max(0.0);
            splits += 1;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid)?;
        let (v2, e2) = gk15(&f, mid, worst.b)?;
        total_val += v1 + v2 - worst.val;
        total_err += e1 + e2 - worst.err;
        heap.push(Piece {
            err: e1,
            a: worst.a,
            b: mid,
            val: v1,
        });
        heap.push(Piece {
            err: e2,
            a: mid,
            b: worst.b,
            val: v2,
        });
        splits += 1;
    }

    // re-sum from pieces once to shed accumulated increment rounding
    let val: f64 = done_val + heap.iter().map(|p| p.val).sum::<f64>();
    let err: f64 = done_err + heap.iter().map(|p| p.err).sum::<f64>();
    Ok((val, err))
}

// ---------------------------------------------------------------------------
// Improper-integral classification
// ---------------------------------------------------------------------------

/// Classify `∫_a^∞ f` for nonnegative `f` on the geometric cutoff schedule
/// from the config. See the module docs for the decision rule.
pub fn classify_improper<F>(f: F, a: f64, cfg: &QuadratureConfig) -> Result<IntegralVerdict>
where
    F: Fn(f64) -> Result<f64>,
{
    classify_improper_traced(&f, a, cfg).map(|(v, _)| v)
}

/// As [`classify_improper`], additionally returning the cutoff trace.
pub fn classify_improper_traced<F>(
    f: &F,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<(IntegralVerdict, ClassifierTrace)>
where
    F: Fn(f64) -> Result<f64>,
{
    cfg.validate()?;
    if !(a >= 0.0) {
        return Err(Error::Precondition(format!(
            "classifier lower limit must be nonnegative, got {a}"
        )));
    }
    let r0 = if cfg.r0 > a { cfg.r0 } else { 2.0 * a };
    let cutoffs: Vec<f64> = (0..=cfg.j_max)
        .map(|j| r0 * (2.0f64).powi(j as i32))
        .collect();
    classify_on_cutoffs(f, a, &cutoffs, cfg.decay_window, cfg)
}

/// Classification engine over an explicit increasing cutoff schedule with an
/// explicit decay window. [`classify_improper`] uses the geometric schedule;
/// bounded-domain callers supply schedules fitted to their data.
pub fn classify_on_cutoffs<F>(
    f: &F,
    a: f64,
    cutoffs: &[f64],
    window: usize,
    cfg: &QuadratureConfig,
) -> Result<(IntegralVerdict, ClassifierTrace)>
where
    F: Fn(f64) -> Result<f64>,
{
    if cutoffs.is_empty() || cutoffs[0] <= a {
        return Err(Error::Precondition(
            "cutoff schedule must be nonempty and start above the lower limit".into(),
        ));
    }
    let window = window.max(1);

    // nonnegativity guard demanded by the classifier contract
    let g = |t: f64| -> Result<f64> {
        let v = f(t)?;
        if v < 0.0 {
            Err(Error::NegativeIntegrand { at: t, value: v })
        } else {
            Ok(v)
        }
    };

    // segment tolerances tightened so that accumulated quadrature error
    // stays a fraction of the verdict tolerance
    let seg_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol / (4.0 * (cutoffs.len() as f64)),
        rel_tol: cfg.rel_tol / 4.0,
        ..cfg.clone()
    };

    let mut trace = ClassifierTrace::default();
    let mut total = 0.0;
    let mut prev_cut = a;

    for (n, &r) in cutoffs.iter().enumerate() {
        let (v, e) = integrate_finite(&g, prev_cut, r, &seg_cfg)?;
        total += v;
        trace.quad_error += e;
        trace.cutoffs.push(r);
        trace.partials.push(total);
        if n >= 1 {
            trace.increments.push(v);
        }
        if trace.increments.len() >= 2 {
            let k = trace.increments.len();
            let (prev, cur) = (trace.increments[k - 2], trace.increments[k - 1]);
            let ratio = if prev > 0.0 {
                cur / prev
            } else if cur == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            trace.increment_ratios.push(ratio);
        }
        prev_cut = r;

        // divergence by magnitude
        if total >= cfg.divergence_threshold {
            trace.note = "partial value reached the divergence threshold".into();
            return Ok((
                IntegralVerdict::Divergent {
                    witness_cutoff: r,
                    partial_value: total,
                },
                trace,
            ));
        }

        let nr = trace.increment_ratios.len();
        if nr >= window {
            let tail_ratios = &trace.increment_ratios[nr - window..];
            let tail_incs = &trace.increments[trace.increments.len() - window..];

            // divergence by non-decaying increments that still move the total
            let nondecreasing = tail_ratios.iter().all(|&r| r >= 1.0 - NONDECAY_EPS);
            let still_growing = tail_incs.iter().all(|&d| d > cfg.abs_tol);
            if nondecreasing && still_growing {
                trace.note = "increments non-decaying over the window".into();
                return Ok((
                    IntegralVerdict::Divergent {
                        witness_cutoff: r,
                        partial_value: total,
                    },
                    trace,
                ));
            }

            // convergence by geometric decay, with the remaining tail
            // bracketed between the slowest and fastest ratio in the window
            let decaying = tail_ratios.iter().all(|&r| r <= RATIO_CONV_MAX);
            if decaying {
                let rho_hi = tail_ratios.iter().cloned().fold(0.0f64, f64::max);
                let rho_lo = tail_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                let last = *trace.increments.last().unwrap();
                let geo = |rho: f64| last * rho / (1.0 - rho);
                let (tail_lo, tail_hi) = (geo(rho_lo), geo(rho_hi));
                let tail = 0.5 * (tail_lo + tail_hi);
                let value = total + tail;
                let err =
                    0.5 * (tail_hi - tail_lo) + TAIL_TRUST * tail_hi + trace.quad_error;
                if err <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
                    trace.note = "increments geometrically decaying; tail extrapolated".into();
                    return Ok((
                        IntegralVerdict::Convergent {
                            value,
                            error_estimate: err,
                        },
                        trace,
                    ));
                }
            }
        }
    }

    trace.note = "cutoff budget exhausted without a verdict".into();
    let diagnostics = trace.clone();
    Ok((IntegralVerdict::Inconclusive { diagnostics }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn finite_integrals_known_values() {
        let (v, e) = integrate_finite(|t| Ok(t), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 0.5).abs() <= 1e-12 && e < 1e-10);

        let (v, _) = integrate_finite(|t| Ok(t.sin()), 0.0, std::f64::consts::PI, &cfg()).unwrap();
        assert!((v - 2.0).abs() < 1e-10);

        // integrable endpoint singularity
        let (v, _) = integrate_finite(|t| Ok(t.powf(-0.5)), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 2.0).abs() < 4e-8, "got {v}");
    }

    #[test]
    fn finite_integration_rejects_non_finite_values() {
        let err = integrate_finite(|t| Ok(1.0 / (t - 0.5)), 0.0, 1.0, &cfg());
        // not non-finite (the pole is never hit exactly) but budget-limited
        assert!(err.is_err());

        let err = integrate_finite(|_| Ok(f64::NAN), 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn classifier_canonical_examples() {
        // ∫_1^∞ t^{-2} = 1
        let v = classify_improper(|t| Ok(t.powi(-2)), 1.0, &cfg()).unwrap();
        match v {
            IntegralVerdict::Convergent {
                value,
                error_estimate,
            } => {
                assert!((value - 1.0).abs() < 1e-8, "value {value}");
                assert!(error_estimate <= 1e-8_f64.max(1e-10));
            }
            other => panic!("expected convergent, got {other:?}"),
        }

        // harmonic divergence: increments ≈ ln 2 per doubling
        let v = classify_improper(|t| Ok(1.0 / t), 1.0, &cfg()).unwrap();
        assert!(v.is_divergent(), "{v:?}");

        // ∫_0^∞ e^{-t} = 1
        let v = classify_improper(|t| Ok((-t).exp()), 0.0, &cfg()).unwrap();
        match v {
            IntegralVerdict::Convergent { value, .. } => assert!((value - 1.0).abs() < 1e-8),
            other => panic!("expected convergent, got {other:?}"),
        }
    }

    #[test]
    fn no_false_convergence_on_scaled_divergers() {
        for lambda in [1e-6, 1.0, 1e6] {
            let v = classify_improper(|t| Ok(lambda / t), 1.0, &cfg()).unwrap();
            assert!(
                !v.is_convergent(),
                "λ = {lambda} must not classify convergent: {v:?}"
            );
        }
    }

    #[test]
    fn partials_are_monotone_for_nonnegative_integrands() {
        let (_, trace) = classify_improper_traced(&|t: f64| Ok(t.powf(-1.5)), 1.0, &cfg()).unwrap();
        for w in trace.partials.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn negative_integrand_is_a_precondition_violation() {
        let err = classify_improper(|t| Ok(1.0 - t), 0.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NegativeIntegrand { .. }));
    }

    #[test]
    fn verdict_stability_on_power_family() {
        let verdict_kind = |cfg: &QuadratureConfig, beta: f64| -> u8 {
            match classify_improper(move |t: f64| Ok(t.powf(-beta)), 1.0, cfg).unwrap() {
                IntegralVerdict::Convergent { .. } => 0,
                IntegralVerdict::Divergent { .. } => 1,
                IntegralVerdict::Inconclusive { .. } => 2,
            }
        };
        let base = cfg();
        let mut harder = cfg();
        harder.divergence_threshold *= 2.0;
        harder.abs_tol /= 2.0;
        harder.rel_tol /= 2.0;
        for beta in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let (a, b) = (verdict_kind(&base, beta), verdict_kind(&harder, beta));
            // hardening may move Inconclusive endpoints only
            if a != 2 && b != 2 {
                assert_eq!(a, b, "verdict flipped for β = {beta}");
            }
        }
        // and the determinate members of the family stay determinate
        assert_eq!(verdict_kind(&base, 0.5), 1);
        assert_eq!(verdict_kind(&base, 1.0), 1);
        assert_eq!(verdict_kind(&base, 1.5), 0);
        assert_eq!(verdict_kind(&base, 2.0), 0);
        assert_eq!(verdict_kind(&base, 3.0), 0);
    }

    #[test]
    fn slow_geometric_tails_extrapolate_to_the_right_value() {
        // ∫_1^∞ t^{-3/2} = 2: increments have ratio 2^{-1/2}, the slowest
        // family the criteria produce
        let v = classify_improper(|t: f64| Ok(t.powf(-1.5)), 1.0, &cfg()).unwrap();
        match v {
            IntegralVerdict::Convergent {
                value,
                error_estimate,
            } => {
                assert!((value - 2.0).abs() <= error_estimate.max(2e-8), "value {value}");
                assert!(error_estimate <= 2e-8_f64.max(1e-10), "err {error_estimate}");
            }
            other => panic!("expected convergent, got {other:?}"),
        }
    }

    #[test]
    fn divergence_threshold_fires_on_fast_growth() {
        let (v, trace) = classify_improper_traced(&|t: f64| Ok(t.exp()), 0.0, &cfg()).unwrap();
        match v {
            IntegralVerdict::Divergent {
                witness_cutoff,
                partial_value,
            } => {
                assert!(partial_value >= 1e12);
                assert!(witness_cutoff <= 64.0, "should fire early");
            }
            other => panic!("expected divergent: {other:?}"),
        }
        assert!(!trace.partials.is_empty());
    }
}
