//! Classification integrals and exit-time formulas on model manifolds.
//!
//! On a model `M^m_σ` everything reduces to three radial integrands built
//! from `σ`:
//!
//! * the Green integrand `σ^{1-m}(t)` — finiteness of `∫^∞ σ^{1-m}` decides
//!   parabolicity, and the kernel itself is `G(r) = c_m ∫_r^∞ σ^{1-m}` with
//!   `c_m = 1/ω_{m-1}` (normalized so the Euclidean 3-d kernel at `r = 1`
//!   is `1/4π`);
//! * the completeness integrand `g(t) = (∫₀^t σ^{m-1}) / σ^{m-1}(t)` —
//!   `∫^∞ g = ∞` iff the model is stochastically complete, and the same
//!   integral (after swapping the order of integration in the Green mass)
//!   decides the L¹-Liouville property, which is why the two coincide on
//!   models;
//! * the volume integrand `r / log vol(B_r)` — divergence is a sufficient
//!   condition for stochastic completeness.
//!
//! Mean exit times are integrals of `g`: `F_R(r) = ∫_r^R g`, with
//! `F = lim_R F_R` finite exactly when the model fails to be L¹-Liouville.
//!
//! Super-exponential warps push `σ^{m-1}` past `f64` range long before the
//! classifier's cutoffs; once `log σ^{m-1} > 600` the integrands switch to
//! log-space Laplace expansions built from `(ln σ)'`, `(ln σ)''` and
//! `(ln σ)'''`. The switch threshold and the expansions are validated
//! against the direct quadrature route in the tests.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{
    self, classify_improper_traced, integrate_finite, ClassifierTrace, IntegralVerdict,
    QuadratureConfig,
};
use crate::warp::{sphere_area, Deriv, ModelManifold};

/// Above this value of `log σ^{m-1}(t)` all integrands are evaluated via
/// log-space expansions instead of direct quadrature.
const LOG_DIRECT_MAX: f64 = 600.0;

/// Tri-state classification outcome; `Unknown` is the honest verdict when
/// the underlying improper integral classified as inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

impl TriState {
    pub fn is_known(self) -> bool {
        self != TriState::Unknown
    }
}

// ---------------------------------------------------------------------------
// Radial profile: the shared integrand machinery
// ---------------------------------------------------------------------------

/// Evaluation bundle for the radial integrands of one model, with a
/// checkpoint cache for the cumulative integral `N(t) = ∫₀^t σ^{m-1}`.
///
/// Purely functional from the outside; the cache only memoizes quadrature.
pub(crate) struct RadialProfile {
    mm: ModelManifold,
    n_cfg: QuadratureConfig,
    n_cache: RefCell<Vec<(f64, f64)>>,
}

impl RadialProfile {
    pub(crate) fn new(mm: &ModelManifold) -> Self {
        RadialProfile {
            mm: mm.clone(),
            n_cfg: QuadratureConfig {
                abs_tol: 1e-300,
                rel_tol: 1e-11,
                ..QuadratureConfig::default()
            },
            n_cache: RefCell::new(vec![(0.0, 0.0)]),
        }
    }

    fn m1(&self) -> f64 {
        (self.mm.dim() - 1) as f64
    }

    /// `ψ(t) = log σ^{m-1}(t)`.
    pub(crate) fn psi(&self, t: f64) -> Result<f64> {
        Ok(self.m1() * self.mm.warp().log_value(t)?)
    }

    fn psi1(&self, t: f64) -> Result<f64> {
        Ok(self.m1() * self.mm.warp().log_deriv(t)?)
    }

    fn psi2(&self, t: f64) -> Result<f64> {
        Ok(self.m1() * self.mm.warp().log_curv(t)?)
    }

    fn psi3(&self, t: f64) -> Result<Option<f64>> {
        Ok(self.mm.warp().log_curv_deriv(t)?.map(|v| self.m1() * v))
    }

    /// `N(t) = ∫₀^t σ^{m-1}` by checkpointed quadrature. Only meaningful in
    /// the direct regime `ψ(t) <= LOG_DIRECT_MAX`.
    pub(crate) fn cum_sigma_pow(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let (t0, n0) = {
            let cache = self.n_cache.borrow();
            let i = cache.partition_point(|&(x, _)| x <= t);
            cache[i - 1]
        };
        if t0 == t {
            return Ok(n0);
        }
        let m1 = (self.mm.dim() - 1) as i32;
        let warp = self.mm.warp();
        let (dv, _) = integrate_finite(
            |s| Ok(warp.eval(s, Deriv::Value)?.powi(m1)),
            t0,
            t,
            &self.n_cfg,
        )?;
        let n = n0 + dv;
        let mut cache = self.n_cache.borrow_mut();
        let i = cache.partition_point(|&(x, _)| x <= t);
        let near = |x: f64| (x - t).abs() < 1e-6 * (1.0 + t.abs());
        if cache.len() < 50_000 && !near(cache[i - 1].0) && (i == cache.len() || !near(cache[i].0))
        {
            cache.insert(i, (t, n));
        }
        Ok(n)
    }

    /// `log N(t)`, valid in both regimes.
    pub(crate) fn log_cum_sigma_pow(&self, t: f64) -> Result<f64> {
        let psi = self.psi(t)?;
        if psi <= LOG_DIRECT_MAX {
            Ok(self.cum_sigma_pow(t)?.ln())
        } else {
            // N = g · σ^{m-1}
            Ok(psi + self.sc_series(t)?.ln())
        }
    }

    /// The stochastic-completeness integrand
    /// `g(t) = (∫₀^t σ^{m-1}) / σ^{m-1}(t)`.
    pub(crate) fn sc_integrand(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let psi = self.psi(t)?;
        if psi <= LOG_DIRECT_MAX {
            Ok(self.cum_sigma_pow(t)? * (-psi).exp())
        } else {
            self.sc_series(t)
        }
    }

    /// Laplace expansion of `g` for rapidly growing `σ^{m-1}`: integrating
    /// `∫₀^t e^ψ` by parts against `ψ'` gives
    /// `g ≈ 1/ψ' + ψ''/ψ'³ + (3ψ''² - ψ'''ψ')/ψ'⁵`.
    fn sc_series(&self, t: f64) -> Result<f64> {
        let p1 = self.psi1(t)?;
        let p2 = self.psi2(t)?;
        let mut g = 1.0 / p1 + p2 / (p1 * p1 * p1);
        if let Some(p3) = self.psi3(t)? {
            g += (3.0 * p2 * p2 - p3 * p1) / p1.powi(5);
        }
        Ok(g)
    }

    /// Laplace expansion of `q(r) = e^{ψ(r)} ∫_r^∞ e^{-ψ}` for rapidly
    /// growing `σ^{m-1}`: `q ≈ 1/ψ' - ψ''/ψ'³ + (3ψ''² - ψ'''ψ')/ψ'⁵`.
    fn green_tail_series(&self, t: f64) -> Result<f64> {
        let p1 = self.psi1(t)?;
        let p2 = self.psi2(t)?;
        let mut q = 1.0 / p1 - p2 / (p1 * p1 * p1);
        if let Some(p3) = self.psi3(t)? {
            q += (3.0 * p2 * p2 - p3 * p1) / p1.powi(5);
        }
        Ok(q)
    }

    /// `σ^{1-m}(t)`; underflows harmlessly to zero far out.
    pub(crate) fn green_integrand(&self, t: f64) -> Result<f64> {
        Ok((-self.psi(t)?).exp())
    }

    /// `log ∫_r^∞ σ^{1-m}` for models whose Green integral converges.
    ///
    /// In the direct regime the tail is classified in shifted form
    /// `e^{-ψ(r)} ∫_r^∞ e^{ψ(r)-ψ(t)} dt` so nothing underflows; past the
    /// switch the tail series is used directly.
    pub(crate) fn log_green_tail(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let psi_r = self.psi(r)?;
        if psi_r > LOG_DIRECT_MAX {
            return Ok(-psi_r + self.green_tail_series(r)?.ln());
        }
        let shifted = |t: f64| -> Result<f64> {
            let psi_t = self.psi(t)?;
            Ok((psi_r - psi_t).exp())
        };
        match quad::classify_improper(shifted, r, cfg)? {
            IntegralVerdict::Convergent { value, .. } => Ok(-psi_r + value.ln()),
            IntegralVerdict::Divergent { .. } => Err(Error::Precondition(format!(
                "Green kernel diverges at r = {r}; no finite tail"
            ))),
            IntegralVerdict::Inconclusive { .. } => Err(Error::Precondition(format!(
                "Green tail at r = {r} could not be classified"
            ))),
        }
    }
}

/// Map domain exhaustion (short tabulated warps, compact spherical models)
/// to an honest `Inconclusive` verdict instead of a hard error.
fn classify_or_inconclusive<F>(f: F, a: f64, cfg: &QuadratureConfig) -> Result<IntegralVerdict>
where
    F: Fn(f64) -> Result<f64>,
{
    match classify_improper_traced(&f, a, cfg) {
        Ok((v, _)) => Ok(v),
        Err(Error::OutOfDomain { t, domain_end }) => Ok(IntegralVerdict::Inconclusive {
            diagnostics: ClassifierTrace {
                note: format!(
                    "integrand domain ends at {domain_end}; classifier needed t = {t}"
                ),
                ..ClassifierTrace::default()
            },
        }),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// Individual criteria
// ---------------------------------------------------------------------------

/// The radial Green kernel `G(r) = c_m ∫_r^∞ σ^{1-m}(t) dt`, `c_m = 1/ω_{m-1}`.
///
/// `Divergent` means the model is parabolic and `G ≡ +∞`.
pub fn green_kernel(mm: &ModelManifold, r: f64, cfg: &QuadratureConfig) -> Result<IntegralVerdict> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!(
            "Green kernel pole distance must be positive, got {r}"
        )));
    }
    let profile = RadialProfile::new(mm);
    let c_m = 1.0 / sphere_area(mm.dim());
    let v = classify_or_inconclusive(|t| profile.green_integrand(t), r, cfg)?;
    Ok(match v {
        IntegralVerdict::Convergent {
            value,
            error_estimate,
        } => IntegralVerdict::Convergent {
            value: c_m * value,
            error_estimate: c_m * error_estimate,
        },
        other => other,
    })
}

/// Parabolicity test: verdict on `∫^∞ σ^{1-m}`.
/// `Divergent` ⇔ parabolic, `Convergent` ⇔ non-parabolic.
pub fn classify_parabolic(mm: &ModelManifold, cfg: &QuadratureConfig) -> Result<IntegralVerdict> {
    let profile = RadialProfile::new(mm);
    classify_or_inconclusive(|t| profile.green_integrand(t), 1.0, cfg)
}

/// Stochastic-completeness test: verdict on `∫₀^∞ (∫₀^t σ^{m-1})/σ^{m-1} dt`.
/// `Divergent` ⇔ stochastically complete, `Convergent` ⇔ incomplete.
pub fn classify_stochastic(mm: &ModelManifold, cfg: &QuadratureConfig) -> Result<IntegralVerdict> {
    let profile = RadialProfile::new(mm);
    classify_or_inconclusive(|t| profile.sc_integrand(t), 0.0, cfg)
}

/// L¹-Liouville test via the Green mass `∫_M G dv`.
///
/// On a model the mass reduces (after swapping the integration order) to the
/// same integral as [`classify_stochastic`]; a parabolic model short-circuits
/// to `Divergent` since `G ≡ +∞`.
///
/// `Divergent` ⇔ L¹-Liouville, `Convergent` ⇔ not L¹-Liouville.
pub fn classify_l1(mm: &ModelManifold, cfg: &QuadratureConfig) -> Result<IntegralVerdict> {
    if let IntegralVerdict::Divergent {
        witness_cutoff,
        partial_value,
    } = classify_parabolic(mm, cfg)?
    {
        return Ok(IntegralVerdict::Divergent {
            witness_cutoff,
            partial_value,
        });
    }
    classify_stochastic(mm, cfg)
}

/// Cross-check of the two integration orders of the Green mass:
/// `A = ∫₀^∞ σ^{m-1}(r) ∫_r^∞ σ^{1-m}(t) dt dr` against the swapped
/// `B = ∫₀^∞ (∫₀^t σ^{m-1})/σ^{m-1} dt`. Returns `|A-B| / max(|A|,|B|)`.
///
/// Both sides must be finite, i.e. the model stochastically incomplete.
pub fn tonelli_check(mm: &ModelManifold, cfg: &QuadratureConfig) -> Result<f64> {
    let profile = RadialProfile::new(mm);
    let b = match classify_or_inconclusive(|t| profile.sc_integrand(t), 0.0, cfg)? {
        IntegralVerdict::Convergent { value, .. } => value,
        other => {
            return Err(Error::Precondition(format!(
                "tonelli check needs a stochastically incomplete model; swapped integral is {other:?}"
            )))
        }
    };
    let double_integrand = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let psi_r = profile.psi(r)?;
        if psi_r > LOG_DIRECT_MAX {
            profile.green_tail_series(r)
        } else {
            let log_k = profile.log_green_tail(r, cfg)?;
            Ok((psi_r + log_k).exp())
        }
    };
    let a = match classify_or_inconclusive(double_integrand, 0.0, cfg)? {
        IntegralVerdict::Convergent { value, .. } => value,
        other => {
            return Err(Error::Precondition(format!(
                "double-integral route failed to converge: {other:?}"
            )))
        }
    };
    Ok((a - b).abs() / a.abs().max(b.abs()))
}

/// Volume-growth sufficient condition: verdict on `∫^∞ r / log vol(B_r) dr`,
/// integrated from the first radius where `vol(B_r) >= e` (left-endpoint
/// shifts do not affect divergence, and below that radius the integrand is
/// not even positive).
///
/// `Divergent` ⇔ the criterion guarantees stochastic completeness;
/// `Convergent` or `Inconclusive` ⇔ the criterion is silent.
pub fn volume_growth_criterion(
    mm: &ModelManifold,
    cfg: &QuadratureConfig,
) -> Result<IntegralVerdict> {
    let profile = RadialProfile::new(mm);
    let log_omega = sphere_area(mm.dim()).ln();
    let log_vol = |r: f64| -> Result<f64> { Ok(log_omega + profile.log_cum_sigma_pow(r)?) };

    // bracket the first radius with vol >= e, i.e. log vol >= 1
    let domain_end = mm.warp().domain_end();
    let mut hi = 1.0f64.min(domain_end * 0.5);
    let mut lo = 0.0;
    let mut found = false;
    for _ in 0..80 {
        match log_vol(hi) {
            Ok(v) if v >= 1.0 => {
                found = true;
                break;
            }
            Ok(_) => {
                lo = hi;
                hi *= 2.0;
                if hi > domain_end {
                    break;
                }
            }
            Err(Error::OutOfDomain { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    if !found {
        return Ok(IntegralVerdict::Inconclusive {
            diagnostics: ClassifierTrace {
                note: "ball volume never reaches e inside the domain".into(),
                ..ClassifierTrace::default()
            },
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if log_vol(mid)? >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let a = hi;

    classify_or_inconclusive(
        |r| {
            let lv = log_vol(r)?;
            Ok(r / lv)
        },
        a,
        cfg,
    )
}

/// Mean exit time from the geodesic ball: `F_R(r) = ∫_r^R (∫₀^t σ^{m-1})/σ^{m-1} dt`.
///
/// On a model this equals the solution of `ΔE_R = -1` on `B_R` with zero
/// boundary data, evaluated at radius `r`.
pub fn exit_time_ball(mm: &ModelManifold, r: f64, big_r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(0.0 <= r && r <= big_r) {
        return Err(Error::Precondition(format!(
            "exit time needs 0 <= r <= R, got r = {r}, R = {big_r}"
        )));
    }
    if r == big_r {
        return Ok(0.0);
    }
    let profile = RadialProfile::new(mm);
    let (v, _) = integrate_finite(|t| profile.sc_integrand(t), r, big_r, cfg)?;
    Ok(v)
}

/// Global mean exit time `F(r) = lim_{R→∞} F_R(r)`.
///
/// `Convergent(F(r))` ⇔ the model is not L¹-Liouville; `Divergent` ⇔ it is.
pub fn global_exit_time(
    mm: &ModelManifold,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralVerdict> {
    if !(r >= 0.0) {
        return Err(Error::Precondition(format!(
            "global exit time needs r >= 0, got {r}"
        )));
    }
    let profile = RadialProfile::new(mm);
    classify_or_inconclusive(|t| profile.sc_integrand(t), r, cfg)
}

// ---------------------------------------------------------------------------
// Exit profile and comparison report
// ---------------------------------------------------------------------------

/// Bundled exit-time evaluators for one model: `F_R`, `F` and the global
/// verdict, sharing one cumulative cache.
pub struct ExitProfile {
    profile: RadialProfile,
    cfg: QuadratureConfig,
}

impl ExitProfile {
    pub fn new(mm: &ModelManifold, cfg: &QuadratureConfig) -> Self {
        ExitProfile {
            profile: RadialProfile::new(mm),
            cfg: cfg.clone(),
        }
    }

    /// `F_R(r)`; zero when `r = R`.
    pub fn f_r(&self, r: f64, big_r: f64) -> Result<f64> {
        if !(0.0 <= r && r <= big_r) {
            return Err(Error::Precondition(format!(
                "F_R needs 0 <= r <= R, got r = {r}, R = {big_r}"
            )));
        }
        if r == big_r {
            return Ok(0.0);
        }
        let (v, _) = integrate_finite(|t| self.profile.sc_integrand(t), r, big_r, &self.cfg)?;
        Ok(v)
    }

    /// Verdict on `F(r)`.
    pub fn f(&self, r: f64) -> Result<IntegralVerdict> {
        classify_or_inconclusive(|t| self.profile.sc_integrand(t), r, &self.cfg)
    }

    /// Verdict on the global mean exit time, `F(0)`.
    pub fn global_verdict(&self) -> Result<IntegralVerdict> {
        self.f(0.0)
    }
}

/// Outcome of the curvature-comparison argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonConclusion {
    /// The comparison model has finite global mean exit time, so any
    /// manifold with `Δr >= (m-1)σ'/σ` is not L¹-Liouville and its mean
    /// exit time is dominated by `F∘r`.
    NotL1LiouvilleUnderHypothesis,
    NoConclusion,
}

/// Result of [`comparison_not_l1`]; when the conclusion holds, `bound`
/// carries the comparison function `F`.
pub struct ComparisonReport {
    pub conclusion: ComparisonConclusion,
    pub message: String,
    pub f_at_zero: Option<f64>,
    pub bound: Option<ExitProfile>,
}

/// Comparison criterion: if the model's global mean exit time is finite,
/// every manifold satisfying the Laplacian comparison `Δr >= (m-1)σ'/σ`
/// against this model (the caller's responsibility to assert) fails to be
/// L¹-Liouville, with `E(x) <= F(r(x))`.
pub fn comparison_not_l1(mm: &ModelManifold, cfg: &QuadratureConfig) -> Result<ComparisonReport> {
    let exit = ExitProfile::new(mm, cfg);
    match exit.global_verdict()? {
        IntegralVerdict::Convergent { value, .. } => Ok(ComparisonReport {
            conclusion: ComparisonConclusion::NotL1LiouvilleUnderHypothesis,
            message: format!(
                "NOT L1-Liouville under hypothesis, with E(x) <= F(r(x)); F(0) = {value:.12e}"
            ),
            f_at_zero: Some(value),
            bound: Some(exit),
        }),
        IntegralVerdict::Divergent { .. } => Ok(ComparisonReport {
            conclusion: ComparisonConclusion::NoConclusion,
            message: "no conclusion: comparison model has infinite global mean exit time".into(),
            f_at_zero: None,
            bound: None,
        }),
        IntegralVerdict::Inconclusive { .. } => Ok(ComparisonReport {
            conclusion: ComparisonConclusion::NoConclusion,
            message: "no conclusion: global mean exit time could not be classified".into(),
            f_at_zero: None,
            bound: None,
        }),
    }
}

// ---------------------------------------------------------------------------
// Aggregated report
// ---------------------------------------------------------------------------

/// Provenance of one classification run: model tag, tolerances, schedule and
/// any notes the sub-criteria produced.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub model: String,
    pub dim: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub r0: f64,
    pub j_max: u32,
    pub divergence_threshold: f64,
    pub decay_window: usize,
    pub notes: Vec<String>,
}

/// Full tri-state classification of one model manifold.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub parabolic: TriState,
    pub stochastically_complete: TriState,
    pub l1_liouville: TriState,
    pub volume_growth_sufficient: TriState,
    pub green_mass: IntegralVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tonelli_reldiff: Option<f64>,
    pub provenance: Provenance,
}

fn tri_divergent(v: &IntegralVerdict) -> TriState {
    match v {
        IntegralVerdict::Divergent { .. } => TriState::Yes,
        IntegralVerdict::Convergent { .. } => TriState::No,
        IntegralVerdict::Inconclusive { .. } => TriState::Unknown,
    }
}

/// Run every criterion and assemble the report. Construction fails with
/// [`Error::InvariantViolation`] if the determinate sub-verdicts contradict
/// the structural implications (model identity SC ⇔ L¹, parabolic ⇒ L¹,
/// volume growth ⇒ not incomplete); an inconclusive sub-verdict yields
/// `Unknown` for its field, never a guess.
pub fn classification_report(
    mm: &ModelManifold,
    cfg: &QuadratureConfig,
) -> Result<ClassificationReport> {
    let mut notes = Vec::new();

    let parabolic_v = classify_parabolic(mm, cfg)?;
    let sc_v = classify_stochastic(mm, cfg)?;
    let l1_v = if parabolic_v.is_divergent() {
        notes.push("L1 short-circuit: parabolic model, G = +inf".into());
        match &parabolic_v {
            IntegralVerdict::Divergent {
                witness_cutoff,
                partial_value,
            } => IntegralVerdict::Divergent {
                witness_cutoff: *witness_cutoff,
                partial_value: *partial_value,
            },
            _ => unreachable!(),
        }
    } else {
        sc_v.clone()
    };
    let vol_v = volume_growth_criterion(mm, cfg)?;

    let parabolic = tri_divergent(&parabolic_v);
    let stochastically_complete = tri_divergent(&sc_v);
    let l1_liouville = tri_divergent(&l1_v);
    let volume_growth_sufficient = tri_divergent(&vol_v);

    // model identity: SC and L1 verdicts coincide
    if stochastically_complete.is_known()
        && l1_liouville.is_known()
        && stochastically_complete != l1_liouville
    {
        return Err(Error::InvariantViolation(format!(
            "model identity broken: SC = {stochastically_complete:?}, L1 = {l1_liouville:?}"
        )));
    }
    if let (Some(a), Some(b)) = (sc_v.value(), l1_v.value()) {
        let reldiff = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if reldiff > 1e-6 {
            return Err(Error::InvariantViolation(format!(
                "SC and L1 values disagree beyond tolerance: {a} vs {b}"
            )));
        }
    }
    if parabolic == TriState::Yes && l1_liouville == TriState::No {
        return Err(Error::InvariantViolation(
            "parabolic model classified as not L1-Liouville".into(),
        ));
    }
    if volume_growth_sufficient == TriState::Yes && stochastically_complete == TriState::No {
        return Err(Error::InvariantViolation(
            "volume-growth criterion fired on a stochastically incomplete model".into(),
        ));
    }

    let tonelli_reldiff = if sc_v.is_convergent() {
        match tonelli_check(mm, cfg) {
            Ok(d) => Some(d),
            Err(e) => {
                notes.push(format!("tonelli cross-check unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    Ok(ClassificationReport {
        parabolic,
        stochastically_complete,
        l1_liouville,
        volume_growth_sufficient,
        green_mass: l1_v,
        tonelli_reldiff,
        provenance: Provenance {
            model: mm.warp().describe(),
            dim: mm.dim(),
            abs_tol: cfg.abs_tol,
            rel_tol: cfg.rel_tol,
            r0: cfg.r0,
            j_max: cfg.j_max,
            divergence_threshold: cfg.divergence_threshold,
            decay_window: cfg.decay_window,
            notes,
        },
    })
}
