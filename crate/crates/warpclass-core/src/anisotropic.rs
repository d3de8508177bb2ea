//! Anisotropic 2-d constructions: conformal changes of a rotationally
//! symmetric base that keep the L¹-Liouville property while destroying
//! stochastic completeness.
//!
//! Two constructions are covered:
//!
//! * **Two ends.** A connected sum of two 2-d models is stochastically
//!   incomplete as soon as one summand is, and possesses infinite Green
//!   mass as soon as the other has infinite volume. Only the two
//!   hypotheses are certified here (`∫^∞ σ₁ = ∞` and the completeness
//!   integral of `σ₂` finite); the glued manifold itself is not
//!   constructed.
//!
//! * **One end.** Starting from a stochastically incomplete base model
//!   with increasing, unbounded σ, a conformal factor `λ(r,θ) ≥ 1` is
//!   chosen equal to 1 on the sector `|θ| ≤ π/2` and at least
//!   `G(o,r)^{-1/2}` on the opposite sector `|θ| ≥ 3π/4`, `r > 1`. The
//!   Green mass over the opposite sector then diverges (L¹-Liouville),
//!   while `v(re^{iθ}) = v_o(r) cos θ` violates the maximum principle at
//!   infinity (`Δ̃v ≥ √2/4` on a gated region), witnessing stochastic
//!   incompleteness.
//!
//! Two bookkeeping conventions for the conformal change are supported.
//! With the volume weight `dṽ = λ dv` (and `Δ̃ = λ^{-2}Δ`) the sector
//! integrand is `G^{1/2}σ` and the displayed lower bound `(π/2)∫σ` is not
//! pointwise valid wherever `G < 1`; with the 2-d-consistent quadratic
//! weight (`g̃ = λ²g`, `dṽ = λ² dv`, `Δ̃ = λ^{-2}Δ`) the chain
//! `G·λ²·σ ≥ σ` is exact. Both are implemented; the quadratic convention
//! is the default and the one under which the lower-bound certificate is
//! asserted. The divergence verdict holds under either.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::criteria::RadialProfile;
use crate::error::{Error, Result};
use crate::quad::{self, integrate_finite, IntegralVerdict, QuadratureConfig};
use crate::warp::{Deriv, ModelManifold, WarpingFunction};

/// `√2 / 4`, the maximum-principle violation bound.
pub const MAX_PRINCIPLE_BOUND: f64 = 0.35355339059327373;

/// Exponent bookkeeping for the conformal change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConformalConvention {
    /// `dṽ = λ dv`, `Δ̃ = λ^{-2}Δ`. The sector lower bound is recorded but
    /// not asserted under this convention.
    LambdaVolume,
    /// `g̃ = λ²g`: `dṽ = λ² dv`, `Δ̃ = λ^{-2}Δ`. Self-consistent in 2-d;
    /// the sector lower bound is exact. Default.
    LambdaSquaredVolume,
}

impl ConformalConvention {
    fn volume_exponent(self) -> f64 {
        match self {
            ConformalConvention::LambdaVolume => 1.0,
            ConformalConvention::LambdaSquaredVolume => 2.0,
        }
    }
}

/// Quintic smoothstep on [0, 1]; C² with flat ends.
fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// The one-end conformal construction over a stochastically incomplete
/// 2-d base model.
///
/// The conformal factor is radial on each sector:
/// `λ = 1` for `|θ| ≤ π/2`; `λ = max(1, G(o,r)^{-1/2})` for `|θ| ≥ 3π/4`
/// and `r ≥ 1` (ramped up from 1 over `r ∈ [0.8, 1]`, i.e. *inside* the
/// unconstrained radii, so the lower bound `λ ≥ G^{-1/2}` holds on all of
/// `r > 1`); quintic blend of `ln λ` in θ across the transition sectors.
pub struct ConformalExample {
    base: ModelManifold,
    convention: ConformalConvention,
    profile: RadialProfile,
    cfg: QuadratureConfig,
    /// `sup v_o = F(0)`: the base model's finite global mean exit time.
    f0: f64,
    /// `ln c₂ = -ln 2π`.
    log_c2: f64,
    /// Interpolation table for `η(r) = -½ ln G(o,r)` on the direct regime.
    eta_table: RefCell<Option<EtaTable>>,
    /// End of the direct regime (`log σ` reaches 600), capped at 64.
    table_end: f64,
}

struct EtaTable {
    ln_r: Vec<f64>,
    eta: Vec<f64>,
    slopes: Vec<f64>,
}

const RAMP_LO: f64 = 0.8;

impl ConformalExample {
    /// Validate the base (dimension 2, σ nondecreasing and unbounded,
    /// stochastically incomplete) and precompute `sup v_o`.
    pub fn new(
        base: ModelManifold,
        convention: ConformalConvention,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        if base.dim() != 2 {
            return Err(Error::Precondition(format!(
                "one-end construction needs a 2-d base, got m = {}",
                base.dim()
            )));
        }
        let domain_end = base.warp().domain_end();
        let t_hi = if domain_end.is_finite() {
            domain_end * 0.99
        } else {
            64.0
        };
        for i in 1..=512 {
            let t = t_hi * i as f64 / 512.0;
            if base.warp().eval(t, Deriv::First)? < -1e-12 {
                return Err(Error::Precondition(format!(
                    "base warp must be nondecreasing; σ' < 0 at t = {t}"
                )));
            }
        }
        if base.warp().log_value(t_hi)? <= base.warp().log_value(1.0)? + 1.0 {
            return Err(Error::Precondition(
                "base warp must diverge at infinity".into(),
            ));
        }
        let f0 = match crate::criteria::classify_stochastic(&base, cfg)? {
            IntegralVerdict::Convergent { value, .. } => value,
            other => {
                return Err(Error::Precondition(format!(
                    "base must be stochastically incomplete; completeness integral is {other:?}"
                )))
            }
        };
        let profile = RadialProfile::new(&base);
        // end of the direct regime: where log σ crosses 600
        let mut lo = 1.0;
        let mut hi = 64.0f64.min(t_hi);
        let table_end = if profile.psi(hi)? <= 600.0 {
            hi
        } else {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if profile.psi(mid)? > 600.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        };
        Ok(ConformalExample {
            base,
            convention,
            profile,
            cfg: cfg.clone(),
            f0,
            log_c2: -(2.0 * PI).ln(),
            eta_table: RefCell::new(None),
            table_end,
        })
    }

    pub fn base(&self) -> &ModelManifold {
        &self.base
    }

    pub fn convention(&self) -> ConformalConvention {
        self.convention
    }

    /// `sup v_o = F(0)`.
    pub fn sup_v_o(&self) -> f64 {
        self.f0
    }

    /// `η(r) = -½ ln G(o,r)`, the log of the outer-sector target factor.
    fn eta_raw(&self, r: f64) -> Result<f64> {
        if r >= RAMP_LO && r <= self.table_end {
            self.ensure_table()?;
            let table = self.eta_table.borrow();
            let table = table.as_ref().unwrap();
            let x = r.ln();
            let i = table
                .ln_r
                .partition_point(|&v| v < x)
                .clamp(1, table.ln_r.len() - 1)
                - 1;
            let (x0, x1) = (table.ln_r[i], table.ln_r[i + 1]);
            let h = x1 - x0;
            let u = (x - x0) / h;
            let (u2, u3) = (u * u, u * u * u);
            let v = (2.0 * u3 - 3.0 * u2 + 1.0) * table.eta[i]
                + (u3 - 2.0 * u2 + u) * h * table.slopes[i]
                + (-2.0 * u3 + 3.0 * u2) * table.eta[i + 1]
                + (u3 - u2) * h * table.slopes[i + 1];
            Ok(v)
        } else {
            self.eta_direct(r)
        }
    }

    fn eta_direct(&self, r: f64) -> Result<f64> {
        let log_k = self.profile.log_green_tail(r, &self.cfg)?;
        Ok(-0.5 * (self.log_c2 + log_k))
    }

    fn ensure_table(&self) -> Result<()> {
        if self.eta_table.borrow().is_some() {
            return Ok(());
        }
        let n = 1024;
        let (lo, hi) = (RAMP_LO.ln(), self.table_end.ln());
        let ln_r: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let mut eta = Vec::with_capacity(n);
        let mut slopes = Vec::with_capacity(n);
        for &x in &ln_r {
            let r = x.exp();
            let log_k = self.profile.log_green_tail(r, &self.cfg)?;
            eta.push(-0.5 * (self.log_c2 + log_k));
            // d/dr log K = -σ^{-1}(r)/K(r), so dη/d ln r is available in
            // closed form from the tail itself
            let psi = self.profile.psi(r)?;
            slopes.push(r * 0.5 * (-psi - log_k).exp());
        }
        *self.eta_table.borrow_mut() = Some(EtaTable { ln_r, eta, slopes });
        Ok(())
    }

    /// Radial log-factor on the outer sector: 0 below the ramp, the full
    /// `max(0, η(r))` from `r = 1` on.
    fn log_lambda_outer(&self, r: f64) -> Result<f64> {
        if r <= RAMP_LO {
            Ok(0.0)
        } else if r < 1.0 {
            let target = self.eta_raw(1.0)?.max(0.0);
            Ok(smoothstep5((r - RAMP_LO) / (1.0 - RAMP_LO)) * target)
        } else {
            Ok(self.eta_raw(r)?.max(0.0))
        }
    }

    /// `ln λ(r, θ)`.
    pub fn log_lambda(&self, r: f64, theta: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Precondition(format!("radius must be >= 0, got {r}")));
        }
        let mut a = theta.rem_euclid(2.0 * PI);
        if a > PI {
            a -= 2.0 * PI;
        }
        let alpha = a.abs();
        if alpha <= PI / 2.0 {
            Ok(0.0)
        } else if alpha >= 3.0 * PI / 4.0 {
            self.log_lambda_outer(r)
        } else {
            let w = smoothstep5((alpha - PI / 2.0) / (PI / 4.0));
            Ok(w * self.log_lambda_outer(r)?)
        }
    }

    /// The conformal factor `λ(r, θ) ≥ 1`.
    pub fn lambda_eval(&self, r: f64, theta: f64) -> Result<f64> {
        Ok(self.log_lambda(r, theta)?.exp())
    }

    /// `v_o(r) = ∫₀^r σ(t)^{-1} ∫₀^t σ(s) ds dt`; increasing from 0 with
    /// supremum `F(0)`, and `v_o(r) = F(0) - F(r)`.
    pub fn v_o_eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Precondition(format!("radius must be >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let (v, _) = integrate_finite(|t| self.profile.sc_integrand(t), 0.0, r, &self.cfg)?;
        Ok(v)
    }

    /// Partial Green mass of the opposite sector,
    /// `∫₁^{R} ∫_{3π/4}^{5π/4} G(o,r) λ(r,θ)^s σ(r) dθ dr`, against the
    /// analytic lower bound `(π/2) ∫₁^{R} σ`.
    ///
    /// λ is constant in θ across the opposite sector, so the θ-integral is
    /// exactly `(π/2) λ^s`. Integrands are saturated at `e^700` — the
    /// saturation only ever *under*states the mass, so divergence verdicts
    /// built on it remain sound.
    pub fn sector_green_mass(&self, r_cut: f64) -> Result<SectorMass> {
        if !(r_cut >= 1.0) {
            return Err(Error::Precondition(format!(
                "sector mass needs R_cut >= 1, got {r_cut}"
            )));
        }
        let s_exp = self.convention.volume_exponent();
        if r_cut == 1.0 {
            return Ok(SectorMass {
                r_cut,
                mass: 0.0,
                lower_bound: 0.0,
                bound_satisfied: true,
                convention: self.convention,
            });
        }
        let (mass, _) = integrate_finite(
            |r| self.sector_radial_integrand(r, s_exp),
            1.0,
            r_cut,
            &self.cfg,
        )?;
        let (lower, _) = integrate_finite(
            |r| {
                let ls = self.base.warp().log_value(r)?;
                Ok((PI / 2.0) * ls.min(700.0).exp())
            },
            1.0,
            r_cut,
            &self.cfg,
        )?;
        let bound_satisfied = mass >= lower * (1.0 - 1e-8);
        Ok(SectorMass {
            r_cut,
            mass,
            lower_bound: lower,
            bound_satisfied,
            convention: self.convention,
        })
    }

    fn sector_radial_integrand(&self, r: f64, s_exp: f64) -> Result<f64> {
        // log G = -2η by definition of η
        let eta = self.eta_raw(r)?;
        let log_lambda = self.log_lambda_outer(r)?;
        let log_sigma = self.base.warp().log_value(r)?;
        let exponent = -2.0 * eta + s_exp * log_lambda + log_sigma;
        Ok((PI / 2.0) * exponent.min(700.0).exp())
    }

    /// Divergence of the sector mass as `R_cut` grows through `{2, 4, 8, …}`.
    pub fn sector_mass_divergence(&self) -> Result<IntegralVerdict> {
        let s_exp = self.convention.volume_exponent();
        let cfg = QuadratureConfig {
            r0: 2.0,
            ..self.cfg.clone()
        };
        quad::classify_improper(|r| self.sector_radial_integrand(r, s_exp), 1.0, &cfg)
    }

    /// Evaluate `Δ̃v` at a gated grid and certify the `√2/4` lower bound;
    /// `v(re^{iθ}) = v_o(r) cos θ` and
    /// `Δ̃v = λ^{-2} cos θ (1 - v_o(r)/σ(r)²)` using `Δv_o = 1`.
    ///
    /// Points outside the gate (`σ(r)² > 2 sup v_o` and `|θ| ≤ π/4`) are
    /// skipped and counted, never evaluated into the minimum.
    pub fn max_principle_check(&self, grid: &GridSpec) -> Result<MaxPrincipleCertificate> {
        grid.validate()?;
        let gate = (2.0 * self.f0).ln();
        let mut n_gated = 0usize;
        let mut n_skipped = 0usize;
        let mut min_value = f64::INFINITY;

        for i in 0..grid.n_r {
            let r = grid.r_min + (grid.r_max - grid.r_min) * i as f64 / (grid.n_r - 1) as f64;
            let log_sigma = self.base.warp().log_value(r)?;
            let row_gated = 2.0 * log_sigma > gate;
            let v_o = if row_gated { self.v_o_eval(r)? } else { 0.0 };
            for j in 0..grid.n_theta {
                let theta = grid.theta_min
                    + (grid.theta_max - grid.theta_min) * j as f64 / (grid.n_theta - 1) as f64;
                if !row_gated || theta.abs() > PI / 4.0 + 1e-12 {
                    n_skipped += 1;
                    continue;
                }
                n_gated += 1;
                let lam2 = (2.0 * self.log_lambda(r, theta)?).exp();
                let ratio = (v_o.ln() - 2.0 * log_sigma).exp();
                let value = theta.cos() * (1.0 - ratio) / lam2;
                if value < min_value {
                    min_value = value;
                }
            }
        }

        // side check: Δv_o = 1, i.e. v_o'' + (σ'/σ) v_o' = 1, with v_o''
        // from central differences of v_o' = (∫₀σ)/σ
        let mut delta_vo_residual = 0.0f64;
        for i in 0..=16 {
            let r = grid.r_min * (grid.r_max / grid.r_min).powf(i as f64 / 16.0);
            let h = 1e-5 * (1.0 + r);
            let d2 = (self.profile.sc_integrand(r + h)? - self.profile.sc_integrand(r - h)?)
                / (2.0 * h);
            let eta = self.base.warp().log_deriv(r)?;
            let resid = (d2 + eta * self.profile.sc_integrand(r)? - 1.0).abs();
            delta_vo_residual = delta_vo_residual.max(resid);
        }

        Ok(MaxPrincipleCertificate {
            grid: grid.clone(),
            n_gated,
            n_skipped,
            min_value: if n_gated > 0 { Some(min_value) } else { None },
            bound: MAX_PRINCIPLE_BOUND,
            sup_v_o: self.f0,
            delta_vo_residual,
            convention: self.convention,
            certified: n_gated > 0 && min_value >= MAX_PRINCIPLE_BOUND - 1e-9,
        })
    }
}

/// Evaluation grid for the maximum-principle certificate.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
}

impl GridSpec {
    /// 200×200 over `r ∈ [1.2, 6]`, `θ ∈ [-π/4, π/4]`.
    pub fn default_gated() -> Self {
        GridSpec {
            r_min: 1.2,
            r_max: 6.0,
            n_r: 200,
            theta_min: -PI / 4.0,
            theta_max: PI / 4.0,
            n_theta: 200,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.r_min > 0.0
            && self.r_min < self.r_max
            && self.n_r >= 2
            && self.n_theta >= 2
            && self.theta_min < self.theta_max
            && self.theta_min >= -PI
            && self.theta_max <= PI;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid grid: {self:?}")))
        }
    }
}

/// Sector Green-mass record.
#[derive(Debug, Clone, Serialize)]
pub struct SectorMass {
    pub r_cut: f64,
    pub mass: f64,
    pub lower_bound: f64,
    /// Whether `mass >= (π/2)∫₁^{R}σ` held (exact under the quadratic
    /// convention; recorded but typically false under the linear one).
    pub bound_satisfied: bool,
    pub convention: ConformalConvention,
}

/// Maximum-principle violation certificate.
#[derive(Debug, Clone, Serialize)]
pub struct MaxPrincipleCertificate {
    pub grid: GridSpec,
    pub n_gated: usize,
    pub n_skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_value: Option<f64>,
    /// `√2/4`.
    pub bound: f64,
    pub sup_v_o: f64,
    /// Max residual of the pointwise identity `Δv_o = 1` over the grid rows.
    pub delta_vo_residual: f64,
    pub convention: ConformalConvention,
    pub certified: bool,
}

// ---------------------------------------------------------------------------
// Two-end hypotheses
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoEndConclusion {
    /// Infinite volume on end 1 and stochastic incompleteness on end 2 both
    /// certified: the glued manifold is stochastically incomplete yet
    /// L¹-Liouville.
    HypothesesHold,
    VolumeHypothesisFails,
    IncompletenessHypothesisFails,
    BothFail,
    CannotCertify,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoEndReport {
    /// Verdict on `∫^∞ σ₁` (must be `Divergent`: infinite volume).
    pub volume_integral: IntegralVerdict,
    /// Verdict on `∫^∞ (∫₀σ₂)/σ₂` (must be `Convergent`: incomplete end).
    pub si_integral: IntegralVerdict,
    pub conclusion: TwoEndConclusion,
}

/// Certify the hypotheses of the two-end construction for warps `σ₁`, `σ₂`.
pub fn verify_two_end_hypotheses(
    w1: &WarpingFunction,
    w2: &WarpingFunction,
    cfg: &QuadratureConfig,
) -> Result<TwoEndReport> {
    let volume_integral = match quad::classify_improper_traced(
        &|t| Ok(w1.eval(t, Deriv::Value)?),
        0.0,
        cfg,
    ) {
        Ok((v, _)) => v,
        Err(Error::OutOfDomain { t, domain_end }) => IntegralVerdict::Inconclusive {
            diagnostics: crate::quad::ClassifierTrace {
                note: format!("σ₁ domain ends at {domain_end}, classifier needed {t}"),
                ..Default::default()
            },
        },
        Err(e) => return Err(e),
    };
    let mm2 = ModelManifold::new(2, w2.clone())?;
    let si_integral = crate::criteria::classify_stochastic(&mm2, cfg)?;

    let vol_ok = volume_integral.is_divergent();
    let si_ok = si_integral.is_convergent();
    let conclusion = if volume_integral.is_inconclusive() || si_integral.is_inconclusive() {
        TwoEndConclusion::CannotCertify
    } else {
        match (vol_ok, si_ok) {
            (true, true) => TwoEndConclusion::HypothesesHold,
            (false, true) => TwoEndConclusion::VolumeHypothesisFails,
            (true, false) => TwoEndConclusion::IncompletenessHypothesisFails,
            (false, false) => TwoEndConclusion::BothFail,
        }
    };
    Ok(TwoEndReport {
        volume_integral,
        si_integral,
        conclusion,
    })
}
