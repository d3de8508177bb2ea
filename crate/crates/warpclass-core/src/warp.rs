//! Warping functions, model manifolds and basic geometric quantities.
//!
//! A model manifold is the warped product `[0, ∞) × S^{m-1}` with metric
//! `dt² + σ(t)² dθ²`. Everything downstream is driven by the scalar warping
//! function σ together with its first two derivatives, so this module is the
//! single place where σ is represented and evaluated.
//!
//! All families satisfy the smoothness normalization at the pole,
//! `σ(0) = 0`, `σ'(0) = 1`; constructors reject data violating it.
//!
//! Super-exponential warps (the spliced exp-power family, or tabulated
//! solutions of `σ'' = Gσ` with fast-growing `G`) overflow `f64` long before
//! the radii the classifiers probe, so alongside plain evaluation every
//! family exposes the logarithmic data `ln σ`, `σ'/σ`, `(ln σ)''` and, where
//! a closed form exists, `(ln σ)'''`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Derivative order accepted by [`WarpingFunction::eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Value,
    First,
    Second,
}

/// Area of the unit `(m-1)`-sphere, `ω_{m-1} = 2 π^{m/2} / Γ(m/2)`.
///
/// `sphere_area(2) = 2π` (circle), `sphere_area(3) = 4π`.
pub fn sphere_area(m: usize) -> f64 {
    debug_assert!(m >= 2);
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half_integer(m as u32)
}

/// Γ(k/2) for integer k ≥ 1, computed exactly by downward recursion.
fn gamma_half_integer(k: u32) -> f64 {
    let mut acc = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut j = k;
    while j > 2 {
        j -= 2;
        acc *= j as f64 / 2.0;
    }
    acc
}

// ---------------------------------------------------------------------------
// Curvature profiles
// ---------------------------------------------------------------------------

/// Radial curvature bound `G(t)` used by the warping IVP `σ'' = Gσ`.
///
/// Only the restriction to `[0, ∞)` is represented; the even extension is
/// implicit.
#[derive(Clone)]
pub enum CurvatureProfile {
    /// `G(t) = c`.
    Constant(f64),
    /// Even polynomial `c[0] + c[1] t² + c[2] t⁴ + ...`.
    EvenPoly(Vec<f64>),
    /// `G = q² + q'` for the monomial log-derivative target `q(t) = c t^k`,
    /// i.e. the profile whose IVP solution grows like `exp(c t^{k+1}/(k+1))`.
    LogDerivSq { c: f64, k: u32 },
    /// Arbitrary user evaluator. No derivative information available.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl CurvatureProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CurvatureProfile::Constant(c) => *c,
            CurvatureProfile::EvenPoly(coeffs) => {
                let t2 = t * t;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * t2 + c)
            }
            CurvatureProfile::LogDerivSq { c, k } => {
                let q = c * t.powi(*k as i32);
                let dq = if *k == 0 {
                    0.0
                } else {
                    c * *k as f64 * t.powi(*k as i32 - 1)
                };
                q * q + dq
            }
            CurvatureProfile::Custom(f) => f(t),
        }
    }

    /// `G'(t)` where a closed form exists.
    pub fn deriv(&self, t: f64) -> Option<f64> {
        match self {
            CurvatureProfile::Constant(_) => Some(0.0),
            CurvatureProfile::EvenPoly(coeffs) => {
                let t2 = t * t;
                let mut acc = 0.0;
                for (i, c) in coeffs.iter().enumerate().skip(1) {
                    acc += 2.0 * i as f64 * c * t2.powi(i as i32 - 1) * t;
                }
                Some(acc)
            }
            CurvatureProfile::LogDerivSq { c, k } => {
                let kf = *k as f64;
                let q = c * t.powi(*k as i32);
                let dq = if *k == 0 { 0.0 } else { c * kf * t.powi(*k as i32 - 1) };
                let d2q = if *k <= 1 {
                    0.0
                } else {
                    c * kf * (kf - 1.0) * t.powi(*k as i32 - 2)
                };
                Some(2.0 * q * dq + d2q)
            }
            CurvatureProfile::Custom(_) => None,
        }
    }
}

impl fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureProfile::Constant(c) => write!(f, "Constant({c})"),
            CurvatureProfile::EvenPoly(c) => write!(f, "EvenPoly({c:?})"),
            CurvatureProfile::LogDerivSq { c, k } => write!(f, "LogDerivSq({c}·t^{k})"),
            CurvatureProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

// ---------------------------------------------------------------------------
// Quintic Hermite blend (used by the spliced family)
// ---------------------------------------------------------------------------

/// Quintic Hermite interpolant on `[t_lo, t_hi]` matching value, first and
/// second derivative at both ends. Coefficients are stored pre-scaled by the
/// interval width so evaluation is a plain basis expansion in `u ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct QuinticHermite {
    t_lo: f64,
    t_hi: f64,
    /// `[f0, h·f0', h²·f0'', f1, h·f1', h²·f1'']` with `h = t_hi - t_lo`.
    c: [f64; 6],
}

impl QuinticHermite {
    fn new(t_lo: f64, t_hi: f64, left: (f64, f64, f64), right: (f64, f64, f64)) -> Self {
        let h = t_hi - t_lo;
        QuinticHermite {
            t_lo,
            t_hi,
            c: [
                left.0,
                h * left.1,
                h * h * left.2,
                right.0,
                h * right.1,
                h * h * right.2,
            ],
        }
    }

    /// Value, first, second and third derivative with respect to `t`.
    fn eval(&self, t: f64) -> (f64, f64, f64, f64) {
        let h = self.t_hi - self.t_lo;
        let u = (t - self.t_lo) / h;
        let (u2, u3) = (u * u, u * u * u);
        let (u4, u5) = (u3 * u, u3 * u2);

        let b = [
            1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
            u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
            0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5,
            10.0 * u3 - 15.0 * u4 + 6.0 * u5,
            -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
            0.5 * u3 - u4 + 0.5 * u5,
        ];
        let db = [
            -30.0 * u2 + 60.0 * u3 - 30.0 * u4,
            1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4,
            u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4,
            30.0 * u2 - 60.0 * u3 + 30.0 * u4,
            -12.0 * u2 + 28.0 * u3 - 15.0 * u4,
            1.5 * u2 - 4.0 * u3 + 2.5 * u4,
        ];
        let d2b = [
            -60.0 * u + 180.0 * u2 - 120.0 * u3,
            -36.0 * u + 96.0 * u2 - 60.0 * u3,
            1.0 - 9.0 * u + 18.0 * u2 - 10.0 * u3,
            60.0 * u - 180.0 * u2 + 120.0 * u3,
            -24.0 * u + 84.0 * u2 - 60.0 * u3,
            3.0 * u - 12.0 * u2 + 10.0 * u3,
        ];
        let d3b = [
            -60.0 + 360.0 * u - 360.0 * u2,
            -36.0 + 192.0 * u - 180.0 * u2,
            -9.0 + 36.0 * u - 30.0 * u2,
            60.0 - 360.0 * u + 360.0 * u2,
            -24.0 + 168.0 * u - 180.0 * u2,
            3.0 - 24.0 * u + 30.0 * u2,
        ];

        let dot = |basis: &[f64; 6]| basis.iter().zip(&self.c).map(|(b, c)| b * c).sum::<f64>();
        (
            dot(&b),
            dot(&db) / h,
            dot(&d2b) / (h * h),
            dot(&d3b) / (h * h * h),
        )
    }
}

// ---------------------------------------------------------------------------
// Tabulated warps
// ---------------------------------------------------------------------------

/// A warping function given by nodal data, interpolated with cubic Hermite
/// pieces. σ and σ' are tabulated independently (the IVP solver produces
/// both natively); σ'' comes from the curvature profile when one is
/// attached, otherwise from differentiating the σ' interpolant.
///
/// Nodes past `log_from` are stored logarithmically (`ln σ`, `σ'/σ`) so the
/// tables stay finite for super-exponential solutions.
#[derive(Clone)]
pub struct Tabulated {
    ts: Vec<f64>,
    sigma: Vec<f64>,
    dsigma: Vec<f64>,
    d2sigma: Vec<f64>,
    log_sigma: Vec<f64>,
    eta: Vec<f64>,
    deta: Vec<f64>,
    /// First node index whose *cell* `[ts[i], ts[i+1]]` is evaluated in log
    /// space. `ts.len()` when the whole table is value-space.
    log_from: usize,
    curvature: Option<CurvatureProfile>,
    truncated_at: Option<f64>,
}

impl fmt::Debug for Tabulated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tabulated")
            .field("nodes", &self.ts.len())
            .field("t_end", &self.ts.last().unwrap())
            .field("log_from", &self.log_from)
            .field("curvature", &self.curvature)
            .field("truncated_at", &self.truncated_at)
            .finish()
    }
}

impl Tabulated {
    fn locate(&self, t: f64) -> usize {
        // index i with ts[i] <= t <= ts[i+1]
        let n = self.ts.len();
        let i = self.ts.partition_point(|&x| x < t);
        i.clamp(1, n - 1) - 1
    }

    fn cell_is_log(&self, i: usize) -> bool {
        i >= self.log_from
    }

    /// (σ, σ', σ'') at `t`, where σ may overflow to +inf for log-space cells.
    fn values(&self, t: f64) -> (f64, f64, f64) {
        if t == 0.0 {
            return (0.0, self.dsigma[0], self.d2sigma[0]);
        }
        let i = self.locate(t);
        if self.cell_is_log(i) {
            let (y, dy, d2y) = self.log_triple(t, i);
            let s = y.exp();
            (s, dy * s, (d2y + dy * dy) * s)
        } else {
            let s = hermite(&self.ts, &self.sigma, &self.dsigma, i, t).0;
            let (ds, d2s) = hermite(&self.ts, &self.dsigma, &self.d2sigma, i, t);
            let d2 = match &self.curvature {
                Some(g) => g.eval(t) * s,
                None => d2s,
            };
            (s, ds, d2)
        }
    }

    /// (ln σ, (ln σ)', (ln σ)'') at `t > 0`.
    fn log_triple(&self, t: f64, i: usize) -> (f64, f64, f64) {
        if self.cell_is_log(i) {
            let y = hermite(&self.ts, &self.log_sigma, &self.eta, i, t).0;
            let (dy, d2y_interp) = hermite(&self.ts, &self.eta, &self.deta, i, t);
            let d2y = match &self.curvature {
                Some(g) => g.eval(t) - dy * dy,
                None => d2y_interp,
            };
            (y, dy, d2y)
        } else {
            let (s, ds, d2s) = self.values(t);
            let dy = ds / s;
            (s.ln(), dy, d2s / s - dy * dy)
        }
    }
}

/// Cubic Hermite value and first derivative of data `(f, df)` on cell `i`.
fn hermite(ts: &[f64], f: &[f64], df: &[f64], i: usize, t: f64) -> (f64, f64) {
    let (x0, x1) = (ts[i], ts[i + 1]);
    let h = x1 - x0;
    let u = (t - x0) / h;
    let (u2, u3) = (u * u, u * u * u);
    let v = (2.0 * u3 - 3.0 * u2 + 1.0) * f[i]
        + (u3 - 2.0 * u2 + u) * h * df[i]
        + (-2.0 * u3 + 3.0 * u2) * f[i + 1]
        + (u3 - u2) * h * df[i + 1];
    let d = ((6.0 * u2 - 6.0 * u) * f[i]
        + (3.0 * u2 - 4.0 * u + 1.0) * h * df[i]
        + (-6.0 * u2 + 6.0 * u) * f[i + 1]
        + (3.0 * u2 - 2.0 * u) * h * df[i + 1])
        / h;
    (v, d)
}

// ---------------------------------------------------------------------------
// The warping function itself
// ---------------------------------------------------------------------------

/// Machine-readable family spec; the constructor argument of [`make_family`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Euclidean,
    Hyperbolic { k: f64 },
    Spherical { k: f64 },
    SplicedExpPower { a: f64, p: f64, t0: f64 },
    /// Nodal data `t -> (σ, σ')`. Node 0 must sit at the pole.
    Tabulated {
        ts: Vec<f64>,
        sigma: Vec<f64>,
        dsigma: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
enum Family {
    Euclidean,
    Hyperbolic {
        k: f64,
    },
    Spherical {
        k: f64,
    },
    SplicedExpPower {
        a: f64,
        p: f64,
        t0: f64,
        /// `ln C` with `C = t0 · exp(-a t0^p)`, fixing value continuity
        /// `σ(t0) = t0`.
        log_c: f64,
        /// Blend of `ln σ` on `[t0/2, t0]`.
        blend: QuinticHermite,
    },
    Tabulated(Tabulated),
}

/// A warping function σ with evaluation of σ, σ', σ'' and the logarithmic
/// derivative bundle. Immutable after construction; all evaluation is pure.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    family: Family,
}

/// Build a warping function from a [`FamilySpec`]. Parameters are validated;
/// the offending parameter is named in the error.
pub fn make_family(spec: &FamilySpec) -> Result<WarpingFunction> {
    match spec {
        FamilySpec::Euclidean => Ok(WarpingFunction::euclidean()),
        FamilySpec::Hyperbolic { k } => WarpingFunction::hyperbolic(*k),
        FamilySpec::Spherical { k } => WarpingFunction::spherical(*k),
        FamilySpec::SplicedExpPower { a, p, t0 } => WarpingFunction::spliced_exp_power(*a, *p, *t0),
        FamilySpec::Tabulated { ts, sigma, dsigma } => {
            WarpingFunction::tabulated(ts.clone(), sigma.clone(), dsigma.clone(), None)
        }
    }
}

impl WarpingFunction {
    /// σ(t) = t.
    pub fn euclidean() -> Self {
        WarpingFunction {
            family: Family::Euclidean,
        }
    }

    /// σ(t) = sinh(kt)/k, curvature -k².
    pub fn hyperbolic(k: f64) -> Result<Self> {
        check_param("k", k, k > 0.0 && k.is_finite(), "must be positive")?;
        Ok(WarpingFunction {
            family: Family::Hyperbolic { k },
        })
    }

    /// σ(t) = sin(kt)/k on [0, π/k], curvature +k².
    pub fn spherical(k: f64) -> Result<Self> {
        check_param("k", k, k > 0.0 && k.is_finite(), "must be positive")?;
        Ok(WarpingFunction {
            family: Family::Spherical { k },
        })
    }

    /// The spliced exp-power family: σ(t) = t on [0, t0/2],
    /// σ(t) = C·exp(a·t^p) on [t0, ∞) with C fixed by σ(t0) = t0, and a
    /// C² quintic Hermite blend of ln σ on [t0/2, t0].
    pub fn spliced_exp_power(a: f64, p: f64, t0: f64) -> Result<Self> {
        check_param("a", a, a > 0.0 && a.is_finite(), "must be positive")?;
        check_param("p", p, p > 1.0 && p.is_finite(), "must exceed 1")?;
        check_param("t0", t0, t0 > 0.0 && t0.is_finite(), "must be positive")?;
        let log_c = t0.ln() - a * t0.powf(p);
        let t_lo = 0.5 * t0;
        // ln σ data of the linear branch at t0/2 and of the exp branch at t0.
        let left = (t_lo.ln(), 1.0 / t_lo, -1.0 / (t_lo * t_lo));
        let right = (
            t0.ln(),
            a * p * t0.powf(p - 1.0),
            a * p * (p - 1.0) * t0.powf(p - 2.0),
        );
        Ok(WarpingFunction {
            family: Family::SplicedExpPower {
                a,
                p,
                t0,
                log_c,
                blend: QuinticHermite::new(t_lo, t0, left, right),
            },
        })
    }

    /// Tabulated warp from nodal (σ, σ') data on a strictly increasing grid
    /// starting at the pole. Rejects data violating σ(0) = 0, σ'(0) = 1 or
    /// positivity off the pole.
    pub fn tabulated(
        ts: Vec<f64>,
        sigma: Vec<f64>,
        dsigma: Vec<f64>,
        curvature: Option<CurvatureProfile>,
    ) -> Result<Self> {
        if ts.len() < 3 || sigma.len() != ts.len() || dsigma.len() != ts.len() {
            return Err(Error::Precondition(
                "tabulated warp needs >= 3 nodes with matching σ and σ' columns".into(),
            ));
        }
        check_param("t[0]", ts[0], ts[0] == 0.0, "grid must start at the pole")?;
        check_param(
            "sigma[0]",
            sigma[0],
            sigma[0].abs() <= 1e-12,
            "pole normalization σ(0) = 0 violated",
        )?;
        check_param(
            "dsigma[0]",
            dsigma[0],
            (dsigma[0] - 1.0).abs() <= 1e-9,
            "pole normalization σ'(0) = 1 violated",
        )?;
        for w in ts.windows(2) {
            check_param("ts", w[1], w[1] > w[0], "grid must be strictly increasing")?;
        }
        for (t, s) in ts.iter().zip(&sigma).skip(1) {
            check_param("sigma", *s, *s > 0.0 && s.is_finite(), {
                let _ = t;
                "values must be positive and finite off the pole"
            })?;
        }
        let tab = Tabulated::from_value_nodes(ts, sigma, dsigma, curvature);
        Ok(WarpingFunction {
            family: Family::Tabulated(tab),
        })
    }

    /// Assemble a tabulated warp directly from dual-representation node data.
    /// Used by the IVP solver, which marches in log variables once σ grows
    /// past `f64` comfort.
    pub(crate) fn tabulated_dual(tab: Tabulated) -> Self {
        WarpingFunction {
            family: Family::Tabulated(tab),
        }
    }

    /// End of the evaluation domain: `+∞` for most families, `π/k` for the
    /// spherical one, the last node for tabulated data.
    pub fn domain_end(&self) -> f64 {
        match &self.family {
            Family::Euclidean | Family::Hyperbolic { .. } | Family::SplicedExpPower { .. } => {
                f64::INFINITY
            }
            Family::Spherical { k } => PI / k,
            Family::Tabulated(tab) => *tab.ts.last().unwrap(),
        }
    }

    /// Where the IVP solution hit zero, if the domain was truncated at a
    /// conjugate point.
    pub fn truncated_at(&self) -> Option<f64> {
        match &self.family {
            Family::Tabulated(tab) => tab.truncated_at,
            _ => None,
        }
    }

    /// The curvature profile attached to a tabulated warp, if any.
    pub fn curvature(&self) -> Option<&CurvatureProfile> {
        match &self.family {
            Family::Tabulated(tab) => tab.curvature.as_ref(),
            _ => None,
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let end = self.domain_end();
        // tiny slack so quadrature nodes at the very edge don't trip
        if t.is_finite() && t >= 0.0 && t <= end * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, domain_end: end })
        }
    }

    /// σ(t), σ'(t) or σ''(t). The only derivative orders anything here
    /// needs are 0, 1, 2.
    pub fn eval(&self, t: f64, order: Deriv) -> Result<f64> {
        self.check_domain(t)?;
        let (s, ds, d2s) = self.triple(t);
        Ok(match order {
            Deriv::Value => s,
            Deriv::First => ds,
            Deriv::Second => d2s,
        })
    }

    fn triple(&self, t: f64) -> (f64, f64, f64) {
        match &self.family {
            Family::Euclidean => (t, 1.0, 0.0),
            Family::Hyperbolic { k } => {
                let (sh, ch) = ((k * t).sinh(), (k * t).cosh());
                (sh / k, ch, k * sh)
            }
            Family::Spherical { k } => {
                let (sn, cs) = ((k * t).sin(), (k * t).cos());
                (sn / k, cs, -k * sn)
            }
            Family::SplicedExpPower {
                a,
                p,
                t0,
                log_c,
                blend,
            } => {
                if t <= 0.5 * t0 {
                    (t, 1.0, 0.0)
                } else {
                    let (y, dy, d2y) = if t < *t0 {
                        let (y, dy, d2y, _) = blend.eval(t);
                        (y, dy, d2y)
                    } else {
                        (
                            log_c + a * t.powf(*p),
                            a * p * t.powf(p - 1.0),
                            a * p * (p - 1.0) * t.powf(p - 2.0),
                        )
                    };
                    let s = y.exp();
                    (s, dy * s, (d2y + dy * dy) * s)
                }
            }
            Family::Tabulated(tab) => tab.values(t),
        }
    }

    /// ln σ(t); `-∞` at the pole.
    pub fn log_value(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.log_bundle(t).0)
    }

    /// σ'(t)/σ(t); `+∞` at the pole.
    pub fn log_deriv(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.log_bundle(t).1)
    }

    /// (ln σ)''(t) = σ''/σ - (σ'/σ)².
    pub fn log_curv(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.log_bundle(t).2)
    }

    /// (ln σ)'''(t) where a closed form exists; `None` for tabulated data
    /// without an attached curvature profile.
    pub fn log_curv_deriv(&self, t: f64) -> Result<Option<f64>> {
        self.check_domain(t)?;
        Ok(match &self.family {
            Family::Euclidean => Some(2.0 / (t * t * t)),
            Family::Hyperbolic { k } => {
                let sh = (k * t).sinh();
                Some(2.0 * k * k * k * (k * t).cosh() / (sh * sh * sh))
            }
            Family::Spherical { k } => {
                let sn = (k * t).sin();
                Some(2.0 * k * k * k * (k * t).cos() / (sn * sn * sn))
            }
            Family::SplicedExpPower { a, p, t0, blend, .. } => {
                if t <= 0.5 * t0 {
                    Some(2.0 / (t * t * t))
                } else if t < *t0 {
                    Some(blend.eval(t).3)
                } else {
                    Some(a * p * (p - 1.0) * (p - 2.0) * t.powf(p - 3.0))
                }
            }
            Family::Tabulated(tab) => match &tab.curvature {
                Some(g) => {
                    let i = tab.locate(t);
                    let (_, dy, d2y) = tab.log_triple(t, i);
                    g.deriv(t).map(|dg| dg - 2.0 * dy * d2y)
                }
                None => None,
            },
        })
    }

    fn log_bundle(&self, t: f64) -> (f64, f64, f64) {
        match &self.family {
            Family::Euclidean => (t.ln(), 1.0 / t, -1.0 / (t * t)),
            Family::Hyperbolic { k } => {
                let kt = k * t;
                let sh = kt.sinh();
                (
                    (sh / k).ln(),
                    k * kt.cosh() / sh,
                    -k * k / (sh * sh),
                )
            }
            Family::Spherical { k } => {
                let kt = k * t;
                let sn = kt.sin();
                ((sn / k).ln(), k * kt.cos() / sn, -k * k / (sn * sn))
            }
            Family::SplicedExpPower {
                a,
                p,
                t0,
                log_c,
                blend,
            } => {
                if t <= 0.5 * t0 {
                    (t.ln(), 1.0 / t, -1.0 / (t * t))
                } else if t < *t0 {
                    let (y, dy, d2y, _) = blend.eval(t);
                    (y, dy, d2y)
                } else {
                    (
                        log_c + a * t.powf(*p),
                        a * p * t.powf(p - 1.0),
                        a * p * (p - 1.0) * t.powf(p - 2.0),
                    )
                }
            }
            Family::Tabulated(tab) => {
                if t == 0.0 {
                    (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY)
                } else {
                    let i = tab.locate(t);
                    tab.log_triple(t, i)
                }
            }
        }
    }

    /// Human-readable family tag for provenance records.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::Euclidean => "euclidean".into(),
            Family::Hyperbolic { k } => format!("hyperbolic(k={k})"),
            Family::Spherical { k } => format!("spherical(k={k})"),
            Family::SplicedExpPower { a, p, t0, .. } => {
                format!("spliced-exp-power(a={a}, p={p}, t0={t0})")
            }
            Family::Tabulated(tab) => format!(
                "tabulated({} nodes, t_end={})",
                tab.ts.len(),
                tab.ts.last().unwrap()
            ),
        }
    }
}

impl Tabulated {
    /// Plain value-space table; second derivatives from the curvature
    /// profile when attached, else from finite differences of σ'.
    pub(crate) fn from_value_nodes(
        ts: Vec<f64>,
        sigma: Vec<f64>,
        dsigma: Vec<f64>,
        curvature: Option<CurvatureProfile>,
    ) -> Tabulated {
        let n = ts.len();
        let d2sigma: Vec<f64> = match &curvature {
            Some(g) => (0..n).map(|i| g.eval(ts[i]) * sigma[i]).collect(),
            None => fd_slopes(&ts, &dsigma),
        };
        let log_sigma: Vec<f64> = sigma.iter().map(|s| s.ln()).collect();
        let eta: Vec<f64> = (0..n)
            .map(|i| {
                if sigma[i] == 0.0 {
                    f64::INFINITY
                } else {
                    dsigma[i] / sigma[i]
                }
            })
            .collect();
        let deta: Vec<f64> = (0..n)
            .map(|i| {
                if sigma[i] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    d2sigma[i] / sigma[i] - eta[i] * eta[i]
                }
            })
            .collect();
        Tabulated {
            ts,
            sigma,
            dsigma,
            d2sigma,
            log_sigma,
            eta,
            deta,
            log_from: n,
            curvature,
            truncated_at: None,
        }
    }

    /// Dual-representation table produced by the IVP solver: value nodes up
    /// to `log_from`, log nodes (`ln σ`, `σ'/σ`) everywhere they are finite.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_dual_nodes(
        ts: Vec<f64>,
        sigma: Vec<f64>,
        dsigma: Vec<f64>,
        log_sigma: Vec<f64>,
        eta: Vec<f64>,
        log_from: usize,
        curvature: Option<CurvatureProfile>,
        truncated_at: Option<f64>,
    ) -> Tabulated {
        let n = ts.len();
        let d2sigma: Vec<f64> = match &curvature {
            Some(g) => (0..n)
                .map(|i| {
                    if sigma[i].is_finite() {
                        g.eval(ts[i]) * sigma[i]
                    } else {
                        f64::INFINITY
                    }
                })
                .collect(),
            None => fd_slopes(&ts, &dsigma),
        };
        let deta: Vec<f64> = match &curvature {
            Some(g) => (0..n)
                .map(|i| {
                    if ts[i] == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        g.eval(ts[i]) - eta[i] * eta[i]
                    }
                })
                .collect(),
            None => fd_slopes(&ts, &eta),
        };
        Tabulated {
            ts,
            sigma,
            dsigma,
            d2sigma,
            log_sigma,
            eta,
            deta,
            log_from,
            curvature,
            truncated_at,
        }
    }
}

/// Three-point finite-difference slopes on a (possibly non-uniform) grid.
fn fd_slopes(ts: &[f64], f: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if i == 0 {
            out[i] = (f[1] - f[0]) / (ts[1] - ts[0]);
        } else if i == n - 1 {
            out[i] = (f[n - 1] - f[n - 2]) / (ts[n - 1] - ts[n - 2]);
        } else {
            let (h0, h1) = (ts[i] - ts[i - 1], ts[i + 1] - ts[i]);
            out[i] = (f[i + 1] * h0 * h0 - f[i - 1] * h1 * h1 + f[i] * (h1 * h1 - h0 * h0))
                / (h0 * h1 * (h0 + h1));
        }
    }
    out
}

fn check_param(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

// ---------------------------------------------------------------------------
// Model manifolds
// ---------------------------------------------------------------------------

/// The warped product `[0, ∞) × S^{m-1}` with metric `dt² + σ(t)² dθ²`.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    dim: usize,
    warp: WarpingFunction,
}

impl ModelManifold {
    pub fn new(dim: usize, warp: WarpingFunction) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                value: dim as f64,
                reason: "model dimension must be at least 2",
            });
        }
        Ok(ModelManifold { dim, warp })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warp(&self) -> &WarpingFunction {
        &self.warp
    }

    /// `ω_{m-1}` for this model's dimension.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// Riemannian volume of the geodesic ball of radius `r`:
    /// `ω_{m-1} ∫₀^r σ^{m-1}(s) ds`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Precondition(format!(
                "ball radius must be nonnegative, got {r}"
            )));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let cfg = crate::quad::QuadratureConfig::default();
        let m1 = (self.dim - 1) as i32;
        let (v, _) = crate::quad::integrate_finite(
            |t| {
                let s = self.warp.eval(t, Deriv::Value)?;
                Ok(s.powi(m1))
            },
            0.0,
            r,
            &cfg,
        )?;
        Ok(self.sphere_area() * v)
    }
}
