//! Numerical classification of rotationally symmetric model manifolds.
//!
//! The crate decides, for a warped product `[0, ∞) × S^{m-1}` with metric
//! `dt² + σ(t)² dθ²`, whether the manifold is parabolic, stochastically
//! complete and L¹-Liouville; computes Green kernels and mean exit times;
//! validates the analytic verdicts by Monte Carlo simulation of the radial
//! diffusion; and reproduces two anisotropic 2-d constructions where the
//! usual equivalences break.
//!
//! Modules:
//!
//! * [`warp`] — warping functions, model manifolds, basic volumes;
//! * [`quad`] — adaptive quadrature and the improper-integral classifier;
//! * [`criteria`] — the classification integrals and exit-time formulas;
//! * [`diffusion`] — Euler–Maruyama simulation of the radial diffusion;
//! * [`anisotropic`] — the two conformal 2-d example constructions;
//! * [`minimal`] — the curvature IVP and the minimal-submanifold checks.

pub mod anisotropic;
pub mod criteria;
pub mod diffusion;
pub mod error;
pub mod minimal;
pub mod quad;
pub mod warp;

pub use anisotropic::{ConformalConvention, ConformalExample, GridSpec, TwoEndReport};
pub use criteria::{classification_report, ClassificationReport, ExitProfile, TriState};
pub use diffusion::{
    derive_path_seed, explosion_probe, simulate_exit, stabilization_scan, ExitTimeStats,
    ExplosionStats, SimulationConfig,
};
pub use error::{Error, Result};
pub use minimal::{minimal_report, solve_warping_ivp, HypothesisReport, MinimalOutcome};
pub use quad::{
    classify_improper, integrate_finite, ClassifierTrace, IntegralVerdict, QuadratureConfig,
};
pub use warp::{
    make_family, sphere_area, CurvatureProfile, Deriv, FamilySpec, ModelManifold, WarpingFunction,
};
