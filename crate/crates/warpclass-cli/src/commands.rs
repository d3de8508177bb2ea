//! The five subcommand implementations.
//!
//! Exit-code vocabulary (shared by every command so scripts can tell "no"
//! from "don't know"): 0 = certified/determined, 1 = determinate negative
//! (a hypothesis or check fails), 2 = usage error, 10 = inconclusive
//! numerics.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;

use warpclass_core::anisotropic::{
    verify_two_end_hypotheses, ConformalConvention, ConformalExample, GridSpec, TwoEndConclusion,
};
use warpclass_core::criteria::{
    classification_report, exit_time_ball, global_exit_time, ClassificationReport, TriState,
};
use warpclass_core::diffusion::{
    explosion_probe, sample_paths, simulate_exit, stabilization_scan, ExitTimeStats,
    SimulationConfig,
};
use warpclass_core::minimal::{minimal_report, MinimalConclusion};
use warpclass_core::quad::IntegralVerdict;
use warpclass_core::warp::{CurvatureProfile, ModelManifold};

use crate::emit::{csv_document, csv_f64, table_document, table_f64, to_json};
use crate::model_args::{FamilyName, ModelArgs};
use crate::{Ctx, OutputFormat, Usage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 10;

// ---------------------------------------------------------------------------
// Shared output helpers
// ---------------------------------------------------------------------------

fn tri(t: TriState) -> &'static str {
    match t {
        TriState::Yes => "yes",
        TriState::No => "no",
        TriState::Unknown => "unknown",
    }
}

#[derive(Debug, Clone, Serialize)]
struct VerdictOut {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partial_value: Option<f64>,
}

impl VerdictOut {
    fn from(v: &IntegralVerdict) -> Self {
        match v {
            IntegralVerdict::Convergent {
                value,
                error_estimate,
            } => VerdictOut {
                verdict: "convergent",
                value: Some(*value),
                error: Some(*error_estimate),
                witness_cutoff: None,
                partial_value: None,
            },
            IntegralVerdict::Divergent {
                witness_cutoff,
                partial_value,
            } => VerdictOut {
                verdict: "divergent",
                value: None,
                error: None,
                witness_cutoff: Some(*witness_cutoff),
                partial_value: Some(*partial_value),
            },
            IntegralVerdict::Inconclusive { .. } => VerdictOut {
                verdict: "inconclusive",
                value: None,
                error: None,
                witness_cutoff: None,
                partial_value: None,
            },
        }
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(csv_f64).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct ClassifyOut<'a> {
    parabolic: &'static str,
    stochastically_complete: &'static str,
    l1_liouville: &'static str,
    volume_growth_sufficient: &'static str,
    green_mass: VerdictOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    tonelli_reldiff: Option<f64>,
    provenance: &'a warpclass_core::criteria::Provenance,
}

pub fn classify(ctx: &Ctx, mm: &ModelManifold) -> Result<i32> {
    let rep: ClassificationReport = classification_report(mm, &ctx.quad)?;
    let out = ClassifyOut {
        parabolic: tri(rep.parabolic),
        stochastically_complete: tri(rep.stochastically_complete),
        l1_liouville: tri(rep.l1_liouville),
        volume_growth_sufficient: tri(rep.volume_growth_sufficient),
        green_mass: VerdictOut::from(&rep.green_mass),
        tonelli_reldiff: rep.tonelli_reldiff,
        provenance: &rep.provenance,
    };
    let rendered = match ctx.format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => csv_document(
            "parabolic,stochastically_complete,l1_liouville,volume_growth_sufficient,green_mass_verdict,green_mass_value,tonelli_reldiff",
            &[vec![
                out.parabolic.into(),
                out.stochastically_complete.into(),
                out.l1_liouville.into(),
                out.volume_growth_sufficient.into(),
                out.green_mass.verdict.into(),
                opt_cell(out.green_mass.value),
                opt_cell(out.tonelli_reldiff),
            ]],
        ),
        OutputFormat::Table => table_document(&[
            ("model".into(), rep.provenance.model.clone()),
            ("dim".into(), rep.provenance.dim.to_string()),
            ("parabolic".into(), out.parabolic.into()),
            ("stochastically_complete".into(), out.stochastically_complete.into()),
            ("l1_liouville".into(), out.l1_liouville.into()),
            ("volume_growth_sufficient".into(), out.volume_growth_sufficient.into()),
            ("green_mass".into(), match out.green_mass.value {
                Some(v) => format!("{} ({})", out.green_mass.verdict, table_f64(v)),
                None => out.green_mass.verdict.into(),
            }),
            ("tonelli_reldiff".into(), out.tonelli_reldiff.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())),
        ]),
    };
    ctx.sink.write(&rendered)?;
    let all_known = [
        rep.parabolic,
        rep.stochastically_complete,
        rep.l1_liouville,
        rep.volume_growth_sufficient,
    ]
    .iter()
    .all(|t| t.is_known());
    Ok(if all_known { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

// ---------------------------------------------------------------------------
// exit-time
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct ExitTimeArgs {
    /// Evaluation radius r >= 0
    #[arg(long)]
    pub r: f64,
    /// Ball radius R (mean exit time from B_R)
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// Classify the global mean exit time F(r) instead
    #[arg(long, conflicts_with = "big_r")]
    pub global: bool,
}

#[derive(Debug, Serialize)]
struct ExitTimeOut {
    mode: &'static str,
    r: f64,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    big_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim: Option<&'static str>,
}

pub fn exit_time(ctx: &Ctx, mm: &ModelManifold, args: &ExitTimeArgs) -> Result<i32> {
    let (out, code) = if args.global {
        let v = global_exit_time(mm, args.r, &ctx.quad)?;
        let (verdict, claim, value, code) = match &v {
            IntegralVerdict::Convergent { value, .. } => (
                "convergent",
                "not_l1_liouville",
                Some(*value),
                EXIT_OK,
            ),
            IntegralVerdict::Divergent { .. } => {
                ("divergent", "l1_liouville", None, EXIT_OK)
            }
            IntegralVerdict::Inconclusive { .. } => {
                ("inconclusive", "unknown", None, EXIT_INCONCLUSIVE)
            }
        };
        (
            ExitTimeOut {
                mode: "global",
                r: args.r,
                big_r: None,
                value,
                verdict: Some(verdict),
                claim: Some(claim),
            },
            code,
        )
    } else {
        let big_r = args
            .big_r
            .ok_or_else(|| Usage("exit-time needs --R or --global".into()))?;
        if args.r > big_r {
            return Err(Usage(format!("r = {} exceeds R = {big_r}", args.r)).into());
        }
        let value = exit_time_ball(mm, args.r, big_r, &ctx.quad)?;
        (
            ExitTimeOut {
                mode: "ball",
                r: args.r,
                big_r: Some(big_r),
                value: Some(value),
                verdict: None,
                claim: None,
            },
            EXIT_OK,
        )
    };
    let rendered = match ctx.format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => csv_document(
            "mode,r,R,value,verdict,claim",
            &[vec![
                out.mode.into(),
                csv_f64(out.r),
                opt_cell(out.big_r),
                opt_cell(out.value),
                out.verdict.unwrap_or_default().into(),
                out.claim.unwrap_or_default().into(),
            ]],
        ),
        OutputFormat::Table => {
            let mut rows = vec![("mode".to_string(), out.mode.to_string())];
            rows.push(("r".into(), table_f64(out.r)));
            if let Some(v) = out.big_r {
                rows.push(("R".into(), table_f64(v)));
            }
            if let Some(v) = out.value {
                rows.push(("value".into(), table_f64(v)));
            }
            if let Some(v) = out.verdict {
                rows.push(("verdict".into(), v.into()));
            }
            if let Some(c) = out.claim {
                rows.push(("claim".into(), c.into()));
            }
            table_document(&rows)
        }
    };
    ctx.sink.write(&rendered)?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Start radius [default: 0]
    #[arg(long)]
    pub r0: Option<f64>,
    /// Ball radius for exit-time simulation
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// Probe cap-hitting (explosion proxy) instead of ball exit
    #[arg(long)]
    pub explosion: bool,
    /// Increasing ball radii for a stabilization scan, e.g. 2,4,8,16
    #[arg(long, value_delimiter = ',')]
    pub scan: Option<Vec<f64>>,
    /// Number of paths [default: 100000]
    #[arg(long)]
    pub paths: Option<usize>,
    /// Base time step h [default: 1e-4]
    #[arg(long)]
    pub step: Option<f64>,
    /// Explosion cap radius [default: 50]
    #[arg(long)]
    pub cap: Option<f64>,
    /// Time horizon [default: 10]
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Pole guard ε [default: 1e-3]
    #[arg(long)]
    pub pole_guard: Option<f64>,
    /// Compare the mean against the quadrature oracle; exit 1 outside
    /// 3·SE + 1% of it
    #[arg(long)]
    pub check: bool,
    /// Dump the first N paths as CSV (columns path_index,step,t,r)
    #[arg(long)]
    pub trace_paths: Option<u64>,
    /// Where the trace CSV goes (required with --trace-paths)
    #[arg(long)]
    pub trace_file: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    model: String,
    dim: usize,
    r0: f64,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    big_r: Option<f64>,
    step_size: f64,
    n_paths: usize,
    master_seed: u64,
    cap_radius: f64,
    horizon: f64,
    pole_guard: f64,
}

#[derive(Debug, Serialize)]
struct StatsOut<'a> {
    n_paths: usize,
    n_exited: usize,
    n_censored: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<CheckOut>,
    config_echo: &'a ConfigEcho,
}

#[derive(Debug, Serialize)]
struct CheckOut {
    oracle: f64,
    band: f64,
    deviation: f64,
    pass: bool,
}

fn stats_csv_row(big_r: f64, st: &ExitTimeStats) -> Vec<String> {
    vec![
        csv_f64(big_r),
        st.n_paths.to_string(),
        st.n_exited.to_string(),
        st.n_censored.to_string(),
        opt_cell(st.mean),
        opt_cell(st.se),
        opt_cell(st.min),
        opt_cell(st.max),
    ]
}

pub fn simulate(ctx: &Ctx, mm: &ModelManifold, args: &SimulateArgs) -> Result<i32> {
    let sim = &ctx.file.simulation;
    let r0 = args.r0.unwrap_or(0.0);
    let cfg = SimulationConfig {
        step_size: args.step.or(sim.step).unwrap_or(1e-4),
        n_paths: args.paths.or(sim.paths).unwrap_or(100_000),
        master_seed: ctx.seed,
        cap_radius: args.cap.or(sim.cap).unwrap_or(50.0),
        horizon: args.horizon.or(sim.horizon).unwrap_or(10.0),
        pole_guard: args.pole_guard.or(sim.pole_guard).unwrap_or(1e-3),
    };
    let modes = [args.big_r.is_some(), args.explosion, args.scan.is_some()];
    if modes.iter().filter(|&&b| b).count() != 1 {
        return Err(Usage("simulate needs exactly one of --R, --explosion, --scan".into()).into());
    }

    let echo = ConfigEcho {
        model: mm.warp().describe(),
        dim: mm.dim(),
        r0,
        big_r: args.big_r,
        step_size: cfg.step_size,
        n_paths: cfg.n_paths,
        master_seed: cfg.master_seed,
        cap_radius: cfg.cap_radius,
        horizon: cfg.horizon,
        pole_guard: cfg.pole_guard,
    };

    if let Some(big_r) = args.big_r {
        let stats = simulate_exit(mm, r0, big_r, &cfg)?;
        if let (Some(n), Some(path)) = (args.trace_paths, &args.trace_file) {
            let indices: Vec<u64> = (0..n).collect();
            let traces = sample_paths(mm, r0, big_r, &cfg, &indices)?;
            let mut rows = Vec::new();
            for tr in &traces {
                for (step, t, r) in &tr.samples {
                    rows.push(vec![
                        tr.path_index.to_string(),
                        step.to_string(),
                        csv_f64(*t),
                        csv_f64(*r),
                    ]);
                }
            }
            std::fs::write(path, csv_document("path_index,step,t,r", &rows))?;
        } else if args.trace_paths.is_some() {
            return Err(Usage("--trace-paths needs --trace-file".into()).into());
        }

        let check = if args.check {
            let oracle = exit_time_ball(mm, r0, big_r, &ctx.quad)?;
            match (stats.mean, stats.se) {
                (Some(mean), Some(se)) => {
                    let band = 3.0 * se + 0.01 * oracle;
                    Some(CheckOut {
                        oracle,
                        band,
                        deviation: (mean - oracle).abs(),
                        pass: (mean - oracle).abs() <= band,
                    })
                }
                _ => Some(CheckOut {
                    oracle,
                    band: 0.0,
                    deviation: f64::INFINITY,
                    pass: false,
                }),
            }
        } else {
            None
        };
        let pass = check.as_ref().map(|c| c.pass);
        let out = StatsOut {
            n_paths: stats.n_paths,
            n_exited: stats.n_exited,
            n_censored: stats.n_censored,
            mean: stats.mean,
            se: stats.se,
            min: stats.min,
            max: stats.max,
            check,
            config_echo: &echo,
        };
        let rendered = match ctx.format {
            OutputFormat::Json => to_json(&out)?,
            OutputFormat::Csv => csv_document(
                "R,n_paths,n_exited,n_censored,mean,se,min,max",
                &[stats_csv_row(big_r, &stats)],
            ),
            OutputFormat::Table => table_document(&[
                ("n_paths".into(), stats.n_paths.to_string()),
                ("n_exited".into(), stats.n_exited.to_string()),
                ("n_censored".into(), stats.n_censored.to_string()),
                (
                    "mean".into(),
                    stats.mean.map(table_f64).unwrap_or_else(|| "-".into()),
                ),
                (
                    "se".into(),
                    stats.se.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into()),
                ),
            ]),
        };
        ctx.sink.write(&rendered)?;
        return Ok(match pass {
            Some(false) => EXIT_NEGATIVE,
            _ => EXIT_OK,
        });
    }

    if args.explosion {
        let probe = explosion_probe(mm, r0, &cfg)?;
        #[derive(Serialize)]
        struct ExplosionOut<'a> {
            #[serde(flatten)]
            probe: &'a warpclass_core::diffusion::ExplosionStats,
            config_echo: &'a ConfigEcho,
        }
        let out = ExplosionOut {
            probe: &probe,
            config_echo: &echo,
        };
        let rendered = match ctx.format {
            OutputFormat::Json => to_json(&out)?,
            OutputFormat::Csv => csv_document(
                "n_paths,n_reached,fraction,ci_low,ci_high,mean_hit_time,cap_radius,horizon",
                &[vec![
                    probe.n_paths.to_string(),
                    probe.n_reached.to_string(),
                    csv_f64(probe.fraction),
                    csv_f64(probe.ci_low),
                    csv_f64(probe.ci_high),
                    opt_cell(probe.mean_hit_time),
                    csv_f64(probe.cap_radius),
                    csv_f64(probe.horizon),
                ]],
            ),
            OutputFormat::Table => table_document(&[
                ("fraction".into(), table_f64(probe.fraction)),
                (
                    "ci95".into(),
                    format!("[{}, {}]", table_f64(probe.ci_low), table_f64(probe.ci_high)),
                ),
                (
                    "mean_hit_time".into(),
                    probe
                        .mean_hit_time
                        .map(table_f64)
                        .unwrap_or_else(|| "-".into()),
                ),
            ]),
        };
        ctx.sink.write(&rendered)?;
        return Ok(EXIT_OK);
    }

    // stabilization scan
    let r_list = args.scan.clone().unwrap();
    let rows = stabilization_scan(mm, r0, &r_list, &cfg)?;
    #[derive(Serialize)]
    struct ScanRow<'a> {
        #[serde(rename = "R")]
        big_r: f64,
        #[serde(flatten)]
        stats: &'a ExitTimeStats,
    }
    #[derive(Serialize)]
    struct ScanOut<'a> {
        rows: Vec<ScanRow<'a>>,
        config_echo: &'a ConfigEcho,
    }
    let out = ScanOut {
        rows: rows
            .iter()
            .map(|(r, s)| ScanRow { big_r: *r, stats: s })
            .collect(),
        config_echo: &echo,
    };
    let rendered = match ctx.format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => csv_document(
            "R,n_paths,n_exited,n_censored,mean,se,min,max",
            &rows
                .iter()
                .map(|(r, s)| stats_csv_row(*r, s))
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Table => table_document(
            &rows
                .iter()
                .map(|(r, s)| {
                    (
                        format!("R = {}", table_f64(*r)),
                        format!(
                            "mean {}  se {}",
                            s.mean.map(table_f64).unwrap_or_else(|| "-".into()),
                            s.se.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
                        ),
                    )
                })
                .collect::<Vec<_>>(),
        ),
    };
    ctx.sink.write(&rendered)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// example
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionName {
    /// dṽ = λ² dv (the 2-d-consistent bookkeeping; lower bound exact)
    Lambda2Dv,
    /// dṽ = λ dv (lower bound recorded, not asserted)
    LambdaDv,
}

impl ConventionName {
    fn to_core(self) -> ConformalConvention {
        match self {
            ConventionName::Lambda2Dv => ConformalConvention::LambdaSquaredVolume,
            ConventionName::LambdaDv => ConformalConvention::LambdaVolume,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OneEndArgs {
    /// Conformal bookkeeping convention [default: lambda2-dv]
    #[arg(long, value_enum)]
    pub convention: Option<ConventionName>,
    /// Gated grid: smallest radius [default: 1.2]
    #[arg(long)]
    pub grid_r_min: Option<f64>,
    /// Gated grid: largest radius [default: 6]
    #[arg(long)]
    pub grid_r_max: Option<f64>,
    /// Gated grid: nodes per axis [default: 200]
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Sector-mass cutoffs [default: 2,4,8]
    #[arg(long, value_delimiter = ',')]
    pub r_cuts: Option<Vec<f64>>,
    /// Also write the sector-mass table as CSV to this path
    #[arg(long)]
    pub sector_csv: Option<PathBuf>,
}

pub fn example_one_end(ctx: &Ctx, mm: ModelManifold, args: &OneEndArgs) -> Result<i32> {
    let convention = args
        .convention
        .unwrap_or(ConventionName::Lambda2Dv)
        .to_core();
    let ex = ConformalExample::new(mm, convention, &ctx.quad)?;
    let grid = GridSpec {
        r_min: args.grid_r_min.unwrap_or(1.2),
        r_max: args.grid_r_max.unwrap_or(6.0),
        n_r: args.grid_n.unwrap_or(200),
        n_theta: args.grid_n.unwrap_or(200),
        ..GridSpec::default_gated()
    };
    let cert = ex.max_principle_check(&grid)?;
    let r_cuts = args.r_cuts.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0]);
    let masses: Vec<_> = r_cuts
        .iter()
        .map(|&r| ex.sector_green_mass(r))
        .collect::<warpclass_core::Result<_>>()?;
    let divergence = ex.sector_mass_divergence()?;

    let sector_rows: Vec<Vec<String>> = masses
        .iter()
        .map(|m| vec![csv_f64(m.r_cut), csv_f64(m.mass), csv_f64(m.lower_bound)])
        .collect();
    let sector_csv = csv_document("R_cut,mass,lower_bound", &sector_rows);
    if let Some(path) = &args.sector_csv {
        std::fs::write(path, &sector_csv)?;
    }

    #[derive(Serialize)]
    struct OneEndOut<'a> {
        certificate: &'a warpclass_core::anisotropic::MaxPrincipleCertificate,
        sector_masses: &'a [warpclass_core::anisotropic::SectorMass],
        sector_divergence: VerdictOut,
    }
    let out = OneEndOut {
        certificate: &cert,
        sector_masses: &masses,
        sector_divergence: VerdictOut::from(&divergence),
    };
    let rendered = match ctx.format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => sector_csv.clone(),
        OutputFormat::Table => table_document(&[
            (
                "min Δ̃v (gated)".into(),
                cert.min_value.map(table_f64).unwrap_or_else(|| "-".into()),
            ),
            ("bound √2/4".into(), table_f64(cert.bound)),
            ("gated / skipped".into(), format!("{} / {}", cert.n_gated, cert.n_skipped)),
            ("sup v_o".into(), table_f64(cert.sup_v_o)),
            (
                "sector divergence".into(),
                VerdictOut::from(&divergence).verdict.into(),
            ),
        ]),
    };
    ctx.sink.write(&rendered)?;

    let bounds_ok = match convention {
        ConformalConvention::LambdaSquaredVolume => masses.iter().all(|m| m.bound_satisfied),
        ConformalConvention::LambdaVolume => true,
    };
    Ok(if divergence.is_inconclusive() {
        EXIT_INCONCLUSIVE
    } else if cert.certified && bounds_ok && divergence.is_divergent() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

#[derive(Debug, Clone, Args)]
pub struct TwoEndArgs {
    /// First end's family (needs infinite volume)
    #[arg(long = "sigma1", value_enum)]
    pub sigma1: FamilyName,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub t01: Option<f64>,
    #[arg(long)]
    pub file1: Option<PathBuf>,
    /// Second end's family (needs stochastic incompleteness)
    #[arg(long = "sigma2", value_enum)]
    pub sigma2: FamilyName,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub t02: Option<f64>,
    #[arg(long)]
    pub file2: Option<PathBuf>,
}

pub fn example_two_end(ctx: &Ctx, args: &TwoEndArgs) -> Result<i32> {
    let w1 = ModelArgs {
        dim: Some(2),
        family: Some(args.sigma1),
        k: args.k1,
        a: args.a1,
        p: args.p1,
        t0: args.t01,
        file: args.file1.clone(),
    }
    .resolve(&Default::default())?
    .warp()
    .clone();
    let w2 = ModelArgs {
        dim: Some(2),
        family: Some(args.sigma2),
        k: args.k2,
        a: args.a2,
        p: args.p2,
        t0: args.t02,
        file: args.file2.clone(),
    }
    .resolve(&Default::default())?
    .warp()
    .clone();
    let rep = verify_two_end_hypotheses(&w1, &w2, &ctx.quad)?;

    #[derive(Serialize)]
    struct TwoEndOut {
        volume_integral: VerdictOut,
        si_integral: VerdictOut,
        conclusion: TwoEndConclusion,
    }
    let out = TwoEndOut {
        volume_integral: VerdictOut::from(&rep.volume_integral),
        si_integral: VerdictOut::from(&rep.si_integral),
        conclusion: rep.conclusion,
    };
    let rendered = match ctx.format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => csv_document(
            "volume_verdict,si_verdict,conclusion",
            &[vec![
                out.volume_integral.verdict.into(),
                out.si_integral.verdict.into(),
                format!("{:?}", rep.conclusion),
            ]],
        ),
        OutputFormat::Table => table_document(&[
            ("volume integral".into(), out.volume_integral.verdict.into()),
            ("incompleteness integral".into(), out.si_integral.verdict.into()),
            ("conclusion".into(), format!("{:?}", rep.conclusion)),
        ]),
    };
    ctx.sink.write(&rendered)?;
    Ok(match rep.conclusion {
        TwoEndConclusion::HypothesesHold => EXIT_OK,
        TwoEndConclusion::CannotCertify => EXIT_INCONCLUSIVE,
        _ => EXIT_NEGATIVE,
    })
}

// ---------------------------------------------------------------------------
// minimal
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct MinimalArgs {
    /// Curvature bound G: `const:C`, `poly:c0,c1,...` (even polynomial in
    /// t², coefficients of 1, t², t⁴, ...), or `poly-sq:3t^2` (G = q² + q'
    /// for the log-derivative target q = c·t^k)
    #[arg(long = "G")]
    pub curvature: String,
    /// Submanifold dimension m >= 2 [default: 2]
    #[arg(short = 'm', long = "dim")]
    pub dim: Option<usize>,
    /// IVP integration horizon [default: 10]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// IVP step size [default: 1e-3]
    #[arg(long)]
    pub ivp_h: Option<f64>,
}

pub fn parse_curvature(spec: &str) -> Result<CurvatureProfile> {
    if let Some(rest) = spec.strip_prefix("const:") {
        let c: f64 = rest
            .parse()
            .map_err(|_| Usage(format!("bad constant curvature `{rest}`")))?;
        return Ok(CurvatureProfile::Constant(c));
    }
    if let Some(rest) = spec.strip_prefix("poly-sq:") {
        // monomial log-derivative target c·t^k
        let (c_str, k_str) = rest
            .split_once("t^")
            .ok_or_else(|| Usage(format!("bad poly-sq spec `{rest}`, expected like 3t^2")))?;
        let c: f64 = if c_str.is_empty() {
            1.0
        } else {
            c_str
                .parse()
                .map_err(|_| Usage(format!("bad coefficient `{c_str}`")))?
        };
        let k: u32 = k_str
            .parse()
            .map_err(|_| Usage(format!("bad exponent `{k_str}`")))?;
        return Ok(CurvatureProfile::LogDerivSq { c, k });
    }
    if let Some(rest) = spec.strip_prefix("poly:") {
        let coeffs: Vec<f64> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Usage(format!("bad coefficient `{s}`")).into())
            })
            .collect::<Result<_>>()?;
        if coeffs.is_empty() {
            return Err(Usage("poly: needs at least one coefficient".into()).into());
        }
        return Ok(CurvatureProfile::EvenPoly(coeffs));
    }
    Err(Usage(format!(
        "unknown curvature spec `{spec}` (use const:, poly:, or poly-sq:)"
    ))
    .into())
}

pub fn minimal(ctx: &Ctx, args: &MinimalArgs) -> Result<i32> {
    let curvature = parse_curvature(&args.curvature)?;
    let m = args.dim.unwrap_or(2);
    let t_max = args.tmax.unwrap_or(10.0);
    let h = args.ivp_h.unwrap_or(1e-3);
    let outcome = minimal_report(&curvature, m, t_max, h, &ctx.quad)?;
    let rep = &outcome.report;

    #[derive(Serialize)]
    struct MinimalOut<'a> {
        curvature: &'a str,
        m: usize,
        t_max: f64,
        ivp_h: f64,
        #[serde(flatten)]
        report: &'a warpclass_core::minimal::HypothesisReport,
    }
    let out = MinimalOut {
        curvature: &args.curvature,
        m,
        t_max,
        ivp_h: h,
        report: rep,
    };
    let rendered = match ctx.format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => csv_document(
            "sigma_nonneg_deriv,sigma_condition_pass,min_margin,f_verdict,conclusion",
            &[vec![
                rep.sigma_nonneg_deriv.to_string(),
                rep.sigma_condition
                    .as_ref()
                    .map(|c| c.pass.to_string())
                    .unwrap_or_default(),
                rep.sigma_condition
                    .as_ref()
                    .map(|c| csv_f64(c.min_margin))
                    .unwrap_or_default(),
                VerdictOut::from(&rep.f_integrability).verdict.into(),
                format!("{:?}", rep.conclusion),
            ]],
        ),
        OutputFormat::Table => table_document(&[
            ("σ' >= 0".into(), rep.sigma_nonneg_deriv.to_string()),
            (
                "σ-condition".into(),
                rep.sigma_condition
                    .as_ref()
                    .map(|c| format!("pass = {}, min margin {:.3e} at t = {}", c.pass, c.min_margin, table_f64(c.argmin_t)))
                    .unwrap_or_else(|| "-".into()),
            ),
            (
                "F integrability".into(),
                VerdictOut::from(&rep.f_integrability).verdict.into(),
            ),
            ("conclusion".into(), rep.conclusion_text.clone()),
        ]),
    };
    ctx.sink.write(&rendered)?;
    Ok(match rep.conclusion {
        MinimalConclusion::NotL1Liouville => EXIT_OK,
        MinimalConclusion::HypothesesFail | MinimalConclusion::NoConclusionExitTimeInfinite => {
            EXIT_NEGATIVE
        }
        MinimalConclusion::Inconclusive => EXIT_INCONCLUSIVE,
    })
}
