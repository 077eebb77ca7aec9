//! `singdist`: singularity distances of planar parallel manipulators along a motion.

mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use singdist::homotopy::Executor;
use singdist::kpi::{kpi_sweep, plot_scaled};
use singdist::lagrangian::{build_rrr_system, build_system_variants, BranchKind, CriticalSystem, LagrangianError};
use singdist::model::{pose_config_real, Interpretation};
use singdist::pipeline::{
    applicable_branches, case1_feasible, rrr_overall, rrr_sweep, run_ab_initio, sweep_at, system_label,
    uses_closed_form, DistanceResult, PipelineConfig, PipelineError,
};
use singdist::report::{distances_csv, kpi_csv, svg_configurations, svg_plot, Curve};

use input::{load, Problem};

#[derive(Parser)]
#[command(name = "singdist", version, about = "Closest singular configurations of 3-RPR / 3-RRR manipulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance curves along the motion, KPI table and plots.
    Sweep(SweepArgs),
    /// Per-branch minima at a single pose.
    Single(SingleArgs),
    /// Populate the start-solution cache and report root counts.
    Abinitio(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Interpretations: `all9`, `preliminary`, `3rrr`, or a comma list such as `bar-rigid,plate-plate`.
    #[arg(long, default_value = "all9")]
    interp: String,
    /// Branches: `auto` or a comma list such as `sing-variety,collinear-platform`.
    #[arg(long, default_value = "auto")]
    branches: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Start-solution cache directory.
    #[arg(long, env = "SINGDIST_CACHE", default_value = ".singdist-cache")]
    cache: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// JSON file with `design` (or `geometry`) and `motion`, optionally `rrr`.
    #[arg(long)]
    input: PathBuf,
    /// Number of poses; overrides the motion's `n`.
    #[arg(long)]
    poses: Option<usize>,
    /// Attach the sign of the constraint polynomial to the distances.
    #[arg(long)]
    signed: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    phi: f64,
    #[arg(long)]
    signed: bool,
    /// Also draw each configuration and its closest singular one into this directory.
    #[arg(long)]
    svg: Option<PathBuf>,
}

enum Selection {
    Rpr(Vec<Interpretation>),
    Rrr,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Pipeline(PipelineError),
    Io(std::io::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Model(m) => Failure::Config(m.to_string()),
            PipelineError::Lagrangian(l @ LagrangianError::IncompatibleBranch { .. }) => Failure::Config(l.to_string()),
            e => Failure::Pipeline(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Pipeline(PipelineError::CountMismatch { .. }) => 3,
            Failure::Pipeline(PipelineError::SeedTrackingFailure { .. }) => 4,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Pipeline(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn parse_selection(s: &str) -> Result<Selection, Failure> {
    match s {
        "all9" => Ok(Selection::Rpr(Interpretation::all9().to_vec())),
        "3rrr" => Ok(Selection::Rrr),
        list => list
            .split(',')
            .map(|t| t.trim().parse::<Interpretation>().map_err(|e| Failure::Config(e.to_string())))
            .collect::<Result<_, _>>()
            .map(Selection::Rpr),
    }
}

fn parse_branches(s: &str) -> Result<Option<Vec<BranchKind>>, Failure> {
    if s == "auto" {
        return Ok(None);
    }
    s.split(',')
        .map(|t| BranchKind::parse(t.trim()).ok_or_else(|| Failure::Config(format!("unknown branch `{t}`"))))
        .collect::<Result<_, _>>()
        .map(Some)
}

fn pipeline_config(c: &CommonArgs) -> Result<PipelineConfig, Failure> {
    if c.workers == 0 {
        return Err(Failure::Config("--workers must be at least 1".into()));
    }
    Ok(PipelineConfig {
        seed: c.seed,
        cache_dir: Some(c.cache.clone()),
        branches: parse_branches(&c.branches)?,
        ..PipelineConfig::default()
    })
}

/// Every requested branch must exist for at least one selected interpretation.
fn check_branches(interps: &[Interpretation], cfg: &PipelineConfig) -> Result<(), Failure> {
    for b in cfg.branches.iter().flatten() {
        if !interps.iter().any(|&i| applicable_branches(i).contains(b)) {
            let names: Vec<String> = interps.iter().map(|i| i.label()).collect();
            return Err(Failure::Config(format!("branch {b} does not apply to {}", names.join(", "))));
        }
    }
    Ok(())
}

/// Homotopy-solved systems behind `interp` for the selected branches.
fn systems_for(interp: Interpretation, problem: &Problem, cfg: &PipelineConfig) -> Result<Vec<CriticalSystem>, Failure> {
    let mut out = Vec::new();
    for branch in applicable_branches(interp) {
        if cfg.branches.as_ref().is_some_and(|l| !l.contains(&branch)) || uses_closed_form(interp, branch) {
            continue;
        }
        if branch == BranchKind::SingPointCase1 && !case1_feasible(interp, &problem.design) {
            continue;
        }
        out.extend(build_system_variants(interp, branch).map_err(PipelineError::from)?);
    }
    Ok(out)
}

fn rrr_systems(cfg: &PipelineConfig) -> Result<Vec<CriticalSystem>, Failure> {
    let all = [BranchKind::RRRParallel, BranchKind::RRRLeg(1), BranchKind::RRRLeg(2), BranchKind::RRRLeg(3)];
    if let Some(b) = cfg.branches.iter().flatten().find(|b| !all.contains(b)) {
        return Err(Failure::Config(format!("branch {b} does not apply to 3rrr")));
    }
    all.into_iter()
        .filter(|b| cfg.branches.as_ref().is_none_or(|l| l.contains(b)))
        .map(|b| build_rrr_system(b).map_err(|e| PipelineError::from(e).into()))
        .collect()
}

#[derive(Serialize)]
struct CountRecord {
    system: String,
    achieved: usize,
    expected: Option<usize>,
    ok: bool,
}

fn ab_initio_counts(systems: &[CriticalSystem], cfg: &PipelineConfig, exec: &Executor) -> Result<Vec<CountRecord>, Failure> {
    systems
        .iter()
        .map(|sys| {
            let ab = run_ab_initio(sys, cfg, exec)?;
            Ok(CountRecord {
                system: system_label(sys),
                achieved: ab.solutions.len(),
                expected: ab.expected,
                ok: ab.expected.is_none_or(|e| e == ab.solutions.len()),
            })
        })
        .collect()
}

fn curves_for(results: &[DistanceResult], signed: bool) -> Vec<Curve> {
    let mut curves = vec![Curve {
        label: "overall".into(),
        points: results.iter().map(|r| (r.phi, if signed { r.signed() } else { r.overall })).collect(),
    }];
    let Some(first) = results.first() else {
        return curves;
    };
    for (j, b) in first.branches.iter().enumerate() {
        let label = match b.variant {
            0 => b.branch.label(),
            v => format!("{}{:+}", b.branch.label(), v),
        };
        curves.push(Curve {
            label,
            points: results.iter().map(|r| (r.phi, r.branches.get(j).and_then(|m| m.distance))).collect(),
        });
    }
    curves
}

fn warn_gaps(results: &[DistanceResult]) -> usize {
    let gaps: Vec<&DistanceResult> = results.iter().filter(|r| r.has_gap()).collect();
    for r in &gaps {
        let detail: Vec<String> = r
            .branches
            .iter()
            .filter(|b| b.is_gap())
            .map(|b| format!("{} {:?} ({} failed)", b.branch, b.status, b.n_failed))
            .collect();
        eprintln!("warning: {} φ = {}: {}", r.label, r.phi, detail.join(", "));
    }
    gaps.len()
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    poses: usize,
    signed: bool,
    design: Option<singdist::model::DesignParams>,
    ab_initio: Vec<CountRecord>,
    gaps: Vec<(String, usize)>,
    files: Vec<String>,
}

fn write(out: &Path, name: &str, content: &str, files: &mut Vec<String>) -> Result<(), Failure> {
    fs::write(out.join(name), content)?;
    files.push(name.to_string());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = pipeline_config(&args.common)?;
    let selection = parse_selection(&args.common.interp)?;
    let mut problem = load(&args.input)?;
    if let Some(n) = args.poses {
        if n < 2 {
            return Err(Failure::Config(format!("--poses {n} < 2")));
        }
        problem.motion.n = n;
        if let Some(r) = problem.rrr.as_mut() {
            r.motion.n = n;
        }
    }
    let exec = Executor::new(args.common.workers);
    fs::create_dir_all(&args.out)?;
    let mut files = Vec::new();
    let mut gaps = Vec::new();
    let (all, counts, n_poses) = match selection {
        Selection::Rpr(interps) => {
            check_branches(&interps, &cfg)?;
            problem.design.validate().map_err(|e| Failure::Config(e.to_string()))?;
            problem.motion.validate().map_err(|e| Failure::Config(e.to_string()))?;
            let mut counts = Vec::new();
            for &interp in &interps {
                counts.extend(ab_initio_counts(&systems_for(interp, &problem, &cfg)?, &cfg, &exec)?);
            }
            let mut all = Vec::new();
            let mut overall = Vec::new();
            for &interp in &interps {
                let res = sweep_at(interp, &problem.design, &problem.motion, &problem.motion.poses(), args.signed, &cfg, &exec)?;
                gaps.push((interp.label(), warn_gaps(&res)));
                let label = interp.label();
                write(&args.out, &format!("distance_{label}.svg"), &svg_plot(&label, &curves_for(&res, args.signed)), &mut files)?;
                overall.push(Curve {
                    label: label.clone(),
                    points: res.iter().map(|r| (r.phi, if args.signed { r.signed() } else { r.overall })).collect(),
                });
                all.extend(res);
            }
            write(&args.out, "distances.svg", &svg_plot("Singularity distances", &overall), &mut files)?;
            let kpi = kpi_sweep(&problem.design, &problem.motion, &cfg.tracker, &exec)
                .map_err(|e| Failure::Config(e.to_string()))?;
            write(&args.out, "kpi.csv", &kpi_csv(&kpi), &mut files)?;
            let scaled = plot_scaled(&kpi);
            let kcurves: Vec<Curve> = ["M", "IR", "V(K)", "TI", "MTI", "DS", "MDS", "CN", "MCN"]
                .iter()
                .enumerate()
                .map(|(j, name)| Curve {
                    label: name.to_string(),
                    points: scaled.iter().map(|(phi, v)| (*phi, Some(v.values()[j]).filter(|x| x.is_finite()))).collect(),
                })
                .collect();
            write(&args.out, "kpi.svg", &svg_plot("Closeness indices", &kcurves), &mut files)?;
            let mut ws = vec![Curve { label: "orientation".into(), points: Vec::new() }, Curve { label: "position".into(), points: Vec::new() }];
            for (phi, v) in &kpi {
                ws[0].points.push((*phi, Some(v.orientation_dist).filter(|x| x.is_finite())));
                ws[1].points.push((*phi, Some(v.position_dist).filter(|x| x.is_finite())));
            }
            write(&args.out, "workspace_distances.svg", &svg_plot("Fixed-position / fixed-orientation distances", &ws), &mut files)?;
            (all, counts, problem.motion.n)
        }
        Selection::Rrr => {
            let rrr = problem.rrr.as_ref().ok_or_else(|| Failure::Config("input has no `rrr` section".into()))?;
            let counts = ab_initio_counts(&rrr_systems(&cfg)?, &cfg, &exec)?;
            let mut curves = Vec::new();
            for sys in rrr_systems(&cfg)? {
                curves.push(rrr_sweep(&rrr.geometry, &rrr.motion, sys.branch, args.signed, &cfg, &exec)?);
            }
            let overall = rrr_overall(&curves);
            gaps.push(("3rrr".into(), warn_gaps(&overall)));
            let mut plot = vec![Curve {
                label: "overall".into(),
                points: overall.iter().map(|r| (r.phi, if args.signed { r.signed() } else { r.overall })).collect(),
            }];
            for c in &curves {
                plot.push(Curve {
                    label: c.first().map_or(String::new(), |r| r.label.clone()),
                    points: c.iter().map(|r| (r.phi, if args.signed { r.signed() } else { r.overall })).collect(),
                });
            }
            write(&args.out, "distance_3rrr.svg", &svg_plot("3-RRR", &plot), &mut files)?;
            (curves.into_iter().flatten().chain(overall).collect(), counts, rrr.motion.n)
        }
    };
    write(&args.out, "distances.csv", &distances_csv(&all), &mut files)?;
    let mismatch = counts.iter().find(|c| !c.ok).map(|c| (c.system.clone(), c.achieved, c.expected.unwrap_or(0)));
    let summary = Summary {
        seed: cfg.seed,
        poses: n_poses,
        signed: args.signed,
        design: Some(problem.design),
        ab_initio: counts,
        gaps,
        files: files.clone(),
    };
    fs::write(args.out.join("summary.json"), serde_json::to_string_pretty(&summary).expect("serializable"))?;
    if let Some((system, achieved, expected)) = mismatch {
        return Err(PipelineError::CountMismatch { system, achieved, expected }.into());
    }
    Ok(())
}

fn cmd_single(args: &SingleArgs) -> Result<(), Failure> {
    let cfg = pipeline_config(&args.common)?;
    let interps = match parse_selection(&args.common.interp)? {
        Selection::Rpr(i) => i,
        Selection::Rrr => return Err(Failure::Config("single mode supports 3-RPR interpretations".into())),
    };
    check_branches(&interps, &cfg)?;
    let problem = load(&args.input)?;
    let exec = Executor::new(args.common.workers);
    let k = pose_config_real(&problem.design, &problem.motion, args.phi);
    for interp in interps {
        let res = sweep_at(interp, &problem.design, &problem.motion, &[args.phi], args.signed, &cfg, &exec)?;
        let r = &res[0];
        let overall = r.signed().or(r.overall);
        println!(
            "{} φ = {}: distance {} ({})",
            r.label,
            r.phi,
            overall.map_or("none".into(), |d| format!("{d:.10}")),
            r.overall_branch.map_or("-".into(), |b| b.label())
        );
        for b in &r.branches {
            println!(
                "  {:<22} {:?} distance {} real {} tracked {} failed {}",
                b.branch.label(),
                b.status,
                b.distance.map_or("-".into(), |d| format!("{d:.10}")),
                b.n_real,
                b.n_tracked,
                b.n_failed
            );
            if let Some(m) = &b.minimizer {
                let pts: Vec<String> = m.points().iter().map(|p| format!("({:.7}, {:.7})", p[0], p[1])).collect();
                println!("    K' = {}", pts.join(" "));
            }
        }
        if let (Some(dir), Some(best)) = (&args.svg, r.branch(r.overall_branch.unwrap_or(BranchKind::SingVariety))) {
            if let Some(m) = &best.minimizer {
                fs::create_dir_all(dir)?;
                let title = format!("{} at φ = {}", r.label, r.phi);
                fs::write(dir.join(format!("closest_{}.svg", r.label)), svg_configurations(&title, &k, m))?;
            }
        }
    }
    Ok(())
}

fn cmd_abinitio(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = pipeline_config(args)?;
    let exec = Executor::new(args.workers);
    let systems = match parse_selection(&args.interp)? {
        Selection::Rrr => rrr_systems(&cfg)?,
        Selection::Rpr(interps) => {
            check_branches(&interps, &cfg)?;
            let mut out = Vec::new();
            for interp in interps {
                for branch in applicable_branches(interp) {
                    if cfg.branches.as_ref().is_some_and(|l| !l.contains(&branch)) || uses_closed_form(interp, branch) {
                        continue;
                    }
                    out.extend(build_system_variants(interp, branch).map_err(PipelineError::from)?);
                }
            }
            out
        }
    };
    let counts = ab_initio_counts(&systems, &cfg, &exec)?;
    for c in &counts {
        println!(
            "{:<40} {:>4} / {}{}",
            c.system,
            c.achieved,
            c.expected.map_or("?".into(), |e| e.to_string()),
            if c.ok { "" } else { "  MISMATCH" }
        );
    }
    match counts.iter().find(|c| !c.ok) {
        Some(c) => Err(PipelineError::CountMismatch {
            system: c.system.clone(),
            achieved: c.achieved,
            expected: c.expected.unwrap_or(0),
        }
        .into()),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Single(a) => cmd_single(a),
        Command::Abinitio(a) => cmd_abinitio(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
