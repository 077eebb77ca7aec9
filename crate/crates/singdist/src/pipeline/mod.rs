//! Ab-initio solve, seeding at a complex pose, parameter sweep over the poses of
//! a motion, and reduction of the real critical points to distances.

mod cache;
mod rrr;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homotopy::{
    filter_real, keyed_gamma, monodromy_solve, parameter_sweep, random_complex, seed_by_parameter_reversal,
    track_set, Executor, HomotopyError, MonodromySettings, MonodromyStats, SolutionSet, TrackerSettings,
};
use crate::lagrangian::{
    build_system_variants, pedal_projection, BranchKind, CriticalSystem, LagrangianError, Shapes,
};
use crate::metrics::extrinsic_dist2;
use crate::model::{pose_config, pose_config_real, Configuration, DesignParams, Interpretation, MotionSpec, ModelError, Side};
use crate::scalar::{Pt, C64};
use crate::varieties::singularity_polynomial;

pub use cache::{cache_key, load_cached, store_cached};
pub use rrr::{rrr_overall, rrr_sweep, RrrGeometry, RrrMotion};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{system}: ab-initio produced {achieved} solutions, expected {expected}")]
    CountMismatch {
        system: String,
        achieved: usize,
        expected: usize,
    },
    #[error("{system}: {failed} of {total} paths failed while tracking to the seed pose")]
    SeedTrackingFailure {
        system: String,
        failed: usize,
        total: usize,
    },
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cache: {0}")]
    Cache(String),
}

/// Numerical settings shared by every stage.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub seed: u64,
    pub tracker: TrackerSettings,
    pub monodromy: MonodromySettings,
    /// Largest imaginary part accepted for a real critical point.
    pub imag_tol: f64,
    pub cache_dir: Option<PathBuf>,
    /// Restricts the swept branches; `None` uses the applicability matrix.
    pub branches: Option<Vec<BranchKind>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            tracker: TrackerSettings::default(),
            monodromy: MonodromySettings::default(),
            imag_tol: 1e-6,
            cache_dir: None,
            branches: None,
        }
    }
}

/// Label used in cache keys, errors and seeds.
pub fn system_label(sys: &CriticalSystem) -> String {
    let head = sys.interp.map(|i| i.label()).unwrap_or_else(|| "3rrr".into());
    match sys.variant {
        0 => format!("{head}.{}", sys.branch.label()),
        v if v > 0 => format!("{head}.{}.plus", sys.branch.label()),
        _ => format!("{head}.{}.minus", sys.branch.label()),
    }
}

/// Deterministic sub-seed for one stage of one system.
pub fn stream_seed(seed: u64, tag: &str) -> u64 {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    tag.hash(&mut h);
    h.finish()
}

fn rng_for(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, tag))
}

/// Generic finite solutions at a random complex source configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbInitio {
    pub system: String,
    pub n_unknowns: usize,
    pub source: Configuration<C64>,
    pub source_params: Vec<C64>,
    pub solutions: Vec<Vec<C64>>,
    pub expected: Option<usize>,
    pub stats: MonodromyStats,
}

/// Random complex source configuration in the fixed-frame normal form
/// (`k1 = 0`, `k2` on the first axis), or nine generic points for 3-RRR.
pub fn source_configuration<R: Rng>(arity: usize, rng: &mut R) -> Configuration<C64> {
    let zero = C64::new(0.0, 0.0);
    let mut pts: Vec<Pt<C64>> = Vec::with_capacity(arity);
    if arity == 6 {
        pts.push([zero, zero]);
        pts.push([random_complex(rng), zero]);
        for _ in 2..6 {
            pts.push([random_complex(rng), random_complex(rng)]);
        }
    } else {
        for _ in 0..arity {
            pts.push([random_complex(rng), random_complex(rng)]);
        }
    }
    Configuration::new(pts).expect("6 or 9 points")
}

/// Populates the generic solution set of `sys` by monodromy at a parameter-reversal
/// seed, then moves it to a random complex source configuration.
///
/// Loads from and stores to `cfg.cache_dir` when set.
pub fn run_ab_initio(sys: &CriticalSystem, cfg: &PipelineConfig, exec: &Executor) -> Result<AbInitio, PipelineError> {
    let label = system_label(sys);
    let key = cache_key(sys, cfg.seed);
    if let Some(dir) = &cfg.cache_dir {
        if let Some(ab) = load_cached(dir, &key)? {
            if ab.n_unknowns == sys.n_unknowns() && ab.expected == sys.expected_count {
                return Ok(ab);
            }
        }
    }
    let mut rng = rng_for(cfg.seed, &format!("{label}/ab-initio"));
    let (p0, x0) = seed_by_parameter_reversal(&sys.family, &mut rng)?;
    let (set, stats) = match monodromy_solve(
        &sys.family,
        &p0,
        x0,
        sys.expected_count,
        &cfg.monodromy,
        &mut rng,
        exec,
    ) {
        Ok(r) => r,
        Err(HomotopyError::Stalled { achieved, target }) => {
            return Err(PipelineError::CountMismatch {
                system: label,
                achieved,
                expected: target,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let arity = if sys.interp.is_some() { 6 } else { 9 };
    let starts: Vec<Vec<C64>> = set.points.iter().map(|s| s.x.clone()).collect();
    let mut last = 0;
    for _ in 0..3 {
        let source = source_configuration(arity, &mut rng);
        let params = sys.params_for(&source, &Shapes::from_configuration(&source));
        let gamma = crate::homotopy::random_gamma(&mut rng);
        let out = track_set(&sys.family, &p0, &params, gamma, &starts, &cfg.tracker, exec);
        last = out.solutions.len();
        if out.n_failed == 0 && out.solutions.n_diverged == 0 && last == starts.len() {
            let ab = AbInitio {
                system: label,
                n_unknowns: sys.n_unknowns(),
                source,
                source_params: params,
                solutions: out.solutions.points.into_iter().map(|s| s.x).collect(),
                expected: sys.expected_count,
                stats,
            };
            if let Some(dir) = &cfg.cache_dir {
                store_cached(dir, &key, &ab)?;
            }
            return Ok(ab);
        }
    }
    Err(PipelineError::CountMismatch {
        system: label,
        achieved: last,
        expected: sys.expected_count.unwrap_or(starts.len()),
    })
}

/// Random complex path parameter with real part in `(0, 1)` and a small
/// imaginary part, so the seed pose stays near the real interval and its
/// configuration well scaled.
pub fn seed_alpha<R: Rng>(rng: &mut R) -> C64 {
    let re = rng.gen_range(0.05..0.95);
    let im = rng.gen_range(0.05..0.15) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    C64::new(re, im)
}

/// Complete solution set at a complex pose of the motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSet {
    pub alpha: C64,
    pub phi: C64,
    pub params: Vec<C64>,
    pub solutions: Vec<Vec<C64>>,
}

/// Tracks the source solutions to the parameters of the complex pose
/// `φ = v − (v − w)(1 − α)` of the interval `[v, w]`, with `α` random complex
/// unless given.
pub fn seed_phase(
    sys: &CriticalSystem,
    ab: &AbInitio,
    interval: (f64, f64),
    params_at: &(dyn Fn(C64) -> Vec<C64> + Sync),
    alpha: Option<C64>,
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<SeedSet, PipelineError> {
    let (v, w) = interval;
    if !(v < w) {
        return Err(ModelError::InvalidMotion(format!("interval [{v}, {w}] is empty")).into());
    }
    let label = system_label(sys);
    let mut rng = rng_for(cfg.seed, &format!("{label}/seed"));
    let alpha = alpha.unwrap_or_else(|| seed_alpha(&mut rng));
    let phi = C64::new(v, 0.0) - (C64::new(1.0, 0.0) - alpha) * (v - w);
    let params = params_at(phi);
    let gamma = keyed_gamma(cfg.seed, &params);
    let out = track_set(&sys.family, &ab.source_params, &params, gamma, &ab.solutions, &cfg.tracker, exec);
    let bad = ab.solutions.len() - out.solutions.len();
    if out.n_failed > 0 || bad > 0 {
        return Err(PipelineError::SeedTrackingFailure {
            system: label,
            failed: bad.max(out.n_failed),
            total: ab.solutions.len(),
        });
    }
    Ok(SeedSet {
        alpha,
        phi,
        params,
        solutions: out.solutions.points.into_iter().map(|s| s.x).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchStatus {
    /// Minimum over at least one real critical point, all paths resolved.
    Ok,
    /// Minimum found but some paths failed; the value may not be global.
    Incomplete,
    /// No real critical point at this pose.
    NoRealSolution,
    /// The branch cannot occur for this design.
    Infeasible,
}

/// Minimum of one branch at one pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchMinimum {
    pub branch: BranchKind,
    pub variant: i8,
    pub status: BranchStatus,
    pub distance: Option<f64>,
    pub minimizer: Option<Configuration<f64>>,
    pub n_real: usize,
    pub n_tracked: usize,
    pub n_failed: usize,
}

impl BranchMinimum {
    fn infeasible(branch: BranchKind, variant: i8) -> Self {
        BranchMinimum {
            branch,
            variant,
            status: BranchStatus::Infeasible,
            distance: None,
            minimizer: None,
            n_real: 0,
            n_tracked: 0,
            n_failed: 0,
        }
    }

    /// A gap is a pose where this branch yields no trustworthy value.
    pub fn is_gap(&self) -> bool {
        matches!(self.status, BranchStatus::Incomplete | BranchStatus::NoRealSolution)
    }
}

/// Distance of one pose under one interpretation (or one 3-RRR curve).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub phi: f64,
    pub label: String,
    pub branches: Vec<BranchMinimum>,
    pub overall: Option<f64>,
    pub overall_branch: Option<BranchKind>,
    /// `±1` (or `0` on the variety) when signed output was requested.
    pub sign: Option<i8>,
}

impl DistanceResult {
    fn combine(phi: f64, label: String, branches: Vec<BranchMinimum>, sign: Option<i8>) -> Self {
        let best = branches
            .iter()
            .filter_map(|b| b.distance.map(|d| (d, b.branch)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        DistanceResult {
            phi,
            label,
            overall: best.map(|b| b.0),
            overall_branch: best.map(|b| b.1),
            branches,
            sign,
        }
    }

    /// Overall distance times the sign, when both exist.
    pub fn signed(&self) -> Option<f64> {
        self.overall.map(|d| d * self.sign.map_or(1.0, f64::from))
    }

    pub fn branch(&self, b: BranchKind) -> Option<&BranchMinimum> {
        self.branches
            .iter()
            .filter(|m| m.branch == b && m.distance.is_some())
            .min_by(|x, y| x.distance.unwrap().total_cmp(&y.distance.unwrap()))
            .or_else(|| self.branches.iter().find(|m| m.branch == b))
    }

    /// Whether any contributing branch left a gap at this pose.
    pub fn has_gap(&self) -> bool {
        self.overall.is_none() || self.branches.iter().any(BranchMinimum::is_gap)
    }
}

/// Branches feeding the overall minimum of `interp`.
pub fn applicable_branches(interp: Interpretation) -> Vec<BranchKind> {
    use Side::*;
    let Interpretation::Pair { platform, base } = interp else {
        return vec![BranchKind::SingVariety];
    };
    let mut out = vec![BranchKind::SingVariety];
    if platform == BarTriangle {
        out.push(BranchKind::CollinearityP);
    }
    if base == BarTriangle {
        out.push(BranchKind::CollinearityB);
    }
    if platform != BarTriangle && base != BarTriangle {
        out.push(BranchKind::SingPointCase1);
    }
    if platform == BarTriangle && base == Rigid {
        out.push(BranchKind::CollapsedP);
    }
    if base == BarTriangle && platform == Rigid {
        out.push(BranchKind::CollapsedB);
    }
    out
}

/// Whether the collinearity branch is solved by the pedal-point closed form.
pub fn uses_closed_form(interp: Interpretation, branch: BranchKind) -> bool {
    match (branch, interp) {
        (BranchKind::CollinearityP, Interpretation::Pair { base, .. }) => base != Side::Rigid,
        (BranchKind::CollinearityB, Interpretation::Pair { platform, .. }) => platform != Side::Rigid,
        _ => false,
    }
}

/// Rigid sides must already be collinear for the collinear-all branch to exist.
pub fn case1_feasible(interp: Interpretation, design: &DesignParams) -> bool {
    let flat = |xa: f64, xb: f64, yb: f64| yb.abs() <= 1e-12 * (1.0 + xa.abs() + xb.abs());
    let base_ok = interp.base() != Some(Side::Rigid) || flat(design.x2, design.x3, design.y3);
    let plat_ok = interp.platform() != Some(Side::Rigid) || flat(design.x5, design.x6, design.y6);
    base_ok && plat_ok
}

/// Reduces the real critical points of one pose to the branch minimum.
pub fn branch_minimum(
    sys: &CriticalSystem,
    k: &Configuration<f64>,
    params: &[C64],
    solutions: &SolutionSet,
    imag_tol: f64,
) -> BranchMinimum {
    let real = filter_real(solutions, &sys.family, params, imag_tol);
    let mut best: Option<(f64, Configuration<f64>)> = None;
    for s in &real.points {
        let kp = sys.reconstruct(&s.x, params).re();
        if !(sys.constraint_residual(&kp) < 1e-8) {
            continue;
        }
        let d = sys.dist2(k, &kp).max(0.0).sqrt();
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, kp));
        }
    }
    let failed = solutions.n_failed;
    let status = match (&best, failed) {
        (None, _) => BranchStatus::NoRealSolution,
        (Some(_), 0) => BranchStatus::Ok,
        _ => BranchStatus::Incomplete,
    };
    let (distance, minimizer) = match best {
        Some((d, kp)) => (Some(d), Some(kp)),
        None => (None, None),
    };
    BranchMinimum {
        branch: sys.branch,
        variant: sys.variant,
        status,
        distance,
        minimizer,
        n_real: real.len(),
        n_tracked: solutions.n_tracked,
        n_failed: failed,
    }
}

/// Runs ab-initio, seeding and the sweep of one system over real poses.
///
/// `params_at` maps a (complex) pose to the system's parameter vector and
/// `config_at` a real pose to the configuration whose distance is measured.
pub fn sweep_system(
    sys: &CriticalSystem,
    interval: (f64, f64),
    phis: &[f64],
    params_at: &(dyn Fn(C64) -> Vec<C64> + Sync),
    config_at: &(dyn Fn(f64) -> Configuration<f64> + Sync),
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<Vec<BranchMinimum>, PipelineError> {
    let ab = run_ab_initio(sys, cfg, exec)?;
    let seed = seed_phase(sys, &ab, interval, params_at, None, cfg, exec)?;
    let targets: Vec<Vec<C64>> = phis.iter().map(|&phi| params_at(C64::new(phi, 0.0))).collect();
    let sweep_seed = stream_seed(cfg.seed, &format!("{}/sweep", system_label(sys)));
    let outcomes = parameter_sweep(
        &sys.family,
        &seed.params,
        &seed.solutions,
        &targets,
        &cfg.tracker,
        sweep_seed,
        exec,
    );
    let jobs: Vec<usize> = (0..phis.len()).collect();
    Ok(exec.map(&jobs, |&i| {
        branch_minimum(sys, &config_at(phis[i]), &targets[i], &outcomes[i].solutions, cfg.imag_tol)
    }))
}

/// Distance of the design's poses `phis` to the closest singular configuration
/// under `interp`, combined over the applicable branches.
pub fn sweep_at(
    interp: Interpretation,
    design: &DesignParams,
    motion: &MotionSpec,
    phis: &[f64],
    signed: bool,
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<Vec<DistanceResult>, PipelineError> {
    design.validate()?;
    motion.validate()?;
    let shapes = Shapes::from_design(design);
    let configs: Vec<Configuration<f64>> = phis.iter().map(|&p| pose_config_real(design, motion, p)).collect();
    let branches: Vec<BranchKind> = applicable_branches(interp)
        .into_iter()
        .filter(|b| cfg.branches.as_ref().is_none_or(|list| list.contains(b)))
        .collect();
    let mut per_pose: Vec<Vec<BranchMinimum>> = vec![Vec::new(); phis.len()];
    for branch in branches {
        if uses_closed_form(interp, branch) {
            for (i, k) in configs.iter().enumerate() {
                let kp = pedal_projection(interp, branch, k).expect("closed form applies");
                per_pose[i].push(BranchMinimum {
                    branch,
                    variant: 0,
                    status: BranchStatus::Ok,
                    distance: Some(extrinsic_dist2(interp, k, &kp).max(0.0).sqrt()),
                    minimizer: Some(kp),
                    n_real: 1,
                    n_tracked: 0,
                    n_failed: 0,
                });
            }
            continue;
        }
        let systems = build_system_variants(interp, branch)?;
        if branch == BranchKind::SingPointCase1 && !case1_feasible(interp, design) {
            for (i, _) in configs.iter().enumerate() {
                for s in &systems {
                    per_pose[i].push(BranchMinimum::infeasible(branch, s.variant));
                }
            }
            continue;
        }
        for sys in &systems {
            let params_at = |phi: C64| sys.params_for(&pose_config(design, motion, phi), &shapes);
            let config_at = |phi: f64| pose_config_real(design, motion, phi);
            let mins = sweep_system(sys, (motion.v, motion.w), phis, &params_at, &config_at, cfg, exec)?;
            for (i, m) in mins.into_iter().enumerate() {
                per_pose[i].push(m);
            }
        }
    }
    Ok(per_pose
        .into_iter()
        .zip(phis)
        .zip(&configs)
        .map(|((branches, &phi), k)| {
            let sign = signed.then(|| signum(singularity_polynomial(k)));
            DistanceResult::combine(phi, interp.label(), branches, sign)
        })
        .collect())
}

/// [`sweep_at`] over the motion's `n` equally spaced poses.
pub fn sweep_distance(
    interp: Interpretation,
    design: &DesignParams,
    motion: &MotionSpec,
    signed: bool,
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<Vec<DistanceResult>, PipelineError> {
    sweep_at(interp, design, motion, &motion.poses(), signed, cfg, exec)
}

pub(crate) fn signum(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}
