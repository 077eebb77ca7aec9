use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::C64;

use super::solutions::{Solution, SolutionSet};
use super::tracker::{track, track_projective, ParameterHomotopy, PathResult, PathStatus, Workspace};
use super::{keyed_gamma, random_complex, random_gamma, Executor, Family, TrackerSettings};

/// Endpoints of one tracked segment, index-aligned with the start points.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub paths: Vec<PathResult>,
    pub solutions: SolutionSet,
    /// Paths that neither converged nor diverged after the retry.
    pub n_failed: usize,
}

fn track_one(family: &Family, from: &[C64], to: &[C64], gamma: C64, x: &[C64], s: &TrackerSettings) -> PathResult {
    let h = ParameterHomotopy {
        system: &family.compiled,
        n_unknowns: family.n_unknowns(),
        start: from,
        end: to,
        gamma,
    };
    let mut ws = Workspace::default();
    let first = track(&h, x, s, &mut ws);
    if first.status != PathStatus::StepFailure {
        return first;
    }
    // Retries run in projective space, which keeps large and diverging
    // endpoints well scaled. The detour must stay shared by the whole set, so
    // only the step control is tightened.
    let second = track_projective(&h, &family.degrees, &family.chart, x, s, &mut ws);
    if second.status != PathStatus::StepFailure {
        return second;
    }
    track_projective(&h, &family.degrees, &family.chart, x, &s.tightened(), &mut ws)
}

/// Endpoint condition estimate above which coinciding endpoints are treated
/// as a genuine multiple root rather than a path jump.
const JUMP_COND_LIMIT: f64 = 1e8;

/// Detour rotations tried after a failed or jumped set.
const SET_ATTEMPTS: usize = 4;

fn collect(paths: Vec<PathResult>) -> SweepOutcome {
    let mut solutions = SolutionSet {
        n_tracked: paths.len(),
        ..SolutionSet::default()
    };
    let mut n_failed = 0;
    for p in &paths {
        match p.status {
            PathStatus::Converged => {
                solutions.insert(Solution::conditioned(p.endpoint.clone(), p.residual, p.condition));
            }
            PathStatus::Diverged => solutions.n_diverged += 1,
            PathStatus::StepFailure => n_failed += 1,
        }
    }
    solutions.n_failed = n_failed;
    SweepOutcome {
        paths,
        solutions,
        n_failed,
    }
}

/// Failed paths plus well-conditioned endpoints reached more than once.
fn defects(out: &SweepOutcome) -> usize {
    let jumps: usize = out
        .solutions
        .points
        .iter()
        .filter(|s| s.multiplicity > 1)
        .filter(|s| {
            out.paths
                .iter()
                .any(|p| p.status == PathStatus::Converged && p.condition < JUMP_COND_LIMIT && p.endpoint == s.x)
        })
        .map(|s| s.multiplicity - 1)
        .sum();
    out.n_failed + jumps
}

/// Detours through random intermediate parameter points tried when paths fail.
const REROUTES: usize = 2;

/// Recovers roots lost to failed paths by re-tracking the whole start set
/// through a random intermediate parameter point.
///
/// The detour permutes the fiber, so a rerouted endpoint is matched to no
/// particular start; every endpoint missing from the set is a root the direct
/// route could not reach and takes the place of one failed path.
#[allow(clippy::too_many_arguments)]
fn reroute_failed(
    out: &mut SweepOutcome,
    family: &Family,
    from: &[C64],
    to: &[C64],
    gamma: C64,
    starts: &[Vec<C64>],
    settings: &TrackerSettings,
    exec: &Executor,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(gamma.re.to_bits() ^ gamma.im.to_bits().rotate_left(17));
    for _ in 0..REROUTES {
        if out.n_failed == 0 {
            return;
        }
        let w = C64::new(0.5, 0.0) + 0.25 * random_complex(&mut rng);
        let mid: Vec<C64> = from
            .iter()
            .zip(to)
            .map(|(&a, &b)| a + w * (b - a) + 0.5 * (b - a).norm().max(1.0) * random_complex(&mut rng))
            .collect();
        let (g1, g2) = (random_gamma(&mut rng), random_gamma(&mut rng));
        let legs = exec.map(starts, |x| {
            let first = track_one(family, from, &mid, g1, x, settings);
            (first.status == PathStatus::Converged).then(|| track_one(family, &mid, to, g2, &first.endpoint, settings))
        });
        let mut fresh = Vec::new();
        for p in legs.into_iter().flatten() {
            if p.status == PathStatus::Converged && out.solutions.position_conditioned(&p.endpoint, p.condition).is_none() {
                out.solutions.insert(Solution::conditioned(p.endpoint.clone(), p.residual, p.condition));
                fresh.push(p);
            }
        }
        let failed: Vec<usize> = (0..out.paths.len())
            .filter(|&k| out.paths[k].status == PathStatus::StepFailure)
            .collect();
        for (k, p) in failed.into_iter().zip(fresh) {
            out.paths[k] = p;
            out.n_failed -= 1;
            out.solutions.n_failed -= 1;
        }
    }
}

fn rotated(gamma: C64, attempt: usize) -> C64 {
    gamma * C64::from_polar(1.0, 2.0 * attempt as f64)
}

/// Tracks every start point from `from` to `to` along one shared γ detour.
///
/// If a path fails or two paths meet at a regular endpoint (a path jump), the
/// whole set is re-tracked with a rotated detour; the attempt with the fewest
/// defects is kept. Roots still missing after that are sought along detours
/// through intermediate parameters.
pub fn track_set(
    family: &Family,
    from: &[C64],
    to: &[C64],
    gamma: C64,
    starts: &[Vec<C64>],
    settings: &TrackerSettings,
    exec: &Executor,
) -> SweepOutcome {
    let mut out = track_set_attempts(family, from, to, gamma, starts, settings, exec, SET_ATTEMPTS);
    reroute_failed(&mut out, family, from, to, gamma, starts, settings, exec);
    out
}

/// [`track_set`] with an explicit number of detour attempts and no
/// intermediate-parameter rerouting.
#[allow(clippy::too_many_arguments)]
pub fn track_set_attempts(
    family: &Family,
    from: &[C64],
    to: &[C64],
    gamma: C64,
    starts: &[Vec<C64>],
    settings: &TrackerSettings,
    exec: &Executor,
    attempts: usize,
) -> SweepOutcome {
    let mut best: Option<(usize, SweepOutcome)> = None;
    for attempt in 0..attempts.max(1) {
        let g = rotated(gamma, attempt);
        let out = collect(exec.map(starts, |x| track_one(family, from, to, g, x, settings)));
        let d = defects(&out);
        if d == 0 {
            return out;
        }
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, out));
        }
    }
    best.expect("at least one attempt").1
}

/// Tracks the complete seed solution set to each target parameter vector.
///
/// The detour constant of each target is derived from `seed` and the target
/// itself, so results do not depend on the order of `targets` or on the
/// number of workers. Targets with failed or jumped paths are re-tracked as in
/// [`track_set`].
pub fn parameter_sweep(
    family: &Family,
    seed_params: &[C64],
    seed_solutions: &[Vec<C64>],
    targets: &[Vec<C64>],
    settings: &TrackerSettings,
    seed: u64,
    exec: &Executor,
) -> Vec<SweepOutcome> {
    let gammas: Vec<C64> = targets.iter().map(|p| keyed_gamma(seed, p)).collect();
    let run = |todo: &[usize], attempt: usize| -> Vec<SweepOutcome> {
        let jobs: Vec<(usize, usize)> = todo
            .iter()
            .flat_map(|&t| (0..seed_solutions.len()).map(move |s| (t, s)))
            .collect();
        let results = exec.map(&jobs, |&(t, s)| {
            if targets[t] == seed_params {
                let (x, r) = family.refine(&seed_solutions[s], seed_params, 3);
                return PathResult {
                    endpoint: x,
                    status: PathStatus::Converged,
                    residual: r,
                    condition: 1.0,
                    steps: 0,
                    t: 0.0,
                };
            }
            let g = rotated(gammas[t], attempt);
            track_one(family, seed_params, &targets[t], g, &seed_solutions[s], settings)
        });
        let mut it = results.into_iter();
        todo.iter()
            .map(|_| collect(it.by_ref().take(seed_solutions.len()).collect()))
            .collect()
    };
    let all: Vec<usize> = (0..targets.len()).collect();
    let mut out = run(&all, 0);
    let mut score: Vec<usize> = out.iter().map(defects).collect();
    for attempt in 1..SET_ATTEMPTS {
        let todo: Vec<usize> = (0..targets.len()).filter(|&t| score[t] > 0).collect();
        if todo.is_empty() {
            break;
        }
        for (t, o) in todo.iter().zip(run(&todo, attempt)) {
            let d = defects(&o);
            if d < score[*t] {
                score[*t] = d;
                out[*t] = o;
            }
        }
    }
    for (t, o) in out.iter_mut().enumerate() {
        if targets[t] != seed_params {
            reroute_failed(o, family, seed_params, &targets[t], gammas[t], seed_solutions, settings, exec);
        }
    }
    out
}

/// Keeps endpoints whose imaginary parts are below `imag_tol` and that
/// re-converge, after projection to real coordinates, to a residual below `1e-10`.
pub fn filter_real(solutions: &SolutionSet, family: &Family, params: &[C64], imag_tol: f64) -> SolutionSet {
    let mut out = SolutionSet {
        n_tracked: solutions.n_tracked,
        n_failed: solutions.n_failed,
        n_diverged: solutions.n_diverged,
        points: Vec::new(),
    };
    for s in &solutions.points {
        if !s.is_real(imag_tol) {
            continue;
        }
        let projected: Vec<C64> = s.x.iter().map(|v| C64::new(v.re, 0.0)).collect();
        let (x, r) = family.refine(&projected, params, 8);
        let imag = x.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if r < 1e-10 && imag < imag_tol {
            let x: Vec<C64> = x.iter().map(|v| C64::new(v.re, 0.0)).collect();
            out.insert(Solution {
                x,
                residual: r,
                multiplicity: s.multiplicity,
                condition: s.condition,
            });
        }
    }
    out
}
