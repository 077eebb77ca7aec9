use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::C64;

use super::solutions::{Solution, SolutionSet};
use super::sweep::track_set_attempts;
use super::tracker::PathStatus;
use super::{random_complex, random_gamma, Executor, Family, HomotopyError, TrackerSettings};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromySettings {
    /// Consecutive fresh loops without growth before giving up.
    pub stall_limit: usize,
    /// Hard cap on the number of loops.
    pub max_loops: usize,
    /// Extra fresh loops run after the target is reached, to confirm completeness.
    pub verify_loops: usize,
    pub tracker: TrackerSettings,
}

impl Default for MonodromySettings {
    fn default() -> Self {
        MonodromySettings {
            stall_limit: 20,
            max_loops: 400,
            verify_loops: 0,
            tracker: TrackerSettings::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonodromyStats {
    pub loops: usize,
    pub paths_tracked: usize,
    pub path_failures: usize,
}

struct Loop {
    p1: Vec<C64>,
    p2: Vec<C64>,
    gammas: [C64; 3],
    /// Number of solutions (prefix of the set) already pushed around this loop.
    done: usize,
}

/// Populates the generic solution set at `base_params` from one known solution.
///
/// Every solution is tracked once around every loop created so far; a new loop
/// is drawn only when all known solutions have been pushed around all loops.
/// Stops at `target` solutions, or after `stall_limit` consecutive unproductive
/// new loops.
pub fn monodromy_solve<R: Rng>(
    family: &Family,
    base_params: &[C64],
    start: Vec<C64>,
    target: Option<usize>,
    settings: &MonodromySettings,
    rng: &mut R,
    exec: &Executor,
) -> Result<(SolutionSet, MonodromyStats), HomotopyError> {
    let r0 = family.residual(&start, base_params);
    if !(r0 < 1e-8) {
        return Err(HomotopyError::BadStartPoint(r0));
    }
    let mut set = SolutionSet::default();
    set.insert(Solution::new(start, r0));
    let mut stats = MonodromyStats::default();
    let mut loops: Vec<Loop> = Vec::new();
    let mut stall = 0;
    let mut verify_left = settings.verify_loops;

    loop {
        let reached = target.is_some_and(|t| set.len() >= t);
        // Find a loop with pending work, or create one.
        let pending = if reached { None } else { loops.iter().position(|l| l.done < set.len()) };
        let idx = match pending {
            Some(i) => i,
            None => {
                if reached {
                    if verify_left == 0 {
                        break;
                    }
                    verify_left -= 1;
                } else if stall >= settings.stall_limit || loops.len() >= settings.max_loops {
                    break;
                }
                let np = base_params.len();
                loops.push(Loop {
                    p1: (0..np).map(|_| random_complex(rng)).collect(),
                    p2: (0..np).map(|_| random_complex(rng)).collect(),
                    gammas: [random_gamma(rng), random_gamma(rng), random_gamma(rng)],
                    done: 0,
                });
                stats.loops += 1;
                stall += 1;
                loops.len() - 1
            }
        };
        let before = set.len();
        let l = &loops[idx];
        let starts: Vec<Vec<C64>> = set.points[l.done..].iter().map(|s| s.x.clone()).collect();
        let legs = [
            (base_params, l.p1.as_slice(), l.gammas[0]),
            (l.p1.as_slice(), l.p2.as_slice(), l.gammas[1]),
            (l.p2.as_slice(), base_params, l.gammas[2]),
        ];
        let mut current: Vec<Option<Vec<C64>>> = starts.into_iter().map(Some).collect();
        for (from, to, g) in legs {
            let live: Vec<usize> = (0..current.len()).filter(|&i| current[i].is_some()).collect();
            let pts: Vec<Vec<C64>> = live.iter().map(|&i| current[i].clone().unwrap()).collect();
            let out = track_set_attempts(family, from, to, g, &pts, &settings.tracker, exec, 1);
            stats.paths_tracked += pts.len();
            for (k, &i) in live.iter().enumerate() {
                let p = &out.paths[k];
                if p.status == PathStatus::Converged {
                    current[i] = Some(p.endpoint.clone());
                } else {
                    stats.path_failures += 1;
                    current[i] = None;
                }
            }
        }
        loops[idx].done = before;
        for x in current.into_iter().flatten() {
            let (x, r, cond) = family.refine_conditioned(&x, base_params, 3);
            if r < settings.tracker.tol_during_endgame && set.position_conditioned(&x, cond).is_none() {
                set.insert(Solution::conditioned(x, r, cond));
            }
        }
        if set.len() > before {
            stall = 0;
        }
    }

    if let Some(t) = target {
        if set.len() < t {
            return Err(HomotopyError::Stalled {
                achieved: set.len(),
                target: t,
            });
        }
    }
    set.n_tracked = stats.paths_tracked;
    set.n_failed = stats.path_failures;
    Ok((set, stats))
}
