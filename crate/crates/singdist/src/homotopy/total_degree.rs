use crate::polynomials::ParameterizedSystem;
use crate::scalar::C64;

use super::solutions::{Solution, SolutionSet};
use super::tracker::{track, PathStatus, TotalDegreeHomotopy, Workspace};
use super::{Executor, HomotopyError, TrackerSettings};

/// Solves a parameter-free square system from the start system `x_i^{d_i} = 1`.
pub fn total_degree_solve(
    sys: &ParameterizedSystem,
    settings: &TrackerSettings,
    gamma: C64,
    budget: u128,
    exec: &Executor,
) -> Result<SolutionSet, HomotopyError> {
    assert_eq!(sys.n_params(), 0, "specialize parameters before a total-degree solve");
    let degrees: Vec<u32> = sys.equations().iter().map(|e| e.total_degree().max(1)).collect();
    let paths: u128 = degrees.iter().map(|&d| d as u128).product();
    if paths > budget {
        return Err(HomotopyError::BudgetExceeded { paths, budget });
    }
    let compiled = sys.compile();
    let hom = TotalDegreeHomotopy {
        system: &compiled,
        degrees: degrees.clone(),
        gamma,
    };
    let n = degrees.len();
    let starts: Vec<Vec<C64>> = (0..paths)
        .map(|mut k| {
            (0..n)
                .map(|i| {
                    let d = degrees[i] as u128;
                    let j = k % d;
                    k /= d;
                    C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / d as f64)
                })
                .collect()
        })
        .collect();
    let results = exec.map(&starts, |x| {
        let mut ws = Workspace::default();
        let r = track(&hom, x, settings, &mut ws);
        if r.status == PathStatus::StepFailure {
            track(&hom, x, &settings.tightened(), &mut ws)
        } else {
            r
        }
    });
    let mut set = SolutionSet {
        n_tracked: results.len(),
        ..SolutionSet::default()
    };
    for r in results {
        match r.status {
            PathStatus::Converged => {
                set.insert(Solution::new(r.endpoint, r.residual));
            }
            PathStatus::Diverged => set.n_diverged += 1,
            PathStatus::StepFailure => set.n_failed += 1,
        }
    }
    Ok(set)
}
