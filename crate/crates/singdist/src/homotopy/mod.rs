//! Numerical continuation: path tracking, total-degree solving, monodromy
//! population of generic solution sets and parameter sweeps.

mod linalg;
mod monodromy;
mod seed;
mod solutions;
mod sweep;
mod total_degree;
mod tracker;
pub mod univariate;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polynomials::{CompiledSystem, MultiPoly, ParameterizedSystem};
use crate::scalar::C64;

pub use linalg::{lu_solve, min_norm_solve, SingularMatrix};
pub use monodromy::{monodromy_solve, MonodromySettings, MonodromyStats};
pub use seed::seed_by_parameter_reversal;
pub use solutions::{same_point, Solution, SolutionSet, DEDUPE_TOL};
pub use sweep::{filter_real, parameter_sweep, track_set, track_set_attempts, SweepOutcome};
pub use total_degree::total_degree_solve;
pub use tracker::{
    refine, refine_conditioned, track, track_projective, Homotopy, ParameterHomotopy, PathResult, ProjectiveHomotopy, PathStatus, TotalDegreeHomotopy, Workspace,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error("Bézout number {paths} exceeds the path budget {budget}")]
    BudgetExceeded { paths: u128, budget: u128 },
    #[error("monodromy stalled at {achieved} of {target} solutions")]
    Stalled { achieved: usize, target: usize },
    #[error("seeding failed: {0}")]
    SeedFailure(String),
    #[error("start point residual {0:e} exceeds tolerance")]
    BadStartPoint(f64),
}

/// Tracker tolerances and step control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerSettings {
    pub tol_before_endgame: f64,
    pub tol_during_endgame: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_newton_iters: usize,
    pub divergence_bound: f64,
    pub endgame_start: f64,
    pub final_newton_iters: usize,
    pub max_steps: usize,
    /// Largest accepted first Newton correction after a predictor step,
    /// relative to `1 + ‖x‖`; guards against path jumping.
    pub max_predictor_error: f64,
}

impl Default for TrackerSettings {
    fn default() -> Self {
        TrackerSettings {
            tol_before_endgame: 1e-8,
            tol_during_endgame: 1e-8,
            initial_step: 0.02,
            max_step: 0.1,
            min_step: 1e-14,
            max_newton_iters: 3,
            divergence_bound: 1e10,
            endgame_start: 0.1,
            final_newton_iters: 20,
            max_steps: 100_000,
            max_predictor_error: 1e-3,
        }
    }
}

impl TrackerSettings {
    /// Retry profile: initial step and predictor-error bound divided by ten,
    /// maximal step halved.
    pub fn tightened(&self) -> Self {
        TrackerSettings {
            initial_step: self.initial_step / 10.0,
            max_step: self.max_step / 2.0,
            max_predictor_error: self.max_predictor_error / 10.0,
            ..*self
        }
    }

    pub fn validate(&self) -> bool {
        self.min_step > 0.0
            && self.min_step < self.initial_step
            && self.initial_step <= 0.1
            && self.tol_before_endgame > 0.0
            && self.tol_during_endgame > 0.0
    }
}

/// Parameterized polynomial family in evaluation-ready form, together with the
/// structural information used for parameter-reversal seeding.
#[derive(Clone, Debug)]
pub struct Family {
    pub system: ParameterizedSystem,
    pub compiled: CompiledSystem,
    /// Parameter indices (0-based among parameters) entering affinely.
    pub linear_params: Vec<usize>,
    /// Unknown indices of Lagrange multipliers.
    pub multipliers: Vec<usize>,
    /// Degree of each equation in the unknowns.
    pub degrees: Vec<u32>,
    /// Affine chart used for projective retries.
    pub chart: Vec<C64>,
}

impl Family {
    pub fn new(system: ParameterizedSystem, linear_params: Vec<usize>, multipliers: Vec<usize>) -> Self {
        let compiled = system.compile();
        let n = system.n_unknowns();
        let degrees = system
            .equations()
            .iter()
            .map(|e| {
                e.terms()
                    .map(|(m, _)| m.exponents().iter().take(n).map(|&k| k as u32).sum::<u32>())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let chart = (0..=n as u64).map(|k| keyed_gamma(k, &[])).collect();
        Family {
            system,
            compiled,
            linear_params,
            multipliers,
            degrees,
            chart,
        }
    }

    pub fn n_unknowns(&self) -> usize {
        self.system.n_unknowns()
    }

    pub fn n_params(&self) -> usize {
        self.system.n_params()
    }

    pub fn equations(&self) -> &[MultiPoly] {
        self.system.equations()
    }

    /// Scaled residual at `(x, p)`.
    pub fn residual(&self, x: &[C64], p: &[C64]) -> f64 {
        let mut z = x.to_vec();
        z.extend_from_slice(p);
        let mut ws = crate::polynomials::EvalWorkspace::default();
        self.compiled.scaled_residual(&z, &mut ws)
    }

    /// Newton refinement of `x` at fixed parameters `p`.
    pub fn refine(&self, x: &[C64], p: &[C64], iters: usize) -> (Vec<C64>, f64) {
        let h = ParameterHomotopy {
            system: &self.compiled,
            n_unknowns: self.n_unknowns(),
            start: p,
            end: p,
            gamma: C64::new(1.0, 0.0),
        };
        refine(&h, x, iters, &mut Workspace::default())
    }

    /// [`Family::refine`] plus the final Jacobian condition estimate.
    pub fn refine_conditioned(&self, x: &[C64], p: &[C64], iters: usize) -> (Vec<C64>, f64, f64) {
        let h = ParameterHomotopy {
            system: &self.compiled,
            n_unknowns: self.n_unknowns(),
            start: p,
            end: p,
            gamma: C64::new(1.0, 0.0),
        };
        refine_conditioned(&h, x, iters, &mut Workspace::default())
    }
}

/// Fixed-size worker pool; results always come back in input order.
pub struct Executor {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Executor {
    pub fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        Executor {
            pool: rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool"),
            workers,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        if self.workers == 1 {
            return items.iter().map(f).collect();
        }
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

impl Default for Executor {
    fn default() -> Self {
        Executor::new(1)
    }
}

/// Random unit-modulus complex number.
pub fn random_gamma<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Standard complex normal sample.
pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    let r = (-2.0 * (1.0 - rng.gen::<f64>()).ln()).sqrt() / std::f64::consts::SQRT_2;
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// γ that depends only on the run seed and a key, never on processing order.
pub fn keyed_gamma(seed: u64, key: &[C64]) -> C64 {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    for v in key {
        v.re.to_bits().hash(&mut h);
        v.im.to_bits().hash(&mut h);
    }
    random_gamma(&mut ChaCha8Rng::seed_from_u64(h.finish()))
}

/// Tracks a single path of `family` from `start_params` to `end_params`.
pub fn track_path(
    family: &Family,
    start_params: &[C64],
    end_params: &[C64],
    start_point: &[C64],
    gamma: C64,
    settings: &TrackerSettings,
) -> Result<PathResult, HomotopyError> {
    let r = family.residual(start_point, start_params);
    if !(r < 1e-6) {
        return Err(HomotopyError::BadStartPoint(r));
    }
    let h = ParameterHomotopy {
        system: &family.compiled,
        n_unknowns: family.n_unknowns(),
        start: start_params,
        end: end_params,
        gamma,
    };
    Ok(track(&h, start_point, settings, &mut Workspace::default()))
}
