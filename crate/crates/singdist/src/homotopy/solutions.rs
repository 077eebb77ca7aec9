use serde::{Deserialize, Serialize};

use crate::scalar::C64;

use super::linalg::norm_inf;

/// Relative ∞-norm dedupe tolerance.
pub const DEDUPE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<C64>,
    pub residual: f64,
    pub multiplicity: usize,
    /// Jacobian condition estimate at `x`; widens the dedupe tolerance.
    #[serde(default = "unit")]
    pub condition: f64,
}

fn unit() -> f64 {
    1.0
}

impl Solution {
    pub fn new(x: Vec<C64>, residual: f64) -> Self {
        Solution::conditioned(x, residual, 1.0)
    }

    pub fn conditioned(x: Vec<C64>, residual: f64, condition: f64) -> Self {
        Solution {
            x,
            residual,
            multiplicity: 1,
            condition: if condition.is_finite() { condition.max(1.0) } else { 1.0 },
        }
    }

    pub fn max_imag(&self) -> f64 {
        self.x.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, imag_tol: f64) -> bool {
        self.max_imag() < imag_tol
    }
}

pub fn same_point(a: &[C64], b: &[C64], tol: f64) -> bool {
    let scale = norm_inf(a).max(norm_inf(b)).max(1.0);
    a.iter().zip(b).all(|(u, v)| (u - v).norm() <= tol * scale)
}

/// Deduplicated endpoints plus tracking statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub points: Vec<Solution>,
    pub n_tracked: usize,
    pub n_failed: usize,
    pub n_diverged: usize,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, x: &[C64]) -> Option<usize> {
        self.position_conditioned(x, 1.0)
    }

    /// Ill-conditioned points are only known to about `ε·cond` relative
    /// accuracy, so two copies of one root may differ by more than
    /// [`DEDUPE_TOL`].
    pub fn position_conditioned(&self, x: &[C64], condition: f64) -> Option<usize> {
        self.points.iter().position(|p| {
            let tol = DEDUPE_TOL.max(100.0 * f64::EPSILON * p.condition.max(condition));
            same_point(&p.x, x, tol)
        })
    }

    /// Inserts `s` unless an equal point exists, in which case that point's
    /// multiplicity grows. Returns whether `s` was new.
    pub fn insert(&mut self, s: Solution) -> bool {
        match self.position_conditioned(&s.x, s.condition) {
            Some(i) => {
                self.points[i].multiplicity += 1;
                false
            }
            None => {
                self.points.push(s);
                true
            }
        }
    }

    pub fn n_real(&self, imag_tol: f64) -> usize {
        self.points.iter().filter(|p| p.is_real(imag_tol)).count()
    }

    /// True when both sets hold the same points up to the dedupe tolerance.
    pub fn same_points(&self, other: &SolutionSet) -> bool {
        self.len() == other.len() && self.points.iter().all(|p| other.position(&p.x).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedupe_by_relative_tolerance() {
        let mut s = SolutionSet::default();
        assert!(s.insert(Solution::new(vec![C64::new(1e6, 0.0)], 0.0)));
        assert!(!s.insert(Solution::new(vec![C64::new(1e6 + 1e-3, 0.0)], 0.0)));
        assert!(s.insert(Solution::new(vec![C64::new(1e6 + 1.0, 0.0)], 0.0)));
        assert_eq!(s.points[0].multiplicity, 2);
        assert_eq!(s.len(), 2);
    }
}
