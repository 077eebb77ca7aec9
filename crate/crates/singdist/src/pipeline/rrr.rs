//! 3-RRR: elbows from inverse kinematics, parallel and leg singularity distances.

use serde::{Deserialize, Serialize};

use crate::homotopy::Executor;
use crate::lagrangian::{build_rrr_system, BranchKind, LagrangianError, Shapes, TriShape};
use crate::model::{Configuration, ModelError};
use crate::scalar::{Pt, C64};
use crate::varieties::{collinearity, singularity_polynomial};

use super::{signum, sweep_system, DistanceResult, PipelineConfig, PipelineError};

/// Base joints `k7..k9`, platform anchors `k4..k6` in platform coordinates,
/// proximal (`|k_i − k_{i+6}|`) and distal (`|k_{i+3} − k_i|`) link lengths and
/// the elbow side of each leg (`+1` left of base→anchor, `−1` right).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RrrGeometry {
    pub base: [Pt<f64>; 3],
    pub platform: [Pt<f64>; 3],
    pub proximal: [f64; 3],
    pub distal: [f64; 3],
    pub elbow: [i8; 3],
}

/// Circular translation: platform origin at `center + radius (cos φ, sin φ)`,
/// fixed orientation, `n` poses on `[v, w]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RrrMotion {
    pub center: Pt<f64>,
    pub radius: f64,
    pub orientation: f64,
    pub v: f64,
    pub w: f64,
    pub n: usize,
}

impl RrrMotion {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 2 || !(self.v < self.w) {
            return Err(ModelError::InvalidMotion(format!(
                "need n ≥ 2 and v < w, got n = {}, [{}, {}]",
                self.n, self.v, self.w
            )));
        }
        Ok(())
    }

    pub fn poses(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| self.v + (self.w - self.v) * k as f64 / (self.n - 1) as f64)
            .collect()
    }
}

impl RrrGeometry {
    /// Nine-point configuration at a (possibly complex) pose. Elbows solve the
    /// two-circle intersection; for real poses an unreachable leg is an error.
    pub fn configuration(&self, motion: &RrrMotion, phi: C64) -> Result<Configuration<C64>, ModelError> {
        let (s, c) = motion.orientation.sin_cos();
        let origin = [
            motion.radius * phi.cos() + motion.center[0],
            motion.radius * phi.sin() + motion.center[1],
        ];
        let anchors: Vec<Pt<C64>> = self
            .platform
            .iter()
            .map(|p| [origin[0] + (c * p[0] - s * p[1]), origin[1] + (s * p[0] + c * p[1])])
            .collect();
        let mut elbows = Vec::with_capacity(3);
        for i in 0..3 {
            let b = [C64::new(self.base[i][0], 0.0), C64::new(self.base[i][1], 0.0)];
            let q = anchors[i];
            let d = [q[0] - b[0], q[1] - b[1]];
            let dd = d[0] * d[0] + d[1] * d[1];
            let (l1, l2) = (self.proximal[i], self.distal[i]);
            let a = (l1 * l1 - l2 * l2 + dd) / (dd * 2.0);
            let h2 = l1 * l1 / dd - a * a;
            if phi.im == 0.0 && h2.re < -1e-12 {
                return Err(ModelError::InvalidMotion(format!("leg {} unreachable at φ = {}", i + 1, phi.re)));
            }
            let h = if phi.im == 0.0 { C64::new(h2.re.max(0.0).sqrt(), 0.0) } else { h2.sqrt() };
            let h = h * f64::from(self.elbow[i]);
            elbows.push([b[0] + a * d[0] - h * d[1], b[1] + a * d[1] + h * d[0]]);
        }
        let mut pts = elbows;
        pts.extend(anchors);
        pts.extend(self.base.iter().map(|b| [C64::new(b[0], 0.0), C64::new(b[1], 0.0)]));
        Configuration::new(pts)
    }
}

fn branch_sign(branch: BranchKind, k: &Configuration<f64>) -> i8 {
    match branch {
        BranchKind::RRRLeg(i) => {
            let i = i as usize;
            signum(collinearity(k.k(i + 6), k.k(i), k.k(i + 3)))
        }
        _ => signum(singularity_polynomial(k)),
    }
}

/// Distance curve of one 3-RRR branch; the sign is that of `V(K)` for the
/// parallel branch and of `C_i(K)` for leg `i`.
pub fn rrr_sweep(
    geometry: &RrrGeometry,
    motion: &RrrMotion,
    branch: BranchKind,
    signed: bool,
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<Vec<DistanceResult>, PipelineError> {
    motion.validate()?;
    let sys = build_rrr_system(branch)?;
    if !matches!(branch, BranchKind::RRRParallel | BranchKind::RRRLeg(1..=3)) {
        return Err(LagrangianError::NotRrr(branch).into());
    }
    let phis = motion.poses();
    let configs: Vec<Configuration<f64>> = phis
        .iter()
        .map(|&p| geometry.configuration(motion, C64::new(p, 0.0)).map(|k| k.re()))
        .collect::<Result<_, _>>()?;
    // No shape parameters in the 3-RRR family.
    let unused = Shapes {
        base: TriShape::real(1.0, 0.0, 0.0),
        platform: TriShape::real(1.0, 0.0, 0.0),
    };
    let params_at = |phi: C64| {
        let k = geometry
            .configuration(motion, phi)
            .unwrap_or_else(|_| Configuration::new(vec![[C64::new(0.0, 0.0); 2]; 9]).expect("nine points"));
        sys.params_for(&k, &unused)
    };
    let config_at = |phi: f64| {
        let i = phis.iter().position(|&p| p == phi).expect("sampled pose");
        configs[i].clone()
    };
    let mins = sweep_system(&sys, (motion.v, motion.w), &phis, &params_at, &config_at, cfg, exec)?;
    Ok(mins
        .into_iter()
        .zip(&phis)
        .zip(&configs)
        .map(|((m, &phi), k)| {
            let sign = signed.then(|| branch_sign(branch, k));
            DistanceResult::combine(phi, format!("3rrr-{}", branch.label()), vec![m], sign)
        })
        .collect())
}

/// Pose-wise minimum of several branch curves, keeping the sign of the winning curve.
pub fn rrr_overall(curves: &[Vec<DistanceResult>]) -> Vec<DistanceResult> {
    let n = curves.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let branches: Vec<_> = curves.iter().flat_map(|c| c[i].branches.clone()).collect();
            let best = curves
                .iter()
                .filter(|c| c[i].overall.is_some())
                .min_by(|a, b| a[i].overall.unwrap().total_cmp(&b[i].overall.unwrap()));
            let mut r = DistanceResult::combine(curves[0][i].phi, "3rrr".into(), branches, None);
            r.sign = best.and_then(|c| c[i].sign);
            r
        })
        .collect()
}
