use nalgebra::{DMatrix, DVector, Matrix2};
use thiserror::Error;

use super::BranchKind;
use crate::metrics::extrinsic_dist2;
use crate::model::{Configuration, DesignParams, Interpretation, Side};
use crate::polynomials::MultiPoly;
use crate::scalar::{Pt, Ring, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("no closed form for {0} / {1}")]
    Unsupported(Interpretation, BranchKind),
    #[error("completion system is singular")]
    Singular,
}

/// Orthogonal-regression line `a x + b y + c = 0` of three points, with
/// `(a, b)` a unit normal, `a ≥ 0` (and `b > 0` when `a = 0`).
///
/// `minor = false` gives the principal axis (total-least-squares line);
/// `minor = true` the perpendicular line through the centroid.
pub fn regression_line(pts: [&Pt<f64>; 3], minor: bool) -> [f64; 3] {
    let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
    let cy = (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let (u, v) = (p[0] - cx, p[1] - cy);
        sxx += u * u;
        sxy += u * v;
        syy += v * v;
    }
    let scale = sxx + syy;
    // Isotropic scatter: take the x-axis direction.
    let dir = if scale == 0.0 || ((sxx - syy).abs() + 2.0 * sxy.abs()) <= 1e-14 * scale {
        [1.0, 0.0]
    } else {
        let eig = Matrix2::new(sxx, sxy, sxy, syy).symmetric_eigen();
        let major = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
        let v = eig.eigenvectors.column(major);
        [v[0], v[1]]
    };
    let dir = if minor { [-dir[1], dir[0]] } else { dir };
    let mut n = [-dir[1], dir[0]];
    if n[0] < 0.0 || (n[0] == 0.0 && n[1] < 0.0) {
        n = [-n[0], -n[1]];
    }
    [n[0], n[1], -(n[0] * cx + n[1] * cy)]
}

fn project(p: &Pt<f64>, line: &[f64; 3]) -> Pt<f64> {
    let s = line[0] * p[0] + line[1] * p[1] + line[2];
    [p[0] - s * line[0], p[1] - s * line[1]]
}

/// Minimizes the metric of `interp` over the anchors of one side while the
/// other side is held at `kp`'s values. `free_base` selects the side that moves.
///
/// The squared metric is quadratic in the free coordinates, so the minimizer
/// solves a 6×6 linear system.
pub fn complete_minimizer(
    interp: Interpretation,
    k: &Configuration<f64>,
    kp: &Configuration<f64>,
    free_base: bool,
) -> Result<Configuration<f64>, ClosedFormError> {
    let off = if free_base { 0 } else { 3 };
    let pts: Vec<Pt<MultiPoly>> = (0..6)
        .map(|i| {
            if i >= off && i < off + 3 {
                let j = 2 * (i - off);
                [MultiPoly::var(j), MultiPoly::var(j + 1)]
            } else {
                let p = kp.points()[i];
                [MultiPoly::from_f64(p[0]), MultiPoly::from_f64(p[1])]
            }
        })
        .collect();
    let kp_sym = Configuration::new(pts).expect("six points");
    let k_sym = k.map(|v| MultiPoly::from_f64(*v));
    let d2 = extrinsic_dist2(interp, &k_sym, &kp_sym);
    let zero = [C64::new(0.0, 0.0); 6];
    let mut h = DMatrix::<f64>::zeros(6, 6);
    let mut g = DVector::<f64>::zeros(6);
    for i in 0..6 {
        let di = d2.derivative(i);
        g[i] = -di.evaluate(&zero).expect("six variables").re;
        for j in 0..6 {
            h[(i, j)] = di.derivative(j).evaluate(&zero).expect("six variables").re;
        }
    }
    let y = h.lu().solve(&g).ok_or(ClosedFormError::Singular)?;
    let mut out = kp.clone();
    let flat: Vec<f64> = {
        let mut f = out.flat();
        for j in 0..6 {
            f[2 * off + j] = y[j];
        }
        f
    };
    out = Configuration::from_flat(&flat).expect("six points");
    Ok(out)
}

/// Whether the branch collinearizes the base, after checking that the
/// interpretation admits the pedal-point closed form for it.
fn collinear_side(interp: Interpretation, branch: BranchKind) -> Result<bool, ClosedFormError> {
    let base = match branch {
        BranchKind::CollinearityB => true,
        BranchKind::CollinearityP => false,
        _ => return Err(ClosedFormError::Unsupported(interp, branch)),
    };
    let (own, other) = match interp {
        Interpretation::Pair { platform, base: b } if base => (b, platform),
        Interpretation::Pair { platform, base: b } => (platform, b),
        Interpretation::Preliminary => return Err(ClosedFormError::Unsupported(interp, branch)),
    };
    if own == Side::BarTriangle && other != Side::Rigid {
        Ok(base)
    } else {
        Err(ClosedFormError::Unsupported(interp, branch))
    }
}

/// Both closed-form candidates (projection onto the major and the minor axis),
/// each completed on the opposite side.
pub fn pedal_projection_candidates(
    interp: Interpretation,
    branch: BranchKind,
    k: &Configuration<f64>,
) -> Result<Vec<Configuration<f64>>, ClosedFormError> {
    let base = collinear_side(interp, branch)?;
    let off = if base { 1 } else { 4 };
    let triple = [k.k(off), k.k(off + 1), k.k(off + 2)];
    [false, true]
        .iter()
        .map(|&minor| {
            let line = regression_line(triple, minor);
            let mut pts: Vec<Pt<f64>> = k.points().to_vec();
            for i in 0..3 {
                pts[off - 1 + i] = project(triple[i], &line);
            }
            let kp = Configuration::new(pts).expect("six points");
            complete_minimizer(interp, k, &kp, !base)
        })
        .collect()
}

/// Closest configuration on the collinearity variety of the bar-triangle side:
/// that triple's pedal points on its line of regression, the opposite side at
/// its metric minimizer.
///
/// An already collinear triple is returned unchanged (with the opposite side
/// also unchanged, as that is then its own minimizer).
pub fn pedal_projection(
    interp: Interpretation,
    branch: BranchKind,
    k: &Configuration<f64>,
) -> Result<Configuration<f64>, ClosedFormError> {
    let cands = pedal_projection_candidates(interp, branch, k)?;
    Ok(cands
        .into_iter()
        .min_by(|a, b| extrinsic_dist2(interp, k, a).total_cmp(&extrinsic_dist2(interp, k, b)))
        .expect("two candidates"))
}

/// Pose-independent distance to the collinearity variety for a bar-triangle
/// side facing a plate or bar-triangle side.
///
/// With `(x_a, x_b, y_b)` the shape of the collinearized triple,
/// `s = x_a² − x_a x_b + x_b² + y_b²` and `η = s² − 3 (x_a y_b)²`, the squared
/// distance is `c (s − √η)` with `c = 4/135` against a bar triangle and
/// `c = 23/630` against a plate.
pub fn pose_independent_distance(
    interp: Interpretation,
    branch: BranchKind,
    design: &DesignParams,
) -> Result<f64, ClosedFormError> {
    let base = collinear_side(interp, branch)?;
    let (other, xa, xb, yb) = if base {
        (interp.platform(), design.x2, design.x3, design.y3)
    } else {
        (interp.base(), design.x5, design.x6, design.y6)
    };
    let c = match other {
        Some(Side::BarTriangle) => 4.0 / 135.0,
        Some(Side::Plate) => 23.0 / 630.0,
        _ => return Err(ClosedFormError::Unsupported(interp, branch)),
    };
    let s = xa * xa - xa * xb + xb * xb + yb * yb;
    let eta = (s * s - 3.0 * (xa * yb).powi(2)).max(0.0);
    let d2 = [s - eta.sqrt(), s + eta.sqrt()]
        .into_iter()
        .map(|v| c * v)
        .fold(f64::INFINITY, f64::min);
    Ok(d2.max(0.0).sqrt())
}
