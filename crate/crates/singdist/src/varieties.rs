//! Constraint polynomials: the singularity polynomial `V`, collinearity
//! determinants, Euclidean side conditions and the point-based representation
//! of rigid anchor triples.

use std::sync::OnceLock;

use thiserror::Error;

use crate::model::{Configuration, DesignParams};
use crate::polynomials::MultiPoly;
use crate::scalar::{cross, det3, dot, sub, Pt, Ring, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarietyError {
    #[error("constraint {kind:?} needs {needed} points, configuration has {got}")]
    ArityMismatch {
        kind: ConstraintKind,
        needed: usize,
        got: usize,
    },
    #[error("constraint {0:?} is not a pure variety of the candidate configuration")]
    NotAVariety(ConstraintKind),
    #[error("degenerate design: {0} vanishes")]
    DegenerateDesign(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    V,
    CB,
    CP,
    EB,
    EP,
    F1,
    F2,
    F3,
    F4,
    /// Collinearity of base joint, elbow and platform joint of 3-RRR leg `i ∈ {1,2,3}`.
    LegCollinearity(u8),
}

/// `det [[1,1,1],[a.x,b.x,c.x],[a.y,b.y,c.y]]`, twice the signed area of `abc`.
pub fn collinearity<T: Ring>(a: &Pt<T>, b: &Pt<T>, c: &Pt<T>) -> T {
    let one = T::from_f64(1.0);
    det3(&[
        [one.clone(), one.clone(), one],
        [a[0].clone(), b[0].clone(), c[0].clone()],
        [a[1].clone(), b[1].clone(), c[1].clone()],
    ])
}

/// Determinant of the three leg lines' Plücker coordinates `(k_{i+3} − k_i ; k_i × (k_{i+3} − k_i))`.
pub fn singularity_polynomial<T: Ring>(k: &Configuration<T>) -> T {
    let mut cols: Vec<[T; 3]> = Vec::with_capacity(3);
    for i in 1..=3 {
        let b = k.k(i);
        let dir = sub(k.k(i + 3), b);
        let m = cross(b, &dir);
        cols.push([dir[0].clone(), dir[1].clone(), m]);
    }
    det3(&[
        [cols[0][0].clone(), cols[1][0].clone(), cols[2][0].clone()],
        [cols[0][1].clone(), cols[1][1].clone(), cols[2][1].clone()],
        [cols[0][2].clone(), cols[1][2].clone(), cols[2][2].clone()],
    ])
}

fn need(kind: ConstraintKind, k_len: usize, needed: usize) -> Result<(), VarietyError> {
    if k_len < needed {
        return Err(VarietyError::ArityMismatch {
            kind,
            needed,
            got: k_len,
        });
    }
    Ok(())
}

/// Evaluates `V`, `C_B`, `C_P` or a 3-RRR leg collinearity on `kp`.
pub fn eval_variety<T: Ring>(kind: ConstraintKind, kp: &Configuration<T>) -> Result<T, VarietyError> {
    match kind {
        ConstraintKind::V => {
            need(kind, kp.arity(), 6)?;
            Ok(singularity_polynomial(kp))
        }
        ConstraintKind::CB => {
            need(kind, kp.arity(), 6)?;
            if kp.arity() != 6 {
                return Err(VarietyError::ArityMismatch {
                    kind,
                    needed: 6,
                    got: kp.arity(),
                });
            }
            Ok(collinearity(kp.k(1), kp.k(2), kp.k(3)))
        }
        ConstraintKind::CP => {
            need(kind, kp.arity(), 6)?;
            Ok(collinearity(kp.k(4), kp.k(5), kp.k(6)))
        }
        ConstraintKind::LegCollinearity(i) => {
            let i = i as usize;
            if !(1..=3).contains(&i) || kp.arity() != 9 {
                return Err(VarietyError::ArityMismatch {
                    kind,
                    needed: 9,
                    got: kp.arity(),
                });
            }
            Ok(collinearity(kp.k(i + 6), kp.k(i), kp.k(i + 3)))
        }
        other => Err(VarietyError::NotAVariety(other)),
    }
}

/// `‖k'2 − k'1‖² − ‖k2 − k1‖²` (EB) or the platform analogue with anchors 4, 5 (EP).
pub fn eval_side_condition<T: Ring>(
    kind: ConstraintKind,
    k: &Configuration<T>,
    kp: &Configuration<T>,
) -> Result<T, VarietyError> {
    let (a, b) = match kind {
        ConstraintKind::EB => (1, 2),
        ConstraintKind::EP => (4, 5),
        other => return Err(VarietyError::NotAVariety(other)),
    };
    need(kind, kp.arity().min(k.arity()), 6)?;
    let e = sub(kp.k(b), kp.k(a));
    let r = sub(k.k(b), k.k(a));
    Ok(dot(&e, &e) - dot(&r, &r))
}

/// Side condition with the squared reference length given directly.
pub fn side_condition<T: Ring>(a: &Pt<T>, b: &Pt<T>, len2: T) -> T {
    let e = sub(b, a);
    dot(&e, &e) - len2
}

/// Denominator-free forms `F1..F4` tying the third anchor of a rigid triple to the first two.
pub fn eval_f_form<T: Ring>(
    kind: ConstraintKind,
    design: &DesignParams,
    kp: &Configuration<T>,
) -> Result<T, VarietyError> {
    need(kind, kp.arity(), 6)?;
    let (o, xa, xb, yb) = match kind {
        ConstraintKind::F1 | ConstraintKind::F2 => (0, design.x2, design.x3, design.y3),
        ConstraintKind::F3 | ConstraintKind::F4 => (3, design.x5, design.x6, design.y6),
        other => return Err(VarietyError::NotAVariety(other)),
    };
    let p = |i: usize| kp.k(o + i);
    let (c1, d1) = (p(1)[0].clone(), p(1)[1].clone());
    let (c2, d2) = (p(2)[0].clone(), p(2)[1].clone());
    let (c3, d3) = (p(3)[0].clone(), p(3)[1].clone());
    let w = T::from_f64;
    Ok(match kind {
        ConstraintKind::F1 | ConstraintKind::F3 => {
            (c2.clone() - c1.clone()) * w(xb) + (d1 - d2) * w(yb) + (c1 - c3) * w(xa)
        }
        _ => (d2 - d1.clone()) * w(xb) + (c2 - c1) * w(yb) + (d1 - d3) * w(xa),
    })
}

/// Third anchor `a + α(b − a) + β J(b − a)` with `J(u,v) = (−v,u)`.
pub fn pbr_point<T: Ring>(a: &Pt<T>, b: &Pt<T>, alpha: T, beta: T) -> Pt<T> {
    let e = sub(b, a);
    [
        a[0].clone() + alpha.clone() * e[0].clone() - beta.clone() * e[1].clone(),
        a[1].clone() + alpha * e[1].clone() + beta * e[0].clone(),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbrSide {
    Base,
    Platform,
}

/// Replaces `k'3` (base) or `k'6` (platform) by its point-based representation.
pub fn pbr_substitute<T: Ring>(
    side: PbrSide,
    design: &DesignParams,
    kp: &Configuration<T>,
) -> Result<Configuration<T>, VarietyError> {
    let (o, xa, xb, yb, name) = match side {
        PbrSide::Base => (0, design.x2, design.x3, design.y3, "x2"),
        PbrSide::Platform => (3, design.x5, design.x6, design.y6, "x5"),
    };
    if xa == 0.0 {
        return Err(VarietyError::DegenerateDesign(name));
    }
    let mut pts = kp.points().to_vec();
    pts[o + 2] = pbr_point(
        &pts[o],
        &pts[o + 1],
        T::from_f64(xb / xa),
        T::from_f64(yb / xa),
    );
    Ok(Configuration::new(pts).expect("arity preserved"))
}

fn v_gradient_polys() -> &'static Vec<MultiPoly> {
    static CELL: OnceLock<Vec<MultiPoly>> = OnceLock::new();
    CELL.get_or_init(|| {
        let vars: Vec<MultiPoly> = (0..12).map(MultiPoly::var).collect();
        let k = Configuration::from_flat(&vars).expect("six points");
        let v = singularity_polynomial(&k);
        (0..12).map(|j| v.derivative(j)).collect()
    })
}

/// Gradient of `V` with respect to `c1, d1, …, c6, d6`.
pub fn v_gradient(k: &Configuration<f64>) -> [f64; 12] {
    let x: Vec<C64> = k.flat().iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut g = [0.0; 12];
    for (j, p) in v_gradient_polys().iter().enumerate() {
        g[j] = p.evaluate(&x).expect("12 coordinates").re;
    }
    g
}

/// Gradient of `V` normalized by the configuration's coordinate scale (`V` is
/// homogeneous of degree 3 in its partials).
pub fn v_gradient_scaled_norm(k: &Configuration<f64>) -> f64 {
    let s = k.max_abs().max(f64::MIN_POSITIVE);
    let g = v_gradient(k);
    g.iter().map(|v| v * v).sum::<f64>().sqrt() / s.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concurrent_lines_give_zero() {
        // All three legs pass through (1, 1).
        let k = Configuration::from_flat(&[
            0.0, 0.0, 3.0, 0.0, 1.0, 4.0, 2.0, 2.0, -1.0, 2.0, 1.0, -1.0,
        ])
        .unwrap();
        assert!(singularity_polynomial(&k).abs() < 1e-12);
    }

    #[test]
    fn collinear_platform_gives_zero_cp() {
        let k = Configuration::from_flat(&[
            0.0, 0.0, 3.0, 0.0, 1.0, 4.0, 1.0, 1.0, 2.0, 3.0, 3.0, 5.0,
        ])
        .unwrap();
        assert_eq!(eval_variety(ConstraintKind::CP, &k).unwrap(), 0.0);
        assert!(eval_variety(ConstraintKind::CB, &k).unwrap().abs() > 1.0);
    }

    #[test]
    fn side_condition_scaled_edge() {
        let d = DesignParams::new(11.0, 5.0, 7.0, 3.0, 1.0, 2.0);
        let mut pts = d.base_points().to_vec();
        pts.extend(d.platform_points());
        let k = Configuration::new(pts.clone()).unwrap();
        pts[1] = [22.0, 0.0];
        let kp = Configuration::new(pts).unwrap();
        assert_eq!(eval_side_condition(ConstraintKind::EB, &k, &kp).unwrap(), 363.0);
        assert_eq!(eval_side_condition(ConstraintKind::EP, &k, &kp).unwrap(), 0.0);
    }

    #[test]
    fn pbr_identity_and_translation() {
        let d = DesignParams::new(11.0, 5.0, 7.0, 3.0, 1.0, 2.0);
        let mut pts = d.base_points().to_vec();
        pts.extend(d.platform_points());
        pts[2] = [100.0, 100.0];
        let k = Configuration::new(pts.clone()).unwrap();
        let r = pbr_substitute(PbrSide::Base, &d, &k).unwrap();
        assert_eq!(r.k(3), &[5.0, 7.0]);
        let v = [0.5, -2.0];
        let moved: Vec<Pt<f64>> = pts.iter().map(|p| [p[0] + v[0], p[1] + v[1]]).collect();
        let r = pbr_substitute(PbrSide::Base, &d, &Configuration::new(moved).unwrap()).unwrap();
        assert!((r.k(3)[0] - 5.5).abs() < 1e-14 && (r.k(3)[1] - 5.0).abs() < 1e-14);
        let bad = DesignParams::new(0.0, 5.0, 7.0, 3.0, 1.0, 2.0);
        assert!(pbr_substitute(PbrSide::Base, &bad, &k).is_err());
    }

    #[test]
    fn arity_errors() {
        let k = Configuration::from_flat(&[0.0; 12]).unwrap();
        assert!(eval_variety(ConstraintKind::LegCollinearity(1), &k).is_err());
        assert!(eval_variety(ConstraintKind::EB, &k).is_err());
    }
}
