//! Segment, triangle and extrinsic configuration distances.
//!
//! All functions return squared distances and are generic over [`Ring`], so the
//! same formulas serve numeric evaluation and symbolic Lagrangian assembly.

use crate::model::{Configuration, Interpretation, Side};
use crate::scalar::{dot, sub, Pt, Ring};

/// Leg segments `(i, j)`, 1-based, base anchor first.
pub const I1: [(usize, usize); 3] = [(1, 4), (2, 5), (3, 6)];
/// Legs plus platform bars.
pub const I2: [(usize, usize); 6] = [(1, 4), (2, 5), (3, 6), (4, 5), (4, 6), (5, 6)];
/// Legs plus base bars.
pub const I3: [(usize, usize); 6] = [(1, 4), (2, 5), (3, 6), (1, 2), (2, 3), (1, 3)];
/// Legs, base bars and platform bars.
pub const I4: [(usize, usize); 9] = [
    (1, 4),
    (2, 5),
    (3, 6),
    (1, 2),
    (2, 3),
    (1, 3),
    (4, 5),
    (4, 6),
    (5, 6),
];
/// Segments of the 3-RRR legs (elbow `i` to platform `i+3` and base `i+6`).
pub const I5: [(usize, usize); 6] = [(1, 4), (1, 7), (2, 5), (2, 8), (3, 6), (3, 9)];

/// Squared distance between oriented segments `(ki,kj)` and `(ki',kj')`.
pub fn segment_dist2<T: Ring>(ki: &Pt<T>, kj: &Pt<T>, kpi: &Pt<T>, kpj: &Pt<T>) -> T {
    let di = sub(ki, kpi);
    let dj = sub(kj, kpj);
    (dot(&di, &di) + dot(&dj, &dj) + dot(&di, &dj)) * T::from_f64(1.0 / 3.0)
}

/// Squared distance between triangles `(ki,kj,kk)` and `(ki',kj',kk')`.
pub fn triangle_dist2<T: Ring>(k: [&Pt<T>; 3], kp: [&Pt<T>; 3]) -> T {
    let d: Vec<Pt<T>> = (0..3).map(|a| sub(k[a], kp[a])).collect();
    let sq = dot(&d[0], &d[0]) + dot(&d[1], &d[1]) + dot(&d[2], &d[2]);
    let cross = dot(&d[0], &d[2]) + dot(&d[0], &d[1]) + dot(&d[2], &d[1]);
    (sq + cross) * T::from_f64(1.0 / 6.0)
}

fn seg_sum<T: Ring>(set: &[(usize, usize)], k: &Configuration<T>, kp: &Configuration<T>) -> T {
    set.iter().fold(T::zero(), |acc, &(i, j)| {
        acc + segment_dist2(k.k(i), k.k(j), kp.k(i), kp.k(j))
    })
}

fn tri<T: Ring>(ids: [usize; 3], k: &Configuration<T>, kp: &Configuration<T>) -> T {
    triangle_dist2(
        [k.k(ids[0]), k.k(ids[1]), k.k(ids[2])],
        [kp.k(ids[0]), kp.k(ids[1]), kp.k(ids[2])],
    )
}

/// Mean squared displacement of the six anchors.
pub fn preliminary_dist2<T: Ring>(k: &Configuration<T>, kp: &Configuration<T>) -> T {
    let s = k
        .points()
        .iter()
        .zip(kp.points())
        .fold(T::zero(), |acc, (a, b)| {
            let d = sub(a, b);
            acc + dot(&d, &d)
        });
    s * T::from_f64(1.0 / 6.0)
}

/// Squared extrinsic distance of two 3-RPR configurations under `interp`.
pub fn extrinsic_dist2<T: Ring>(
    interp: Interpretation,
    k: &Configuration<T>,
    kp: &Configuration<T>,
) -> T {
    use Side::*;
    let (platform, base) = match interp {
        Interpretation::Preliminary => return preliminary_dist2(k, kp),
        Interpretation::Pair { platform, base } => (platform, base),
    };
    let w = T::from_f64;
    let t123 = || tri([1, 2, 3], k, kp);
    let t456 = || tri([4, 5, 6], k, kp);
    match (platform, base) {
        (Rigid, Rigid) => seg_sum(&I1, k, kp) * w(1.0 / 3.0),
        (Plate, Rigid) => (seg_sum(&I1, k, kp) + t456()) * w(0.25),
        (BarTriangle, Rigid) => seg_sum(&I2, k, kp) * w(1.0 / 6.0),
        (Rigid, Plate) => (seg_sum(&I1, k, kp) + t123()) * w(0.25),
        (Rigid, BarTriangle) => seg_sum(&I3, k, kp) * w(1.0 / 6.0),
        (Plate, Plate) => (seg_sum(&I1, k, kp) + t123() + t456()) * w(0.2),
        (BarTriangle, Plate) => (seg_sum(&I2, k, kp) + t123()) * w(1.0 / 7.0),
        (Plate, BarTriangle) => (seg_sum(&I3, k, kp) + t456()) * w(1.0 / 7.0),
        (BarTriangle, BarTriangle) => seg_sum(&I4, k, kp) * w(1.0 / 9.0),
    }
}

/// Squared distance of two 9-point 3-RRR configurations with plate base and platform.
pub fn rrr_dist2<T: Ring>(k: &Configuration<T>, kp: &Configuration<T>) -> T {
    (seg_sum(&I5, k, kp) + tri([7, 8, 9], k, kp) + tri([4, 5, 6], k, kp)) * T::from_f64(0.125)
}
