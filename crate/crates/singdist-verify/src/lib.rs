//! Oracles that recompute quantities of `singdist` by independent routes:
//! quadrature instead of closed-form integrals, finite-difference quadratic
//! minimization instead of assembled linear systems, bisection instead of
//! continuation.

use nalgebra::{DMatrix, DVector};

use singdist::metrics::extrinsic_dist2;
use singdist::model::{Configuration, Interpretation};
use singdist::scalar::Pt;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 0 { 1.0 } else { p1 };
                dp = n as f64 * (x * p - p0) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            ((1.0 - x) / 2.0, w / 2.0)
        })
        .collect()
}

fn lerp2(a: &Pt<f64>, b: &Pt<f64>, s: f64) -> Pt<f64> {
    [(1.0 - s) * a[0] + s * b[0], (1.0 - s) * a[1] + s * b[1]]
}

fn dist2(a: &Pt<f64>, b: &Pt<f64>) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Mean squared distance of corresponding points of two segments,
/// by quadrature along the common parameter.
pub fn segment_quadrature(ki: &Pt<f64>, kj: &Pt<f64>, kpi: &Pt<f64>, kpj: &Pt<f64>) -> f64 {
    gauss_legendre(6)
        .iter()
        .map(|&(s, w)| w * dist2(&lerp2(ki, kj, s), &lerp2(kpi, kpj, s)))
        .sum()
}

/// Mean squared distance of corresponding points of two triangles under the
/// affine map between them, integrating in barycentric coordinates through
/// the collapsed-square (Duffy) map.
pub fn triangle_quadrature(k: [&Pt<f64>; 3], kp: [&Pt<f64>; 3]) -> f64 {
    let rule = gauss_legendre(6);
    let at = |t: [&Pt<f64>; 3], l: [f64; 3]| {
        [
            l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0],
            l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1],
        ]
    };
    let mut total = 0.0;
    for &(u, wu) in &rule {
        for &(v, wv) in &rule {
            let l = [u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)];
            total += wu * wv * (1.0 - u) * dist2(&at(k, l), &at(kp, l));
        }
    }
    // The reference triangle has area 1/2.
    2.0 * total
}

/// Minimizer of a quadratic function on `Rⁿ`, from its exact second
/// differences. Returns `None` if the Hessian is singular.
pub fn minimize_quadratic(f: impl Fn(&[f64]) -> f64, n: usize) -> Option<(Vec<f64>, f64)> {
    let e = |i: usize, s: f64, j: usize, t: f64| {
        let mut z = vec![0.0; n];
        z[i] += s;
        z[j] += t;
        z
    };
    let f0 = f(&vec![0.0; n]);
    let mut g = DVector::zeros(n);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        g[i] = (f(&e(i, 1.0, i, 0.0)) - f(&e(i, -1.0, i, 0.0))) / 2.0;
        for j in 0..n {
            h[(i, j)] = if i == j {
                f(&e(i, 1.0, i, 0.0)) - 2.0 * f0 + f(&e(i, -1.0, i, 0.0))
            } else {
                (f(&e(i, 1.0, j, 1.0)) - f(&e(i, 1.0, j, -1.0)) - f(&e(i, -1.0, j, 1.0)) + f(&e(i, -1.0, j, -1.0))) / 4.0
            };
        }
    }
    let z = h.lu().solve(&(-g))?;
    let z: Vec<f64> = z.iter().copied().collect();
    let v = f(&z);
    Some((z, v))
}

/// Closest configuration whose base (`base = true`) or platform anchors
/// coincide, with the opposite side free to move affinely; squared distance
/// under `interp`.
pub fn collapsed_affine_dist2(interp: Interpretation, k: &Configuration<f64>, base: bool) -> Option<f64> {
    let (collapsed, free) = if base { (0, 3) } else { (3, 0) };
    let build = |z: &[f64]| {
        let mut pts = k.points().to_vec();
        for i in 0..3 {
            pts[collapsed + i] = [z[0], z[1]];
            pts[free + i] = [k.points()[free + i][0] + z[2 + 2 * i], k.points()[free + i][1] + z[3 + 2 * i]];
        }
        Configuration::new(pts).expect("six points")
    };
    minimize_quadratic(|z| extrinsic_dist2(interp, k, &build(z)), 8).map(|(_, v)| v)
}

/// Root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa * fb > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(6);
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 1.0).abs() < 1e-14);
        for p in 0..12 {
            let q: f64 = rule.iter().map(|&(x, w)| w * x.powi(p)).sum();
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn quadratic_minimizer() {
        let (z, v) = minimize_quadratic(|z| (z[0] - 1.0).powi(2) + 2.0 * (z[1] + z[0]).powi(2) + 3.0, 2).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] + 1.0).abs() < 1e-12 && (v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bisection() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0).is_none());
    }
}
