//! Small dense complex linear algebra used inside the tracker.

use crate::scalar::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularMatrix;

/// Solves `a x = b` in place by LU with partial pivoting after row
/// equilibration; `a` is row-major `n×n` and is destroyed. Returns a
/// pivot-ratio condition estimate of the equilibrated matrix.
pub fn lu_solve(a: &mut [C64], n: usize, b: &mut [C64]) -> Result<f64, SingularMatrix> {
    for r in 0..n {
        let m = a[r * n..(r + 1) * n].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m == 0.0 || !m.is_finite() {
            return Err(SingularMatrix);
        }
        let inv = 1.0 / m;
        for v in &mut a[r * n..(r + 1) * n] {
            *v *= inv;
        }
        b[r] *= inv;
    }
    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm();
        for r in k + 1..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(SingularMatrix);
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            b.swap(k, p);
        }
        max_piv = max_piv.max(best);
        min_piv = min_piv.min(best);
        let inv = a[k * n + k].inv();
        for r in k + 1..n {
            let f = a[r * n + k] * inv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            a[r * n + k] = f;
            for c in k + 1..n {
                let u = a[k * n + c];
                a[r * n + c] -= f * u;
            }
            let bk = b[k];
            b[r] -= f * bk;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[k * n + c] * b[c];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(max_piv / min_piv)
}

/// Minimum-norm solution of the underdetermined `a z = r` (`a` is `m×k`, `m ≤ k`).
pub fn min_norm_solve(a: &[C64], m: usize, k: usize, r: &[C64]) -> Result<Vec<C64>, SingularMatrix> {
    let mut g = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..k {
                s += a[i * k + c] * a[j * k + c].conj();
            }
            g[i * m + j] = s;
        }
    }
    let mut y = r.to_vec();
    lu_solve(&mut g, m, &mut y)?;
    let mut z = vec![C64::new(0.0, 0.0); k];
    for c in 0..k {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..m {
            s += a[i * k + c].conj() * y[i];
        }
        z[c] = s;
    }
    Ok(z)
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut a = vec![
            C64::new(0.0, 0.0),
            C64::new(2.0, 1.0),
            C64::new(1.0, 0.0),
            C64::new(3.0, 0.0),
        ];
        let a0 = a.clone();
        let mut b = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)];
        let b0 = b.clone();
        lu_solve(&mut a, 2, &mut b).unwrap();
        for i in 0..2 {
            let r = a0[i * 2] * b[0] + a0[i * 2 + 1] * b[1] - b0[i];
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn min_norm_is_orthogonal_to_kernel() {
        let a = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let z = min_norm_solve(&a, 1, 2, &[C64::new(2.0, 0.0)]).unwrap();
        assert!((z[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((z[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
