//! Parameter-reversal seeding: pick the unknowns first, then solve for parameters.

use rand::Rng;

use crate::polynomials::EvalWorkspace;
use crate::scalar::C64;

use super::linalg::{min_norm_solve, norm2};
use super::{random_complex, Family, HomotopyError};

/// Returns `(params, x)` with `F(x; params) ≈ 0` for a random generic member
/// of the family.
///
/// Equations are split into a *fixed* block, free of affine parameters and
/// multipliers (e.g. `V`, `N`), and an *affine* block, which is jointly affine in
/// the affine parameters and the multipliers. Shape parameters and the primal
/// unknowns are drawn at random, the primal unknowns are pulled onto the fixed
/// block by minimum-norm Newton, and the affine block is then solved exactly
/// from a random offset.
pub fn seed_by_parameter_reversal<R: Rng>(family: &Family, rng: &mut R) -> Result<(Vec<C64>, Vec<C64>), HomotopyError> {
    let n = family.n_unknowns();
    let m = family.n_params();
    let nv = n + m;
    let z_vars: Vec<usize> = family
        .multipliers
        .iter()
        .copied()
        .chain(family.linear_params.iter().map(|&j| n + j))
        .collect();
    let primal: Vec<usize> = (0..n).filter(|i| !family.multipliers.contains(i)).collect();
    let (fixed, affine): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| {
        let eq = &family.equations()[i];
        !z_vars.iter().any(|&v| eq.uses_var(v))
    });
    if affine.len() > z_vars.len() {
        return Err(HomotopyError::SeedFailure(format!(
            "{} affine equations but only {} affine unknowns",
            affine.len(),
            z_vars.len()
        )));
    }

    let mut ws = EvalWorkspace::default();
    let mut vals = vec![C64::new(0.0, 0.0); n];
    let mut jac = vec![C64::new(0.0, 0.0); n * nv];

    for _attempt in 0..20 {
        let mut z: Vec<C64> = (0..nv).map(|_| random_complex(rng)).collect();

        // Fixed block: Newton on the primal unknowns, minimum-norm updates.
        let mut ok = fixed.is_empty();
        for _ in 0..60 {
            if fixed.is_empty() {
                break;
            }
            family.compiled.eval_with_jacobian(&z, &mut vals, &mut jac, &mut ws);
            let a: Vec<C64> = fixed
                .iter()
                .flat_map(|&i| primal.iter().map(move |&j| (i, j)))
                .map(|(i, j)| jac[i * nv + j])
                .collect();
            let r: Vec<C64> = fixed.iter().map(|&i| -vals[i]).collect();
            let Ok(dx) = min_norm_solve(&a, fixed.len(), primal.len(), &r) else {
                break;
            };
            for (k, &j) in primal.iter().enumerate() {
                z[j] += dx[k];
            }
            let scale = 1.0 + norm2(&z[..n]);
            if norm2(&dx) < 1e-14 * scale {
                ok = true;
                break;
            }
        }
        if !ok {
            continue;
        }

        // Affine block: values and exact coefficients in the affine variables.
        family.compiled.eval_with_jacobian(&z, &mut vals, &mut jac, &mut ws);
        let k = z_vars.len();
        let a: Vec<C64> = affine
            .iter()
            .flat_map(|&i| z_vars.iter().map(move |&v| (i, v)))
            .map(|(i, v)| jac[i * nv + v])
            .collect();
        let r: Vec<C64> = affine.iter().map(|&i| -vals[i]).collect();
        let Ok(dz) = min_norm_solve(&a, affine.len(), k, &r) else {
            continue;
        };
        for (c, &v) in z_vars.iter().enumerate() {
            z[v] += dz[c];
        }
        let x = z[..n].to_vec();
        let p = z[n..].to_vec();
        let (x, res) = family.refine(&x, &p, 5);
        if res < 1e-12 {
            return Ok((p, x));
        }
    }
    Err(HomotopyError::SeedFailure("no consistent seed after 20 attempts".into()))
}
