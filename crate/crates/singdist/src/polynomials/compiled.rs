use crate::scalar::C64;

use super::MultiPoly;

const MAX_FACTORS: usize = 24;

#[derive(Clone, Debug)]
struct Term {
    coef: C64,
    start: u32,
    len: u32,
}

/// Flat, evaluation-ready form of a polynomial system.
///
/// Values and the full gradient with respect to every variable come out of a
/// single pass over the terms using per-variable power tables.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    /// `(var, exp)` factor list shared by all terms.
    factors: Vec<(u32, u32)>,
    terms: Vec<Term>,
    /// Term range of each equation.
    eq_ranges: Vec<(usize, usize)>,
    max_exp: Vec<u32>,
    pow_offset: Vec<usize>,
    pow_len: usize,
}

/// Scratch buffers reused across evaluations.
#[derive(Clone, Debug, Default)]
pub struct EvalWorkspace {
    pows: Vec<C64>,
}

impl CompiledSystem {
    pub fn new(equations: &[MultiPoly], nvars: usize) -> Self {
        let mut factors = Vec::new();
        let mut terms = Vec::new();
        let mut eq_ranges = Vec::new();
        let mut max_exp = vec![0u32; nvars];
        for eq in equations {
            let begin = terms.len();
            for (m, c) in eq.terms() {
                let start = factors.len() as u32;
                for (v, e) in m.factors() {
                    assert!(v < nvars, "variable index {v} outside registry of {nvars}");
                    factors.push((v as u32, e as u32));
                    max_exp[v] = max_exp[v].max(e as u32);
                }
                let len = factors.len() as u32 - start;
                assert!((len as usize) <= MAX_FACTORS, "term with too many factors");
                terms.push(Term {
                    coef: *c,
                    start,
                    len,
                });
            }
            eq_ranges.push((begin, terms.len()));
        }
        let mut pow_offset = Vec::with_capacity(nvars);
        let mut acc = 0;
        for &m in &max_exp {
            pow_offset.push(acc);
            acc += m as usize + 1;
        }
        CompiledSystem {
            nvars,
            factors,
            terms,
            eq_ranges,
            max_exp,
            pow_offset,
            pow_len: acc,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn neqs(&self) -> usize {
        self.eq_ranges.len()
    }

    fn fill_powers(&self, x: &[C64], ws: &mut EvalWorkspace) {
        assert_eq!(x.len(), self.nvars);
        ws.pows.resize(self.pow_len, C64::new(0.0, 0.0));
        for v in 0..self.nvars {
            let o = self.pow_offset[v];
            ws.pows[o] = C64::new(1.0, 0.0);
            for k in 1..=self.max_exp[v] as usize {
                ws.pows[o + k] = ws.pows[o + k - 1] * x[v];
            }
        }
    }

    #[inline]
    fn pow(&self, ws: &EvalWorkspace, v: u32, e: u32) -> C64 {
        ws.pows[self.pow_offset[v as usize] + e as usize]
    }

    /// Equation values only.
    pub fn eval_values(&self, x: &[C64], out: &mut [C64], ws: &mut EvalWorkspace) {
        self.fill_powers(x, ws);
        for (i, &(a, b)) in self.eq_ranges.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for t in &self.terms[a..b] {
                let mut p = t.coef;
                for &(v, e) in &self.factors[t.start as usize..(t.start + t.len) as usize] {
                    p *= self.pow(ws, v, e);
                }
                s += p;
            }
            out[i] = s;
        }
    }

    /// Values and the dense row-major Jacobian `neqs × nvars`.
    pub fn eval_with_jacobian(
        &self,
        x: &[C64],
        values: &mut [C64],
        jac: &mut [C64],
        ws: &mut EvalWorkspace,
    ) {
        self.fill_powers(x, ws);
        let n = self.nvars;
        jac[..self.neqs() * n].fill(C64::new(0.0, 0.0));
        let mut fvals = [C64::new(0.0, 0.0); MAX_FACTORS];
        let mut suffix = [C64::new(0.0, 0.0); MAX_FACTORS + 1];
        for (i, &(a, b)) in self.eq_ranges.iter().enumerate() {
            let row = &mut jac[i * n..(i + 1) * n];
            let mut s = C64::new(0.0, 0.0);
            for t in &self.terms[a..b] {
                let fs = &self.factors[t.start as usize..(t.start + t.len) as usize];
                let len = fs.len();
                for (j, &(v, e)) in fs.iter().enumerate() {
                    fvals[j] = self.pow(ws, v, e);
                }
                suffix[len] = C64::new(1.0, 0.0);
                for j in (0..len).rev() {
                    suffix[j] = suffix[j + 1] * fvals[j];
                }
                s += t.coef * suffix[0];
                let mut prefix = t.coef;
                for (j, &(v, e)) in fs.iter().enumerate() {
                    let d = self.pow(ws, v, e - 1) * e as f64;
                    row[v as usize] += prefix * d * suffix[j + 1];
                    prefix *= fvals[j];
                }
            }
            values[i] = s;
        }
    }

    /// Per-equation `|f_i| / max(1, Σ|terms|)`, maximised over equations.
    pub fn scaled_residual(&self, x: &[C64], ws: &mut EvalWorkspace) -> f64 {
        self.fill_powers(x, ws);
        let mut worst: f64 = 0.0;
        for &(a, b) in &self.eq_ranges {
            let mut s = C64::new(0.0, 0.0);
            let mut mag = 0.0;
            for t in &self.terms[a..b] {
                let mut p = t.coef;
                for &(v, e) in &self.factors[t.start as usize..(t.start + t.len) as usize] {
                    p *= self.pow(ws, v, e);
                }
                mag += p.norm();
                s += p;
            }
            worst = worst.max(s.norm() / mag.max(1.0));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_symbolic_derivative() {
        let x = MultiPoly::var(0);
        let y = MultiPoly::var(1);
        let z = MultiPoly::var(2);
        let f1 = &(&x.pow(3) * &y) + &(&z * &x).scale(C64::new(2.0, -1.0));
        let f2 = &(&y.pow(2) * &z.pow(2)) - &MultiPoly::constant(C64::new(4.0, 0.0));
        let eqs = vec![f1, f2];
        let sys = CompiledSystem::new(&eqs, 3);
        let pt = [C64::new(0.3, 0.1), C64::new(-1.2, 0.4), C64::new(0.7, -0.9)];
        let mut vals = [C64::new(0.0, 0.0); 2];
        let mut jac = [C64::new(0.0, 0.0); 6];
        let mut ws = EvalWorkspace::default();
        sys.eval_with_jacobian(&pt, &mut vals, &mut jac, &mut ws);
        for i in 0..2 {
            assert!((vals[i] - eqs[i].evaluate(&pt).unwrap()).norm() < 1e-13);
            for j in 0..3 {
                let d = eqs[i].derivative(j).evaluate(&pt).unwrap();
                assert!((jac[i * 3 + j] - d).norm() < 1e-13);
            }
        }
        let mut only = [C64::new(0.0, 0.0); 2];
        sys.eval_values(&pt, &mut only, &mut ws);
        assert_eq!(only, vals);
    }
}
