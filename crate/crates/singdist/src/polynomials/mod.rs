//! Sparse multivariate polynomials with complex coefficients.
//!
//! A monomial is a dense exponent vector over a shared variable registry, stored
//! with trailing zero exponents trimmed so constants need no registry size.

mod compiled;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::C64;

pub use compiled::{CompiledSystem, EvalWorkspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no value assigned to variable index {0}")]
    MissingAssignment(usize),
    #[error("system is not square: {equations} equations, {unknowns} unknowns")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("equation {equation} uses unregistered variable index {var}")]
    UnregisteredVariable { equation: usize, var: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        let mut e = exps.to_vec();
        while e.last() == Some(&0) {
            e.pop();
        }
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u16 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Number of variable slots spanned (index of the last used variable + 1).
    pub fn span(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (long, short) = if self.0.len() >= other.0.len() {
            (&self.0, &other.0)
        } else {
            (&other.0, &self.0)
        };
        let mut e = long.clone();
        for (a, b) in e.iter_mut().zip(short.iter()) {
            *a += *b;
        }
        Monomial(e)
    }

    /// Iterator over `(var, exponent)` pairs with nonzero exponent.
    pub fn factors(&self) -> impl Iterator<Item = (usize, u16)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| (v, e))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, C64>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(Monomial::var(i), C64::new(1.0, 0.0));
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C64)>>(terms: I) -> Self {
        let mut p = MultiPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c·m`, dropping the term if it cancels to exactly zero.
    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == C64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m.exponent(var)).max().unwrap_or(0)
    }

    /// Number of variable slots any term touches.
    pub fn span(&self) -> usize {
        self.terms.keys().map(Monomial::span).max().unwrap_or(0)
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(var) > 0)
    }

    pub fn scale(&self, c: C64) -> MultiPoly {
        MultiPoly::from_terms(self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact formal partial derivative with respect to variable index `var`.
    pub fn derivative(&self, var: usize) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial::from_exponents(&exps), c * e as f64);
        }
        out
    }

    /// Evaluates at a full assignment; `values[i]` is variable `i`.
    pub fn evaluate(&self, values: &[C64]) -> Result<C64, PolyError> {
        if self.span() > values.len() {
            let missing = self
                .terms
                .keys()
                .flat_map(|m| m.factors().map(|(v, _)| v))
                .find(|&v| v >= values.len())
                .unwrap_or(values.len());
            return Err(PolyError::MissingAssignment(missing));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = *c;
            for (v, e) in m.factors() {
                t *= values[v].powu(e as u32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Replaces variable `i` by `images[i]`; variables without an image stay put.
    pub fn compose(&self, images: &[Option<MultiPoly>]) -> MultiPoly {
        let mut cache: BTreeMap<(usize, u16), MultiPoly> = BTreeMap::new();
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(*c);
            for (v, e) in m.factors() {
                let factor = match images.get(v).and_then(|x| x.as_ref()) {
                    Some(img) => cache
                        .entry((v, e))
                        .or_insert_with(|| img.pow(e as u32))
                        .clone(),
                    None => {
                        let mut exps = vec![0; v + 1];
                        exps[v] = e;
                        MultiPoly::from_terms([(Monomial(exps), C64::new(1.0, 0.0))])
                    }
                };
                t = &t * &factor;
            }
            out += &t;
        }
        out
    }

    /// Substitutes numeric values for selected variables.
    pub fn substitute(&self, values: &[Option<C64>]) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut coef = *c;
            let mut exps = m.0.clone();
            for (v, e) in m.factors() {
                if let Some(Some(x)) = values.get(v) {
                    coef *= x.powu(e as u32);
                    exps[v] = 0;
                }
            }
            out.add_term(Monomial::from_exponents(&exps), coef);
        }
        out
    }

    /// Renames variable slots: variable `i` becomes `map[i]`.
    pub fn remap(&self, map: &[usize]) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut exps: Vec<u16> = Vec::new();
            for (v, e) in m.factors() {
                let w = map[v];
                if exps.len() <= w {
                    exps.resize(w + 1, 0);
                }
                exps[w] += e;
            }
            out.add_term(Monomial::from_exponents(&exps), *c);
        }
        out
    }

    /// Plain-text dump, one `coef*var^exp` product per term joined by ` + `.
    pub fn dump(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            let _ = write!(s, "({:e}{:+e}*I)", c.re, c.im);
            for (v, e) in m.factors() {
                let name = names.get(v).map(String::as_str).unwrap_or("?");
                let _ = write!(s, "*{}^{}", name, e);
            }
        }
        s
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl Add<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(mut self, rhs: MultiPoly) -> MultiPoly {
        self += &rhs;
        self
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

/// Square polynomial system over unknowns followed by parameters.
///
/// Variable index `i < unknowns.len()` is unknown `i`; index `unknowns.len() + j`
/// is parameter `j`.
#[derive(Clone, Debug)]
pub struct ParameterizedSystem {
    equations: Vec<MultiPoly>,
    unknowns: Vec<String>,
    parameters: Vec<String>,
}

impl ParameterizedSystem {
    pub fn new(
        equations: Vec<MultiPoly>,
        unknowns: Vec<String>,
        parameters: Vec<String>,
    ) -> Result<Self, PolyError> {
        if equations.len() != unknowns.len() {
            return Err(PolyError::NotSquare {
                equations: equations.len(),
                unknowns: unknowns.len(),
            });
        }
        let nvars = unknowns.len() + parameters.len();
        for (i, eq) in equations.iter().enumerate() {
            if eq.span() > nvars {
                return Err(PolyError::UnregisteredVariable {
                    equation: i,
                    var: eq.span() - 1,
                });
            }
        }
        Ok(ParameterizedSystem {
            equations,
            unknowns,
            parameters,
        })
    }

    pub fn equations(&self) -> &[MultiPoly] {
        &self.equations
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn n_params(&self) -> usize {
        self.parameters.len()
    }

    pub fn var_names(&self) -> Vec<String> {
        self.unknowns
            .iter()
            .chain(self.parameters.iter())
            .cloned()
            .collect()
    }

    pub fn var_index(&self, name: &str) -> Result<usize, PolyError> {
        self.unknowns
            .iter()
            .chain(self.parameters.iter())
            .position(|n| n == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    /// `∂ eq_i / ∂ unknown_j` as polynomials.
    pub fn jacobian(&self) -> Vec<Vec<MultiPoly>> {
        self.equations
            .iter()
            .map(|eq| (0..self.unknowns.len()).map(|j| eq.derivative(j)).collect())
            .collect()
    }

    /// Fixes all parameters, leaving a system in the unknowns only.
    pub fn specialize(&self, params: &[C64]) -> ParameterizedSystem {
        let n = self.unknowns.len();
        let mut assign: Vec<Option<C64>> = vec![None; n];
        assign.extend(params.iter().copied().map(Some));
        ParameterizedSystem {
            equations: self.equations.iter().map(|e| e.substitute(&assign)).collect(),
            unknowns: self.unknowns.clone(),
            parameters: Vec::new(),
        }
    }

    pub fn compile(&self) -> CompiledSystem {
        CompiledSystem::new(&self.equations, self.unknowns.len() + self.parameters.len())
    }

    pub fn dump(&self) -> String {
        let names = self.var_names();
        let mut s = String::new();
        let _ = writeln!(s, "unknowns: {}", self.unknowns.join(", "));
        let _ = writeln!(s, "parameters: {}", self.parameters.join(", "));
        for (i, eq) in self.equations.iter().enumerate() {
            let _ = writeln!(s, "f{} = {}", i + 1, eq.dump(&names));
        }
        s
    }
}

/// Partial derivative by variable name, resolving names through `sys`.
pub fn differentiate(
    sys: &ParameterizedSystem,
    p: &MultiPoly,
    var: &str,
) -> Result<MultiPoly, PolyError> {
    Ok(p.derivative(sys.var_index(var)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn derivative_of_x2y() {
        let x = MultiPoly::var(0);
        let y = MultiPoly::var(1);
        let p = &(&x * &x) * &y;
        let d = p.derivative(0);
        let expect = (&x * &y).scale(c(2.0));
        assert_eq!(d, expect);
        assert!(MultiPoly::constant(c(3.0)).derivative(0).is_zero());
    }

    #[test]
    fn evaluate_simple() {
        let x = MultiPoly::var(0);
        let p = &(&x * &x) + &MultiPoly::constant(c(1.0));
        assert_eq!(p.evaluate(&[c(2.0)]).unwrap(), c(5.0));
        assert!(p.evaluate(&[C64::new(0.0, 1.0)]).unwrap().norm() < 1e-15);
        assert_eq!(p.evaluate(&[]), Err(PolyError::MissingAssignment(0)));
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = MultiPoly::var(2);
        let p = &x - &x;
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
        assert_eq!(p.total_degree(), 0);
    }

    #[test]
    fn square_check_and_names() {
        let x = MultiPoly::var(0);
        let err = ParameterizedSystem::new(vec![x.clone(), x.clone()], vec!["x".into()], vec![])
            .unwrap_err();
        assert!(matches!(err, PolyError::NotSquare { .. }));
        let err = ParameterizedSystem::new(vec![MultiPoly::var(3)], vec!["x".into()], vec![])
            .unwrap_err();
        assert!(matches!(err, PolyError::UnregisteredVariable { .. }));
        let sys = ParameterizedSystem::new(vec![x.clone()], vec!["x".into()], vec![]).unwrap();
        assert!(matches!(
            differentiate(&sys, &x, "z"),
            Err(PolyError::UnknownVariable(_))
        ));
    }

    #[test]
    fn jacobian_of_linear_system_is_coefficient_matrix() {
        let a = [[2.0, -1.0], [0.5, 3.0]];
        let eqs = (0..2)
            .map(|i| {
                &(&MultiPoly::var(0).scale(c(a[i][0])) + &MultiPoly::var(1).scale(c(a[i][1])))
                    + &MultiPoly::constant(c(7.0))
            })
            .collect();
        let sys =
            ParameterizedSystem::new(eqs, vec!["x".into(), "y".into()], vec![]).unwrap();
        let j = sys.jacobian();
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(j[i][k], MultiPoly::constant(c(a[i][k])));
            }
        }
        let sq = ParameterizedSystem::new(
            vec![&MultiPoly::var(0).pow(2) - &MultiPoly::constant(c(1.0))],
            vec!["x".into()],
            vec![],
        )
        .unwrap();
        assert_eq!(sq.jacobian()[0][0], MultiPoly::var(0).scale(c(2.0)));
    }

    #[test]
    fn compose_and_substitute() {
        // p = x^2 y, x -> (1 + t), y stays
        let x = MultiPoly::var(0);
        let y = MultiPoly::var(1);
        let p = &(&x * &x) * &y;
        let img = &MultiPoly::constant(c(1.0)) + &MultiPoly::var(2);
        let q = p.compose(&[Some(img), None]);
        let v = q.evaluate(&[c(0.0), c(2.0), c(3.0)]).unwrap();
        assert!((v - c(32.0)).norm() < 1e-12);
        let s = p.substitute(&[Some(c(3.0)), None]);
        assert_eq!(s, y.scale(c(9.0)));
    }

    #[test]
    fn dump_format() {
        let p = &MultiPoly::var(0).pow(2) + &MultiPoly::var(1);
        let s = p.dump(&["x".into(), "y".into()]);
        assert!(s.contains("*x^2"));
        assert!(s.contains("*y^1"));
    }
}
