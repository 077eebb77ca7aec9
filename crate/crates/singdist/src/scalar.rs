//! Minimal ring abstraction shared by numeric and symbolic evaluation.
//!
//! Distance formulas and constraint determinants are written once, generically
//! over [`Ring`], and instantiated with `f64`, [`C64`] or [`MultiPoly`].

use std::ops::{Add, Mul, Neg, Sub};

use crate::polynomials::MultiPoly;

pub use num_complex::Complex64 as C64;

pub trait Ring:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Ring for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl Ring for C64 {
    fn from_f64(v: f64) -> Self {
        C64::new(v, 0.0)
    }
}

impl Ring for MultiPoly {
    fn from_f64(v: f64) -> Self {
        MultiPoly::constant(C64::new(v, 0.0))
    }
}

/// Planar point over a ring.
pub type Pt<T> = [T; 2];

pub fn dot<T: Ring>(a: &Pt<T>, b: &Pt<T>) -> T {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone()
}

pub fn sub<T: Ring>(a: &Pt<T>, b: &Pt<T>) -> Pt<T> {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone()]
}

/// 2×2 determinant `a.x*b.y - a.y*b.x`.
pub fn cross<T: Ring>(a: &Pt<T>, b: &Pt<T>) -> T {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}

pub fn det3<T: Ring>(m: &[[T; 3]; 3]) -> T {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        m[r1][c1].clone() * m[r2][c2].clone() - m[r1][c2].clone() * m[r2][c1].clone()
    };
    m[0][0].clone() * minor(1, 2, 1, 2) - m[0][1].clone() * minor(1, 2, 0, 2)
        + m[0][2].clone() * minor(1, 2, 0, 1)
}
