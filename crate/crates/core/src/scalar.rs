//! Scalar abstractions shared by the symbolic and numeric tensor pipelines.
//!
//! Tensor formulas (Christoffel symbols, curvature, covariant derivatives,
//! the operators on bundle-valued forms) are written once against
//! [`Scalar`] and a [`Calculus`] that knows how to take coordinate partials.
//! Instantiated with [`Expr`] they produce symbolic component expressions;
//! instantiated with [`Jet`] they produce values together with the
//! derivatives needed by the next operator in a chain.

use std::sync::Arc;

use crate::expr::{diff, diff_raw, Expr};
use crate::jet::Jet;

pub trait Scalar: Clone + Send + Sync {
    fn constant(c: f64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact (structural) zero; used only to skip work.
    fn is_zero(&self) -> bool;

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn scale(&self, c: f64) -> Self {
        if c == 1.0 {
            return self.clone();
        }
        self.mul(&Self::constant(c))
    }

    /// `self += a * b`
    fn acc_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self = self.add(&a.mul(b));
    }
}

/// Coordinate differentiation for a scalar type.
pub trait Calculus {
    type S: Scalar;
    fn dim(&self) -> usize;
    fn partial(&self, x: &Self::S, axis: usize) -> Self::S;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn acc_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Scalar for Expr {
    fn constant(c: f64) -> Self {
        Expr::constant(c)
    }
    fn add(&self, rhs: &Self) -> Self {
        Expr::add_s(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Expr::sub_s(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Expr::mul_s(self, rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Expr::div_s(self, rhs)
    }
    fn neg(&self) -> Self {
        self.neg_s()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

/// An expression built only through the raw (non-rewriting) constructors.
#[derive(Clone, Debug, PartialEq)]
pub struct RawExpr(pub Expr);

impl Scalar for RawExpr {
    fn constant(c: f64) -> Self {
        RawExpr(Expr::constant(c))
    }
    fn add(&self, rhs: &Self) -> Self {
        RawExpr(Expr::raw_add(&self.0, &rhs.0))
    }
    fn sub(&self, rhs: &Self) -> Self {
        RawExpr(Expr::raw_sub(&self.0, &rhs.0))
    }
    fn mul(&self, rhs: &Self) -> Self {
        RawExpr(Expr::raw_mul(&self.0, &rhs.0))
    }
    fn div(&self, rhs: &Self) -> Self {
        RawExpr(Expr::raw_div(&self.0, &rhs.0))
    }
    fn neg(&self) -> Self {
        RawExpr(Expr::raw_neg(&self.0))
    }
    fn is_zero(&self) -> bool {
        false
    }
    fn acc_mul(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
}

/// Symbolic differentiation with respect to named chart coordinates.
#[derive(Clone, Debug)]
pub struct ExprCalculus {
    pub coords: Vec<Arc<str>>,
}

impl ExprCalculus {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Self {
        ExprCalculus {
            coords: coords.iter().map(|c| Arc::from(c.as_ref())).collect(),
        }
    }
}

impl Calculus for ExprCalculus {
    type S = Expr;
    fn dim(&self) -> usize {
        self.coords.len()
    }
    fn partial(&self, x: &Expr, axis: usize) -> Expr {
        diff(x, &self.coords[axis])
    }
}

/// Like [`ExprCalculus`] but never simplifies.
#[derive(Clone, Debug)]
pub struct RawExprCalculus {
    pub coords: Vec<Arc<str>>,
}

impl Calculus for RawExprCalculus {
    type S = RawExpr;
    fn dim(&self) -> usize {
        self.coords.len()
    }
    fn partial(&self, x: &RawExpr, axis: usize) -> RawExpr {
        RawExpr(diff_raw(&x.0, &self.coords[axis]))
    }
}

/// Partials of truncated Taylor jets; each partial lowers the valid order by one.
#[derive(Clone, Copy, Debug)]
pub struct JetCalculus {
    pub dim: usize,
}

impl Calculus for JetCalculus {
    type S = Jet;
    fn dim(&self) -> usize {
        self.dim
    }
    fn partial(&self, x: &Jet, axis: usize) -> Jet {
        x.partial(axis)
    }
}

/// Gauss-Jordan inverse without pivoting; valid for symmetric positive
/// definite input and for perturbations of the identity.
pub fn invert<S: Scalar>(m: &[S], n: usize) -> Vec<S> {
    let mut a: Vec<S> = m.to_vec();
    let mut inv: Vec<S> = (0..n * n)
        .map(|k| if k / n == k % n { S::one() } else { S::zero() })
        .collect();
    for col in 0..n {
        let p = a[col * n + col].clone();
        for j in 0..n {
            a[col * n + j] = a[col * n + j].div(&p);
            inv[col * n + j] = inv[col * n + j].div(&p);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let t = a[col * n + j].mul(&f);
                a[row * n + j] = a[row * n + j].sub(&t);
                let t = inv[col * n + j].mul(&f);
                inv[row * n + j] = inv[row * n + j].sub(&t);
            }
        }
    }
    inv
}

/// Row-major product of two square matrices.
pub fn matmul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut out = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = S::zero();
            for k in 0..n {
                acc.acc_mul(&a[i * n + k], &b[k * n + j]);
            }
            out[i * n + j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_spd_matrix() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = invert(&m, 3);
        let id = matmul(&m, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i * 3 + j] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symbolic_inverse_of_diagonal() {
        let u = Expr::var("u");
        let m = vec![u.clone(), Expr::zero(), Expr::zero(), Expr::constant(2.0)];
        let inv = invert(&m, 2);
        assert_eq!(inv[0], Expr::div_s(&Expr::one(), &u));
        assert!(inv[1].is_zero() && inv[2].is_zero());
        assert_eq!(inv[3], Expr::constant(0.5));
    }
}
