//! Second-order truncated Taylor numbers in up to [`MAX_DIM`] variables.
//!
//! A [`Jet`] carries a value, gradient and (packed, symmetric) Hessian, plus
//! the number of derivative orders that are actually valid. Taking a
//! coordinate partial shifts the Taylor data down by one order, so a chain
//! like `metric -> Christoffel -> curvature` stays exact as long as the
//! inputs were seeded with enough orders.

use crate::scalar::Scalar;

pub const MAX_DIM: usize = 6;
const NH: usize = MAX_DIM * (MAX_DIM + 1) / 2;
/// Order marker for constants: every derivative is exactly zero.
const EXACT: u8 = u8::MAX;

const fn pairs() -> [(usize, usize); NH] {
    let mut out = [(0, 0); NH];
    let mut k = 0;
    let mut i = 0;
    while i < MAX_DIM {
        let mut j = i;
        while j < MAX_DIM {
            out[k] = (i, j);
            k += 1;
            j += 1;
        }
        i += 1;
    }
    out
}

const PAIRS: [(usize, usize); NH] = pairs();

const fn index_table() -> [[usize; MAX_DIM]; MAX_DIM] {
    let mut t = [[0; MAX_DIM]; MAX_DIM];
    let mut k = 0;
    while k < NH {
        let (i, j) = PAIRS[k];
        t[i][j] = k;
        t[j][i] = k;
        k += 1;
    }
    t
}

const HIDX: [[usize; MAX_DIM]; MAX_DIM] = index_table();

#[derive(Clone, Copy, Debug)]
pub struct Jet {
    v: f64,
    g: [f64; MAX_DIM],
    h: [f64; NH],
    ord: u8,
}

impl Jet {
    pub fn constant(c: f64) -> Jet {
        Jet {
            v: c,
            g: [0.0; MAX_DIM],
            h: [0.0; NH],
            ord: EXACT,
        }
    }

    /// The coordinate function `x_axis` at `value`, valid to `order` derivatives.
    pub fn variable(value: f64, axis: usize, order: u8) -> Jet {
        let mut j = Jet::constant(value);
        j.g[axis] = 1.0;
        j.ord = order;
        j
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    pub fn grad(&self, a: usize) -> f64 {
        debug_assert!(self.ord >= 1, "gradient of an order-0 jet");
        self.g[a]
    }

    pub fn hess(&self, a: usize, b: usize) -> f64 {
        debug_assert!(self.ord >= 2, "hessian of an order-{} jet", self.ord);
        self.h[HIDX[a][b]]
    }

    /// Number of valid derivative orders (255 for constants).
    pub fn order(&self) -> u8 {
        self.ord
    }

    pub fn truncate(mut self, order: u8) -> Jet {
        self.ord = self.ord.min(order);
        self
    }

    pub fn partial(&self, axis: usize) -> Jet {
        debug_assert!(self.ord >= 1, "partial of an order-0 jet");
        let mut out = Jet::constant(self.g[axis]);
        out.ord = if self.ord == EXACT {
            EXACT
        } else {
            self.ord - 1
        };
        if self.ord >= 2 {
            for b in 0..MAX_DIM {
                out.g[b] = self.h[HIDX[axis][b]];
            }
        }
        out
    }

    /// `f(self)` given `f`, `f'` and `f''` at the value.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = Jet::constant(f0);
        out.ord = self.ord;
        if self.ord >= 1 {
            for a in 0..MAX_DIM {
                out.g[a] = f1 * self.g[a];
            }
        }
        if self.ord >= 2 {
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                out.h[k] = f1 * self.h[k] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let x = self.v;
        let r = 1.0 / x;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powi(&self, n: i32) -> Jet {
        let x = self.v;
        let f0 = x.powi(n);
        let f1 = if n == 0 {
            0.0
        } else {
            n as f64 * x.powi(n - 1)
        };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            (n as f64) * ((n - 1) as f64) * x.powi(n - 2)
        };
        self.chain(f0, f1, f2)
    }
}

impl Scalar for Jet {
    fn constant(c: f64) -> Self {
        Jet::constant(c)
    }

    fn add(&self, rhs: &Self) -> Self {
        let mut out = Jet::constant(self.v + rhs.v);
        out.ord = self.ord.min(rhs.ord);
        if out.ord >= 1 {
            for a in 0..MAX_DIM {
                out.g[a] = self.g[a] + rhs.g[a];
            }
        }
        if out.ord >= 2 {
            for k in 0..NH {
                out.h[k] = self.h[k] + rhs.h[k];
            }
        }
        out
    }

    fn sub(&self, rhs: &Self) -> Self {
        let mut out = Jet::constant(self.v - rhs.v);
        out.ord = self.ord.min(rhs.ord);
        if out.ord >= 1 {
            for a in 0..MAX_DIM {
                out.g[a] = self.g[a] - rhs.g[a];
            }
        }
        if out.ord >= 2 {
            for k in 0..NH {
                out.h[k] = self.h[k] - rhs.h[k];
            }
        }
        out
    }

    fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (self, rhs);
        let mut out = Jet::constant(a.v * b.v);
        out.ord = a.ord.min(b.ord);
        if out.ord >= 1 {
            for i in 0..MAX_DIM {
                out.g[i] = a.v * b.g[i] + b.v * a.g[i];
            }
        }
        if out.ord >= 2 {
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                out.h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
            }
        }
        out
    }

    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.recip())
    }

    fn neg(&self) -> Self {
        let mut out = *self;
        out.v = -out.v;
        for x in out.g.iter_mut() {
            *x = -*x;
        }
        for x in out.h.iter_mut() {
            *x = -*x;
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.ord == EXACT && self.v == 0.0
    }

    fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.v *= c;
        for x in out.g.iter_mut() {
            *x *= c;
        }
        for x in out.h.iter_mut() {
            *x *= c;
        }
        out
    }

    fn acc_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let ord = self.ord.min(a.ord).min(b.ord);
        self.v += a.v * b.v;
        if ord >= 1 {
            for i in 0..MAX_DIM {
                self.g[i] += a.v * b.g[i] + b.v * a.g[i];
            }
        }
        if ord >= 2 {
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                self.h[k] += a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
            }
        }
        self.ord = ord;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: &Jet, y: &Jet) -> Jet {
        // x^2 sin(y) / (1 + x y)
        let num = x.powi(2).mul(&y.sin());
        let den = Jet::constant(1.0).add(&x.mul(y));
        num.div(&den)
    }

    fn fv(x: f64, y: f64) -> f64 {
        x * x * y.sin() / (1.0 + x * y)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (x0, y0) = (0.7, 0.4);
        let j = f(&Jet::variable(x0, 0, 2), &Jet::variable(y0, 1, 2));
        let h = 1e-4;
        let fx = (fv(x0 + h, y0) - fv(x0 - h, y0)) / (2.0 * h);
        let fy = (fv(x0, y0 + h) - fv(x0, y0 - h)) / (2.0 * h);
        let fxx = (fv(x0 + h, y0) - 2.0 * fv(x0, y0) + fv(x0 - h, y0)) / (h * h);
        let fxy = (fv(x0 + h, y0 + h) - fv(x0 + h, y0 - h) - fv(x0 - h, y0 + h)
            + fv(x0 - h, y0 - h))
            / (4.0 * h * h);
        assert!((j.value() - fv(x0, y0)).abs() < 1e-15);
        assert!((j.grad(0) - fx).abs() < 1e-7);
        assert!((j.grad(1) - fy).abs() < 1e-7);
        assert!((j.hess(0, 0) - fxx).abs() < 1e-5);
        assert!((j.hess(0, 1) - fxy).abs() < 1e-5);
    }

    #[test]
    fn partial_lowers_order() {
        let x = Jet::variable(2.0, 0, 2);
        let p = x.powi(3).partial(0);
        assert_eq!(p.order(), 1);
        assert!((p.value() - 12.0).abs() < 1e-14);
        assert!((p.grad(0) - 12.0).abs() < 1e-14);
        let c = Jet::constant(3.0).partial(0);
        assert!(c.is_zero());
    }

    #[test]
    fn order_propagates_as_minimum() {
        let a = Jet::variable(1.0, 0, 2);
        let b = Jet::variable(1.0, 1, 1);
        assert_eq!(a.mul(&b).order(), 1);
        assert_eq!(a.add(&Jet::constant(2.0)).order(), 2);
    }

    #[test]
    fn sqrt_and_exp_chain() {
        let x = Jet::variable(0.3, 0, 2);
        let e = x.exp().mul(&x.sqrt());
        let d = 0.3f64.exp() * (0.3f64.sqrt() + 0.5 / 0.3f64.sqrt());
        assert!((e.grad(0) - d).abs() < 1e-13);
    }
}
