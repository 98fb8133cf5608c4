//! Local rewrite rules applied by the simplifying constructors.
//!
//! Every rule strictly shrinks the rebuilt tree or only reorders commutative
//! operands, so repeated application terminates.

use std::collections::HashMap;

use super::{canon_cmp, intern, postorder, rebuild, Expr, Func, Kind};

fn fold(c: f64) -> Option<Expr> {
    c.is_finite().then(|| Expr::constant(c))
}

fn ordered(a: &Expr, b: &Expr) -> (Expr, Expr) {
    if canon_cmp(a, b) == std::cmp::Ordering::Greater {
        (b.clone(), a.clone())
    } else {
        (a.clone(), b.clone())
    }
}

fn square_of(e: &Expr, f: Func) -> Option<&Expr> {
    match e.kind() {
        Kind::Pow(inner, 2) => match inner.kind() {
            Kind::Func(g, arg) if *g == f => Some(arg),
            _ => None,
        },
        _ => None,
    }
}

fn pythagorean(a: &Expr, b: &Expr) -> bool {
    matches!((square_of(a, Func::Sin), square_of(b, Func::Cos)), (Some(x), Some(y)) if x == y)
        || matches!((square_of(a, Func::Cos), square_of(b, Func::Sin)), (Some(x), Some(y)) if x == y)
}

impl Expr {
    pub fn neg_s(&self) -> Expr {
        match self.kind() {
            Kind::Const(c) => Expr::constant(-c),
            Kind::Neg(a) => a.clone(),
            Kind::Sub(a, b) => Expr::sub_s(b, a),
            _ => intern(Kind::Neg(self.clone())),
        }
    }

    pub fn add_s(a: &Expr, b: &Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(c) = fold(x + y) {
                return c;
            }
        }
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if let Kind::Neg(x) = b.kind() {
            return Expr::sub_s(a, x);
        }
        if let Kind::Neg(x) = a.kind() {
            return Expr::sub_s(b, x);
        }
        if pythagorean(a, b) {
            return Expr::one();
        }
        if a == b {
            return Expr::mul_s(&Expr::constant(2.0), a);
        }
        let (x, y) = ordered(a, b);
        intern(Kind::Add(x, y))
    }

    pub fn sub_s(a: &Expr, b: &Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(c) = fold(x - y) {
                return c;
            }
        }
        if a == b {
            return Expr::zero();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.is_zero() {
            return b.neg_s();
        }
        if let Kind::Neg(x) = b.kind() {
            return Expr::add_s(a, x);
        }
        // (x + y) - y and (y + x) - y
        if let Kind::Add(x, y) = a.kind() {
            if y == b {
                return x.clone();
            }
            if x == b {
                return y.clone();
            }
        }
        intern(Kind::Sub(a.clone(), b.clone()))
    }

    pub fn mul_s(a: &Expr, b: &Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(c) = fold(x * y) {
                return c;
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_const(1.0) {
            return b.clone();
        }
        if b.is_const(1.0) {
            return a.clone();
        }
        if a.is_const(-1.0) {
            return b.neg_s();
        }
        if b.is_const(-1.0) {
            return a.neg_s();
        }
        if let Kind::Neg(x) = a.kind() {
            return Expr::mul_s(x, b).neg_s();
        }
        if let Kind::Neg(x) = b.kind() {
            return Expr::mul_s(a, x).neg_s();
        }
        let (a, b) = ordered(a, b);
        if let (Some(c1), Kind::Mul(p, q)) = (a.as_const(), b.kind()) {
            if let Some(c2) = p.as_const() {
                if let Some(c) = fold(c1 * c2) {
                    return Expr::mul_s(&c, q);
                }
            }
        }
        if a == b {
            return a.powi(2);
        }
        match (a.kind(), b.kind()) {
            (Kind::Pow(x, m), Kind::Pow(y, n)) if x == y => return x.powi(m + n),
            (Kind::Pow(x, m), _) if *x == b => return x.powi(m + 1),
            (_, Kind::Pow(y, n)) if *y == a => return y.powi(n + 1),
            _ => {}
        }
        intern(Kind::Mul(a, b))
    }

    pub fn div_s(a: &Expr, b: &Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y != 0.0 {
                if let Some(c) = fold(x / y) {
                    return c;
                }
            }
        }
        if a.is_zero() && !b.is_zero() {
            return Expr::zero();
        }
        if b.is_const(1.0) {
            return a.clone();
        }
        if b.is_const(-1.0) {
            return a.neg_s();
        }
        if a == b && !b.is_zero() {
            return Expr::one();
        }
        if let Kind::Neg(x) = a.kind() {
            return Expr::div_s(x, b).neg_s();
        }
        if let Kind::Neg(y) = b.kind() {
            return Expr::div_s(a, y).neg_s();
        }
        if let Some(c) = b.as_const() {
            if c != 0.0 {
                if let Some(r) = fold(1.0 / c) {
                    return Expr::mul_s(&r, a);
                }
            }
        }
        intern(Kind::Div(a.clone(), b.clone()))
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if c != 0.0 || n > 0 {
                if let Some(r) = fold(c.powi(n)) {
                    return r;
                }
            }
        }
        match self.kind() {
            Kind::Pow(x, m) => match m.checked_mul(n) {
                Some(k) => x.powi(k),
                None => intern(Kind::Pow(self.clone(), n)),
            },
            Kind::Neg(x) if n % 2 == 0 => x.powi(n),
            Kind::Neg(x) => x.powi(n).neg_s(),
            _ => intern(Kind::Pow(self.clone(), n)),
        }
    }

    pub fn func(f: Func, a: &Expr) -> Expr {
        if let Some(c) = a.as_const() {
            let v = match f {
                Func::Sin => Some(c.sin()),
                Func::Cos => Some(c.cos()),
                Func::Exp => Some(c.exp()),
                Func::Sqrt if c >= 0.0 => Some(c.sqrt()),
                Func::Sqrt => None,
            };
            if let Some(r) = v.and_then(fold) {
                return r;
            }
        }
        intern(Kind::Func(f, a.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::func(Func::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::func(Func::Cos, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self)
    }
}

/// Rebuild bottom-up through the simplifying constructors.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo: HashMap<u64, Expr> = HashMap::new();
    for n in postorder(std::slice::from_ref(e)) {
        let r = rebuild(&n, |c| memo[&c.id()].clone());
        memo.insert(n.id(), r);
    }
    memo.remove(&e.id()).expect("root visited")
}

/// Fold negated literals into constants; the normal form used when comparing
/// a printed-and-reparsed tree with its original.
pub fn canonicalize(e: &Expr) -> Expr {
    let mut memo: HashMap<u64, Expr> = HashMap::new();
    for n in postorder(std::slice::from_ref(e)) {
        let m = |c: &Expr| memo[&c.id()].clone();
        let r = match n.kind() {
            Kind::Const(_) | Kind::Var(_) => n.clone(),
            Kind::Neg(a) => {
                let a = m(a);
                match a.as_const() {
                    Some(c) => Expr::constant(-c),
                    None => Expr::raw_neg(&a),
                }
            }
            Kind::Add(a, b) => Expr::raw_add(&m(a), &m(b)),
            Kind::Sub(a, b) => Expr::raw_sub(&m(a), &m(b)),
            Kind::Mul(a, b) => Expr::raw_mul(&m(a), &m(b)),
            Kind::Div(a, b) => Expr::raw_div(&m(a), &m(b)),
            Kind::Pow(a, k) => Expr::raw_pow(&m(a), *k),
            Kind::Func(f, a) => Expr::raw_func(*f, &m(a)),
        };
        memo.insert(n.id(), r);
    }
    memo.remove(&e.id()).expect("root visited")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn zero_one_identities() {
        let e = simplify(&parse("0*u + 1*v").unwrap());
        assert_eq!(e, Expr::var("v"));
    }

    #[test]
    fn self_difference_vanishes() {
        assert_eq!(simplify(&parse("u - u").unwrap()), Expr::zero());
        assert_eq!(
            simplify(&parse("sin(u)*cos(v) - cos(v)*sin(u)").unwrap()),
            Expr::zero()
        );
    }

    #[test]
    fn constant_folding() {
        assert_eq!(simplify(&parse("2*3 + 4/2").unwrap()), Expr::constant(8.0));
        assert_eq!(simplify(&parse("sqrt(4)").unwrap()), Expr::constant(2.0));
    }

    #[test]
    fn division_by_literal_zero_is_not_folded() {
        let e = simplify(&parse("1/0").unwrap());
        assert!(matches!(e.kind(), Kind::Div(..)));
        let z = simplify(&parse("0/(-0)").unwrap());
        assert!(matches!(z.kind(), Kind::Div(..)));
    }

    #[test]
    fn pythagorean_identity() {
        assert_eq!(
            simplify(&parse("sin(u)^2 + cos(u)^2").unwrap()),
            Expr::one()
        );
        assert_eq!(
            simplify(&parse("cos(u+v)^2 + sin(u+v)^2").unwrap()),
            Expr::one()
        );
        assert_ne!(
            simplify(&parse("sin(u)^2 + cos(v)^2").unwrap()),
            Expr::one()
        );
    }

    #[test]
    fn commutative_operands_are_canonical() {
        let a = simplify(&parse("u*v + w").unwrap());
        let b = simplify(&parse("w + v*u").unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn powers_merge() {
        let e = simplify(&parse("u^2*u^3").unwrap());
        assert_eq!(e, Expr::var("u").powi(5));
        let e = simplify(&parse("(u^2)^3").unwrap());
        assert_eq!(e, Expr::var("u").powi(6));
    }

    #[test]
    fn canonicalize_folds_negated_literals() {
        let e = canonicalize(&parse("-2*u").unwrap());
        assert_eq!(e, Expr::raw_mul(&Expr::constant(-2.0), &Expr::var("u")));
    }
}
