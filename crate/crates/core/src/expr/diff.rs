use std::collections::HashMap;

use super::{postorder, Expr, Func, Kind};

/// Exact symbolic derivative with respect to `var`, simplified on the fly.
pub fn diff(e: &Expr, var: &str) -> Expr {
    derive(e, var, &Smart)
}

/// Derivative built from the raw constructors only (no rewriting); used to
/// measure how much the simplifier saves.
pub fn diff_raw(e: &Expr, var: &str) -> Expr {
    derive(e, var, &Raw)
}

trait Builder {
    fn neg(&self, a: &Expr) -> Expr;
    fn add(&self, a: &Expr, b: &Expr) -> Expr;
    fn sub(&self, a: &Expr, b: &Expr) -> Expr;
    fn mul(&self, a: &Expr, b: &Expr) -> Expr;
    fn div(&self, a: &Expr, b: &Expr) -> Expr;
    fn pow(&self, a: &Expr, n: i32) -> Expr;
    fn func(&self, f: Func, a: &Expr) -> Expr;
}

struct Smart;
struct Raw;

impl Builder for Smart {
    fn neg(&self, a: &Expr) -> Expr {
        a.neg_s()
    }
    fn add(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::add_s(a, b)
    }
    fn sub(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::sub_s(a, b)
    }
    fn mul(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::mul_s(a, b)
    }
    fn div(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::div_s(a, b)
    }
    fn pow(&self, a: &Expr, n: i32) -> Expr {
        a.powi(n)
    }
    fn func(&self, f: Func, a: &Expr) -> Expr {
        Expr::func(f, a)
    }
}

impl Builder for Raw {
    fn neg(&self, a: &Expr) -> Expr {
        Expr::raw_neg(a)
    }
    fn add(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::raw_add(a, b)
    }
    fn sub(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::raw_sub(a, b)
    }
    fn mul(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::raw_mul(a, b)
    }
    fn div(&self, a: &Expr, b: &Expr) -> Expr {
        Expr::raw_div(a, b)
    }
    fn pow(&self, a: &Expr, n: i32) -> Expr {
        Expr::raw_pow(a, n)
    }
    fn func(&self, f: Func, a: &Expr) -> Expr {
        Expr::raw_func(f, a)
    }
}

fn derive(e: &Expr, var: &str, b: &dyn Builder) -> Expr {
    // memoized over the DAG so shared subtrees are differentiated once
    let mut memo: HashMap<u64, Expr> = HashMap::new();
    for n in postorder(std::slice::from_ref(e)) {
        let d = |c: &Expr| memo[&c.id()].clone();
        let r = match n.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(v) => Expr::constant(if &**v == var { 1.0 } else { 0.0 }),
            Kind::Neg(a) => b.neg(&d(a)),
            Kind::Add(x, y) => b.add(&d(x), &d(y)),
            Kind::Sub(x, y) => b.sub(&d(x), &d(y)),
            Kind::Mul(x, y) => b.add(&b.mul(&d(x), y), &b.mul(x, &d(y))),
            Kind::Div(x, y) => {
                // x'/y - x*y'/y^2
                let t1 = b.div(&d(x), y);
                let t2 = b.div(&b.mul(x, &d(y)), &b.pow(y, 2));
                b.sub(&t1, &t2)
            }
            Kind::Pow(x, k) => {
                let coeff = Expr::constant(*k as f64);
                b.mul(&b.mul(&coeff, &b.pow(x, k - 1)), &d(x))
            }
            Kind::Func(f, x) => {
                let outer = match f {
                    Func::Sin => b.func(Func::Cos, x),
                    Func::Cos => b.neg(&b.func(Func::Sin, x)),
                    Func::Exp => n.clone(),
                    Func::Sqrt => b.div(&Expr::constant(0.5), &n),
                };
                b.mul(&outer, &d(x))
            }
        };
        memo.insert(n.id(), r);
    }
    memo.remove(&e.id()).expect("root visited")
}
