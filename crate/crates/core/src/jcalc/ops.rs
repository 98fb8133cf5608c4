//! Operators on tangent-bundle-valued forms, generic over the scalar
//! representation. All of them take the connection of one chart.
//!
//! For a form `ω` with `p` lower slots:
//!
//! * `dω(X_0,…,X_p) = Σ_k (−1)^k (∇_{X_k} ω)(X_0,…,X̂_k,…,X_p)`
//! * `δω(X_1,…,X_{p−1}) = −Σ_i (∇_{e_i} ω)(e_i, X_1,…,X_{p−1})`
//! * `Δ = dδ + δd`
//! * `∇²ω = Σ_i (∇∇ω)(e_i, e_i, …)`
//! * `S(X_1,…,X_p) = Σ_{i,k} (−1)^k (R(e_i, X_k) ω)(e_i, X_1,…,X̂_k,…,X_p)`
//!   with `R` acting on `ω` as a derivation.

use crate::connection::{covariant_derivative, Connection, Tensor};
use crate::scalar::{Calculus, Scalar};

fn without(idx: &[usize], k: usize) -> Vec<usize> {
    idx.iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, v)| *v)
        .collect()
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Antisymmetrize a covariant derivative `∇ω` (direction slot first) into `dω`.
pub fn alternate<S: Scalar>(nabla: &Tensor<S>) -> Tensor<S> {
    let n = nabla.dim();
    let q = nabla.lower();
    let mut out = Tensor::zeros(n, nabla.has_upper(), q);
    let uppers = if nabla.has_upper() { n } else { 1 };
    let mut idx = vec![0; q];
    for c in 0..uppers {
        for flat in 0..n.pow(q as u32) {
            Tensor::<S>::unflatten(flat, n, &mut idx);
            if has_repeat(&idx) {
                continue;
            }
            let mut acc = S::zero();
            for k in 0..q {
                let mut src = vec![idx[k]];
                src.extend(without(&idx, k));
                let v = nabla.get(c, &src);
                if v.is_zero() {
                    continue;
                }
                acc = if k % 2 == 0 { acc.add(v) } else { acc.sub(v) };
            }
            *out.at_flat_mut(c, flat) = acc;
        }
    }
    out
}

fn has_repeat(idx: &[usize]) -> bool {
    (0..idx.len()).any(|a| (a + 1..idx.len()).any(|b| idx[a] == idx[b]))
}

pub fn exterior_d<C: Calculus>(
    calc: &C,
    conn: &Connection<C::S>,
    w: &Tensor<C::S>,
) -> Tensor<C::S> {
    alternate(&covariant_derivative(calc, &conn.gamma, w))
}

/// `−g^{ab} T_{a b …}` contracting the first two lower slots.
pub fn trace_first_two<S: Scalar>(ginv: &[S], t: &Tensor<S>, scale: f64) -> Tensor<S> {
    let n = t.dim();
    let q = t.lower();
    assert!(q >= 2, "trace needs two lower slots");
    let mut out = Tensor::zeros(n, t.has_upper(), q - 2);
    let uppers = if t.has_upper() { n } else { 1 };
    let w = n.pow((q - 2) as u32);
    for c in 0..uppers {
        for rest in 0..w {
            let mut acc = S::zero();
            for a in 0..n {
                for b in 0..n {
                    let gab = &ginv[a * n + b];
                    if gab.is_zero() {
                        continue;
                    }
                    acc.acc_mul(gab, t.at_flat(c, (a * n + b) * w + rest));
                }
            }
            *out.at_flat_mut(c, rest) = acc.scale(scale);
        }
    }
    out
}

pub fn codifferential<C: Calculus>(
    calc: &C,
    conn: &Connection<C::S>,
    w: &Tensor<C::S>,
) -> Tensor<C::S> {
    assert!(w.lower() >= 1, "codifferential of a degree-0 form");
    let nabla = covariant_derivative(calc, &conn.gamma, w);
    trace_first_two(&conn.inverse, &nabla, -1.0)
}

/// `dδω + δdω`; for degree 0 only `δdω`.
pub fn hodge_laplace<C: Calculus>(
    calc: &C,
    conn: &Connection<C::S>,
    w: &Tensor<C::S>,
) -> Tensor<C::S> {
    let dw = exterior_d(calc, conn, w);
    let ddw = codifferential(calc, conn, &dw);
    if w.lower() == 0 {
        return ddw;
    }
    let dl = codifferential(calc, conn, w);
    exterior_d(calc, conn, &dl).add(&ddw)
}

pub fn rough_laplacian<C: Calculus>(
    calc: &C,
    conn: &Connection<C::S>,
    w: &Tensor<C::S>,
) -> Tensor<C::S> {
    let nabla = covariant_derivative(calc, &conn.gamma, w);
    let nn = covariant_derivative(calc, &conn.gamma, &nabla);
    trace_first_two(&conn.inverse, &nn, 1.0)
}

/// `(R(∂_x, ∂_y) ω)` with `R` acting on the value and on every argument.
pub fn curvature_action<S: Scalar>(
    conn: &Connection<S>,
    x: usize,
    y: usize,
    w: &Tensor<S>,
) -> Tensor<S> {
    let n = w.dim();
    let p = w.lower();
    let mut out = Tensor::zeros(n, w.has_upper(), p);
    let uppers = if w.has_upper() { n } else { 1 };
    let width = n.pow(p as u32);
    let mut idx = vec![0; p];
    for c in 0..uppers {
        for flat in 0..width {
            Tensor::<S>::unflatten(flat, n, &mut idx);
            let mut acc = S::zero();
            if w.has_upper() {
                for m in 0..n {
                    acc.acc_mul(conn.r(c, m, x, y), w.at_flat(m, flat));
                }
            }
            for s in 0..p {
                let stride = n.pow((p - 1 - s) as u32);
                let base = flat - idx[s] * stride;
                for m in 0..n {
                    let r = conn.r(m, idx[s], x, y);
                    if r.is_zero() {
                        continue;
                    }
                    acc.acc_mul(&r.neg(), w.at_flat(c, base + m * stride));
                }
            }
            *out.at_flat_mut(c, flat) = acc;
        }
    }
    out
}

/// The curvature term of the Weitzenböck formula; `conn` must carry curvature.
pub fn weitzenbock_term<S: Scalar>(conn: &Connection<S>, w: &Tensor<S>) -> Tensor<S> {
    let n = w.dim();
    let p = w.lower();
    let mut out = Tensor::zeros(n, w.has_upper(), p);
    if p == 0 {
        return out;
    }
    let uppers = if w.has_upper() { n } else { 1 };
    let width = n.pow(p as u32);
    let sub_w = n.pow((p - 1) as u32);
    let mut idx = vec![0; p];
    for a in 0..n {
        for x in 0..n {
            // R(∂_a, ∂_x) ω, contracted below with g^{ab}
            let rw = curvature_action(conn, a, x, w);
            for c in 0..uppers {
                for flat in 0..width {
                    Tensor::<S>::unflatten(flat, n, &mut idx);
                    for k in 0..p {
                        if idx[k] != x {
                            continue;
                        }
                        let rest = without(&idx, k);
                        let rest_flat = rest.iter().fold(0, |acc, &i| acc * n + i);
                        let mut acc = S::zero();
                        for b in 0..n {
                            let gab = conn.ginv(a, b);
                            if gab.is_zero() {
                                continue;
                            }
                            acc.acc_mul(gab, rw.at_flat(c, b * sub_w + rest_flat));
                        }
                        // slot k is 1-based in the formula
                        let v = acc.scale(sign(k + 1));
                        let cur = out.at_flat(c, flat).add(&v);
                        *out.at_flat_mut(c, flat) = cur;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, parse, Env, Expr};
    use crate::scalar::ExprCalculus;

    fn flat(n: usize) -> (ExprCalculus, Connection<Expr>) {
        let names: Vec<String> = if n == 2 {
            vec!["u".into(), "v".into()]
        } else {
            (1..=n).map(|i| format!("u{i}")).collect()
        };
        let calc = ExprCalculus::new(&names);
        let conn = Connection::conformal(&calc, &Expr::one()).with_curvature(&calc);
        (calc, conn)
    }

    fn form(entries: &[&str]) -> Tensor<Expr> {
        Tensor::from_data(
            2,
            true,
            1,
            entries.iter().map(|s| parse(s).unwrap()).collect(),
        )
    }

    fn assert_same(a: &[Expr], b: &[Expr]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            for p in [(0.3, 1.1), (2.0, -0.7), (-1.4, 0.2)] {
                let env = Env::from([("u", p.0), ("v", p.1)]);
                let (x, y) = (eval(x, &env).unwrap(), eval(y, &env).unwrap());
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    fn exprs(src: &[&str]) -> Vec<Expr> {
        src.iter().map(|s| parse(s).unwrap()).collect()
    }

    #[test]
    fn codifferential_of_f_times_j0() {
        // A = f(u) J₀, δA = −f'(u) J₀ ∂_u = −f'(u) ∂_v
        let (calc, conn) = flat(2);
        let a = form(&["0", "-sin(u)", "sin(u)", "0"]);
        let d = codifferential(&calc, &conn, &a);
        assert_same(d.data(), &exprs(&["0", "-cos(u)"]));
    }

    #[test]
    fn flat_hodge_laplacian_is_minus_sum_of_second_partials() {
        let (calc, conn) = flat(2);
        let a = form(&["sin(u)", "2*sin(u)", "-sin(u)", "3*sin(u)"]);
        let l = hodge_laplace(&calc, &conn, &a);
        assert_same(l.data(), a.data());
        let r = rough_laplacian(&calc, &conn, &a);
        assert_same(r.data(), a.scale(-1.0).data());
    }

    #[test]
    fn scalar_rough_laplacian_is_trace_hessian() {
        let (calc, conn) = flat(2);
        let f = Tensor::from_data(2, false, 0, exprs(&["u^3*v^2"]));
        let r = rough_laplacian(&calc, &conn, &f);
        assert_same(r.data(), &exprs(&["6*u*v^2 + 2*u^3"]));
    }

    #[test]
    fn exterior_derivative_is_antisymmetric() {
        let (calc, conn) = flat(2);
        let a = form(&["u*v", "sin(v)", "u^2", "cos(u)*v"]);
        let d = exterior_d(&calc, &conn, &a);
        let defect = d.antisymmetry_defect(|e| if e.is_zero() { 0.0 } else { 1.0 });
        assert_eq!(defect, 0.0);
        // (dA)(∂_u, ∂_v) = ∂_u A(∂_v) − ∂_v A(∂_u)
        assert_same(
            &[d.get(0, &[0, 1]).clone(), d.get(1, &[0, 1]).clone()],
            &exprs(&["-u", "-sin(u)*v"]),
        );
    }
}
