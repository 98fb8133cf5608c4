//! Levi-Civita connection, curvature and covariant differentiation of
//! tangent-bundle-valued tensors.
//!
//! Curvature follows the sign `R(X,Y) = −∇_X∇_Y + ∇_Y∇_X + ∇_[X,Y]`, the
//! negative of the more common convention. With it the unit sphere satisfies
//! `R(X,Y)Z = ⟨X,Z⟩Y − ⟨Y,Z⟩X` and the scalar curvature
//! `Σ ⟨R(e_i,e_j)e_i, e_j⟩` is positive.
//!
//! Index layout: `Γ[k][i][j] = Γ^k_ij` with `∇_{∂_i} ∂_j = Γ^k_ij ∂_k`, and
//! `R[l][k][i][j]` with `R(∂_i,∂_j)∂_k = R^l_kij ∂_l`.

mod tensor;

pub use tensor::Tensor;

use crate::scalar::{Calculus, Scalar};

/// Connection data on one chart: inverse metric, Christoffel symbols and
/// (optionally) the curvature tensor.
#[derive(Clone, Debug)]
pub struct Connection<S> {
    pub dim: usize,
    pub metric: Vec<S>,
    pub inverse: Vec<S>,
    pub gamma: Vec<S>,
    pub riemann: Option<Vec<S>>,
}

impl<S: Scalar> Connection<S> {
    /// Generic metric: Christoffel symbols from first partials of `g`.
    pub fn generic<C: Calculus<S = S>>(calc: &C, metric: Vec<S>, inverse: Vec<S>) -> Self {
        let gamma = christoffel(calc, &metric, &inverse);
        Connection {
            dim: calc.dim(),
            metric,
            inverse,
            gamma,
            riemann: None,
        }
    }

    /// Conformal metric `g = λ·id`.
    pub fn conformal<C: Calculus<S = S>>(calc: &C, lambda: &S) -> Self {
        let n = calc.dim();
        let inv = S::one().div(lambda);
        let mut metric = vec![S::zero(); n * n];
        let mut inverse = vec![S::zero(); n * n];
        for i in 0..n {
            metric[i * n + i] = lambda.clone();
            inverse[i * n + i] = inv.clone();
        }
        Connection {
            dim: n,
            gamma: christoffel_conformal(calc, lambda),
            metric,
            inverse,
            riemann: None,
        }
    }

    pub fn with_curvature<C: Calculus<S = S>>(mut self, calc: &C) -> Self {
        self.riemann = Some(riemann(calc, &self.gamma, self.dim));
        self
    }

    pub fn g(&self, i: usize, j: usize) -> &S {
        &self.metric[i * self.dim + j]
    }

    pub fn ginv(&self, i: usize, j: usize) -> &S {
        &self.inverse[i * self.dim + j]
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &S {
        &self.gamma[(k * self.dim + i) * self.dim + j]
    }

    /// `R^l_kij`; panics if curvature was not computed.
    pub fn r(&self, l: usize, k: usize, i: usize, j: usize) -> &S {
        let n = self.dim;
        let r = self.riemann.as_ref().expect("curvature not computed");
        &r[((l * n + k) * n + i) * n + j]
    }
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn christoffel<C: Calculus>(calc: &C, g: &[C::S], ginv: &[C::S]) -> Vec<C::S> {
    let n = calc.dim();
    // dg[a][i][j] = ∂_a g_ij
    let mut dg: Vec<C::S> = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    let s: C::S = dg[(a * n + j) * n + i].clone();
                    dg.push(s);
                } else {
                    dg.push(calc.partial(&g[i * n + j], a));
                }
            }
        }
    }
    let d = |a: usize, i: usize, j: usize| &dg[(a * n + i) * n + j];
    // first kind, Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = vec![C::S::zero(); n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = d(i, j, l).add(d(j, i, l)).sub(d(l, i, j)).scale(0.5);
                first[(l * n + i) * n + j] = v.clone();
                first[(l * n + j) * n + i] = v;
            }
        }
    }
    let mut out = vec![C::S::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = C::S::zero();
                for l in 0..n {
                    acc.acc_mul(&ginv[k * n + l], &first[(l * n + i) * n + j]);
                }
                out[(k * n + i) * n + j] = acc.clone();
                out[(k * n + j) * n + i] = acc;
            }
        }
    }
    out
}

/// Closed form for `g = λ·id`:
/// `Γ^k_ij = ½(δ_ik ∂_j ln λ + δ_jk ∂_i ln λ − δ_ij ∂_k ln λ)`.
pub fn christoffel_conformal<C: Calculus>(calc: &C, lambda: &C::S) -> Vec<C::S> {
    let n = calc.dim();
    let half_inv = C::S::constant(0.5).div(lambda);
    let dl: Vec<C::S> = (0..n)
        .map(|a| calc.partial(lambda, a).mul(&half_inv))
        .collect();
    let mut out = vec![C::S::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = C::S::zero();
                if i == k {
                    acc = acc.add(&dl[j]);
                }
                if j == k {
                    acc = acc.add(&dl[i]);
                }
                if i == j {
                    acc = acc.sub(&dl[k]);
                }
                out[(k * n + i) * n + j] = acc;
            }
        }
    }
    out
}

/// Curvature components `R^l_kij` in the sign convention of this module.
pub fn riemann<C: Calculus>(calc: &C, gamma: &[C::S], n: usize) -> Vec<C::S> {
    let gi = |k: usize, i: usize, j: usize| &gamma[(k * n + i) * n + j];
    // dgam[a][l][j][k] = ∂_a Γ^l_jk
    let mut dgam: Vec<C::S> = Vec::with_capacity(n * n * n * n);
    for a in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if k < j {
                        let s: C::S = dgam[((a * n + l) * n + k) * n + j].clone();
                        dgam.push(s);
                    } else {
                        dgam.push(calc.partial(gi(l, j, k), a));
                    }
                }
            }
        }
    }
    let dg = |a: usize, l: usize, j: usize, k: usize| &dgam[((a * n + l) * n + j) * n + k];
    let mut out = vec![C::S::zero(); n * n * n * n];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    // standard-sign value, then negate
                    let mut acc = dg(i, l, j, k).sub(dg(j, l, i, k));
                    let mut quad = C::S::zero();
                    for m in 0..n {
                        quad.acc_mul(gi(l, i, m), gi(m, j, k));
                        quad.acc_mul(&gi(l, j, m).neg(), gi(m, i, k));
                    }
                    acc = acc.add(&quad);
                    let v = acc.neg();
                    out[((l * n + k) * n + j) * n + i] = v.neg();
                    out[((l * n + k) * n + i) * n + j] = v;
                }
            }
        }
    }
    out
}

/// `∇ω` for a tensor with `p` lower slots: the result has `p + 1` lower
/// slots with the differentiation direction first,
/// `(∇_a ω)^c_I = ∂_a ω^c_I + Γ^c_am ω^m_I − Σ_k Γ^m_{a i_k} ω^c_{…m…}`.
pub fn covariant_derivative<C: Calculus>(
    calc: &C,
    gamma: &[C::S],
    t: &Tensor<C::S>,
) -> Tensor<C::S> {
    let n = calc.dim();
    let p = t.lower();
    let mut out = Tensor::zeros(n, t.has_upper(), p + 1);
    let gam = |k: usize, i: usize, j: usize| &gamma[(k * n + i) * n + j];
    let width = n.pow(p as u32);
    let uppers = if t.has_upper() { n } else { 1 };
    let mut idx = vec![0usize; p];
    for c in 0..uppers {
        for flat in 0..width {
            Tensor::<C::S>::unflatten(flat, n, &mut idx);
            for a in 0..n {
                let mut acc = calc.partial(t.at_flat(c, flat), a);
                if t.has_upper() {
                    for m in 0..n {
                        acc.acc_mul(gam(c, a, m), t.at_flat(m, flat));
                    }
                }
                for k in 0..p {
                    let orig = idx[k];
                    let stride = n.pow((p - 1 - k) as u32);
                    let base = flat - orig * stride;
                    for m in 0..n {
                        let g = gam(m, a, orig);
                        if g.is_zero() {
                            continue;
                        }
                        acc.acc_mul(&g.neg(), t.at_flat(c, base + m * stride));
                    }
                }
                *out.at_flat_mut(c, a * width + flat) = acc;
            }
        }
    }
    out
}

/// `R(X,Y)Z` for coordinate-component vectors; `riemann` as produced by [`riemann`].
pub fn riemann_apply(riemann: &[f64], n: usize, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for l in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            if z[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    acc += riemann[((l * n + k) * n + i) * n + j] * z[k] * x[i] * y[j];
                }
            }
        }
        out[l] = acc;
    }
    out
}

/// `Σ_{i,j} ⟨R(e_i,e_j)e_i, e_j⟩ = g^{ik} R^l_{kil}` summed; frame independent.
pub fn scalar_curvature(riemann: &[f64], ginv: &[f64], n: usize) -> f64 {
    // ⟨R(e_i,e_j)e_i,e_j⟩ summed = Σ g^{ab} g^{cd} g_{le} R^l_{a b c}... reduce:
    // Σ_ij E^a_i E^b_j E^k_i E^e_j g_le R^l_kab = g^{ak} δ^b_l R^l_kab
    let mut s = 0.0;
    for a in 0..n {
        for k in 0..n {
            let gak = ginv[a * n + k];
            if gak == 0.0 {
                continue;
            }
            for b in 0..n {
                s += gak * riemann[((b * n + k) * n + a) * n + b];
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr, Tape};
    use crate::jet::Jet;
    use crate::scalar::{invert, ExprCalculus, JetCalculus};

    fn sphere_lambda() -> Expr {
        parse("4/(1+u^2+v^2)^2").unwrap()
    }

    fn sphere_metric_generic() -> Vec<Expr> {
        let l = sphere_lambda();
        vec![l.clone(), Expr::zero(), Expr::zero(), l]
    }

    #[test]
    fn flat_metric_has_zero_christoffels() {
        let calc = ExprCalculus::new(&["u", "v"]);
        let g = vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::one()];
        let conn = Connection::generic(&calc, g.clone(), g).with_curvature(&calc);
        assert!(conn.gamma.iter().all(Expr::is_zero));
        assert!(conn.riemann.unwrap().iter().all(Expr::is_zero));
    }

    #[test]
    fn conformal_and_generic_christoffels_agree_symbolically_on_s2() {
        let calc = ExprCalculus::new(&["u", "v"]);
        let g = sphere_metric_generic();
        let gi = invert(&g, 2);
        let a = Connection::generic(&calc, g, gi);
        let b = Connection::conformal(&calc, &sphere_lambda());
        let ta = Tape::compile(&a.gamma, &["u", "v"]).unwrap();
        let tb = Tape::compile(&b.gamma, &["u", "v"]).unwrap();
        for p in [[0.5, 0.0], [0.1, -0.7], [1.2, 0.4]] {
            let x = ta.eval(&p).unwrap();
            let y = tb.eval(&p).unwrap();
            for (x, y) in x.iter().zip(&y) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_s2_curvature_sign() {
        let calc = ExprCalculus::new(&["u", "v"]);
        let conn = Connection::conformal(&calc, &sphere_lambda()).with_curvature(&calc);
        let r = conn.riemann.clone().unwrap();
        let tape = Tape::compile(&r, &["u", "v"]).unwrap();
        let tg = Tape::compile(&conn.inverse, &["u", "v"]).unwrap();
        let p = [0.3, -0.4];
        let rv = tape.eval(&p).unwrap();
        let gi = tg.eval(&p).unwrap();
        assert!((scalar_curvature(&rv, &gi, 2) - 2.0).abs() < 1e-12);
        // ⟨R(e1,e2)e1, e2⟩ = +1 with e_i = λ^{-1/2} ∂_i
        let lam = 4.0 / (1.0f64 + 0.09 + 0.16).powi(2);
        let s = lam.powf(-0.5);
        let w = riemann_apply(&rv, 2, &[s, 0.0], &[0.0, s], &[s, 0.0]);
        assert!((lam * w[1] * s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jet_route_matches_symbolic_route() {
        let lam = sphere_lambda();
        let calc = ExprCalculus::new(&["u", "v"]);
        let sym = Connection::conformal(&calc, &lam).with_curvature(&calc);
        let tape = Tape::compile(std::slice::from_ref(&lam), &["u", "v"]).unwrap();
        let p = [0.2, 0.9];
        let lj = tape
            .eval(&[Jet::variable(p[0], 0, 2), Jet::variable(p[1], 1, 2)])
            .unwrap();
        let jc = JetCalculus { dim: 2 };
        let num = Connection::conformal(&jc, &lj[0]).with_curvature(&jc);
        let rs = Tape::compile(sym.riemann.as_ref().unwrap(), &["u", "v"])
            .unwrap()
            .eval(&p)
            .unwrap();
        for (a, b) in rs.iter().zip(num.riemann.as_ref().unwrap()) {
            assert!((a - b.value()).abs() < 1e-12);
        }
    }

    #[test]
    fn covariant_derivative_of_scalar_is_partial() {
        let calc = ExprCalculus::new(&["u", "v"]);
        let conn = Connection::conformal(&calc, &sphere_lambda());
        let f = parse("u^2*v").unwrap();
        let t = Tensor::from_data(2, false, 0, vec![f.clone()]);
        let d = covariant_derivative(&calc, &conn.gamma, &t);
        assert_eq!(d.data()[0], crate::expr::diff(&f, "u"));
        assert_eq!(d.data()[1], crate::expr::diff(&f, "v"));
    }
}
