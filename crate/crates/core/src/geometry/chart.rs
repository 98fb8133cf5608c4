use std::collections::BTreeMap;

use crate::error::GeometryError;
use crate::expr::{diff, simplify, Expr, Tape};

/// A coordinate patch with an embedding into Euclidean space.
#[derive(Clone, Debug)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
    margin: f64,
    embedding: Vec<Expr>,
    projection: Option<Vec<Expr>>,
    conformal: Option<Expr>,
}

impl Chart {
    pub fn new(
        name: &str,
        coords: &[&str],
        domain: &[(f64, f64)],
        embedding: Vec<Expr>,
    ) -> Result<Chart, GeometryError> {
        if coords.is_empty() || coords.len() != domain.len() {
            return Err(GeometryError::Invalid(format!(
                "chart '{name}': {} coordinates but {} domain intervals",
                coords.len(),
                domain.len()
            )));
        }
        if domain.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(GeometryError::Invalid(format!(
                "chart '{name}': empty domain interval"
            )));
        }
        for e in &embedding {
            for v in e.free_vars() {
                if !coords.iter().any(|c| **c == *v) {
                    return Err(GeometryError::Invalid(format!(
                        "chart '{name}': embedding uses unknown variable '{v}'"
                    )));
                }
            }
        }
        Ok(Chart {
            name: name.to_string(),
            coords: coords.iter().map(|c| c.to_string()).collect(),
            domain: domain.to_vec(),
            margin: 0.0,
            embedding,
            projection: None,
            conformal: None,
        })
    }

    /// Shrink the usable region by `margin` on every side of the domain box.
    pub fn with_margin(mut self, margin: f64) -> Result<Chart, GeometryError> {
        if margin < 0.0 || self.domain.iter().any(|(lo, hi)| 2.0 * margin >= hi - lo) {
            return Err(GeometryError::Invalid(format!(
                "chart '{}': margin {margin} leaves no usable region",
                self.name
            )));
        }
        self.margin = margin;
        Ok(self)
    }

    /// Inverse map from ambient coordinates `x1..xN` to chart coordinates.
    pub fn with_projection(mut self, projection: Vec<Expr>) -> Result<Chart, GeometryError> {
        if projection.len() != self.dim() {
            return Err(GeometryError::Invalid(format!(
                "chart '{}': projection has {} components, expected {}",
                self.name,
                projection.len(),
                self.dim()
            )));
        }
        let names = self.ambient_names();
        for e in &projection {
            for v in e.free_vars() {
                if !names.iter().any(|n| **n == *v) {
                    return Err(GeometryError::Invalid(format!(
                        "chart '{}': projection uses unknown variable '{v}'",
                        self.name
                    )));
                }
            }
        }
        self.projection = Some(projection);
        Ok(self)
    }

    /// Declare the induced metric to be `λ·id`; checked against the embedding
    /// on a sample of interior points.
    pub fn with_conformal_factor(mut self, lambda: Expr) -> Result<Chart, GeometryError> {
        let g = self.induced_metric_exprs();
        let n = self.dim();
        let mut roots = g;
        roots.push(lambda.clone());
        let tape = Tape::compile(&roots, &self.coords)?;
        for k in 0..25 {
            let p: Vec<f64> = self
                .usable_box()
                .iter()
                .enumerate()
                .map(|(a, (lo, hi))| {
                    let t = ((k * (2 * a + 3) + a) % 11) as f64 / 10.0;
                    lo + t * (hi - lo)
                })
                .collect();
            let Ok(v) = tape.eval(&p) else { continue };
            let l = v[n * n];
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { l } else { 0.0 };
                    if (v[i * n + j] - want).abs() > 1e-10 * l.abs().max(1.0) {
                        return Err(GeometryError::Invalid(format!(
                            "chart '{}': declared conformal factor disagrees with the embedding at {p:?}",
                            self.name
                        )));
                    }
                }
            }
        }
        self.conformal = Some(lambda);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.embedding.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn embedding(&self) -> &[Expr] {
        &self.embedding
    }

    pub fn projection(&self) -> Option<&[Expr]> {
        self.projection.as_deref()
    }

    pub fn conformal_factor(&self) -> Option<&Expr> {
        self.conformal.as_ref()
    }

    pub fn ambient_names(&self) -> Vec<String> {
        (1..=self.ambient_dim()).map(|k| format!("x{k}")).collect()
    }

    pub fn usable_box(&self) -> Vec<(f64, f64)> {
        self.domain
            .iter()
            .map(|(lo, hi)| (lo + self.margin, hi - self.margin))
            .collect()
    }

    pub fn is_usable(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(self.usable_box())
            .all(|(x, (lo, hi))| *x >= lo && *x <= hi)
    }

    /// `∂_i F^k` as a row-major `N × d` matrix of expressions.
    pub fn jacobian_exprs(&self) -> Vec<Expr> {
        let mut out = Vec::with_capacity(self.ambient_dim() * self.dim());
        for f in &self.embedding {
            for c in &self.coords {
                out.push(diff(f, c));
            }
        }
        out
    }

    /// `Σ_k ∂_i F^k ∂_j F^k` as a row-major `d × d` matrix.
    pub fn induced_metric_exprs(&self) -> Vec<Expr> {
        let d = self.dim();
        let jac = self.jacobian_exprs();
        let mut g = vec![Expr::zero(); d * d];
        for i in 0..d {
            for j in i..d {
                let mut acc = Expr::zero();
                for k in 0..self.ambient_dim() {
                    acc = &acc + &(&jac[k * d + i] * &jac[k * d + j]);
                }
                let acc = simplify(&acc);
                g[i * d + j] = acc.clone();
                g[j * d + i] = acc;
            }
        }
        g
    }

    /// Compose an ambient expression (in `x1..xN`) with the embedding.
    pub fn pull_back(&self, ambient: &Expr) -> Expr {
        let map: BTreeMap<String, Expr> = self
            .ambient_names()
            .into_iter()
            .zip(self.embedding.iter().cloned())
            .collect();
        simplify(&ambient.substitute(&map))
    }

    /// Smallest singular value of the embedding Jacobian at `u`.
    pub fn jacobian_min_singular_value(&self, u: &[f64]) -> Result<f64, GeometryError> {
        let d = self.dim();
        let tape = Tape::compile(&self.induced_metric_exprs(), &self.coords)?;
        let g = tape.eval(u)?;
        Ok(min_eigenvalue_spd(&g, d).max(0.0).sqrt())
    }
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn min_eigenvalue_spd(m: &[f64], n: usize) -> f64 {
    let mut a = m.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::INFINITY, f64::min)
}
