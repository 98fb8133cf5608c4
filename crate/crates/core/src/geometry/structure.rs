//! Sources of almost complex structures and their per-chart component fields.

use crate::error::GeometryError;
use crate::expr::{simplify, Expr, Tape, TapeScalar};
use crate::geometry::chart::Chart;
use crate::geometry::octonion::cross_table;
use crate::scalar::{invert, matmul, Scalar};

/// How a structure is specified before it is resolved on each chart.
#[derive(Clone, Debug)]
pub enum StructureSource {
    /// One row-major `d × d` matrix `J^i_j` per chart (`J ∂_j = J^i_j ∂_i`).
    Explicit(Vec<Vec<Expr>>),
    /// `J_p v = p × v` for the unit sphere in R³ or R⁷.
    EmbeddedCrossProduct,
    /// `A J₀ A⁻¹` with `A = id + ε B`.
    Conjugated {
        base: Box<StructureSource>,
        perturbation: Perturbation,
        eps: f64,
    },
}

/// The matrix field `B` of a conjugation.
#[derive(Clone, Debug)]
pub enum Perturbation {
    /// Per-chart `d × d` matrices in chart coordinates.
    Chart(Vec<Vec<Expr>>),
    /// An ambient `N × N` matrix in `x1..xN`, pulled back as `λ⁻¹ dFᵀ M dF`
    /// (requires conformal charts).
    Ambient(Vec<Expr>),
}

impl StructureSource {
    pub fn tag(&self) -> String {
        match self {
            StructureSource::Explicit(_) => "explicit".into(),
            StructureSource::EmbeddedCrossProduct => "embedded-cross-product".into(),
            StructureSource::Conjugated { base, eps, .. } => {
                format!("conjugated({}, eps={eps})", base.tag())
            }
        }
    }

    /// Component field of the structure on `chart` (index `c` in the atlas).
    pub fn resolve(&self, chart: &Chart, c: usize) -> Result<MatrixField, GeometryError> {
        let d = chart.dim();
        match self {
            StructureSource::Explicit(per_chart) => {
                let m = per_chart.get(c).ok_or_else(|| {
                    GeometryError::Invalid(format!(
                        "no structure matrix for chart '{}'",
                        chart.name()
                    ))
                })?;
                if m.len() != d * d {
                    return Err(GeometryError::Invalid(format!(
                        "structure matrix for chart '{}' has {} entries, expected {}",
                        chart.name(),
                        m.len(),
                        d * d
                    )));
                }
                Ok(MatrixField::Exprs(m.clone()))
            }
            StructureSource::EmbeddedCrossProduct => {
                let n = chart.ambient_dim();
                if n != d + 1 || (n != 3 && n != 7) {
                    return Err(GeometryError::Invalid(format!(
                        "cross-product structure needs S² ⊂ R³ or S⁶ ⊂ R⁷, chart '{}' has dim {d} in R^{n}",
                        chart.name()
                    )));
                }
                let lambda = conformal(chart)?;
                let table = cross_table(n);
                let f = chart.embedding();
                // [F×]_{kl} = Σ_m F_m c[m][l][k]
                let mut cross = vec![Expr::zero(); n * n];
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = Expr::zero();
                        for (m, fm) in f.iter().enumerate() {
                            let coef = table[(m * n + l) * n + k];
                            if coef != 0.0 {
                                acc = &acc + &(fm * coef);
                            }
                        }
                        cross[k * n + l] = acc;
                    }
                }
                Ok(MatrixField::Exprs(pull_back_matrix(chart, &cross, lambda)))
            }
            StructureSource::Conjugated {
                base,
                perturbation,
                eps,
            } => {
                let base = base.resolve(chart, c)?;
                let b = match perturbation {
                    Perturbation::Chart(per_chart) => {
                        per_chart.get(c).cloned().ok_or_else(|| {
                            GeometryError::Invalid(format!(
                                "no perturbation matrix for chart '{}'",
                                chart.name()
                            ))
                        })?
                    }
                    Perturbation::Ambient(m) => {
                        let n = chart.ambient_dim();
                        if m.len() != n * n {
                            return Err(GeometryError::Invalid(format!(
                                "ambient perturbation has {} entries, expected {}",
                                m.len(),
                                n * n
                            )));
                        }
                        let pulled: Vec<Expr> = m.iter().map(|e| chart.pull_back(e)).collect();
                        pull_back_matrix(chart, &pulled, conformal(chart)?)
                    }
                };
                if b.len() != d * d {
                    return Err(GeometryError::Invalid(
                        "perturbation matrix has wrong size".into(),
                    ));
                }
                let a: Vec<Expr> = (0..d * d)
                    .map(|k| {
                        let id = if k / d == k % d {
                            Expr::one()
                        } else {
                            Expr::zero()
                        };
                        simplify(&(&id + &(&b[k] * *eps)))
                    })
                    .collect();
                Ok(MatrixField::Conjugated {
                    a,
                    base: Box::new(base),
                })
            }
        }
    }
}

fn conformal(chart: &Chart) -> Result<&Expr, GeometryError> {
    chart.conformal_factor().ok_or_else(|| {
        GeometryError::Invalid(format!(
            "chart '{}' must declare its conformal factor for an embedded structure",
            chart.name()
        ))
    })
}

/// `λ⁻¹ dFᵀ M dF` for an ambient `N × N` matrix `M`.
fn pull_back_matrix(chart: &Chart, m: &[Expr], lambda: &Expr) -> Vec<Expr> {
    let d = chart.dim();
    let n = chart.ambient_dim();
    let jac = chart.jacobian_exprs();
    let inv = simplify(&(&Expr::one() / lambda));
    // M dF  (N × d)
    let mut mdf = vec![Expr::zero(); n * d];
    for k in 0..n {
        for j in 0..d {
            let mut acc = Expr::zero();
            for l in 0..n {
                if m[k * n + l].is_zero() {
                    continue;
                }
                acc = &acc + &(&m[k * n + l] * &jac[l * d + j]);
            }
            mdf[k * d + j] = acc;
        }
    }
    let mut out = vec![Expr::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = Expr::zero();
            for k in 0..n {
                acc = &acc + &(&jac[k * d + i] * &mdf[k * d + j]);
            }
            out[i * d + j] = simplify(&(&inv * &acc));
        }
    }
    out
}

/// A per-chart matrix field, kept in factored form for conjugations so
/// that no symbolic inverse is ever formed.
#[derive(Clone, Debug)]
pub enum MatrixField {
    Exprs(Vec<Expr>),
    Conjugated {
        a: Vec<Expr>,
        base: Box<MatrixField>,
    },
}

impl MatrixField {
    /// Every expression the field depends on, in a fixed order.
    pub fn leaves(&self) -> Vec<Expr> {
        match self {
            MatrixField::Exprs(m) => m.clone(),
            MatrixField::Conjugated { a, base } => {
                let mut v = a.clone();
                v.extend(base.leaves());
                v
            }
        }
    }

    /// Assemble the matrix from leaf values (as produced by a tape over
    /// [`MatrixField::leaves`]).
    pub fn assemble<S: Scalar>(&self, leaves: &[S], d: usize) -> Vec<S> {
        let mut pos = 0;
        self.assemble_from(leaves, &mut pos, d)
    }

    fn assemble_from<S: Scalar>(&self, leaves: &[S], pos: &mut usize, d: usize) -> Vec<S> {
        match self {
            MatrixField::Exprs(_) => {
                let out = leaves[*pos..*pos + d * d].to_vec();
                *pos += d * d;
                out
            }
            MatrixField::Conjugated { base, .. } => {
                let a = leaves[*pos..*pos + d * d].to_vec();
                *pos += d * d;
                let j0 = base.assemble_from(leaves, pos, d);
                let ainv = invert(&a, d);
                matmul(&matmul(&a, &j0, d), &ainv, d)
            }
        }
    }

    /// Symbolic components; conjugations are expanded with a symbolic inverse.
    pub fn exprs(&self, d: usize) -> Vec<Expr> {
        let leaves = self.leaves();
        self.assemble(&leaves, d).iter().map(simplify).collect()
    }

    /// Smallest `|det A|` of every conjugating matrix at the given point.
    pub fn min_conjugator_det<S: TapeScalar>(&self, leaves: &[S], d: usize) -> f64 {
        let mut pos = 0;
        self.min_det_from(leaves, &mut pos, d)
    }

    fn min_det_from<S: TapeScalar>(&self, leaves: &[S], pos: &mut usize, d: usize) -> f64 {
        match self {
            MatrixField::Exprs(_) => {
                *pos += d * d;
                f64::INFINITY
            }
            MatrixField::Conjugated { base, .. } => {
                let a: Vec<f64> = leaves[*pos..*pos + d * d]
                    .iter()
                    .map(|x| x.value())
                    .collect();
                *pos += d * d;
                det(&a, d).abs().min(base.min_det_from(leaves, pos, d))
            }
        }
    }

    pub fn compile(&self, chart: &Chart) -> Result<Tape, GeometryError> {
        Ok(Tape::compile(&self.leaves(), chart.coords())?)
    }
}

fn det(m: &[f64], n: usize) -> f64 {
    let mut a = m.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))
            .expect("non-empty");
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
            d = -d;
        }
        d *= a[c * n + c];
        for r in c + 1..n {
            let f = a[r * n + c] / a[c * n + c];
            for j in c..n {
                a[r * n + j] -= f * a[c * n + j];
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn conjugated_assembly_squares_to_minus_identity() {
        let j0 = MatrixField::Exprs(vec![
            Expr::zero(),
            Expr::constant(-1.0),
            Expr::one(),
            Expr::zero(),
        ]);
        let a = vec![
            parse("1 + 0.1*sin(u)").unwrap(),
            parse("0.1*cos(v)").unwrap(),
            parse("0.1*u*v").unwrap(),
            parse("1 - 0.1*v").unwrap(),
        ];
        let f = MatrixField::Conjugated {
            a,
            base: Box::new(j0),
        };
        let tape = Tape::compile(&f.leaves(), &["u", "v"]).unwrap();
        let vals = tape.eval(&[0.4, 1.3]).unwrap();
        let j = f.assemble(&vals, 2);
        let jj = matmul(&j, &j, 2);
        assert!((jj[0] + 1.0).abs() < 1e-12 && (jj[3] + 1.0).abs() < 1e-12);
        assert!(jj[1].abs() < 1e-12 && jj[2].abs() < 1e-12);
        assert!(f.min_conjugator_det(&vals, 2) > 0.5);
    }
}
