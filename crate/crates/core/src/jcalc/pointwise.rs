//! Frame-level scalar quantities at a single point.

use crate::connection::Tensor;
use crate::error::CalcError;
use crate::geometry::FramedPoint;

/// `E⁻¹ = Eᵀ g` as a row-major matrix.
pub fn frame_inverse(fp: &FramedPoint) -> Vec<f64> {
    let n = fp.dim();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for c in 0..n {
            out[i * n + c] = (0..n)
                .map(|r| fp.frame[r * n + i] * fp.metric[r * n + c])
                .sum();
        }
    }
    out
}

/// Components of `t` in the orthonormal frame of `fp`.
pub fn frame_components(t: &Tensor<f64>, fp: &FramedPoint) -> Tensor<f64> {
    let n = t.dim();
    let p = t.lower();
    let mut cur = t.data().to_vec();
    let width = n.pow(p as u32);
    // lower slots: t'_{…β…} = Σ_α t_{…α…} E^α_β
    for s in 0..p {
        let stride = n.pow((p - 1 - s) as u32);
        let blocks = cur.len() / (n * stride);
        let mut next = vec![0.0; cur.len()];
        for blk in 0..blocks {
            for r in 0..stride {
                let base = blk * n * stride + r;
                for beta in 0..n {
                    let mut acc = 0.0;
                    for alpha in 0..n {
                        acc += cur[base + alpha * stride] * fp.frame[alpha * n + beta];
                    }
                    next[base + beta * stride] = acc;
                }
            }
        }
        cur = next;
    }
    if t.has_upper() {
        let inv = frame_inverse(fp);
        let mut next = vec![0.0; cur.len()];
        for g in 0..n {
            for f in 0..width {
                next[g * width + f] = (0..n).map(|c| inv[g * n + c] * cur[c * width + f]).sum();
            }
        }
        cur = next;
    }
    Tensor::from_data(n, t.has_upper(), p, cur)
}

/// `Σ_{i1<…<ip} ⟨ω(e_I), θ(e_I)⟩`.
pub fn pointwise_inner(
    a: &Tensor<f64>,
    b: &Tensor<f64>,
    fp: &FramedPoint,
) -> Result<f64, CalcError> {
    if a.lower() != b.lower() || a.has_upper() != b.has_upper() {
        return Err(CalcError::DegreeMismatch(a.lower(), b.lower()));
    }
    let fa = frame_components(a, fp);
    let fb = frame_components(b, fp);
    Ok(increasing_dot(&fa, &fb))
}

/// Inner product of frame components over strictly increasing multi-indices.
pub fn increasing_dot(fa: &Tensor<f64>, fb: &Tensor<f64>) -> f64 {
    let n = fa.dim();
    let p = fa.lower();
    let uppers = if fa.has_upper() { n } else { 1 };
    let mut idx = vec![0; p];
    let mut s = 0.0;
    for flat in 0..n.pow(p as u32) {
        Tensor::<f64>::unflatten(flat, n, &mut idx);
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            continue;
        }
        for c in 0..uppers {
            s += fa.at_flat(c, flat) * fb.at_flat(c, flat);
        }
    }
    s
}

/// Sum over all index tuples of squared frame components (`|∇J|²` style).
pub fn full_norm_sq(t: &Tensor<f64>, fp: &FramedPoint) -> f64 {
    frame_components(t, fp).data().iter().map(|x| x * x).sum()
}

/// `e(J) = ½ Σ_i |J e_i|²`.
pub fn energy_density(j: &[f64], fp: &FramedPoint) -> f64 {
    let t = Tensor::from_data(fp.dim(), true, 1, j.to_vec());
    0.5 * full_norm_sq(&t, fp)
}

/// Frobenius norm of `⟨Je_i, Je_j⟩ − δ_ij`; zero exactly when `J` is an isometry.
pub fn compatibility_defect(j: &[f64], fp: &FramedPoint) -> f64 {
    let n = fp.dim();
    let jf = frame_components(&Tensor::from_data(n, true, 1, j.to_vec()), fp);
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let g: f64 = (0..n).map(|c| jf.get(c, &[a]) * jf.get(c, &[b])).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            sum += (g - want).powi(2);
        }
    }
    sum.sqrt()
}

/// Frobenius norm of `J² + id` in the orthonormal frame.
pub fn square_defect(j: &[f64], fp: &FramedPoint) -> f64 {
    let n = fp.dim();
    let jf = frame_components(&Tensor::from_data(n, true, 1, j.to_vec()), fp);
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let s: f64 = (0..n).map(|k| jf.get(a, &[k]) * jf.get(k, &[b])).sum();
            let want = if a == b { -1.0 } else { 0.0 };
            sum += (s - want).powi(2);
        }
    }
    sum.sqrt()
}

/// Scalar curvature and the two curvature traces of the Bochner formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureTraces {
    /// `Σ ⟨R(e_i,e_j)e_i, e_j⟩`
    pub scalar: f64,
    /// `Σ ⟨J R(e_i,e_j)e_i, J e_j⟩`
    pub t1: f64,
    /// `Σ ⟨R(e_i,e_j)J e_i, J e_j⟩`
    pub t2: f64,
}

pub fn curvature_traces(riemann: &[f64], j: &[f64], fp: &FramedPoint) -> CurvatureTraces {
    let n = fp.dim();
    let rf = frame_components(&Tensor::from_data(n, true, 3, riemann.to_vec()), fp);
    let jf = frame_components(&Tensor::from_data(n, true, 1, j.to_vec()), fp);
    let r = |l: usize, k: usize, i: usize, jj: usize| *rf.get(l, &[k, i, jj]);
    let jm = |a: usize, b: usize| *jf.get(a, &[b]);
    // G = Ĵᵀ Ĵ
    let mut g = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            g[a * n + b] = (0..n).map(|c| jm(c, a) * jm(c, b)).sum();
        }
    }
    let mut scalar = 0.0;
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for i in 0..n {
        for jj in 0..n {
            scalar += r(jj, i, i, jj);
            for l in 0..n {
                t1 += r(l, i, i, jj) * g[l * n + jj];
                for k in 0..n {
                    t2 += jm(k, i) * r(l, k, i, jj) * jm(l, jj);
                }
            }
        }
    }
    CurvatureTraces { scalar, t1, t2 }
}

/// A vector field known to first order at a point: values `v[c]` and
/// partials `d[a][c] = ∂_a v^c`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorJet {
    pub v: Vec<f64>,
    pub d: Vec<f64>,
}

impl VectorJet {
    /// Constant coordinate components.
    pub fn constant(v: &[f64]) -> Self {
        let n = v.len();
        VectorJet {
            v: v.to_vec(),
            d: vec![0.0; n * n],
        }
    }

    /// `f X` for a scalar with value `f` and gradient `df`.
    pub fn scaled(&self, f: f64, df: &[f64]) -> Self {
        let n = self.v.len();
        let mut d = vec![0.0; n * n];
        for a in 0..n {
            for c in 0..n {
                d[a * n + c] = f * self.d[a * n + c] + df[a] * self.v[c];
            }
        }
        VectorJet {
            v: self.v.iter().map(|x| f * x).collect(),
            d,
        }
    }
}

/// Structure values with first partials, `dj[a][c][b] = ∂_a J^c_b`.
#[derive(Clone, Debug)]
pub struct StructureJet {
    pub n: usize,
    pub j: Vec<f64>,
    pub dj: Vec<f64>,
}

impl StructureJet {
    pub fn apply(&self, x: &VectorJet) -> VectorJet {
        let n = self.n;
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n * n];
        for c in 0..n {
            for b in 0..n {
                v[c] += self.j[c * n + b] * x.v[b];
            }
        }
        for a in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for b in 0..n {
                    s += self.dj[(a * n + c) * n + b] * x.v[b] + self.j[c * n + b] * x.d[a * n + b];
                }
                d[a * n + c] = s;
            }
        }
        VectorJet { v, d }
    }

    pub fn apply_value(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|c| (0..n).map(|b| self.j[c * n + b] * x[b]).sum())
            .collect()
    }
}

/// `∇_V W` at the point.
pub fn covariant(gamma: &[f64], v: &[f64], w: &VectorJet) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for c in 0..n {
        let mut s = 0.0;
        for a in 0..n {
            if v[a] == 0.0 {
                continue;
            }
            let mut t = w.d[a * n + c];
            for b in 0..n {
                t += gamma[(c * n + a) * n + b] * w.v[b];
            }
            s += v[a] * t;
        }
        out[c] = s;
    }
    out
}

/// `[V, W] = ∇_V W − ∇_W V`.
pub fn bracket(gamma: &[f64], v: &VectorJet, w: &VectorJet) -> Vec<f64> {
    let a = covariant(gamma, &v.v, w);
    let b = covariant(gamma, &w.v, v);
    a.iter().zip(&b).map(|(x, y)| x - y).collect()
}

/// `N(J)(X,Y) = J[JX,Y] + J[X,JY] + [X,Y] − [JX,JY]`.
pub fn nijenhuis(j: &StructureJet, gamma: &[f64], x: &VectorJet, y: &VectorJet) -> Vec<f64> {
    let jx = j.apply(x);
    let jy = j.apply(y);
    let a = bracket(gamma, &jx, y);
    let b = bracket(gamma, x, &jy);
    let c = bracket(gamma, x, y);
    let d = bracket(gamma, &jx, &jy);
    let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
    let jsum = j.apply_value(&sum);
    (0..j.n).map(|k| jsum[k] + c[k] - d[k]).collect()
}

/// `Σ_{i<j} |N(J)(e_i, e_j)|²` with constant-coefficient frame fields.
pub fn nijenhuis_norm_sq(j: &StructureJet, fp: &FramedPoint) -> f64 {
    let n = fp.dim();
    let cols: Vec<VectorJet> = (0..n)
        .map(|i| VectorJet::constant(&(0..n).map(|r| fp.frame[r * n + i]).collect::<Vec<_>>()))
        .collect();
    let mut s = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let v = nijenhuis(j, &fp.christoffel, &cols[a], &cols[b]);
            s += fp.inner(&v, &v);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_point(n: usize) -> FramedPoint {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        FramedPoint {
            chart: 0,
            coords: vec![0.0; n],
            frame: id.clone(),
            metric: id.clone(),
            inverse_metric: id,
            christoffel: vec![0.0; n * n * n],
        }
    }

    #[test]
    fn skew_structure_energy() {
        let fp = flat_point(2);
        let j = [1.0, -2.0, 1.0, -1.0];
        assert!(square_defect(&j, &fp) < 1e-15);
        assert_eq!(energy_density(&j, &fp), 3.5);
        assert!(compatibility_defect(&j, &fp) > 1.0);
    }

    #[test]
    fn constant_structure_has_no_torsion_on_flat_space() {
        let fp = flat_point(4);
        let mut j = vec![0.0; 16];
        j[1 * 4] = 1.0;
        j[1] = -1.0;
        j[3 * 4 + 2] = 1.0;
        j[2 * 4 + 3] = -1.0;
        let sj = StructureJet {
            n: 4,
            j,
            dj: vec![0.0; 64],
        };
        assert_eq!(nijenhuis_norm_sq(&sj, &fp), 0.0);
    }

    #[test]
    fn inner_over_increasing_indices() {
        let fp = flat_point(2);
        let mut t = Tensor::<f64>::zeros(2, true, 2);
        *t.get_mut(0, &[0, 1]) = 3.0;
        *t.get_mut(0, &[1, 0]) = -3.0;
        assert_eq!(pointwise_inner(&t, &t, &fp).unwrap(), 9.0);
        assert_eq!(full_norm_sq(&t, &fp), 18.0);
        let s = Tensor::<f64>::zeros(2, true, 1);
        assert!(pointwise_inner(&t, &s, &fp).is_err());
    }
}
