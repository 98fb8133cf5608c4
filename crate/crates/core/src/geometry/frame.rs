use crate::connection::christoffel;
use crate::error::GeometryError;
use crate::expr::Tape;
use crate::geometry::manifold::ManifoldSpec;
use crate::jet::Jet;
use crate::scalar::{invert, JetCalculus};

/// Gram–Schmidt of the coordinate basis in index order. The result is a
/// row-major `d × d` matrix whose column `i` holds the coordinate
/// components of `e_i`.
pub fn orthonormal_frame(chart: &str, point: &[f64], g: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = point.len();
    let inner = |a: &[f64], b: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * g[i * n + j] * b[j];
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| g[i * n + i].abs()).fold(0.0, f64::max);
    let degenerate = || GeometryError::DegenerateMetric {
        chart: chart.to_string(),
        point: point.to_vec(),
    };
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(degenerate());
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        // two passes of classical Gram–Schmidt for stability
        for _ in 0..2 {
            for e in &cols {
                let c = inner(&v, e);
                for k in 0..n {
                    v[k] -= c * e[k];
                }
            }
        }
        let nn = inner(&v, &v);
        if !(nn > 1e-14 * scale) {
            return Err(degenerate());
        }
        let s = nn.sqrt();
        cols.push(v.iter().map(|x| x / s).collect());
    }
    let mut out = vec![0.0; n * n];
    for (i, c) in cols.iter().enumerate() {
        for r in 0..n {
            out[r * n + i] = c[r];
        }
    }
    Ok(out)
}

/// Right-multiply a frame by an orthogonal matrix: `e'_j = Σ_i e_i Q_ij`.
pub fn rotate_frame(frame: &[f64], q: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for j in 0..n {
            out[r * n + j] = (0..n).map(|i| frame[r * n + i] * q[i * n + j]).sum();
        }
    }
    out
}

/// A point with its metric data and an orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FramedPoint {
    pub chart: usize,
    pub coords: Vec<f64>,
    pub frame: Vec<f64>,
    pub metric: Vec<f64>,
    pub inverse_metric: Vec<f64>,
    pub christoffel: Vec<f64>,
}

impl FramedPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate components of a vector given in the frame.
    pub fn from_frame(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|r| (0..n).map(|i| self.frame[r * n + i] * v[i]).sum())
            .collect()
    }

    /// Frame components of a coordinate vector: `Eᵀ g v`.
    pub fn to_frame(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let gv: Vec<f64> = (0..n)
            .map(|r| (0..n).map(|c| self.metric[r * n + c] * v[c]).sum())
            .collect();
        (0..n)
            .map(|i| (0..n).map(|r| self.frame[r * n + i] * gv[r]).sum())
            .collect()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * self.metric[i * n + j] * b[j];
            }
        }
        s
    }
}

impl ManifoldSpec {
    /// Metric, Christoffel symbols and a Gram–Schmidt frame at a chart point.
    pub fn framed_point(&self, chart: usize, coords: &[f64]) -> Result<FramedPoint, GeometryError> {
        let ch = &self.charts()[chart];
        let n = self.dim();
        let field = self.metric(chart);
        let tape = Tape::compile(&field.components(), ch.coords())?;
        let x: Vec<Jet> = coords
            .iter()
            .enumerate()
            .map(|(a, &v)| Jet::variable(v, a, 1))
            .collect();
        let vals = tape.eval(&x)?;
        let g: Vec<Jet> = if field.is_conformal() {
            (0..n * n)
                .map(|k| {
                    if k / n == k % n {
                        vals[0]
                    } else {
                        Jet::constant(0.0)
                    }
                })
                .collect()
        } else {
            vals
        };
        let gv: Vec<f64> = g.iter().map(Jet::value).collect();
        let frame = orthonormal_frame(ch.name(), coords, &gv)?;
        let ginv = invert(&g, n);
        let gamma = christoffel(&JetCalculus { dim: n }, &g, &ginv);
        Ok(FramedPoint {
            chart,
            coords: coords.to_vec(),
            frame,
            metric: gv,
            inverse_metric: ginv.iter().map(Jet::value).collect(),
            christoffel: gamma.iter().map(Jet::value).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_orthonormal(e: &[f64], g: &[f64], n: usize, tol: f64) {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += e[a * n + i] * g[a * n + b] * e[b * n + j];
                    }
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < tol, "({i},{j}) = {s}");
            }
        }
    }

    #[test]
    fn identity_metric_gives_identity_frame() {
        let g = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(orthonormal_frame("c", &[0.0, 0.0], &g).unwrap(), g.to_vec());
    }

    #[test]
    fn conformal_metric_frame() {
        let l: f64 = 2.7;
        let g = [l, 0.0, 0.0, l];
        let e = orthonormal_frame("c", &[0.0, 0.0], &g).unwrap();
        assert!((e[0] - l.powf(-0.5)).abs() < 1e-15);
        assert!((e[3] - l.powf(-0.5)).abs() < 1e-15);
        assert_eq!(e[1], 0.0);
    }

    #[test]
    fn random_spd_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let b: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut g = vec![0.0; 16];
            for i in 0..4 {
                for j in 0..4 {
                    g[i * 4 + j] = (0..4).map(|k| b[k * 4 + i] * b[k * 4 + j]).sum::<f64>()
                        + if i == j { 0.5 } else { 0.0 };
                }
            }
            let e = orthonormal_frame("c", &[0.0; 4], &g).unwrap();
            check_orthonormal(&e, &g, 4, 1e-12);
        }
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let g = [1.0, 0.0, 0.0, -1.0];
        assert!(matches!(
            orthonormal_frame("c", &[0.1, 0.2], &g),
            Err(GeometryError::DegenerateMetric { .. })
        ));
    }
}
