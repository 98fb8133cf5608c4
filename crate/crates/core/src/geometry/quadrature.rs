//! Quadrature grids whose weights carry the full Riemannian volume element.
//!
//! Tori use a uniform periodic product grid. Spheres use Gauss–Legendre
//! rules in each polar hyperspherical angle (with the analytic `sinᵏ`
//! Jacobian folded into the weights) and a uniform rule in the azimuth; each
//! node is mapped to the ambient sphere and handed to the chart in which it
//! lies deepest. Nodes are generated on demand from their index so large
//! grids never have to be materialized.

use std::f64::consts::PI;

use crate::error::GeometryError;
use crate::expr::Tape;
use crate::geometry::manifold::{ManifoldSpec, QuadratureKind};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// One quadrature node: chart, chart coordinates, volume weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    pub chart: usize,
    pub coords: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone)]
enum Layout {
    Torus { lo: Vec<f64>, step: Vec<f64> },
    Sphere { theta: Vec<f64>, theta_w: Vec<f64> },
}

/// A product quadrature grid on one manifold.
#[derive(Clone)]
pub struct QuadratureGrid {
    manifold: String,
    dim: usize,
    resolution: usize,
    layout: Layout,
    projections: Vec<Option<Tape>>,
    usable: Vec<Vec<(f64, f64)>>,
    metric: Vec<Tape>,
    conformal_metric: Vec<bool>,
    factor: Vec<Option<Tape>>,
}

impl QuadratureGrid {
    pub fn manifold(&self) -> &str {
        &self.manifold
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut d = vec![0; self.dim];
        for slot in d.iter_mut().rev() {
            *slot = idx % self.resolution;
            idx /= self.resolution;
        }
        d
    }

    /// Sum of weights without evaluating chart geometry (round/flat volume
    /// element times the conformal factor where present).
    pub fn node(&self, idx: usize) -> Result<GridNode, GeometryError> {
        let digits = self.digits(idx);
        match &self.layout {
            Layout::Torus { lo, step } => {
                let coords: Vec<f64> = (0..self.dim)
                    .map(|a| lo[a] + step[a] * digits[a] as f64)
                    .collect();
                let base: f64 = step.iter().product();
                let g = self.metric[0].eval(&coords)?;
                let det = if self.conformal_metric[0] {
                    g[0].powi(self.dim as i32)
                } else {
                    det(&g, self.dim)
                };
                Ok(GridNode {
                    chart: 0,
                    coords,
                    weight: base * det.sqrt(),
                })
            }
            Layout::Sphere { theta, theta_w } => {
                let n = self.dim;
                let res = self.resolution;
                let mut angles = Vec::with_capacity(n);
                let mut weight = 1.0;
                for (a, &k) in digits.iter().enumerate().take(n - 1) {
                    angles.push(theta[k]);
                    // polar angle a carries sin^(n-1-a)
                    weight *= theta_w[k] * theta[k].sin().powi((n - 1 - a) as i32);
                }
                let phi = 2.0 * PI * digits[n - 1] as f64 / res as f64;
                angles.push(phi);
                weight *= 2.0 * PI / res as f64;
                let x = hyperspherical(&angles);
                let (chart, coords) = self.assign(&x)?;
                if let Some(f) = &self.factor[chart] {
                    let s = f.eval(&coords)?[0];
                    weight *= s.powf(n as f64 / 2.0);
                }
                Ok(GridNode {
                    chart,
                    coords,
                    weight,
                })
            }
        }
    }

    /// Chart in which the ambient point lies deepest inside the usable box.
    pub fn assign(&self, x: &[f64]) -> Result<(usize, Vec<f64>), GeometryError> {
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for (c, proj) in self.projections.iter().enumerate() {
            let Some(proj) = proj else { continue };
            let Ok(u) = proj.eval(x) else { continue };
            let depth = depth(&u, &self.usable[c]);
            if depth >= 0.0 && best.as_ref().is_none_or(|b| depth > b.0) {
                best = Some((depth, c, u));
            }
        }
        best.map(|(_, c, u)| (c, u))
            .ok_or_else(|| GeometryError::NoChart(x.to_vec()))
    }

    /// Coordinates of an ambient point in one chart, if that chart has a
    /// projection and the point falls inside its usable box.
    pub fn chart_coords(&self, chart: usize, x: &[f64]) -> Option<Vec<f64>> {
        let u = self.projections.get(chart)?.as_ref()?.eval(x).ok()?;
        (depth(&u, &self.usable[chart]) >= 0.0).then_some(u)
    }

    pub fn nodes(&self) -> impl Iterator<Item = Result<GridNode, GeometryError>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn total_weight(&self) -> Result<f64, GeometryError> {
        let mut s = 0.0;
        for n in self.nodes() {
            s += n?.weight;
        }
        Ok(s)
    }
}

/// Normalized distance of `u` to the boundary of `bounds` (negative outside).
fn depth(u: &[f64], bounds: &[(f64, f64)]) -> f64 {
    u.iter()
        .zip(bounds)
        .map(|(x, (lo, hi))| {
            let half = 0.5 * (hi - lo);
            (half - (x - 0.5 * (lo + hi)).abs()) / half
        })
        .fold(f64::INFINITY, f64::min)
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

/// Point on the unit sphere Sⁿ ⊂ Rⁿ⁺¹ from `n-1` polar angles and one azimuth.
pub fn hyperspherical(angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    let mut x = vec![0.0; n + 1];
    let mut s = 1.0;
    for a in 0..n - 1 {
        x[a] = s * angles[a].cos();
        s *= angles[a].sin();
    }
    x[n - 1] = s * angles[n - 1].cos();
    x[n] = s * angles[n - 1].sin();
    x
}

/// Volume of the unit n-sphere, 2π^((n+1)/2) / Γ((n+1)/2).
pub fn unit_sphere_volume(n: usize) -> f64 {
    // recurrence V_n = 2π/(n-1) V_{n-2}, V_0 = 2, V_1 = 2π
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_volume(n - 2),
    }
}

/// Build the quadrature grid of `spec` at the given resolution; every node
/// is checked to fall inside some usable chart region.
pub fn build_grid(spec: &ManifoldSpec, resolution: usize) -> Result<QuadratureGrid, GeometryError> {
    let grid = grid_unchecked(spec, resolution)?;
    for node in grid.nodes() {
        node?;
    }
    Ok(grid)
}

pub(crate) fn grid_unchecked(
    spec: &ManifoldSpec,
    resolution: usize,
) -> Result<QuadratureGrid, GeometryError> {
    if resolution < 2 {
        return Err(GeometryError::Resolution(resolution));
    }
    let dim = spec.dim();
    let mut projections = Vec::new();
    let mut usable = Vec::new();
    let mut metric = Vec::new();
    let mut conformal_metric = Vec::new();
    let mut factor = Vec::new();
    for (c, chart) in spec.charts().iter().enumerate() {
        projections.push(match chart.projection() {
            Some(p) => Some(Tape::compile(p, &chart.ambient_names())?),
            None => None,
        });
        usable.push(chart.usable_box());
        let m = spec.metric(c);
        metric.push(Tape::compile(&m.components(), chart.coords())?);
        conformal_metric.push(m.is_conformal());
        factor.push(match spec.conformal_factor(c) {
            Some(f) => Some(Tape::compile(std::slice::from_ref(f), chart.coords())?),
            None => None,
        });
    }
    let layout = match spec.quadrature() {
        QuadratureKind::Torus => {
            if spec.charts().len() != 1 {
                return Err(GeometryError::Invalid(
                    "torus quadrature needs exactly one chart".into(),
                ));
            }
            let dom = spec.charts()[0].domain();
            Layout::Torus {
                lo: dom.iter().map(|d| d.0).collect(),
                step: dom
                    .iter()
                    .map(|d| (d.1 - d.0) / resolution as f64)
                    .collect(),
            }
        }
        QuadratureKind::Sphere => {
            if projections.iter().any(Option::is_none) {
                return Err(GeometryError::Invalid(
                    "sphere quadrature needs a projection for every chart".into(),
                ));
            }
            if dim < 2 {
                return Err(GeometryError::Invalid(
                    "sphere quadrature needs dim >= 2".into(),
                ));
            }
            let (x, w) = gauss_legendre(resolution);
            Layout::Sphere {
                theta: x.iter().map(|t| 0.5 * PI * (t + 1.0)).collect(),
                theta_w: w.iter().map(|w| 0.5 * PI * w).collect(),
            }
        }
    };
    Ok(QuadratureGrid {
        manifold: spec.name().to_string(),
        dim,
        resolution,
        layout,
        projections,
        usable,
        metric,
        conformal_metric,
        factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        // degree 9 is the highest exact degree for 5 nodes
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((integral - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_nodes_are_symmetric_and_sorted() {
        let (x, _) = gauss_legendre(12);
        for i in 0..12 {
            assert!((x[i] + x[11 - i]).abs() < 1e-15);
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn sphere_volumes() {
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(6) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-12);
    }

    #[test]
    fn hyperspherical_points_are_unit() {
        let x = hyperspherical(&[0.3, 1.1, 2.0, 0.7, 2.9, 5.5]);
        let n: f64 = x.iter().map(|v| v * v).sum();
        assert!((n - 1.0).abs() < 1e-14);
        assert_eq!(x.len(), 7);
    }

    #[test]
    fn determinant_with_pivoting() {
        let m = [0.0, 2.0, 1.0, 3.0];
        assert!((det(&m, 2) + 2.0).abs() < 1e-15);
    }
}
