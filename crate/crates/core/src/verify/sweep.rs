//! One pass over the quadrature nodes of a manifold (plus uniform extra
//! draws) computing every pointwise quantity the checks need.

use rand::Rng;
use rayon::prelude::*;

use crate::connection::Tensor;
use crate::error::CalcError;
use crate::geometry::{build_grid, ManifoldSpec, QuadratureGrid, QuadratureKind};
use crate::jcalc::{frame_components, values, Derived, Evaluator, LocalPoint, NodeScalars};
use crate::verify::random::{rng_for, unit_ball, unit_sphere};

/// Random vectors drawn per node for the "≡ 0" identities.
pub const VECTORS_PER_NODE: usize = 20;
/// Compatibility is decided numerically against this defect.
pub const COMPATIBLE_DEFECT: f64 = 1e-8;

/// Residuals of the almost-Hermitian identities at one node, each the
/// maximum over the node's random vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HermitianResiduals {
    /// `⟨JX, δJ⟩ + Σ⟨dJ(X,e_i), Je_i⟩`
    pub first: f64,
    /// `⟨X, δJ⟩ + Σ⟨dJ(X,e_i), e_i⟩`
    pub second: f64,
    /// `Σ⟨N(X,e_i), e_i⟩`
    pub nijenhuis_trace: f64,
    /// `δω(X) + ⟨δJ, X⟩`
    pub lemma: f64,
    /// `|T1 − S|`
    pub t1_minus_s: f64,
}

#[derive(Clone, Debug)]
pub struct NodeRecord {
    pub chart: usize,
    pub coords: Vec<f64>,
    /// Zero for extra draws, which take part in maxima but not integrals.
    pub weight: f64,
    pub extra: bool,
    pub s: NodeScalars,
    pub herm: Option<HermitianResiduals>,
}

pub struct Sweep {
    pub spec: ManifoldSpec,
    pub grid: QuadratureGrid,
    pub evaluator: Evaluator,
    pub records: Vec<NodeRecord>,
    pub seed: u64,
}

/// Uniform random points on the manifold as (chart, coordinates).
pub fn extra_points(
    spec: &ManifoldSpec,
    grid: &QuadratureGrid,
    seed: u64,
    count: usize,
) -> Result<Vec<(usize, Vec<f64>)>, CalcError> {
    let mut rng = rng_for(seed, &format!("extra/{}", spec.name()), 0);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        match spec.quadrature() {
            QuadratureKind::Torus => {
                let b = spec.charts()[0].usable_box();
                out.push((
                    0,
                    b.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect(),
                ));
            }
            QuadratureKind::Sphere => {
                let x = unit_sphere(&mut rng, spec.dim() + 1);
                out.push(grid.assign(&x)?);
            }
        }
    }
    Ok(out)
}

pub fn hermitian_residuals(
    lp: &LocalPoint,
    dv: &Derived,
    s: &NodeScalars,
    rng: &mut impl Rng,
) -> HermitianResiduals {
    let n = lp.dim();
    let fp = &lp.framed;
    let jf = frame_components(&Tensor::from_data(n, true, 1, lp.j_values()), fp);
    let df = frame_components(&dv.d, fp);
    let del = frame_components(&dv.delta, fp);
    let dw = frame_components(&values(&lp.codifferential(&lp.hermitian_form())), fp);
    let nt = lp.nijenhuis_table();
    let jm = |c: usize, b: usize| *jf.get(c, &[b]);
    let f = |c: usize, a: usize, b: usize| *df.get(c, &[a, b]);
    let delta = |c: usize| *del.get(c, &[]);
    let mut out = HermitianResiduals {
        t1_minus_s: (s.t1 - s.scalar).abs(),
        ..Default::default()
    };
    for _ in 0..VECTORS_PER_NODE {
        let x = unit_ball(rng, n);
        let (mut first, mut second, mut trace, mut lemma) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..n {
            let jx: f64 = (0..n).map(|b| jm(c, b) * x[b]).sum();
            first += jx * delta(c);
            second += x[c] * delta(c);
            lemma += x[c] * (dw.get(0, &[c]) + delta(c));
        }
        for i in 0..n {
            for a in 0..n {
                if x[a] == 0.0 {
                    continue;
                }
                second += x[a] * f(i, a, i);
                trace += x[a] * nt[(a * n + i) * n + i];
                for c in 0..n {
                    first += x[a] * f(c, a, i) * jm(c, i);
                }
            }
        }
        out.first = out.first.max(first.abs());
        out.second = out.second.max(second.abs());
        out.nijenhuis_trace = out.nijenhuis_trace.max(trace.abs());
        out.lemma = out.lemma.max(lemma.abs());
    }
    out
}

impl Sweep {
    pub fn run(
        spec: &ManifoldSpec,
        resolution: usize,
        seed: u64,
        extra: usize,
    ) -> Result<Sweep, CalcError> {
        let grid = build_grid(spec, resolution)?;
        let evaluator = Evaluator::new(spec)?;
        let extras = extra_points(spec, &grid, seed, extra)?;
        let total = grid.len() + extras.len();
        let label = format!("hermitian/{}", spec.name());
        let records = (0..total)
            .into_par_iter()
            .map(|i| -> Result<NodeRecord, CalcError> {
                let (chart, coords, weight, is_extra) = if i < grid.len() {
                    let node = grid.node(i)?;
                    (node.chart, node.coords, node.weight, false)
                } else {
                    let (c, u) = extras[i - grid.len()].clone();
                    (c, u, 0.0, true)
                };
                let lp = evaluator.point(chart, &coords)?;
                let dv = lp.derived();
                let s = lp.scalars_from(&dv);
                let herm = (s.compat_defect <= COMPATIBLE_DEFECT).then(|| {
                    let mut rng = rng_for(seed, &label, i as u64);
                    hermitian_residuals(&lp, &dv, &s, &mut rng)
                });
                Ok(NodeRecord {
                    chart,
                    coords,
                    weight,
                    extra: is_extra,
                    s,
                    herm,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sweep {
            spec: spec.clone(),
            grid,
            evaluator,
            records,
            seed,
        })
    }

    pub fn name(&self) -> &str {
        self.spec.name()
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn resolution(&self) -> usize {
        self.grid.resolution()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.records.iter().filter(|r| !r.extra)
    }

    /// `Σ w f` over grid nodes, summed in node order.
    pub fn integral(&self, f: impl Fn(&NodeScalars) -> f64) -> f64 {
        self.nodes().map(|r| r.weight * f(&r.s)).sum()
    }

    pub fn volume(&self) -> f64 {
        self.nodes().map(|r| r.weight).sum()
    }

    /// Maximum of `f` over grid nodes and extra draws.
    pub fn max(&self, f: impl Fn(&NodeScalars) -> f64) -> f64 {
        self.records
            .iter()
            .map(|r| f(&r.s))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self, f: impl Fn(&NodeScalars) -> f64) -> f64 {
        self.records
            .iter()
            .map(|r| f(&r.s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Record attaining the maximum of `f` (first one on ties).
    pub fn argmax(&self, f: impl Fn(&NodeScalars) -> f64) -> &NodeRecord {
        let mut best = &self.records[0];
        for r in &self.records {
            if f(&r.s) > f(&best.s) {
                best = r;
            }
        }
        best
    }

    pub fn compatible(&self) -> bool {
        self.records.iter().all(|r| r.herm.is_some())
    }

    /// A deterministic sample of `k` grid nodes.
    pub fn sample(&self, label: &str, k: usize) -> Vec<&NodeRecord> {
        let grid: Vec<&NodeRecord> = self.nodes().collect();
        let mut rng = rng_for(self.seed, &format!("{label}/{}", self.name()), 0);
        (0..k.min(grid.len()))
            .map(|_| grid[rng.gen_range(0..grid.len())])
            .collect()
    }
}
