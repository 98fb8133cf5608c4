use std::sync::OnceLock;

use crate::connection::{covariant_derivative, Connection, Tensor};
use crate::error::{CalcError, GeometryError};
use crate::expr::{count_nodes, simplify, Expr, Tape};
use crate::geometry::{
    build_grid, ManifoldSpec, MetricField, Perturbation, QuadratureGrid, StructureSource,
};
use crate::jcalc::ops;
use crate::jcalc::Evaluator;
use crate::scalar::{invert, ExprCalculus};

pub const DEFAULT_BUDGET: usize = 200_000;
pub const MAX_DEGREE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    Generic,
    AlmostComplex,
}

/// A (tangent-bundle-valued or scalar) differential form given by
/// component expressions on every chart.
#[derive(Clone, Debug)]
pub struct TBForm {
    kind: FormKind,
    charts: Vec<Tensor<Expr>>,
}

impl TBForm {
    pub fn new(kind: FormKind, charts: Vec<Tensor<Expr>>) -> Result<TBForm, CalcError> {
        let first = charts
            .first()
            .ok_or_else(|| GeometryError::Invalid("form without charts".into()))?;
        let shape = (first.dim(), first.has_upper(), first.lower());
        if charts
            .iter()
            .any(|t| (t.dim(), t.has_upper(), t.lower()) != shape)
        {
            return Err(GeometryError::Invalid(
                "form components differ in shape between charts".into(),
            )
            .into());
        }
        if shape.2 > MAX_DEGREE {
            return Err(CalcError::Degree {
                op: "form",
                degree: shape.2,
            });
        }
        Ok(TBForm { kind, charts })
    }

    /// Vector-valued form of the given degree from per-chart component lists.
    pub fn vector_valued(
        dim: usize,
        degree: usize,
        charts: Vec<Vec<Expr>>,
    ) -> Result<TBForm, CalcError> {
        let t = charts
            .into_iter()
            .map(|c| {
                if c.len() != dim * dim.pow(degree as u32) {
                    return Err(CalcError::Geometry(GeometryError::Invalid(
                        "wrong number of form components".into(),
                    )));
                }
                Ok(Tensor::from_data(dim, true, degree, c))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TBForm::new(FormKind::Generic, t)
    }

    pub fn degree(&self) -> usize {
        self.charts[0].lower()
    }

    pub fn dim(&self) -> usize {
        self.charts[0].dim()
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn is_vector_valued(&self) -> bool {
        self.charts[0].has_upper()
    }

    pub fn chart(&self, c: usize) -> &Tensor<Expr> {
        &self.charts[c]
    }

    pub fn charts(&self) -> &[Tensor<Expr>] {
        &self.charts
    }

    pub fn node_count(&self) -> usize {
        let all: Vec<Expr> = self.charts.iter().flat_map(|t| t.data().to_vec()).collect();
        count_nodes(&all)
    }

    fn map(&self, kind: FormKind, f: impl Fn(usize, &Tensor<Expr>) -> Tensor<Expr>) -> TBForm {
        TBForm {
            kind,
            charts: self
                .charts
                .iter()
                .enumerate()
                .map(|(c, t)| f(c, t))
                .collect(),
        }
    }
}

struct ChartCalc {
    calc: ExprCalculus,
    conn: Connection<Expr>,
    curved: OnceLock<Connection<Expr>>,
}

/// Symbolic operators on forms over one manifold.
pub struct FormCalculus {
    spec: ManifoldSpec,
    charts: Vec<ChartCalc>,
    budget: usize,
}

impl FormCalculus {
    pub fn new(spec: &ManifoldSpec) -> Result<FormCalculus, CalcError> {
        let mut charts = Vec::new();
        for (c, chart) in spec.charts().iter().enumerate() {
            let calc = ExprCalculus::new(chart.coords());
            let conn = match spec.metric(c) {
                MetricField::Conformal(l) => Connection::conformal(&calc, l),
                MetricField::General(g) => {
                    let d = spec.dim();
                    if d > 4 {
                        return Err(CalcError::SymbolicInverse(d));
                    }
                    let gi: Vec<Expr> = invert(g, d).iter().map(simplify).collect();
                    Connection::generic(&calc, g.clone(), gi)
                }
            };
            charts.push(ChartCalc {
                calc,
                conn,
                curved: OnceLock::new(),
            });
        }
        Ok(FormCalculus {
            spec: spec.clone(),
            charts,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn connection(&self, chart: usize) -> &Connection<Expr> {
        &self.charts[chart].conn
    }

    /// Connection with curvature components (computed on first use).
    pub fn curvature(&self, chart: usize) -> &Connection<Expr> {
        let cc = &self.charts[chart];
        cc.curved
            .get_or_init(|| cc.conn.clone().with_curvature(&cc.calc))
    }

    fn check(&self, f: TBForm) -> Result<TBForm, CalcError> {
        let nodes = f.node_count();
        if nodes > self.budget {
            return Err(CalcError::Budget {
                nodes,
                budget: self.budget,
            });
        }
        Ok(f)
    }

    fn check_charts(&self, f: &TBForm) -> Result<(), CalcError> {
        if f.charts.len() != self.charts.len() {
            return Err(CalcError::ChartMismatch {
                form: f.charts.len(),
                manifold: self.charts.len(),
            });
        }
        Ok(())
    }

    /// The manifold's almost complex structure as a degree-1 form.
    pub fn structure(&self) -> Result<TBForm, CalcError> {
        let d = self.spec.dim();
        let charts = (0..self.charts.len())
            .map(|c| Tensor::from_data(d, true, 1, self.spec.structure(c).exprs(d)))
            .collect();
        self.check(TBForm::new(FormKind::AlmostComplex, charts)?)
    }

    /// Components of `∇_{∂_axis} ω` on every chart.
    pub fn covariant_derivative(
        &self,
        w: &TBForm,
        axis: usize,
    ) -> Result<Vec<Tensor<Expr>>, CalcError> {
        self.check_charts(w)?;
        let d = w.dim();
        let width = if w.is_vector_valued() { d } else { 1 } * d.pow(w.degree() as u32);
        let inner = d.pow(w.degree() as u32);
        Ok(w.charts
            .iter()
            .zip(&self.charts)
            .map(|(t, cc)| {
                let full = covariant_derivative(&cc.calc, &cc.conn.gamma, t);
                let uppers = width / inner;
                let mut data = Vec::with_capacity(width);
                for c in 0..uppers {
                    for f in 0..inner {
                        data.push(simplify(full.at_flat(c, axis * inner + f)));
                    }
                }
                Tensor::from_data(d, t.has_upper(), t.lower(), data)
            })
            .collect())
    }

    pub fn exterior_d(&self, w: &TBForm) -> Result<TBForm, CalcError> {
        self.check_charts(w)?;
        if w.degree() >= MAX_DEGREE {
            return Err(CalcError::Degree {
                op: "exterior_d",
                degree: w.degree(),
            });
        }
        let out = w.map(FormKind::Generic, |c, t| {
            let cc = &self.charts[c];
            ops::exterior_d(&cc.calc, &cc.conn, t).map(simplify)
        });
        self.check(out)
    }

    pub fn codifferential(&self, w: &TBForm) -> Result<TBForm, CalcError> {
        self.check_charts(w)?;
        if w.degree() == 0 {
            return Err(CalcError::Degree {
                op: "codifferential",
                degree: 0,
            });
        }
        let out = w.map(FormKind::Generic, |c, t| {
            let cc = &self.charts[c];
            ops::codifferential(&cc.calc, &cc.conn, t).map(simplify)
        });
        self.check(out)
    }

    /// `dδω + δdω`, simplifying and checking the budget between stages.
    pub fn hodge_laplace(&self, w: &TBForm) -> Result<TBForm, CalcError> {
        if w.degree() > 2 {
            return Err(CalcError::Degree {
                op: "hodge_laplace",
                degree: w.degree(),
            });
        }
        let dd = self.codifferential(&self.exterior_d(w)?)?;
        if w.degree() == 0 {
            return Ok(dd);
        }
        let dl = self.exterior_d(&self.codifferential(w)?)?;
        let out = dl.map(FormKind::Generic, |c, t| t.add(dd.chart(c)).map(simplify));
        self.check(out)
    }

    pub fn rough_laplacian(&self, w: &TBForm) -> Result<TBForm, CalcError> {
        self.check_charts(w)?;
        let out = w.map(FormKind::Generic, |c, t| {
            let cc = &self.charts[c];
            ops::rough_laplacian(&cc.calc, &cc.conn, t).map(simplify)
        });
        self.check(out)
    }

    pub fn weitzenbock_term(&self, w: &TBForm) -> Result<TBForm, CalcError> {
        self.check_charts(w)?;
        let out = w.map(FormKind::Generic, |c, t| {
            ops::weitzenbock_term(self.curvature(c), t).map(simplify)
        });
        self.check(out)
    }

    /// Component values at a chart point.
    pub fn eval(&self, w: &TBForm, chart: usize, coords: &[f64]) -> Result<Tensor<f64>, CalcError> {
        let t = w.chart(chart);
        let tape = Tape::compile(t.data(), self.spec.charts()[chart].coords())
            .map_err(GeometryError::from)?;
        let vals = tape.eval(coords).map_err(GeometryError::from)?;
        Ok(Tensor::from_data(t.dim(), t.has_upper(), t.lower(), vals))
    }

    /// The almost-Hermitian form `ω(X,Y) = ⟨X, JY⟩` and its codifferential.
    /// Fails unless `J` is compatible with the metric at a sample of points.
    pub fn hermitian_form(&self, j: &TBForm) -> Result<(TBForm, TBForm), CalcError> {
        self.check_charts(j)?;
        if j.degree() != 1 || !j.is_vector_valued() {
            return Err(CalcError::Degree {
                op: "hermitian_form",
                degree: j.degree(),
            });
        }
        let d = j.dim();
        let mut worst: f64 = 0.0;
        for (c, chart) in self.spec.charts().iter().enumerate() {
            let tape_j =
                Tape::compile(j.chart(c).data(), chart.coords()).map_err(GeometryError::from)?;
            let tape_g = Tape::compile(&self.charts[c].conn.metric, chart.coords())
                .map_err(GeometryError::from)?;
            for k in 0..16 {
                let p: Vec<f64> = chart
                    .usable_box()
                    .iter()
                    .enumerate()
                    .map(|(a, (lo, hi))| {
                        lo + (hi - lo) * (((k * 7 + a * 3) % 16) as f64 + 0.5) / 16.0
                    })
                    .collect();
                let (Ok(jv), Ok(gv)) = (tape_j.eval(&p), tape_g.eval(&p)) else {
                    continue;
                };
                for a in 0..d {
                    for b in 0..d {
                        let mut s = 0.0;
                        for x in 0..d {
                            for y in 0..d {
                                s += jv[x * d + a] * gv[x * d + y] * jv[y * d + b];
                            }
                        }
                        worst = worst.max((s - gv[a * d + b]).abs());
                    }
                }
            }
        }
        if worst > 1e-9 {
            return Err(CalcError::NotCompatible(worst));
        }
        let omega = j.map(FormKind::Generic, |c, t| {
            let g = &self.charts[c].conn.metric;
            let mut data = Vec::with_capacity(d * d);
            for a in 0..d {
                for b in 0..d {
                    let mut acc = Expr::zero();
                    for x in 0..d {
                        acc = &acc + &(&g[a * d + x] * t.get(x, &[b]));
                    }
                    data.push(simplify(&acc));
                }
            }
            Tensor::from_data(d, false, 2, data)
        });
        let omega = self.check(omega)?;
        let delta = self.codifferential(&omega)?;
        Ok((omega, delta))
    }
}

/// Replace the structure of `spec` by `A J₀ A⁻¹` with `A = id + eps·B`,
/// checking that `A` stays invertible on every node of `grid`.
pub fn conjugate_acs(
    spec: &ManifoldSpec,
    name: &str,
    perturbation: Perturbation,
    eps: f64,
    grid: &QuadratureGrid,
) -> Result<ManifoldSpec, CalcError> {
    let source = StructureSource::Conjugated {
        base: Box::new(spec.structure_source().clone()),
        perturbation,
        eps,
    };
    let out = spec.with_structure(name, source)?;
    let ev = Evaluator::new(&out)?;
    for node in grid.nodes() {
        let node = node?;
        ev.point(node.chart, &node.coords)?;
    }
    Ok(out)
}

/// Grid for `spec` at its default resolution.
pub fn default_grid(spec: &ManifoldSpec) -> Result<QuadratureGrid, CalcError> {
    Ok(build_grid(spec, spec.default_resolution())?)
}
