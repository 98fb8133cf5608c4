//! Pointwise evaluation of the whole operator pipeline with jets.
//!
//! Metric and structure tapes are evaluated on second-order jets of the
//! chart coordinates; Christoffel symbols then carry first derivatives and
//! curvature, `ΔJ` and `∇²J` come out exact at the point.

use crate::connection::{covariant_derivative, Connection, Tensor};
use crate::error::{CalcError, GeometryError};
use crate::expr::{Expr, Tape};
use crate::geometry::{orthonormal_frame, FramedPoint, ManifoldSpec, MatrixField};
use crate::jcalc::ops::{alternate, trace_first_two, weitzenbock_term};
use crate::jcalc::pointwise::{self, CurvatureTraces, StructureJet, VectorJet};
use crate::jet::Jet;
use crate::scalar::{invert, JetCalculus, Scalar};

struct ChartProgram {
    metric: Tape,
    conformal: bool,
    structure: Tape,
    field: MatrixField,
}

/// Compiled per-chart programs for one manifold.
pub struct Evaluator {
    spec: ManifoldSpec,
    charts: Vec<ChartProgram>,
}

/// Everything known at one point of one chart.
#[derive(Clone, Debug)]
pub struct LocalPoint {
    pub framed: FramedPoint,
    pub conn: Connection<Jet>,
    pub riemann: Vec<f64>,
    pub j: Tensor<Jet>,
    /// Smallest `|det A|` over conjugating matrices (infinite if none).
    pub conjugator_det: f64,
}

impl Evaluator {
    pub fn new(spec: &ManifoldSpec) -> Result<Evaluator, CalcError> {
        let mut charts = Vec::new();
        for (c, chart) in spec.charts().iter().enumerate() {
            let m = spec.metric(c);
            let field = spec.structure(c).clone();
            charts.push(ChartProgram {
                metric: Tape::compile(&m.components(), chart.coords())
                    .map_err(GeometryError::from)?,
                conformal: m.is_conformal(),
                structure: field.compile(chart)?,
                field,
            });
        }
        Ok(Evaluator {
            spec: spec.clone(),
            charts,
        })
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn seeds(coords: &[f64]) -> Vec<Jet> {
        coords
            .iter()
            .enumerate()
            .map(|(a, &x)| Jet::variable(x, a, 2))
            .collect()
    }

    /// Metric, connection, curvature, frame and structure at a chart point.
    pub fn point(&self, chart: usize, coords: &[f64]) -> Result<LocalPoint, CalcError> {
        let n = self.dim();
        let prog = &self.charts[chart];
        let x = Self::seeds(coords);
        let calc = JetCalculus { dim: n };
        let mvals = prog.metric.eval(&x).map_err(GeometryError::from)?;
        let conn = if prog.conformal {
            Connection::conformal(&calc, &mvals[0])
        } else {
            let ginv = invert(&mvals, n);
            Connection::generic(&calc, mvals, ginv)
        };
        let conn = conn.with_curvature(&calc);
        let gv: Vec<f64> = conn.metric.iter().map(Jet::value).collect();
        let name = self.spec.charts()[chart].name();
        let frame = orthonormal_frame(name, coords, &gv)?;
        let leaves = prog.structure.eval(&x).map_err(GeometryError::from)?;
        let conjugator_det = prog.field.min_conjugator_det(&leaves, n);
        if conjugator_det < 1e-8 {
            return Err(CalcError::Singular(conjugator_det));
        }
        let j = Tensor::from_data(n, true, 1, prog.field.assemble(&leaves, n));
        let framed = FramedPoint {
            chart,
            coords: coords.to_vec(),
            frame,
            metric: gv,
            inverse_metric: conn.inverse.iter().map(Jet::value).collect(),
            christoffel: conn.gamma.iter().map(Jet::value).collect(),
        };
        let riemann = conn
            .riemann
            .as_ref()
            .expect("curvature computed")
            .iter()
            .map(Jet::value)
            .collect();
        Ok(LocalPoint {
            framed,
            conn,
            riemann,
            j,
            conjugator_det,
        })
    }

    /// Evaluate an arbitrary tensor of chart-coordinate expressions on jets.
    pub fn tensor(
        &self,
        chart: usize,
        coords: &[f64],
        upper: bool,
        lower: usize,
        comps: &[Expr],
    ) -> Result<Tensor<Jet>, CalcError> {
        let tape = Tape::compile(comps, self.spec.charts()[chart].coords())
            .map_err(GeometryError::from)?;
        self.tensor_from_tape(&tape, coords, upper, lower)
    }

    pub fn tensor_from_tape(
        &self,
        tape: &Tape,
        coords: &[f64],
        upper: bool,
        lower: usize,
    ) -> Result<Tensor<Jet>, CalcError> {
        let vals = tape
            .eval(&Self::seeds(coords))
            .map_err(GeometryError::from)?;
        Ok(Tensor::from_data(self.dim(), upper, lower, vals))
    }
}

/// Values of a jet tensor.
pub fn values(t: &Tensor<Jet>) -> Tensor<f64> {
    Tensor::from_data(
        t.dim(),
        t.has_upper(),
        t.lower(),
        t.data().iter().map(Jet::value).collect(),
    )
}

/// Derived fields of a tensor `ω` at a point.
pub struct FormFields {
    pub nabla: Tensor<Jet>,
    pub d: Tensor<Jet>,
    pub delta: Option<Tensor<Jet>>,
}

impl LocalPoint {
    pub fn dim(&self) -> usize {
        self.framed.dim()
    }

    fn calc(&self) -> JetCalculus {
        JetCalculus { dim: self.dim() }
    }

    pub fn nabla(&self, w: &Tensor<Jet>) -> Tensor<Jet> {
        covariant_derivative(&self.calc(), &self.conn.gamma, w)
    }

    pub fn fields(&self, w: &Tensor<Jet>) -> FormFields {
        let nabla = self.nabla(w);
        let d = alternate(&nabla);
        let delta = if w.lower() >= 1 {
            Some(trace_first_two(&self.conn.inverse, &nabla, -1.0))
        } else {
            None
        };
        FormFields { nabla, d, delta }
    }

    pub fn exterior_d(&self, w: &Tensor<Jet>) -> Tensor<Jet> {
        alternate(&self.nabla(w))
    }

    pub fn codifferential(&self, w: &Tensor<Jet>) -> Tensor<Jet> {
        trace_first_two(&self.conn.inverse, &self.nabla(w), -1.0)
    }

    /// `dδω + δdω` reusing already computed `dω` and `δω`.
    pub fn hodge_from(&self, f: &FormFields) -> Tensor<Jet> {
        let dd = self.codifferential(&f.d);
        match &f.delta {
            Some(delta) => self.exterior_d(delta).add(&dd),
            None => dd,
        }
    }

    pub fn hodge_laplace(&self, w: &Tensor<Jet>) -> Tensor<Jet> {
        self.hodge_from(&self.fields(w))
    }

    pub fn rough_from(&self, nabla: &Tensor<Jet>) -> Tensor<Jet> {
        trace_first_two(&self.conn.inverse, &self.nabla(nabla), 1.0)
    }

    pub fn rough_laplacian(&self, w: &Tensor<Jet>) -> Tensor<Jet> {
        self.rough_from(&self.nabla(w))
    }

    pub fn weitzenbock_term(&self, w: &Tensor<Jet>) -> Tensor<Jet> {
        weitzenbock_term(&self.conn, w)
    }

    pub fn j_values(&self) -> Vec<f64> {
        self.j.data().iter().map(Jet::value).collect()
    }

    pub fn structure_jet(&self) -> StructureJet {
        let n = self.dim();
        let mut dj = vec![0.0; n * n * n];
        for a in 0..n {
            for k in 0..n * n {
                dj[a * n * n + k] = self.j.data()[k].grad(a);
            }
        }
        StructureJet {
            n,
            j: self.j_values(),
            dj,
        }
    }

    /// `e(J)` as a jet: `½ g^{ab} g_{cd} J^c_a J^d_b`.
    pub fn energy_jet(&self) -> Jet {
        let n = self.dim();
        let g = &self.conn.metric;
        let gi = &self.conn.inverse;
        let jd = self.j.data();
        // gj[d][a] = g_dc J^c_a
        let mut gj = vec![Jet::constant(0.0); n * n];
        for d in 0..n {
            for a in 0..n {
                let mut acc = Jet::constant(0.0);
                for c in 0..n {
                    acc.acc_mul(&g[d * n + c], &jd[c * n + a]);
                }
                gj[d * n + a] = acc;
            }
        }
        // h[a][b] = Σ_d J^d_b g_dc J^c_a
        let mut e = Jet::constant(0.0);
        for a in 0..n {
            for b in 0..n {
                if gi[a * n + b].is_zero() {
                    continue;
                }
                let mut h = Jet::constant(0.0);
                for d in 0..n {
                    h.acc_mul(&jd[d * n + b], &gj[d * n + a]);
                }
                e.acc_mul(&gi[a * n + b], &h);
            }
        }
        e.scale(0.5)
    }

    /// Trace Hessian `Σ_i (∇∇f)(e_i, e_i)` of a scalar jet.
    pub fn trace_hessian(&self, f: &Jet) -> f64 {
        let t = Tensor::from_data(self.dim(), false, 0, vec![*f]);
        self.rough_laplacian(&t).data()[0].value()
    }

    pub fn curvature_traces(&self) -> CurvatureTraces {
        pointwise::curvature_traces(&self.riemann, &self.j_values(), &self.framed)
    }

    /// Frame components of `ω(X_1,…)` for coordinate vectors, all in f64.
    pub fn eval_form(&self, w: &Tensor<f64>, args: &[&[f64]]) -> Vec<f64> {
        let n = self.dim();
        let p = w.lower();
        assert_eq!(args.len(), p, "argument count");
        let uppers = if w.has_upper() { n } else { 1 };
        let mut out = vec![0.0; uppers];
        let mut idx = vec![0; p];
        for flat in 0..n.pow(p as u32) {
            Tensor::<f64>::unflatten(flat, n, &mut idx);
            let coef: f64 = idx.iter().zip(args).map(|(&i, a)| a[i]).product();
            if coef == 0.0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += coef * w.at_flat(c, flat);
            }
        }
        out
    }
}

/// Every per-point scalar used by the checks for the manifold's own `J`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NodeScalars {
    pub energy: f64,
    pub compat_defect: f64,
    pub square_defect: f64,
    pub nabla_j_sq: f64,
    pub dj_sq: f64,
    pub delta_j_sq: f64,
    pub lap_j_dot_j: f64,
    pub lap_j_sq: f64,
    pub rough_j_sq: f64,
    pub lap_energy: f64,
    pub scalar: f64,
    pub t1: f64,
    pub t2: f64,
    pub s_dot_j: f64,
    pub bochner_residual: f64,
    pub weitzenbock_residual: f64,
    pub nijenhuis_sq: f64,
    pub weitzenbock_sq: f64,
}

impl NodeScalars {
    /// `|∇J|² + T1 − T2`, the Bochner integrand.
    pub fn bochner_integrand(&self) -> f64 {
        self.nabla_j_sq + self.t1 - self.t2
    }

    /// `|∇J|² + S − T2`.
    pub fn hermitian_integrand(&self) -> f64 {
        self.nabla_j_sq + self.scalar - self.t2
    }

    /// All fields with their names, in declaration order.
    pub fn entries(&self) -> [(&'static str, f64); 18] {
        [
            ("energy", self.energy),
            ("compat_defect", self.compat_defect),
            ("square_defect", self.square_defect),
            ("nabla_j_sq", self.nabla_j_sq),
            ("dj_sq", self.dj_sq),
            ("delta_j_sq", self.delta_j_sq),
            ("lap_j_dot_j", self.lap_j_dot_j),
            ("lap_j_sq", self.lap_j_sq),
            ("rough_j_sq", self.rough_j_sq),
            ("lap_energy", self.lap_energy),
            ("scalar", self.scalar),
            ("t1", self.t1),
            ("t2", self.t2),
            ("s_dot_j", self.s_dot_j),
            ("bochner_residual", self.bochner_residual),
            ("weitzenbock_residual", self.weitzenbock_residual),
            ("nijenhuis_sq", self.nijenhuis_sq),
            ("weitzenbock_sq", self.weitzenbock_sq),
        ]
    }
}

/// Values of the fields derived from `J` at one point.
#[derive(Clone, Debug)]
pub struct Derived {
    pub nabla: Tensor<f64>,
    pub d: Tensor<f64>,
    pub delta: Tensor<f64>,
    pub lap: Tensor<f64>,
    pub rough: Tensor<f64>,
    pub weitz: Tensor<f64>,
    /// Trace Hessian of `e(J)`.
    pub lap_energy: f64,
}

impl LocalPoint {
    pub fn derived(&self) -> Derived {
        let f = self.fields(&self.j);
        Derived {
            lap: values(&self.hodge_from(&f)),
            rough: values(&self.rough_from(&f.nabla)),
            weitz: values(&self.weitzenbock_term(&self.j)),
            nabla: values(&f.nabla),
            d: values(&f.d),
            delta: values(f.delta.as_ref().expect("degree 1")),
            lap_energy: self.trace_hessian(&self.energy_jet()),
        }
    }

    pub fn scalars(&self) -> NodeScalars {
        self.scalars_from(&self.derived())
    }

    /// Frame-level scalars from already evaluated fields. Only the frame of
    /// `self` is used, so a rotated copy gives the same numbers up to rounding.
    pub fn scalars_from(&self, dv: &Derived) -> NodeScalars {
        let fp = &self.framed;
        let jv = self.j_values();
        let jt = Tensor::from_data(self.dim(), true, 1, jv.clone());
        let ip = |a: &Tensor<f64>, b: &Tensor<f64>| {
            pointwise::pointwise_inner(a, b, fp).expect("same degree")
        };
        let traces = self.curvature_traces();
        let nabla_j_sq = pointwise::full_norm_sq(&dv.nabla, fp);
        let lap_j_dot_j = ip(&dv.lap, &jt);
        let weitz = dv.lap.sub(&dv.weitz.sub(&dv.rough));
        let weitz_frame = pointwise::frame_components(&weitz, fp);
        NodeScalars {
            energy: pointwise::energy_density(&jv, fp),
            compat_defect: pointwise::compatibility_defect(&jv, fp),
            square_defect: pointwise::square_defect(&jv, fp),
            nabla_j_sq,
            dj_sq: ip(&dv.d, &dv.d),
            delta_j_sq: ip(&dv.delta, &dv.delta),
            lap_j_dot_j,
            lap_j_sq: ip(&dv.lap, &dv.lap),
            rough_j_sq: ip(&dv.rough, &dv.rough),
            lap_energy: dv.lap_energy,
            scalar: traces.scalar,
            t1: traces.t1,
            t2: traces.t2,
            s_dot_j: ip(&dv.weitz, &jt),
            bochner_residual: dv.lap_energy + lap_j_dot_j - (nabla_j_sq + traces.t1 - traces.t2),
            weitzenbock_residual: weitz_frame.data().iter().map(|x| x * x).sum::<f64>().sqrt(),
            nijenhuis_sq: pointwise::nijenhuis_norm_sq(&self.structure_jet(), fp),
            weitzenbock_sq: ip(&dv.weitz, &dv.weitz),
        }
    }

    /// `|∇J|² + T1 − T2` without the second-order operators.
    pub fn bochner_integrand(&self) -> f64 {
        let nabla = values(&self.nabla(&self.j));
        let t = self.curvature_traces();
        pointwise::full_norm_sq(&nabla, &self.framed) + t.t1 - t.t2
    }

    /// Copy of the point with another orthonormal frame.
    pub fn with_frame(&self, frame: Vec<f64>) -> LocalPoint {
        let mut out = self.clone();
        out.framed.frame = frame;
        out
    }

    /// `ω(X,Y) = ⟨X, JY⟩` as a jet tensor, `ω_{ac} = g_{ab} J^b_c`.
    pub fn hermitian_form(&self) -> Tensor<Jet> {
        let n = self.dim();
        let g = &self.conn.metric;
        let jd = self.j.data();
        let mut out = Tensor::zeros(n, false, 2);
        for a in 0..n {
            for c in 0..n {
                let mut acc = Jet::constant(0.0);
                for b in 0..n {
                    acc.acc_mul(&g[a * n + b], &jd[b * n + c]);
                }
                *out.at_flat_mut(0, a * n + c) = acc;
            }
        }
        out
    }

    /// Frame components `N(e_a, e_b)^c`, stored at `[a][b][c]`.
    pub fn nijenhuis_table(&self) -> Vec<f64> {
        let n = self.dim();
        let fp = &self.framed;
        let sj = self.structure_jet();
        let cols: Vec<VectorJet> = (0..n)
            .map(|i| VectorJet::constant(&(0..n).map(|r| fp.frame[r * n + i]).collect::<Vec<_>>()))
            .collect();
        let mut out = vec![0.0; n * n * n];
        for a in 0..n {
            for b in a + 1..n {
                let v = fp.to_frame(&pointwise::nijenhuis(
                    &sj,
                    &fp.christoffel,
                    &cols[a],
                    &cols[b],
                ));
                for c in 0..n {
                    out[(a * n + b) * n + c] = v[c];
                    out[(b * n + a) * n + c] = -v[c];
                }
            }
        }
        out
    }
}
