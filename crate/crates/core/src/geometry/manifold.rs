use crate::error::GeometryError;
use crate::expr::{simplify, Expr};
use crate::geometry::chart::Chart;
use crate::geometry::structure::{MatrixField, StructureSource};
use crate::jet::MAX_DIM;

/// Quadrature family used for a manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Single periodic chart, uniform product grid.
    Torus,
    /// Unit sphere covered by projection charts, angular Gauss–Legendre grid.
    Sphere,
}

impl QuadratureKind {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureKind::Torus => "torus",
            QuadratureKind::Sphere => "sphere",
        }
    }
}

/// Metric components on one chart.
#[derive(Clone, Debug)]
pub enum MetricField {
    /// `g = λ·id`
    Conformal(Expr),
    /// Row-major symmetric `d × d` matrix.
    General(Vec<Expr>),
}

impl MetricField {
    pub fn is_conformal(&self) -> bool {
        matches!(self, MetricField::Conformal(_))
    }

    /// `[λ]` for conformal metrics, the full matrix otherwise.
    pub fn components(&self) -> Vec<Expr> {
        match self {
            MetricField::Conformal(l) => vec![l.clone()],
            MetricField::General(g) => g.clone(),
        }
    }

    pub fn matrix(&self, d: usize) -> Vec<Expr> {
        match self {
            MetricField::Conformal(l) => (0..d * d)
                .map(|k| {
                    if k / d == k % d {
                        l.clone()
                    } else {
                        Expr::zero()
                    }
                })
                .collect(),
            MetricField::General(g) => g.clone(),
        }
    }
}

/// `g_ij = conformal · Σ_k ∂_i F^k ∂_j F^k`.
pub fn induced_metric(chart: &Chart, conformal: Option<&Expr>) -> Vec<Expr> {
    let g = chart.induced_metric_exprs();
    match conformal {
        None => g,
        Some(c) => g.iter().map(|x| simplify(&(c * x))).collect(),
    }
}

/// A manifold: an atlas of embedded charts, a metric and an almost complex
/// structure.
#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    name: String,
    dim: usize,
    charts: Vec<Chart>,
    metric: Vec<MetricField>,
    factor: Vec<Option<Expr>>,
    conformal_ambient: Option<Expr>,
    source: StructureSource,
    structure: Vec<MatrixField>,
    quadrature: QuadratureKind,
    default_resolution: usize,
    description: String,
}

impl ManifoldSpec {
    /// Assemble and validate a manifold. `conformal` is an expression in the
    /// ambient coordinates `x1..xN` multiplying the induced metric.
    pub fn new(
        name: &str,
        charts: Vec<Chart>,
        source: StructureSource,
        conformal: Option<Expr>,
        quadrature: QuadratureKind,
        default_resolution: usize,
    ) -> Result<ManifoldSpec, GeometryError> {
        let first = charts
            .first()
            .ok_or_else(|| GeometryError::Invalid(format!("manifold '{name}' has no charts")))?;
        let dim = first.dim();
        let ambient = first.ambient_dim();
        if charts
            .iter()
            .any(|c| c.dim() != dim || c.ambient_dim() != ambient)
        {
            return Err(GeometryError::Invalid(format!(
                "manifold '{name}': charts disagree on dimension"
            )));
        }
        if dim % 2 != 0 {
            return Err(GeometryError::Invalid(format!(
                "manifold '{name}': dimension {dim} is odd"
            )));
        }
        if dim > MAX_DIM {
            return Err(GeometryError::DimensionTooLarge(dim));
        }
        let mut metric = Vec::new();
        let mut factor = Vec::new();
        let mut structure = Vec::new();
        for (c, chart) in charts.iter().enumerate() {
            let f = conformal.as_ref().map(|e| chart.pull_back(e));
            let field = match chart.conformal_factor() {
                Some(l) => MetricField::Conformal(match &f {
                    Some(f) => simplify(&(f * l)),
                    None => l.clone(),
                }),
                None => {
                    let g = induced_metric(chart, f.as_ref());
                    if is_structurally_conformal(&g, dim) {
                        MetricField::Conformal(g[0].clone())
                    } else {
                        MetricField::General(g)
                    }
                }
            };
            metric.push(field);
            factor.push(f);
            structure.push(source.resolve(chart, c)?);
        }
        Ok(ManifoldSpec {
            name: name.to_string(),
            dim,
            charts,
            metric,
            factor,
            conformal_ambient: conformal,
            source,
            structure,
            quadrature,
            default_resolution,
            description: String::new(),
        })
    }

    pub fn with_description(mut self, text: &str) -> Self {
        self.description = text.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.charts[0].ambient_dim()
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn metric(&self, chart: usize) -> &MetricField {
        &self.metric[chart]
    }

    /// Pulled-back conformal multiplier on `chart`, if the metric has one.
    pub fn conformal_factor(&self, chart: usize) -> Option<&Expr> {
        self.factor[chart].as_ref()
    }

    pub fn ambient_conformal_factor(&self) -> Option<&Expr> {
        self.conformal_ambient.as_ref()
    }

    pub fn structure_source(&self) -> &StructureSource {
        &self.source
    }

    pub fn structure(&self, chart: usize) -> &MatrixField {
        &self.structure[chart]
    }

    pub fn quadrature(&self) -> QuadratureKind {
        self.quadrature
    }

    pub fn default_resolution(&self) -> usize {
        self.default_resolution
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Same manifold with a different structure.
    pub fn with_structure(
        &self,
        name: &str,
        source: StructureSource,
    ) -> Result<Self, GeometryError> {
        let structure = self
            .charts
            .iter()
            .enumerate()
            .map(|(c, ch)| source.resolve(ch, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ManifoldSpec {
            name: name.to_string(),
            source,
            structure,
            ..self.clone()
        })
    }

    /// Same atlas and structure with the metric multiplied by an ambient factor.
    pub fn with_conformal(&self, name: &str, factor: Expr) -> Result<Self, GeometryError> {
        ManifoldSpec::new(
            name,
            self.charts.clone(),
            self.source.clone(),
            Some(factor),
            self.quadrature,
            self.default_resolution,
        )
        .map(|m| m.with_description(&self.description))
    }
}

fn is_structurally_conformal(g: &[Expr], d: usize) -> bool {
    (0..d).all(|i| {
        (0..d).all(|j| {
            if i == j {
                g[i * d + j] == g[0]
            } else {
                g[i * d + j].is_zero()
            }
        })
    })
}
