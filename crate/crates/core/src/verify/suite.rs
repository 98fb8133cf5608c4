use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::Tensor;
use crate::error::{CalcError, GeometryError};
use crate::expr::Tape;
use crate::geometry::{build_grid, zoo, Expected, ManifoldSpec, QuadratureGrid};
use crate::jcalc::{pointwise_inner, Evaluator, TBForm};
use crate::verify::checks::{self, Ctx};
use crate::verify::report::{CheckResult, Report, ToleranceProfile};
use crate::verify::sweep::Sweep;

/// Per-manifold checks in report order.
pub const CHECKS: &[&str] = &[
    "volume",
    "bochner",
    "selfadjoint",
    "weitzenbock",
    "d_squared",
    "nijenhuis",
    "integral_criteria",
    "hermitian_identities",
    "inequalities",
    "classify",
    "invariance",
];

/// Conformal factors `1 + ε x₇` scanned on the round six-sphere.
pub const PERTURBATION_EPS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
pub const EXTRA_DRAWS: usize = 100;

pub fn is_known_check(name: &str) -> bool {
    CHECKS.contains(&name) || name == "perturbation_sweep"
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub profile: ToleranceProfile,
    /// Overrides every manifold's default resolution.
    pub resolution: Option<usize>,
    /// Record wall time in `millis`; off by default so reports are reproducible.
    pub timing: bool,
    /// Restrict the suite to these zoo names.
    pub manifolds: Option<Vec<String>>,
    pub extra_draws: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            profile: ToleranceProfile::Default,
            resolution: None,
            timing: false,
            manifolds: None,
            extra_draws: EXTRA_DRAWS,
        }
    }
}

impl SuiteConfig {
    pub fn resolution_for(&self, spec: &ManifoldSpec) -> usize {
        self.resolution.unwrap_or(spec.default_resolution())
    }
}

fn dispatch(name: &str, sw: &Sweep, ctx: &Ctx) -> CheckResult {
    match name {
        "volume" => checks::volume(sw, ctx),
        "bochner" => checks::bochner(sw, ctx),
        "selfadjoint" => checks::selfadjoint(sw, ctx),
        "weitzenbock" => checks::weitzenbock(sw, ctx),
        "d_squared" => checks::d_squared(sw, ctx),
        "nijenhuis" => checks::nijenhuis_check(sw, ctx),
        "integral_criteria" => checks::integral_criteria(sw, ctx),
        "hermitian_identities" => checks::hermitian_identities(sw, ctx),
        "inequalities" => checks::inequalities(sw, ctx),
        "classify" => checks::classify(sw, ctx),
        "invariance" => checks::invariance(sw, ctx),
        other => {
            CheckResult::new(sw.name(), other, sw.resolution(), ctx.seed).failed("unknown check")
        }
    }
}

fn elapsed_ms(start: Instant, timing: bool) -> u64 {
    if timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

/// Run the named checks on one manifold, sharing a single node sweep.
/// Failures to evaluate become failing results rather than errors.
pub fn manifold_checks(
    spec: &ManifoldSpec,
    expected: Option<&Expected>,
    names: &[&str],
    cfg: &SuiteConfig,
) -> Vec<CheckResult> {
    let res = cfg.resolution_for(spec);
    let start = Instant::now();
    let sweep = Sweep::run(spec, res, cfg.seed, cfg.extra_draws);
    let sweep_ms = elapsed_ms(start, cfg.timing);
    let sw = match sweep {
        Ok(sw) => sw,
        Err(e) => {
            return names
                .iter()
                .map(|n| {
                    CheckResult::new(spec.name(), n, res, cfg.seed)
                        .failed(&format!("evaluation failed: {e}"))
                })
                .collect()
        }
    };
    let ctx = Ctx {
        tol: cfg.profile.tolerances(),
        expected,
        seed: cfg.seed,
        volume: checks::reference_volume(&sw),
    };
    names
        .iter()
        .map(|name| {
            let start = Instant::now();
            let mut r = dispatch(name, &sw, &ctx);
            r.millis = elapsed_ms(start, cfg.timing) + sweep_ms;
            r
        })
        .collect()
}

/// Minimum of the Bochner integrand over the grid of `spec`.
pub fn min_bochner_integrand(spec: &ManifoldSpec, resolution: usize) -> Result<f64, CalcError> {
    let grid = build_grid(spec, resolution)?;
    let ev = Evaluator::new(spec)?;
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<f64, CalcError> {
            let node = grid.node(i)?;
            Ok(ev.point(node.chart, &node.coords)?.bochner_integrand())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Largest conformal perturbation of the round six-sphere, among
/// [`PERTURBATION_EPS`], for which the Bochner integrand stays positive.
pub fn perturbation_sweep(cfg: &SuiteConfig) -> CheckResult {
    let base = zoo::s6_octonionic();
    let res = cfg.resolution_for(&base);
    let start = Instant::now();
    let mut r = CheckResult::new(base.name(), "perturbation_sweep", res, cfg.seed);
    r.tolerance = 0.0;
    let mut largest = 0.0;
    let mut all_positive = true;
    for (k, eps) in std::iter::once(0.0).chain(PERTURBATION_EPS).enumerate() {
        let spec = if k == 0 {
            Ok(base.clone())
        } else {
            zoo::s6_perturbed(eps)
        };
        let m = spec
            .map_err(CalcError::from)
            .and_then(|s| min_bochner_integrand(&s, res));
        match m {
            Ok(m) => {
                r.put(&format!("min_integrand_eps_{eps}"), m);
                if m > 0.0 && all_positive {
                    largest = eps;
                } else {
                    all_positive = false;
                }
            }
            Err(e) => {
                all_positive = false;
                r.add_note(&format!("eps {eps}: {e}"));
            }
        }
    }
    r.put("largest_positive_eps", largest);
    r.require(largest >= PERTURBATION_EPS[0]);
    r.add_note("conformal factor 1 + eps x7; positivity on grid nodes only, no bound claimed");
    r.millis = elapsed_ms(start, cfg.timing);
    r
}

/// Every check on every selected zoo member, then the suite-level sweep.
pub fn run_suite(cfg: &SuiteConfig) -> Report {
    let wanted = |name: &str| {
        cfg.manifolds
            .as_ref()
            .is_none_or(|m| m.iter().any(|x| x == name))
    };
    let mut results = Vec::new();
    for entry in zoo::zoo() {
        if !wanted(entry.spec.name()) {
            continue;
        }
        results.extend(manifold_checks(
            &entry.spec,
            Some(&entry.expected),
            CHECKS,
            cfg,
        ));
    }
    if wanted("s6_octonionic") {
        results.push(perturbation_sweep(cfg));
    }
    Report::new(cfg.seed, cfg.profile, cfg.resolution, results)
}

/// Run `check` on one manifold.
pub fn run_check(
    check: &str,
    spec: &ManifoldSpec,
    expected: Option<&Expected>,
    cfg: &SuiteConfig,
) -> Result<CheckResult, String> {
    if check == "perturbation_sweep" {
        return Ok(perturbation_sweep(cfg));
    }
    if !CHECKS.contains(&check) {
        return Err(format!(
            "unknown check '{check}' (known: {}, perturbation_sweep)",
            CHECKS.join(", ")
        ));
    }
    Ok(manifold_checks(spec, expected, &[check], cfg).remove(0))
}

/// Run `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Integrated quantities and ranges for one structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub manifold: String,
    pub dim: usize,
    pub resolution: usize,
    pub volume: f64,
    pub energy: [f64; 2],
    pub scalar: [f64; 2],
    pub t1: [f64; 2],
    pub t2: [f64; 2],
    pub nabla_j_sq: [f64; 2],
    pub int_nabla_j_sq: f64,
    pub int_dj_sq: f64,
    pub int_delta_j_sq: f64,
    pub i4: f64,
    pub i5: Option<f64>,
    pub compatible: bool,
    pub kahler: bool,
    pub harmonic: bool,
    pub integrable: bool,
    pub max_bochner_residual: f64,
    pub pass: bool,
}

pub fn diagnose(spec: &ManifoldSpec, cfg: &SuiteConfig) -> Result<Diagnosis, CalcError> {
    let res = cfg.resolution_for(spec);
    let sw = Sweep::run(spec, res, cfg.seed, 0)?;
    let tol = cfg.profile.tolerances();
    let ctx = Ctx {
        tol,
        expected: None,
        seed: cfg.seed,
        volume: None,
    };
    let cls = checks::classify(&sw, &ctx);
    let flag = |n: &str| cls.value(n) == Some(1.0);
    let range = |f: fn(&crate::jcalc::NodeScalars) -> f64| [sw.min(f), sw.max(f)];
    let compatible = sw.compatible();
    let max_res = sw.max(|s| s.bochner_residual.abs());
    Ok(Diagnosis {
        manifold: spec.name().to_string(),
        dim: spec.dim(),
        resolution: res,
        volume: sw.volume(),
        energy: range(|s| s.energy),
        scalar: range(|s| s.scalar),
        t1: range(|s| s.t1),
        t2: range(|s| s.t2),
        nabla_j_sq: range(|s| s.nabla_j_sq),
        int_nabla_j_sq: sw.integral(|s| s.nabla_j_sq),
        int_dj_sq: sw.integral(|s| s.dj_sq),
        int_delta_j_sq: sw.integral(|s| s.delta_j_sq),
        i4: sw.integral(|s| s.bochner_integrand()),
        i5: compatible.then(|| sw.integral(|s| s.hermitian_integrand())),
        compatible,
        kahler: flag("kahler"),
        harmonic: flag("harmonic"),
        integrable: flag("integrable"),
        max_bochner_residual: max_res,
        pass: cls.pass && max_res <= tol.identity,
    })
}

pub const CONVERGENCE_QUANTITIES: &[&str] = &["volume", "i4", "selfadjoint"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub value: f64,
    /// Distance to the value on the richest grid (or to the exact value).
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub manifold: String,
    pub quantity: String,
    pub reference: f64,
    pub exact_reference: bool,
    pub rows: Vec<ConvergenceRow>,
}

/// `quantity` on each resolution. The volume of unperturbed spheres and
/// flat tori is compared with its closed form; everything else with the
/// richest grid. For `selfadjoint` the value is the residual itself.
pub fn convergence(
    spec: &ManifoldSpec,
    quantity: &str,
    resolutions: &[usize],
    seed: u64,
) -> Result<ConvergenceTable, CalcError> {
    if !CONVERGENCE_QUANTITIES.contains(&quantity) {
        return Err(GeometryError::Invalid(format!(
            "unknown quantity '{quantity}' (known: {})",
            CONVERGENCE_QUANTITIES.join(", ")
        ))
        .into());
    }
    if resolutions.is_empty() {
        return Err(GeometryError::Invalid("no resolutions given".into()).into());
    }
    let mut vals = Vec::new();
    let mut exact = None;
    for &res in resolutions {
        let v = match quantity {
            "volume" => {
                let grid = build_grid(spec, res)?;
                if exact.is_none() {
                    exact = closed_form_volume(spec);
                }
                grid.total_weight()?
            }
            _ => {
                let sw = Sweep::run(spec, res, seed, 0)?;
                if quantity == "i4" {
                    sw.integral(|s| s.bochner_integrand())
                } else {
                    sw.integral(|s| s.lap_j_dot_j - s.dj_sq - s.delta_j_sq)
                }
            }
        };
        vals.push((res, v));
    }
    let exact_reference = exact.is_some() || quantity == "selfadjoint";
    let reference = match (quantity, exact) {
        (_, Some(e)) => e,
        ("selfadjoint", _) => 0.0,
        _ => {
            let best = resolutions
                .iter()
                .enumerate()
                .max_by_key(|(_, r)| **r)
                .map(|(i, _)| i)
                .unwrap_or(0);
            vals[best].1
        }
    };
    Ok(ConvergenceTable {
        manifold: spec.name().to_string(),
        quantity: quantity.to_string(),
        reference,
        exact_reference,
        rows: vals
            .into_iter()
            .map(|(resolution, value)| ConvergenceRow {
                resolution,
                value,
                error: (value - reference).abs(),
            })
            .collect(),
    })
}

fn closed_form_volume(spec: &ManifoldSpec) -> Option<f64> {
    use crate::geometry::{unit_sphere_volume, QuadratureKind};
    if spec.ambient_conformal_factor().is_some() {
        return None;
    }
    match spec.quadrature() {
        QuadratureKind::Sphere => Some(unit_sphere_volume(spec.dim())),
        QuadratureKind::Torus => Some(
            spec.charts()[0]
                .domain()
                .iter()
                .map(|(a, b)| b - a)
                .product(),
        ),
    }
}

/// `(ω, θ) = ∫⟨ω, θ⟩ dv` by quadrature.
pub fn global_inner(
    spec: &ManifoldSpec,
    w: &TBForm,
    th: &TBForm,
    grid: &QuadratureGrid,
) -> Result<f64, CalcError> {
    if grid.manifold() != spec.name() || grid.dim() != spec.dim() {
        return Err(GeometryError::Invalid(format!(
            "grid built for '{}' used on '{}'",
            grid.manifold(),
            spec.name()
        ))
        .into());
    }
    if w.charts().len() != spec.charts().len() || th.charts().len() != spec.charts().len() {
        return Err(CalcError::ChartMismatch {
            form: w.charts().len(),
            manifold: spec.charts().len(),
        });
    }
    let compile = |f: &TBForm| -> Result<Vec<Tape>, CalcError> {
        spec.charts()
            .iter()
            .enumerate()
            .map(|(c, ch)| {
                Tape::compile(f.chart(c).data(), ch.coords())
                    .map_err(|e| GeometryError::from(e).into())
            })
            .collect()
    };
    let (tw, tt) = (compile(w)?, compile(th)?);
    let terms = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<f64, CalcError> {
            let node = grid.node(i)?;
            let fp = spec.framed_point(node.chart, &node.coords)?;
            let shape = |f: &TBForm, t: &[Tape]| -> Result<Tensor<f64>, CalcError> {
                let ch = f.chart(node.chart);
                let v = t[node.chart]
                    .eval(&node.coords)
                    .map_err(GeometryError::from)?;
                Ok(Tensor::from_data(ch.dim(), ch.has_upper(), ch.lower(), v))
            };
            let ip = pointwise_inner(&shape(w, &tw)?, &shape(th, &tt)?, &fp)?;
            Ok(node.weight * ip)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(terms.into_iter().sum())
}
