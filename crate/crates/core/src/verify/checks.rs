//! The per-manifold checks. Each reads a finished [`Sweep`] and, where it
//! needs more than the stored scalars, re-evaluates a seeded sample of nodes.

use rand::Rng;

use crate::connection::{riemann_apply, Tensor};
use crate::geometry::{build_grid, rotate_frame, unit_sphere_volume, Expected, QuadratureKind};
use crate::jcalc::pointwise::{energy_density, nijenhuis, StructureJet, VectorJet};
use crate::jcalc::{frame_components, values, LocalPoint, NodeScalars};
use crate::scalar::{invert, matmul};
use crate::verify::random::{orthogonal, random_form, random_jet, rng_for, unit_ball, unit_sphere};
use crate::verify::report::{CheckResult, Tolerances};
use crate::verify::sweep::{NodeRecord, Sweep, VECTORS_PER_NODE};

/// Nodes re-evaluated by the sampled checks.
pub const SAMPLE_NODES: usize = 10;
/// Random forms per manifold in the Weitzenböck and d² checks.
pub const RANDOM_FORMS: usize = 20;
/// Random conjugations in the energy bound.
pub const RANDOM_CONJUGATIONS: usize = 50;

pub struct Ctx<'a> {
    pub tol: Tolerances,
    pub expected: Option<&'a Expected>,
    pub seed: u64,
    /// Closed-form volume, when known.
    pub volume: Option<f64>,
}

fn base(sw: &Sweep, ctx: &Ctx, check: &str) -> CheckResult {
    CheckResult::new(sw.name(), check, sw.resolution(), ctx.seed)
}

fn sampling_note(sw: &Sweep) -> String {
    let extra = sw.records.iter().filter(|r| r.extra).count();
    format!(
        "certified by sampling: {} grid nodes and {} uniform extra draws",
        sw.records.len() - extra,
        extra
    )
}

fn max_abs(t: &Tensor<f64>) -> f64 {
    t.data().iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn point(sw: &Sweep, r: &NodeRecord) -> Option<LocalPoint> {
    sw.evaluator.point(r.chart, &r.coords).ok()
}

/// Closed-form volume for unperturbed round spheres and flat box tori.
pub fn reference_volume(sw: &Sweep) -> Option<f64> {
    let spec = &sw.spec;
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

pub fn volume(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "volume");
    let tol = ctx.tol.quadrature * 1e-2;
    r.tolerance = tol;
    let v = sw.volume();
    r.put("volume", v);
    let fine_res = 2 * sw.resolution();
    let fine = match build_grid(&sw.spec, fine_res).and_then(|g| g.total_weight()) {
        Ok(f) => f,
        Err(e) => return r.failed(&format!("fine grid: {e}")),
    };
    r.put("resolution_fine", fine_res as f64);
    r.put("volume_fine", fine);
    match ctx.volume {
        Some(exact) => {
            r.put("reference", exact);
            let rel = (v - exact).abs() / exact;
            let rel_fine = (fine - exact).abs() / exact;
            r.put("relative_error", rel);
            r.put("relative_error_fine", rel_fine);
            r.require(rel_fine <= tol);
        }
        None => {
            // no closed form: two neighbouring fine grids must agree
            let next_res = fine_res + 2;
            let next = match build_grid(&sw.spec, next_res).and_then(|g| g.total_weight()) {
                Ok(f) => f,
                Err(e) => return r.failed(&format!("fine grid: {e}")),
            };
            r.put("resolution_next", next_res as f64);
            r.put("volume_next", next);
            r.put("relative_gap_fine", (fine - next).abs() / next);
            r.put("relative_gap_coarse", (v - next).abs() / next);
            r.add_note("no closed form; fine grids compared with each other");
            r.require(v > 0.0 && (fine - next).abs() <= tol * next);
        }
    }
    r
}

pub fn bochner(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "bochner");
    r.tolerance = ctx.tol.identity;
    let res = sw.max(|s| s.bochner_residual.abs());
    r.put("max_residual", res);
    let ranges: [(&str, fn(&NodeScalars) -> f64); 7] = [
        ("t1", |s| s.t1),
        ("t2", |s| s.t2),
        ("scalar", |s| s.scalar),
        ("nabla_j_sq", |s| s.nabla_j_sq),
        ("integrand", |s| s.bochner_integrand()),
        ("energy", |s| s.energy),
        ("lap_energy", |s| s.lap_energy),
    ];
    for (name, f) in ranges {
        r.put(&format!("{name}_min"), sw.min(f));
        r.put(&format!("{name}_max"), sw.max(f));
    }
    r.put("i4", sw.integral(|s| s.bochner_integrand()));
    r.require(res <= ctx.tol.identity);
    r.add_note(&sampling_note(sw));
    r
}

pub fn selfadjoint(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "selfadjoint");
    let lhs = sw.integral(|s| s.lap_j_dot_j);
    let dd = sw.integral(|s| s.dj_sq);
    let dl = sw.integral(|s| s.delta_j_sq);
    let residual = (lhs - dd - dl).abs();
    let tol = ctx.tol.quadrature * lhs.abs().max(dd + dl).max(1.0);
    r.tolerance = tol;
    r.put("lap_j_j", lhs);
    r.put("dj_dj", dd);
    r.put("delta_j_delta_j", dl);
    r.put("residual", residual);
    r.put(
        "relative_residual",
        residual / lhs.abs().max(dd + dl).max(1.0),
    );
    r.require(residual <= tol && lhs >= -tol);
    r
}

pub fn weitzenbock(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "weitzenbock");
    r.tolerance = ctx.tol.identity;
    let sample = sw.sample("weitzenbock", SAMPLE_NODES);
    let mut rng = rng_for(ctx.seed, &format!("weitzenbock-forms/{}", sw.name()), 0);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    for k in 0..RANDOM_FORMS {
        let rec = sample[k % sample.len()];
        let Some(lp) = point(sw, rec) else { continue };
        let w = random_form(&mut rng, &rec.coords, true, 1);
        let lap = values(&lp.hodge_laplace(&w));
        let rough = values(&lp.rough_laplacian(&w));
        let curv = values(&lp.weitzenbock_term(&w));
        let res = lap.sub(&curv.sub(&rough));
        worst = worst.max(max_abs(&frame_components(&res, &lp.framed)));
        done += 1;
    }
    r.put("random_forms", done as f64);
    r.put("max_residual_random", worst);
    let own = sw.max(|s| s.weitzenbock_residual);
    r.put("max_residual_j", own);
    let sj = sw.max(|s| (s.s_dot_j - (s.t1 - s.t2)).abs());
    r.put("max_s_dot_j_vs_t1_minus_t2", sj);
    r.require(
        done == RANDOM_FORMS
            && worst <= ctx.tol.identity
            && own <= ctx.tol.identity
            && sj <= ctx.tol.identity,
    );
    r
}

pub fn d_squared(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "d_squared");
    r.tolerance = ctx.tol.tight;
    let n = sw.dim();
    let sample = sw.sample("d_squared", SAMPLE_NODES);
    let mut rng = rng_for(ctx.seed, &format!("d-squared-forms/{}", sw.name()), 0);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let basis = |i: usize| -> Vec<f64> { (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    for k in 0..RANDOM_FORMS {
        let rec = sample[k % sample.len()];
        let Some(lp) = point(sw, rec) else { continue };
        let a = random_form(&mut rng, &rec.coords, true, 1);
        let dda = values(&lp.exterior_d(&lp.exterior_d(&a)));
        let av = values(&a);
        let apply = |v: usize| -> Vec<f64> { (0..n).map(|c| *av.get(c, &[v])).collect() };
        let rm =
            |x: usize, y: usize, z: &[f64]| riemann_apply(&lp.riemann, n, &basis(x), &basis(y), z);
        let mut res = Tensor::<f64>::zeros(n, true, 3);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let t1 = rm(l, j, &apply(i));
                    let t2 = rm(i, l, &apply(j));
                    let t3 = rm(j, i, &apply(l));
                    for c in 0..n {
                        *res.get_mut(c, &[i, j, l]) =
                            dda.get(c, &[i, j, l]) - (t1[c] + t2[c] + t3[c]);
                    }
                }
            }
        }
        worst = worst.max(max_abs(&frame_components(&res, &lp.framed)));
        done += 1;
    }
    r.put("random_forms", done as f64);
    r.put("max_residual", worst);
    r.require(done == RANDOM_FORMS && worst <= ctx.tol.tight);
    r
}

fn random_vector(rng: &mut impl Rng, lp: &LocalPoint) -> Vec<f64> {
    lp.framed.from_frame(&unit_ball(rng, lp.dim()))
}

fn norm(lp: &LocalPoint, v: &[f64]) -> f64 {
    lp.framed.inner(v, v).max(0.0).sqrt()
}

pub fn nijenhuis_check(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "nijenhuis");
    r.tolerance = ctx.tol.tight;
    let n = sw.dim();
    let sample = sw.sample("nijenhuis", SAMPLE_NODES);
    let mut rng = rng_for(ctx.seed, &format!("nijenhuis/{}", sw.name()), 0);
    let (mut prop, mut tens, mut anti): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut pairs = 0;
    for rec in &sample {
        let Some(lp) = point(sw, rec) else { continue };
        let sj: StructureJet = lp.structure_jet();
        let gamma = &lp.framed.christoffel;
        let dj = values(&lp.exterior_d(&lp.j));
        for _ in 0..10 {
            let x = random_vector(&mut rng, &lp);
            let y = random_vector(&mut rng, &lp);
            let (xj, yj) = (VectorJet::constant(&x), VectorJet::constant(&y));
            let nxy = nijenhuis(&sj, gamma, &xj, &yj);
            let jx = sj.apply_value(&x);
            let jy = sj.apply_value(&y);
            let lhs1 = lp.eval_form(&dj, &[&x, &y]);
            let lhs2 = lp.eval_form(&dj, &[&jx, &jy]);
            let jn = sj.apply_value(&nxy);
            let diff: Vec<f64> = (0..n).map(|c| lhs1[c] - lhs2[c] + jn[c]).collect();
            prop = prop.max(norm(&lp, &diff));
            let f = random_jet(&mut rng, &rec.coords);
            let grad: Vec<f64> = (0..n).map(|a| f.grad(a)).collect();
            let nf = nijenhuis(&sj, gamma, &xj.scaled(f.value(), &grad), &yj);
            let diff: Vec<f64> = (0..n).map(|c| nf[c] - f.value() * nxy[c]).collect();
            tens = tens.max(norm(&lp, &diff));
            let nyx = nijenhuis(&sj, gamma, &yj, &xj);
            let diff: Vec<f64> = (0..n).map(|c| nxy[c] + nyx[c]).collect();
            anti = anti.max(norm(&lp, &diff));
            pairs += 1;
        }
    }
    r.put("pairs", pairs as f64);
    r.put("max_prop_residual", prop);
    r.put("max_tensoriality_residual", tens);
    r.put("max_antisymmetry_residual", anti);
    let witness = sw.argmax(|s| s.nijenhuis_sq);
    r.put("max_nijenhuis", witness.s.nijenhuis_sq.max(0.0).sqrt());
    r.put("witness_chart", witness.chart as f64);
    for (a, u) in witness.coords.iter().enumerate() {
        r.put(&format!("witness_u{}", a + 1), *u);
    }
    if let Some(lp) = point(sw, witness) {
        let t = lp.nijenhuis_table();
        let e12: f64 = (0..n).map(|c| t[n + c].powi(2)).sum::<f64>().sqrt();
        r.put("witness_norm_e1_e2", e12);
    }
    r.require(
        pairs == 10 * sample.len()
            && prop <= ctx.tol.tight
            && tens <= ctx.tol.tight
            && anti <= ctx.tol.tight,
    );
    r
}

pub fn integral_criteria(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "integral_criteria");
    let vol = sw.volume();
    let zero = ctx.tol.flag * vol.max(1.0);
    let i4 = sw.integral(|s| s.bochner_integrand());
    let energy = sw.integral(|s| s.dj_sq + s.delta_j_sq);
    let tol = ctx.tol.quadrature * i4.abs().max(energy).max(1.0);
    r.tolerance = tol;
    r.put("i4", i4);
    r.put("dj_dj_plus_delta_j_delta_j", energy);
    r.put("integrated_lap_energy", sw.integral(|s| s.lap_energy));
    r.require((i4 - energy).abs() <= tol);
    let certificate = i4 <= zero;
    r.flag("harmonic_certificate", certificate);
    let max_n = sw.max(|s| s.nijenhuis_sq).max(0.0).sqrt();
    r.put("max_nijenhuis", max_n);
    if certificate {
        r.add_note("harmonic certificate: integrand integrates to zero");
        r.require(max_n <= ctx.tol.flag);
    } else {
        r.add_note("obstruction: integral positive, J not harmonic");
    }
    if sw.compatible() {
        let i5 = sw.integral(|s| s.hermitian_integrand());
        let dj = sw.integral(|s| s.dj_sq);
        r.put("i5", i5);
        r.put("dj_dj", dj);
        r.require((i5 - i4).abs() <= tol);
        // dJ = 0 exactly when the Hermitian integral vanishes
        r.require((i5 <= zero) == (dj <= zero));
    } else {
        r.add_note("i5 skipped: J not compatible");
    }
    r
}

pub fn hermitian_identities(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let r = base(sw, ctx, "hermitian_identities");
    if !sw.compatible() {
        return r.not_applicable("J is not compatible with the metric");
    }
    let mut r = r;
    r.tolerance = ctx.tol.tight;
    let m = |f: fn(&crate::verify::sweep::HermitianResiduals) -> f64| {
        sw.records
            .iter()
            .filter_map(|x| x.herm.as_ref())
            .map(f)
            .fold(0.0, f64::max)
    };
    let vals = [
        ("max_first", m(|h| h.first)),
        ("max_second", m(|h| h.second)),
        ("max_nijenhuis_trace", m(|h| h.nijenhuis_trace)),
        ("max_lemma", m(|h| h.lemma)),
        ("max_t1_minus_s", m(|h| h.t1_minus_s)),
    ];
    for (name, v) in vals {
        r.put(name, v);
        r.require(v <= ctx.tol.tight);
    }
    r.put("vectors_per_node", VECTORS_PER_NODE as f64);
    r.add_note(&sampling_note(sw));
    r
}

pub fn inequalities(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "inequalities");
    r.tolerance = ctx.tol.tight;
    let n = sw.dim() as f64;
    let half = n / 2.0;

    let dj_slack =
        sw.min(|s| (2.0 * (s.nabla_j_sq - s.delta_j_sq / n) - s.dj_sq) / s.nabla_j_sq.max(1.0));
    r.put("dj_bound_min_slack", dj_slack);
    r.require(dj_slack >= -ctx.tol.tight);

    let e_slack = sw.min(|s| s.energy - half);
    r.put("energy_min_slack", e_slack);
    r.require(e_slack >= -ctx.tol.energy);
    let conj = conjugated_energy(sw, ctx);
    r.put("conjugated_structures", conj.1 as f64);
    r.put("conjugated_energy_min_slack", conj.0);
    r.require(conj.1 == RANDOM_CONJUGATIONS && conj.0 >= -ctx.tol.energy);

    let compatible = sw.compatible();
    let balanced = compatible && sw.max(|s| s.delta_j_sq).max(0.0).sqrt() <= ctx.tol.flag;
    r.flag("balanced_bound_applicable", balanced);
    if balanced {
        let slack = sw.min(|s| (s.nabla_j_sq - (s.scalar - s.t2).abs()) / s.nabla_j_sq.max(1.0));
        r.put("balanced_bound_min_slack", slack);
        r.require(slack >= -ctx.tol.tight);
    }

    let a = sw.integral(|s| s.t1 - s.t2);
    let g = sw.integral(|s| s.nabla_j_sq);
    let qtol = ctx.tol.quadrature * a.abs().max(g).max(1.0);
    r.put("integral_t1_minus_t2", a);
    r.put("integral_nabla_j_sq", g);
    r.put("integral_lower_slack", a + g);
    r.put("integral_upper_slack", (n - 1.0) * g - a);
    r.require(a + g >= -qtol && (n - 1.0) * g - a >= -qtol);

    let e_spread = sw.max(|s| s.energy) - sw.min(|s| s.energy);
    let harmonic = sw.max(|s| s.lap_j_sq).max(0.0).sqrt() <= ctx.tol.flag;
    let applicable = compatible && harmonic && e_spread <= ctx.tol.flag;
    r.flag("kahler_criterion_applicable", applicable);
    if applicable {
        let slack = sw.min(|s| s.t2 - s.scalar);
        r.put("kahler_criterion_min_slack", slack);
        r.require(slack >= -ctx.tol.tight);
        let kahler = sw.max(|s| s.nabla_j_sq).max(0.0).sqrt() <= ctx.tol.flag;
        r.flag("kahler_equality_case", kahler);
        if kahler {
            let eq = sw.max(|s| (s.scalar - s.t2).abs());
            r.put("kahler_equality_residual", eq);
            r.require(eq <= ctx.tol.tight);
        }
    }
    r
}

/// Minimum of `e(AJA⁻¹) − dim/2` over random conjugations at sampled nodes.
fn conjugated_energy(sw: &Sweep, ctx: &Ctx) -> (f64, usize) {
    let n = sw.dim();
    let sample = sw.sample("conjugated", SAMPLE_NODES);
    let mut rng = rng_for(ctx.seed, &format!("conjugated/{}", sw.name()), 0);
    let mut worst = f64::INFINITY;
    let mut done = 0;
    for k in 0..RANDOM_CONJUGATIONS {
        let rec = sample[k % sample.len()];
        let Some(lp) = point(sw, rec) else { continue };
        let j = lp.j_values();
        let eps = rng.gen_range(0.05..0.5);
        let a = loop {
            let b = unit_ball(&mut rng, n * n);
            let a: Vec<f64> = (0..n * n)
                .map(|i| if i / n == i % n { 1.0 } else { 0.0 } + eps * b[i])
                .collect();
            let ai = invert(&a, n);
            if ai.iter().all(|x| x.is_finite() && x.abs() < 1e3) {
                break a;
            }
        };
        let jc = matmul(&matmul(&a, &j, n), &invert(&a, n), n);
        worst = worst.min(energy_density(&jc, &lp.framed) - n as f64 / 2.0);
        done += 1;
    }
    (worst, done)
}

pub fn classify(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "classify");
    r.tolerance = ctx.tol.flag;
    let compatible = sw.compatible();
    let max_nabla = sw.max(|s| s.nabla_j_sq).max(0.0).sqrt();
    let energy = sw.integral(|s| s.dj_sq + s.delta_j_sq);
    let max_n = sw.max(|s| s.nijenhuis_sq).max(0.0).sqrt();
    let kahler = compatible && max_nabla <= ctx.tol.flag;
    let harmonic = energy <= ctx.tol.flag * sw.volume().max(1.0);
    let integrable = max_n <= ctx.tol.flag;
    r.flag("compatible", compatible);
    r.flag("kahler", kahler);
    r.flag("harmonic", harmonic);
    r.flag("integrable", integrable);
    r.put("max_nabla_j", max_nabla);
    r.put("harmonic_energy", energy);
    r.put("max_nijenhuis", max_n);
    let chain = (!kahler || harmonic) && (!harmonic || integrable);
    r.flag("implication_chain", chain);
    r.require(chain);
    if let Some(e) = ctx.expected {
        let mut mismatch = Vec::new();
        if e.compatible != compatible {
            mismatch.push("compatible");
        }
        for (name, want, got) in [
            ("kahler", e.kahler, kahler),
            ("harmonic", e.harmonic, harmonic),
            ("integrable", e.integrable, integrable),
        ] {
            if want.is_some_and(|w| w != got) {
                mismatch.push(name);
            }
        }
        if !mismatch.is_empty() {
            r = r.failed(&format!(
                "classification differs from expectation: {}",
                mismatch.join(", ")
            ));
        }
    }
    let labels: Vec<&str> = [
        (kahler, "kahler"),
        (harmonic, "harmonic"),
        (integrable, "integrable"),
    ]
    .iter()
    .filter(|(f, _)| *f)
    .map(|(_, l)| *l)
    .collect();
    r.add_note(&format!("flags: {{{}}}", labels.join(", ")));
    r
}

fn relative_gap(a: &NodeScalars, b: &NodeScalars) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries().iter())
        .map(|((_, x), (_, y))| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn invariance(sw: &Sweep, ctx: &Ctx) -> CheckResult {
    let mut r = base(sw, ctx, "invariance");
    r.tolerance = ctx.tol.frame;
    let n = sw.dim();
    let mut rng = rng_for(ctx.seed, &format!("invariance/{}", sw.name()), 0);
    let mut frame_gap: f64 = 0.0;
    for rec in sw.sample("invariance", SAMPLE_NODES) {
        let Some(lp) = point(sw, rec) else { continue };
        let dv = lp.derived();
        let s0 = lp.scalars_from(&dv);
        let q = orthogonal(&mut rng, n);
        let rotated = lp.with_frame(rotate_frame(&lp.framed.frame, &q, n));
        frame_gap = frame_gap.max(relative_gap(&s0, &rotated.scalars_from(&dv)));
    }
    r.put("max_frame_gap", frame_gap);
    r.require(frame_gap <= ctx.tol.frame);

    let charts = sw.spec.charts().len();
    if charts < 2 || sw.spec.quadrature() != QuadratureKind::Sphere {
        r.add_note("single chart: overlap comparison not applicable");
        return r;
    }
    let mut chart_gap: f64 = 0.0;
    let mut pairs = 0;
    let mut tries = 0;
    while pairs < SAMPLE_NODES && tries < 100 * SAMPLE_NODES {
        tries += 1;
        let x = unit_sphere(&mut rng, n + 1);
        if x[n].abs() > 0.5 {
            continue;
        }
        let found: Vec<NodeScalars> = (0..charts)
            .filter_map(|c| {
                let u = sw.grid.chart_coords(c, &x)?;
                Some(sw.evaluator.point(c, &u).ok()?.scalars())
            })
            .collect();
        if found.len() < 2 {
            continue;
        }
        for other in &found[1..] {
            chart_gap = chart_gap.max(relative_gap(&found[0], other));
        }
        pairs += 1;
    }
    r.put("overlap_points", pairs as f64);
    r.put("max_chart_gap", chart_gap);
    r.require(pairs > 0 && chart_gap <= ctx.tol.frame);
    r
}
