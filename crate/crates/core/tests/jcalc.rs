//! Operators on tangent-bundle-valued forms against hand computations on
//! flat tori, the Kähler sphere and the nearly Kähler six-sphere.

use rand::Rng;

use bochner_lab::connection::Tensor;
use bochner_lab::expr::{parse, Expr};
use bochner_lab::geometry::{build_grid, rotate_frame, zoo, ManifoldSpec, Perturbation};
use bochner_lab::jcalc::pointwise::full_norm_sq;
use bochner_lab::jcalc::{
    conjugate_acs, energy_density, nijenhuis, pointwise_inner, values, Evaluator, FormCalculus,
    LocalPoint, TBForm, VectorJet,
};
use bochner_lab::jet::Jet;
use bochner_lab::scalar::Scalar;
use bochner_lab::verify::random::{orthogonal, random_form, random_jet, rng_for, unit_ball};

fn spec(name: &str) -> ManifoldSpec {
    zoo::lookup(name).expect("zoo member").spec
}

fn ex(s: &str) -> Expr {
    parse(s).unwrap()
}

fn points(name: &str, count: usize, label: &str) -> Vec<LocalPoint> {
    let s = spec(name);
    let ev = Evaluator::new(&s).unwrap();
    let mut rng = rng_for(13, label, 0);
    (0..count)
        .map(|k| {
            let chart = k % s.charts().len();
            let p: Vec<f64> = s.charts()[chart]
                .usable_box()
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            ev.point(chart, &p).unwrap()
        })
        .collect()
}

fn max_abs(t: &Tensor<f64>) -> f64 {
    t.data().iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
        .collect()
}

fn frame_vector(pt: &LocalPoint, i: usize) -> Vec<f64> {
    let n = pt.dim();
    (0..n).map(|r| pt.framed.frame[r * n + i]).collect()
}

#[test]
fn constant_structures_on_flat_tori_are_harmonic() {
    for name in ["flat_torus_2", "flat_torus_2_skew", "flat_torus_4"] {
        for pt in points(name, 3, "flat") {
            let f = pt.fields(&pt.j);
            assert_eq!(max_abs(&values(&f.d)), 0.0);
            assert_eq!(max_abs(&values(f.delta.as_ref().unwrap())), 0.0);
            assert_eq!(max_abs(&values(&pt.hodge_laplace(&pt.j))), 0.0);
            assert_eq!(max_abs(&values(&pt.rough_laplacian(&pt.j))), 0.0);
            assert_eq!(max_abs(&values(&pt.weitzenbock_term(&pt.j))), 0.0);
            assert!(pt.nijenhuis_table().iter().all(|x| *x == 0.0));
        }
    }
}

#[test]
fn constant_vector_field_on_flat_torus_is_closed() {
    let pt = &points("flat_torus_4", 1, "closed")[0];
    let v = Tensor::from_data(4, true, 0, vec![Jet::constant(0.7); 4]);
    assert_eq!(max_abs(&values(&pt.exterior_d(&v))), 0.0);
}

#[test]
fn kahler_sphere_structure_is_harmonic_and_integrable() {
    for pt in points("round_sphere_2", 50, "kahler") {
        let f = pt.fields(&pt.j);
        assert!(max_abs(&values(&f.d)) < 1e-9);
        assert!(max_abs(&values(f.delta.as_ref().unwrap())) < 1e-9);
        assert!(max_abs(&values(&pt.hodge_laplace(&pt.j))) < 1e-7);
        let n = pt.nijenhuis_table();
        assert!(n.iter().all(|x| x.abs() < 1e-8));
    }
}

#[test]
fn codifferential_of_a_scaled_standard_structure() {
    // A = f(u) J₀ with J₀ ∂_u = ∂_v, so δA = −f'(u) ∂_v.
    let s = spec("flat_torus_2");
    let fc = FormCalculus::new(&s).unwrap();
    let u = &s.charts()[0].coords()[0];
    let f = format!("sin({u}) + 0.3*{u}^2");
    let df = |u: f64| u.cos() + 0.6 * u;
    let a = TBForm::vector_valued(
        2,
        1,
        vec![vec![ex("0"), ex(&format!("-({f})")), ex(&f), ex("0")]],
    )
    .unwrap();
    let delta = fc.codifferential(&a).unwrap();
    assert_eq!((delta.degree(), delta.is_vector_valued()), (0, true));
    let ev = Evaluator::new(&s).unwrap();
    for p in [[0.4, 1.0], [2.0, 5.5], [4.7, 0.1]] {
        let sym = fc.eval(&delta, 0, &p).unwrap();
        assert!(sym.data()[0].abs() < 1e-12);
        assert!((sym.data()[1] + df(p[0])).abs() < 1e-12);
        let pt = ev.point(0, &p).unwrap();
        let t = ev.tensor(0, &p, true, 1, a.chart(0).data()).unwrap();
        let jet = values(&pt.codifferential(&t));
        assert!((jet.data()[1] + df(p[0])).abs() < 1e-12);
    }
}

#[test]
fn flat_laplacians_of_a_sine_modulated_form() {
    // A = sin(u) B: ΔA = −Σ∂²A = sin(u) B and ∇²A = −sin(u) B.
    for d in [2usize, 4] {
        let name = format!("flat_torus_{d}");
        let s = spec(&name);
        let fc = FormCalculus::new(&s).unwrap();
        let b: Vec<f64> = (0..d * d).map(|k| ((k * 7 + 3) % 5) as f64 - 2.0).collect();
        let u = &s.charts()[0].coords()[0];
        let comps: Vec<Expr> = b.iter().map(|c| ex(&format!("{c}*sin({u})"))).collect();
        let a = TBForm::vector_valued(d, 1, vec![comps]).unwrap();
        let lap = fc.hodge_laplace(&a).unwrap();
        let rough = fc.rough_laplacian(&a).unwrap();
        let ev = Evaluator::new(&s).unwrap();
        for k in 0..4 {
            let p: Vec<f64> = (0..d)
                .map(|i| 0.3 + 1.1 * k as f64 + 0.5 * i as f64)
                .collect();
            let su = p[0].sin();
            let l = fc.eval(&lap, 0, &p).unwrap();
            let r = fc.eval(&rough, 0, &p).unwrap();
            let pt = ev.point(0, &p).unwrap();
            let t = ev.tensor(0, &p, true, 1, a.chart(0).data()).unwrap();
            let lj = values(&pt.hodge_laplace(&t));
            for (i, bi) in b.iter().enumerate() {
                assert!((l.data()[i] - su * bi).abs() < 1e-12, "{name}");
                assert!((r.data()[i] + su * bi).abs() < 1e-12, "{name}");
                assert!((lj.data()[i] - su * bi).abs() < 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn rough_laplacian_of_a_function_on_flat_torus_is_the_trace_hessian() {
    let mut rng = rng_for(2, "trace-hessian", 0);
    for pt in points("flat_torus_4", 3, "trace-hessian") {
        let f = random_jet(&mut rng, &pt.framed.coords);
        let want: f64 = (0..4).map(|a| f.hess(a, a)).sum();
        assert!((pt.trace_hessian(&f) - want).abs() < 1e-12);
    }
}

/// `ω(X,Y) − ω(Y,X)` for two-forms; other degrees pass through.
fn antisymmetric(w: Tensor<Jet>) -> Tensor<Jet> {
    if w.lower() != 2 {
        return w;
    }
    let n = w.dim();
    let mut out = w.clone();
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                *out.get_mut(c, &[a, b]) = w.get(c, &[a, b]).sub(w.get(c, &[b, a]));
            }
        }
    }
    out
}

#[test]
fn weitzenbock_decomposition_for_random_forms() {
    let mut rng = rng_for(17, "weitzenbock", 0);
    for (name, count) in [
        ("round_sphere_2", 10),
        ("warped_torus_2", 4),
        ("s6_octonionic", 2),
    ] {
        for pt in points(name, count, "weitzenbock") {
            for degree in 1..=2 {
                let w = antisymmetric(random_form(&mut rng, &pt.framed.coords, true, degree));
                let lap = values(&pt.hodge_laplace(&w));
                let rhs = values(&pt.weitzenbock_term(&w)).sub(&values(&pt.rough_laplacian(&w)));
                let scale = 1.0 + max_abs(&lap);
                assert!(
                    max_abs(&lap.sub(&rhs)) < 1e-6 * scale,
                    "{name} degree {degree}"
                );
            }
        }
    }
    for pt in points("flat_torus_4", 2, "flat-weitzenbock") {
        let w = antisymmetric(random_form(&mut rng, &pt.framed.coords, true, 2));
        assert_eq!(max_abs(&values(&pt.weitzenbock_term(&w))), 0.0);
    }
}

#[test]
fn nearly_kahler_six_sphere_quantities() {
    for pt in points("s6_octonionic", 50, "s6-delta") {
        let delta = values(&pt.codifferential(&pt.j));
        assert!(full_norm_sq(&delta, &pt.framed).sqrt() < 1e-7);
    }
    for pt in points("s6_octonionic", 6, "s6-norms") {
        let fp = &pt.framed;
        let j = values(&pt.j);
        let f = pt.fields(&pt.j);
        let dj = values(&f.d);
        let nabla_sq = full_norm_sq(&values(&f.nabla), fp);
        let dj_sq = pointwise_inner(&dj, &dj, fp).unwrap();
        assert!((nabla_sq - 24.0).abs() < 1e-8);
        assert!((dj_sq - 2.0 * nabla_sq).abs() < 1e-8);
        let s_j = pointwise_inner(&values(&pt.weitzenbock_term(&pt.j)), &j, fp).unwrap();
        assert!((s_j - 24.0).abs() < 1e-8, "⟨S,J⟩ = {s_j}");
        let t = pt.curvature_traces();
        assert!((t.t1 - 30.0).abs() < 1e-8 && (t.t2 - 6.0).abs() < 1e-8);
        assert!((energy_density(&pt.j_values(), fp) - 3.0).abs() < 1e-10);
        let table = pt.nijenhuis_table();
        let n12: f64 = (0..6).map(|c| table[6 + c].powi(2)).sum::<f64>().sqrt();
        assert!(n12 > 0.1, "|N(e1,e2)| = {n12}");
    }
}

#[test]
fn inner_product_of_structure_with_itself_is_twice_the_energy() {
    for (name, want) in [
        ("flat_torus_2", Some(1.0)),
        ("flat_torus_4", Some(2.0)),
        ("flat_torus_2_skew", Some(3.5)),
        ("round_sphere_2", Some(1.0)),
        ("round_sphere_2_conj", None),
        ("flat_torus_4_conj", None),
    ] {
        for pt in points(name, 4, "energy") {
            let fp = &pt.framed;
            let j = values(&pt.j);
            let e = energy_density(&pt.j_values(), fp);
            assert!(
                (pointwise_inner(&j, &j, fp).unwrap() - 2.0 * e).abs() < 1e-10,
                "{name}"
            );
            match want {
                Some(w) => assert!((e - w).abs() < 1e-10, "{name}: {e}"),
                None => assert!(e >= (pt.dim() / 2) as f64 - 1e-12, "{name}: {e}"),
            }
        }
    }
}

#[test]
fn scalars_do_not_depend_on_the_frame() {
    let mut rng = rng_for(21, "frame-rotation", 0);
    for name in ["round_sphere_2_conj", "flat_torus_4_conj", "s6_octonionic"] {
        for pt in points(name, 2, "frame-rotation") {
            let n = pt.dim();
            let q = orthogonal(&mut rng, n);
            let rotated = pt.with_frame(rotate_frame(&pt.framed.frame, &q, n));
            let (a, b) = (pt.scalars(), rotated.scalars());
            for ((key, x), (_, y)) in a.entries().iter().zip(b.entries().iter()) {
                assert!(
                    (x - y).abs() < 1e-9 * (1.0 + x.abs()),
                    "{name} {key}: {x} vs {y}"
                );
            }
        }
    }
}

#[test]
fn exterior_derivative_and_nijenhuis_identity() {
    // dJ(X,Y) − dJ(JX,JY) = −J N(J)(X,Y)
    let names = [
        "s6_octonionic",
        "s6_perturbed",
        "flat_torus_4_conj",
        "flat_torus_2_conj",
        "round_sphere_2_conj",
        "warped_torus_2",
    ];
    let mut rng = rng_for(31, "identity", 0);
    let mut count = 0;
    for name in names {
        let pts = points(name, 17, "identity");
        for pt in &pts {
            let n = pt.dim();
            let sj = pt.structure_jet();
            let dj = values(&pt.exterior_d(&pt.j));
            let x = unit_ball(&mut rng, n);
            let y = unit_ball(&mut rng, n);
            let jx = sj.apply_value(&x);
            let jy = sj.apply_value(&y);
            let lhs: Vec<f64> = pt
                .eval_form(&dj, &[&x, &y])
                .iter()
                .zip(pt.eval_form(&dj, &[&jx, &jy]))
                .map(|(a, b)| a - b)
                .collect();
            let nxy = nijenhuis(
                &sj,
                &pt.framed.christoffel,
                &VectorJet::constant(&x),
                &VectorJet::constant(&y),
            );
            let rhs = matvec(&sj.j, &nxy);
            for k in 0..n {
                assert!(
                    (lhs[k] + rhs[k]).abs() < 1e-7,
                    "{name}: {} vs {}",
                    lhs[k],
                    -rhs[k]
                );
            }
            count += 1;
        }
    }
    assert!(count >= 100);
}

#[test]
fn nijenhuis_is_antisymmetric_and_tensorial() {
    let mut rng = rng_for(37, "tensorial", 0);
    for name in ["s6_octonionic", "flat_torus_4_conj"] {
        for pt in points(name, 3, "tensorial") {
            let n = pt.dim();
            let sj = pt.structure_jet();
            let gam = &pt.framed.christoffel;
            let x = VectorJet::constant(&unit_ball(&mut rng, n));
            let y = VectorJet::constant(&unit_ball(&mut rng, n));
            let base = nijenhuis(&sj, gam, &x, &y);
            let swapped = nijenhuis(&sj, gam, &y, &x);
            let f = random_jet(&mut rng, &pt.framed.coords);
            let df: Vec<f64> = (0..n).map(|a| f.grad(a)).collect();
            let scaled = nijenhuis(&sj, gam, &x.scaled(f.value(), &df), &y);
            for k in 0..n {
                assert!((base[k] + swapped[k]).abs() < 1e-10, "{name}");
                assert!((scaled[k] - f.value() * base[k]).abs() < 1e-9, "{name}");
            }
        }
    }
}

#[test]
fn hermitian_form_codifferential_matches_that_of_the_structure() {
    // δω(X) + ⟨δJ, X⟩ = 0
    let mut rng = rng_for(41, "hermitian", 0);
    for name in [
        "s6_octonionic",
        "round_sphere_2",
        "warped_torus_2",
        "flat_torus_2",
    ] {
        for pt in points(name, 5, "hermitian") {
            let n = pt.dim();
            let dw = values(&pt.codifferential(&pt.hermitian_form()));
            let dj = values(&pt.codifferential(&pt.j));
            let x = unit_ball(&mut rng, n);
            let lhs: f64 = (0..n).map(|a| dw.data()[a] * x[a]).sum();
            assert!(
                (lhs + pt.framed.inner(dj.data(), &x)).abs() < 1e-8,
                "{name}"
            );
            if name == "flat_torus_2" {
                assert_eq!(max_abs(&dw), 0.0);
            }
        }
    }
}

#[test]
fn symbolic_hermitian_form() {
    let fc = FormCalculus::new(&spec("round_sphere_2")).unwrap();
    let j = fc.structure().unwrap();
    let (omega, _) = fc.hermitian_form(&j).unwrap();
    let d_omega = fc.exterior_d(&omega).unwrap();
    for c in 0..2 {
        assert!(fc
            .eval(&d_omega, c, &[0.3, -0.2])
            .unwrap()
            .data()
            .iter()
            .all(|x| x.abs() < 1e-12));
    }
    let flat = FormCalculus::new(&spec("flat_torus_2")).unwrap();
    let (_, delta) = flat.hermitian_form(&flat.structure().unwrap()).unwrap();
    assert_eq!(max_abs(&flat.eval(&delta, 0, &[1.0, 2.0]).unwrap()), 0.0);
    let skew = FormCalculus::new(&spec("flat_torus_2_skew")).unwrap();
    assert!(skew.hermitian_form(&skew.structure().unwrap()).is_err());
}

fn random_chart_perturbation(rng: &mut impl Rng, spec: &ManifoldSpec) -> Perturbation {
    let d = spec.dim();
    let (u, v) = (&spec.charts()[0].coords()[0], &spec.charts()[0].coords()[1]);
    let entries = (0..d * d)
        .map(|_| {
            let (a, b, c): (f64, f64, f64) = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            ex(&format!("{a}*sin({u}) + {b}*cos({v}) + {c}"))
        })
        .collect();
    Perturbation::Chart(vec![entries])
}

fn random_ambient_perturbation(rng: &mut impl Rng, ambient: usize) -> Perturbation {
    let entries = (0..ambient * ambient)
        .map(|_| {
            let terms: Vec<String> = (1..=ambient)
                .map(|k| format!("{}*x{k}", rng.gen_range(-1.0..1.0)))
                .collect();
            ex(&format!(
                "{} + {}",
                terms.join(" + "),
                rng.gen_range(-1.0..1.0)
            ))
        })
        .collect();
    Perturbation::Ambient(entries)
}

#[test]
fn conjugation_by_identity_is_a_no_op() {
    let mut rng = rng_for(43, "identity-conjugation", 0);
    for (name, pert) in [
        (
            "flat_torus_2",
            random_chart_perturbation(&mut rng, &spec("flat_torus_2")),
        ),
        ("round_sphere_2", random_ambient_perturbation(&mut rng, 3)),
    ] {
        let base = spec(name);
        let grid = build_grid(&base, 8).unwrap();
        let conj = conjugate_acs(&base, "eps0", pert, 0.0, &grid).unwrap();
        let (e0, e1) = (
            Evaluator::new(&base).unwrap(),
            Evaluator::new(&conj).unwrap(),
        );
        for node in grid.nodes() {
            let node = node.unwrap();
            let a = e0.point(node.chart, &node.coords).unwrap().j_values();
            let b = e1.point(node.chart, &node.coords).unwrap().j_values();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-14, "{name}");
            }
        }
    }
}

#[test]
fn conjugated_structures_square_to_minus_identity_and_have_excess_energy() {
    let mut rng = rng_for(47, "random-conjugation", 0);
    for trial in 0..3 {
        for (name, pert) in [
            (
                "flat_torus_2",
                random_chart_perturbation(&mut rng, &spec("flat_torus_2")),
            ),
            ("round_sphere_2", random_ambient_perturbation(&mut rng, 3)),
        ] {
            let base = spec(name);
            let grid = build_grid(&base, 12).unwrap();
            let conj = conjugate_acs(&base, "random", pert, 0.1, &grid).unwrap();
            let ev = Evaluator::new(&conj).unwrap();
            let m = (base.dim() / 2) as f64;
            for node in grid.nodes() {
                let node = node.unwrap();
                let pt = ev.point(node.chart, &node.coords).unwrap();
                let j = pt.j_values();
                let n = pt.dim();
                for r in 0..n {
                    for c in 0..n {
                        let sq: f64 = (0..n).map(|k| j[r * n + k] * j[k * n + c]).sum();
                        let want = if r == c { -1.0 } else { 0.0 };
                        assert!((sq - want).abs() < 1e-9, "{name} trial {trial}");
                    }
                }
                let e = energy_density(&j, &pt.framed);
                assert!(e >= m - 1e-12, "{name} trial {trial}: e = {e}");
            }
        }
    }
}

#[test]
fn sphere_frame_vectors_are_unit() {
    for pt in points("round_sphere_2", 3, "unit-frame") {
        for i in 0..2 {
            let e = frame_vector(&pt, i);
            assert!((pt.framed.inner(&e, &e) - 1.0).abs() < 1e-12);
        }
    }
}
