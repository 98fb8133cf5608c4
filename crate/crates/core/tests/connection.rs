//! Christoffel symbols, covariant derivatives and curvature checked against
//! finite differences, the generic metric formula and closed forms on spheres.

use rand::Rng;

use bochner_lab::connection::{christoffel_conformal, riemann_apply, scalar_curvature, Connection};
use bochner_lab::expr::Tape;
use bochner_lab::geometry::{zoo, FramedPoint, ManifoldSpec, MetricField};
use bochner_lab::jcalc::{values, Evaluator, LocalPoint};
use bochner_lab::jet::Jet;
use bochner_lab::scalar::{invert, ExprCalculus, JetCalculus};
use bochner_lab::verify::random::{rng_for, unit_ball};

fn spec(name: &str) -> ManifoldSpec {
    zoo::lookup(name).expect("zoo member").spec
}

/// A random point in the usable box of `chart`.
fn sample(spec: &ManifoldSpec, chart: usize, rng: &mut impl Rng) -> Vec<f64> {
    spec.charts()[chart]
        .usable_box()
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect()
}

fn points(name: &str, count: usize, label: &str) -> Vec<LocalPoint> {
    let s = spec(name);
    let ev = Evaluator::new(&s).unwrap();
    let mut rng = rng_for(7, label, 0);
    (0..count)
        .map(|k| {
            let chart = k % s.charts().len();
            let p = sample(&s, chart, &mut rng);
            ev.point(chart, &p).unwrap()
        })
        .collect()
}

fn frame_vector(fp: &FramedPoint, i: usize) -> Vec<f64> {
    let n = fp.dim();
    (0..n).map(|r| fp.frame[r * n + i]).collect()
}

/// `⟨R(X,Y)Z, W⟩` for coordinate vectors.
fn r4(pt: &LocalPoint, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
    let n = pt.dim();
    pt.framed.inner(&riemann_apply(&pt.riemann, n, x, y, z), w)
}

#[test]
fn flat_tori_have_no_christoffels_or_curvature() {
    for name in ["flat_torus_2", "flat_torus_4", "flat_torus_2_skew"] {
        for pt in points(name, 5, name) {
            assert!(pt.framed.christoffel.iter().all(|g| *g == 0.0), "{name}");
            assert!(pt.riemann.iter().all(|r| *r == 0.0), "{name}");
            let n = pt.dim();
            assert_eq!(
                scalar_curvature(&pt.riemann, &pt.framed.inverse_metric, n),
                0.0
            );
        }
    }
}

#[test]
fn sphere_christoffels_match_finite_differences() {
    let lambda = |u: f64, v: f64| 4.0 / (1.0 + u * u + v * v).powi(2);
    let (u, v) = (0.5, 0.0);
    let h = 1e-5;
    // dl[a] = ∂_a λ; g = λ·id
    let dl = [
        (lambda(u + h, v) - lambda(u - h, v)) / (2.0 * h),
        (lambda(u, v + h) - lambda(u, v - h)) / (2.0 * h),
    ];
    let l = lambda(u, v);
    let dg = |a: usize, i: usize, j: usize| if i == j { dl[a] } else { 0.0 };
    let s = spec("round_sphere_2");
    let pt = Evaluator::new(&s).unwrap().point(0, &[u, v]).unwrap();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let want = 0.5 / l * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j));
                let got = pt.framed.christoffel[(k * 2 + i) * 2 + j];
                assert!((got - want).abs() < 1e-7, "Γ^{k}_{i}{j}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn conformal_christoffels_agree_with_generic_formula_on_s6() {
    let s = spec("s6_octonionic");
    let chart = &s.charts()[0];
    let n = s.dim();
    let MetricField::Conformal(lambda) = s.metric(0) else {
        panic!("sphere charts carry a conformal metric");
    };
    let closed = christoffel_conformal(&ExprCalculus::new(chart.coords()), lambda);
    let tc = Tape::compile(&closed, chart.coords()).unwrap();
    // Generic route: pulled-back embedding metric, inverted numerically on jets.
    let tg = Tape::compile(&chart.induced_metric_exprs(), chart.coords()).unwrap();
    let calc = JetCalculus { dim: n };
    let mut rng = rng_for(3, "conformal-vs-generic", 0);
    for _ in 0..10 {
        let p = sample(&s, 0, &mut rng);
        let seeds: Vec<Jet> = p
            .iter()
            .enumerate()
            .map(|(a, &x)| Jet::variable(x, a, 2))
            .collect();
        let g = tg.eval(&seeds).unwrap();
        let gi = invert(&g, n);
        let generic = Connection::generic(&calc, g, gi);
        let b: Vec<f64> = tc.eval(&p).unwrap();
        let worst = generic
            .gamma
            .iter()
            .zip(&b)
            .map(|(x, y)| (x.value() - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "worst {worst}");
    }
}

#[test]
fn connection_is_metric_compatible() {
    for name in ["round_sphere_2", "warped_torus_2", "s6_octonionic"] {
        let mut rng = rng_for(11, name, 1);
        for pt in points(name, 6, "compat") {
            let n = pt.dim();
            let g = |i: usize, j: usize| pt.conn.metric[i * n + j];
            let gam = |k: usize, i: usize, j: usize| pt.framed.christoffel[(k * n + i) * n + j];
            let v = unit_ball(&mut rng, n);
            let w = unit_ball(&mut rng, n);
            for a in 0..n {
                let cov = |x: &[f64]| -> Vec<f64> {
                    (0..n)
                        .map(|k| (0..n).map(|m| gam(k, a, m) * x[m]).sum())
                        .collect()
                };
                let mut lhs = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        lhs += g(i, j).grad(a) * v[i] * w[j];
                    }
                }
                let rhs = pt.framed.inner(&cov(&v), &w) + pt.framed.inner(&v, &cov(&w));
                assert!((lhs - rhs).abs() < 1e-8, "{name} axis {a}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn curvature_symmetries_and_first_bianchi() {
    for name in ["round_sphere_2", "warped_torus_2", "s6_octonionic"] {
        let mut rng = rng_for(5, name, 2);
        for pt in points(name, 5, "bianchi") {
            let n = pt.dim();
            for _ in 0..4 {
                let x = unit_ball(&mut rng, n);
                let y = unit_ball(&mut rng, n);
                let z = unit_ball(&mut rng, n);
                let w = unit_ball(&mut rng, n);
                let base = r4(&pt, &x, &y, &z, &w);
                assert!(
                    (base + r4(&pt, &y, &x, &z, &w)).abs() < 1e-8,
                    "{name} swap XY"
                );
                assert!(
                    (base + r4(&pt, &x, &y, &w, &z)).abs() < 1e-8,
                    "{name} swap ZW"
                );
                assert!(
                    (base - r4(&pt, &z, &w, &x, &y)).abs() < 1e-8,
                    "{name} pair symmetry"
                );
                let a = riemann_apply(&pt.riemann, n, &x, &y, &z);
                let b = riemann_apply(&pt.riemann, n, &y, &z, &x);
                let c = riemann_apply(&pt.riemann, n, &z, &x, &y);
                for k in 0..n {
                    assert!((a[k] + b[k] + c[k]).abs() < 1e-8, "{name} Bianchi");
                }
            }
        }
    }
}

#[test]
fn unit_sphere_curvature_has_the_positive_closed_form() {
    let pt = &points("round_sphere_2", 1, "s2-sign")[0];
    let e1 = frame_vector(&pt.framed, 0);
    let e2 = frame_vector(&pt.framed, 1);
    assert!((r4(pt, &e1, &e2, &e1, &e2) - 1.0).abs() < 1e-10);

    let mut rng = rng_for(9, "sphere-closed-form", 0);
    for name in ["round_sphere_2", "s6_octonionic"] {
        for pt in points(name, 4, "closed-form") {
            let n = pt.dim();
            let fp = &pt.framed;
            let x = unit_ball(&mut rng, n);
            let y = unit_ball(&mut rng, n);
            let z = unit_ball(&mut rng, n);
            let got = riemann_apply(&pt.riemann, n, &x, &y, &z);
            let (xz, yz) = (fp.inner(&x, &z), fp.inner(&y, &z));
            for k in 0..n {
                let want = xz * y[k] - yz * x[k];
                assert!((got[k] - want).abs() < 1e-9, "{name}: {} vs {want}", got[k]);
            }
        }
    }
}

#[test]
fn scalar_curvature_of_model_spaces() {
    for (name, want) in [
        ("flat_torus_4", 0.0),
        ("round_sphere_2", 2.0),
        ("s6_octonionic", 30.0),
    ] {
        for pt in points(name, 3, "scalar") {
            let n = pt.dim();
            let s = scalar_curvature(&pt.riemann, &pt.framed.inverse_metric, n);
            let mut by_frame = 0.0;
            for i in 0..n {
                let ei = frame_vector(&pt.framed, i);
                for j in 0..n {
                    let ej = frame_vector(&pt.framed, j);
                    by_frame += r4(&pt, &ei, &ej, &ei, &ej);
                }
            }
            assert!((s - want).abs() < 1e-8, "{name}: {s}");
            assert!((by_frame - want).abs() < 1e-8, "{name}: {by_frame}");
        }
    }
}

#[test]
fn covariant_derivative_of_structures() {
    for pt in points("flat_torus_2_skew", 3, "flat-nabla") {
        assert!(values(&pt.nabla(&pt.j)).data().iter().all(|x| *x == 0.0));
    }
    for pt in points("round_sphere_2", 50, "kahler-nabla") {
        let worst = values(&pt.nabla(&pt.j))
            .data()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(worst < 1e-9, "|∇J| component {worst}");
    }
}

#[test]
fn covariant_derivative_of_a_function_is_its_gradient() {
    use bochner_lab::connection::Tensor;
    use bochner_lab::verify::random::random_jet;
    let mut rng = rng_for(4, "scalar-nabla", 0);
    for pt in points("round_sphere_2", 5, "scalar-nabla") {
        let f = random_jet(&mut rng, &pt.framed.coords);
        let t = Tensor::from_data(pt.dim(), false, 0, vec![f]);
        let df = values(&pt.nabla(&t));
        for a in 0..pt.dim() {
            assert_eq!(df.data()[a], f.grad(a));
        }
    }
}
