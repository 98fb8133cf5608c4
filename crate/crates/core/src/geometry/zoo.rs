//! Built-in manifolds with almost complex structures.

use std::f64::consts::PI;

use crate::error::GeometryError;
use crate::expr::{parse, Expr};
use crate::geometry::chart::Chart;
use crate::geometry::manifold::{ManifoldSpec, QuadratureKind};
use crate::geometry::structure::{Perturbation, StructureSource};

/// Known properties of a zoo member (`None` where nothing is claimed).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expected {
    pub compatible: bool,
    pub kahler: Option<bool>,
    pub harmonic: Option<bool>,
    pub integrable: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub spec: ManifoldSpec,
    pub expected: Expected,
}

fn ex(s: &str) -> Expr {
    parse(s).unwrap_or_else(|e| panic!("built-in expression `{s}`: {e}"))
}

fn coord_names(d: usize) -> Vec<String> {
    if d == 2 {
        vec!["u".into(), "v".into()]
    } else {
        (1..=d).map(|i| format!("u{i}")).collect()
    }
}

/// The flat torus `(R/2πZ)^d` embedded as a product of unit circles.
pub fn torus_chart(d: usize) -> Chart {
    let names = coord_names(d);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut emb = Vec::new();
    for c in &names {
        emb.push(ex(&format!("cos({c})")));
        emb.push(ex(&format!("sin({c})")));
    }
    Chart::new("torus", &refs, &vec![(0.0, 2.0 * PI); d], emb)
        .and_then(|c| c.with_conformal_factor(Expr::one()))
        .expect("torus chart")
}

/// The two stereographic charts of the unit sphere Sᵈ ⊂ Rᵈ⁺¹. `north`
/// projects from the north pole and is used on the hemisphere `x_{d+1} ≤ 0`;
/// `south` projects from the south pole.
pub fn sphere_charts(d: usize) -> Vec<Chart> {
    let names = coord_names(d);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let r2 = names
        .iter()
        .map(|c| format!("{c}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let den = format!("(1 + {r2})");
    let lambda = ex(&format!("4/{den}^2"));
    let last = format!("x{}", d + 1);
    let mut charts = Vec::new();
    for (name, axis, proj_den) in [
        (
            "north",
            format!("({r2} - 1)/{den}"),
            format!("(1 - {last})"),
        ),
        (
            "south",
            format!("(1 - ({r2}))/{den}"),
            format!("(1 + {last})"),
        ),
    ] {
        let mut emb: Vec<Expr> = names.iter().map(|c| ex(&format!("2*{c}/{den}"))).collect();
        emb.push(ex(&axis));
        let proj = (1..=d).map(|k| ex(&format!("x{k}/{proj_den}"))).collect();
        let chart = Chart::new(name, &refs, &vec![(-2.0, 2.0); d], emb)
            .and_then(|c| c.with_margin(0.25))
            .and_then(|c| c.with_projection(proj))
            .and_then(|c| c.with_conformal_factor(lambda.clone()))
            .expect("sphere chart");
        charts.push(chart);
    }
    charts
}

/// Block-diagonal rotation by +90° in each coordinate plane.
pub fn standard_j(d: usize) -> Vec<Expr> {
    let mut j = vec![Expr::zero(); d * d];
    for b in 0..d / 2 {
        let (p, q) = (2 * b, 2 * b + 1);
        j[q * d + p] = Expr::one();
        j[p * d + q] = Expr::constant(-1.0);
    }
    j
}

fn flat_torus(name: &str, d: usize, j: Vec<Expr>) -> ManifoldSpec {
    ManifoldSpec::new(
        name,
        vec![torus_chart(d)],
        StructureSource::Explicit(vec![j]),
        None,
        QuadratureKind::Torus,
        if d == 2 { 32 } else { 12 },
    )
    .expect("flat torus")
}

/// Trigonometric perturbation matrix with entries bounded by one.
fn torus_perturbation(d: usize) -> Vec<Expr> {
    let names = coord_names(d);
    let mut b = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let c = &names[(i + 2 * j) % d];
            let c2 = &names[(2 * i + j + 1) % d];
            let f = if (i + j) % 2 == 0 { "sin" } else { "cos" };
            b.push(ex(&format!(
                "{f}({c} + {:.1})*cos({c2})",
                0.3 * (i + j) as f64
            )));
        }
    }
    b
}

fn sphere(name: &str, d: usize, source: StructureSource, resolution: usize) -> ManifoldSpec {
    ManifoldSpec::new(
        name,
        sphere_charts(d),
        source,
        None,
        QuadratureKind::Sphere,
        resolution,
    )
    .expect("sphere")
}

pub const S6_RESOLUTION: usize = 6;

/// Round S⁶ with the octonionic structure.
pub fn s6_octonionic() -> ManifoldSpec {
    sphere(
        "s6_octonionic",
        6,
        StructureSource::EmbeddedCrossProduct,
        S6_RESOLUTION,
    )
    .with_description("unit S^6, J_p(v) = p x v (octonionic, nearly Kaehler)")
}

/// Round S⁶ metric times `1 + eps·x7`, octonionic structure.
pub fn s6_perturbed(eps: f64) -> Result<ManifoldSpec, GeometryError> {
    let factor = ex(&format!("1 + {eps}*x7"));
    s6_octonionic()
        .with_conformal("s6_perturbed", factor)
        .map(|m| {
            m.with_description(&format!(
                "unit S^6 metric times (1 + {eps} x7), octonionic J"
            ))
        })
}

pub const S6_PERTURBED_EPS: f64 = 0.05;

fn build() -> Vec<ZooEntry> {
    let kahler = Expected {
        compatible: true,
        kahler: Some(true),
        harmonic: Some(true),
        integrable: Some(true),
    };
    let surface_noncompatible = Expected {
        compatible: false,
        kahler: Some(false),
        harmonic: None,
        integrable: Some(true),
    };
    let nearly_kahler = Expected {
        compatible: true,
        kahler: Some(false),
        harmonic: Some(false),
        integrable: Some(false),
    };
    let mut out = vec![
        ZooEntry {
            spec: flat_torus("flat_torus_2", 2, standard_j(2))
                .with_description("flat T^2, constant compatible J"),
            expected: kahler,
        },
        ZooEntry {
            spec: flat_torus(
                "flat_torus_2_skew",
                2,
                ["1", "-2", "1", "-1"].iter().map(|s| ex(s)).collect(),
            )
            .with_description("flat T^2, constant non-compatible J = [[1,-2],[1,-1]]"),
            expected: Expected {
                compatible: false,
                kahler: Some(false),
                harmonic: Some(true),
                integrable: Some(true),
            },
        },
        ZooEntry {
            spec: flat_torus("flat_torus_4", 4, standard_j(4))
                .with_description("flat T^4, constant compatible J"),
            expected: kahler,
        },
        ZooEntry {
            spec: flat_torus_conj("flat_torus_2_conj", 2, 0.3),
            expected: surface_noncompatible,
        },
        ZooEntry {
            spec: flat_torus_conj("flat_torus_4_conj", 4, 0.2),
            expected: Expected {
                compatible: false,
                kahler: Some(false),
                harmonic: None,
                integrable: None,
            },
        },
        ZooEntry {
            spec: ManifoldSpec::new(
                "warped_torus_2",
                vec![torus_chart(2)],
                StructureSource::Explicit(vec![standard_j(2)]),
                Some(ex("1 + 0.3*x2")),
                QuadratureKind::Torus,
                32,
            )
            .expect("warped torus")
            .with_description("T^2 with metric (1 + 0.3 sin u) times flat, compatible J"),
            expected: kahler,
        },
        ZooEntry {
            spec: sphere(
                "round_sphere_2",
                2,
                StructureSource::EmbeddedCrossProduct,
                32,
            )
            .with_description("unit S^2, J_p(v) = p x v (Kaehler)"),
            expected: kahler,
        },
        ZooEntry {
            spec: sphere(
                "round_sphere_2_conj",
                2,
                StructureSource::Conjugated {
                    base: Box::new(StructureSource::EmbeddedCrossProduct),
                    perturbation: Perturbation::Ambient(
                        [
                            "x1*x2", "x3", "0", "x2", "x1^2", "x3*x1", "1", "x2*x3", "x3",
                        ]
                        .iter()
                        .map(|s| ex(s))
                        .collect(),
                    ),
                    eps: 0.2,
                },
                32,
            )
            .with_description("unit S^2, Kaehler J conjugated by id + 0.2 B"),
            expected: surface_noncompatible,
        },
        ZooEntry {
            spec: s6_octonionic(),
            expected: nearly_kahler,
        },
        ZooEntry {
            spec: s6_perturbed(S6_PERTURBED_EPS).expect("perturbed S^6"),
            expected: nearly_kahler,
        },
    ];
    out.sort_by(|a, b| a.spec.name().cmp(b.spec.name()));
    out
}

fn flat_torus_conj(name: &str, d: usize, eps: f64) -> ManifoldSpec {
    flat_torus(name, d, standard_j(d))
        .with_structure(
            name,
            StructureSource::Conjugated {
                base: Box::new(StructureSource::Explicit(vec![standard_j(d)])),
                perturbation: Perturbation::Chart(vec![torus_perturbation(d)]),
                eps,
            },
        )
        .expect("conjugated torus")
        .with_description(&format!(
            "flat T^{d}, standard J conjugated by id + {eps} B(u)"
        ))
}

/// All built-in manifolds, sorted by name.
pub fn zoo() -> Vec<ZooEntry> {
    build()
}

pub fn names() -> Vec<&'static str> {
    vec![
        "flat_torus_2",
        "flat_torus_2_conj",
        "flat_torus_2_skew",
        "flat_torus_4",
        "flat_torus_4_conj",
        "round_sphere_2",
        "round_sphere_2_conj",
        "s6_octonionic",
        "s6_perturbed",
        "warped_torus_2",
    ]
}

pub fn lookup(name: &str) -> Option<ZooEntry> {
    if !names().contains(&name) {
        return None;
    }
    build().into_iter().find(|e| e.spec.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_sorted_and_complete() {
        let z: Vec<String> = zoo().iter().map(|e| e.spec.name().to_string()).collect();
        assert_eq!(z, names());
        let mut sorted = z.clone();
        sorted.sort();
        assert_eq!(z, sorted);
    }

    #[test]
    fn flat_torus_metric_is_identity_and_j_constant() {
        let t = lookup("flat_torus_2").unwrap().spec;
        match t.metric(0) {
            crate::geometry::MetricField::Conformal(l) => assert!(l.is_const(1.0)),
            _ => panic!("expected conformal metric"),
        }
        let j = t.structure(0).exprs(2);
        assert!(j.iter().all(|e| e.as_const().is_some()));
    }
}
