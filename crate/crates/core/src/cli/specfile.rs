//! Plain-text manifold descriptions.
//!
//! A file is a list of sections, each opened by a bracketed header and
//! followed by `key = value` lines. Repeated keys accumulate in order, which
//! is how lists (embedding components, matrix entries) are written: one
//! expression per line. `#` starts a comment.
//!
//! ```text
//! [manifold]
//! name = tilted_torus
//! dim = 2
//!
//! [chart torus]
//! coords = u v
//! domain = 0 2*pi
//! domain = 0 2*pi
//! embedding = cos(u)
//! embedding = sin(u)
//! embedding = cos(v)
//! embedding = sin(v)
//!
//! [structure torus]
//! entry = 1
//! entry = -2
//! entry = 1
//! entry = -1
//!
//! [quadrature]
//! type = torus
//! resolution = 32
//! ```
//!
//! The full grammar is in `docs/specfile.md`.

use std::fmt;

use crate::expr::{eval, parse, Env, Expr};
use crate::geometry::zoo::standard_j;
use crate::geometry::{Chart, ManifoldSpec, Perturbation, QuadratureKind, StructureSource};

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    /// 1-based line, or 0 for whole-file problems.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

fn err(line: usize, message: impl Into<String>) -> SpecError {
    SpecError {
        line,
        message: message.into(),
    }
}

#[derive(Debug)]
struct Section {
    kind: String,
    arg: Option<String>,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    fn all(&self, key: &str) -> Vec<(&str, usize)> {
        self.entries
            .iter()
            .filter(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
            .collect()
    }

    fn one(&self, key: &str) -> Result<Option<(&str, usize)>, SpecError> {
        let all = self.all(key);
        match all.len() {
            0 => Ok(None),
            1 => Ok(Some(all[0])),
            _ => Err(err(
                all[1].1,
                format!("'{key}' given more than once in [{}]", self.kind),
            )),
        }
    }

    fn required(&self, key: &str) -> Result<(&str, usize), SpecError> {
        self.one(key)?
            .ok_or_else(|| err(self.line, format!("[{}] is missing '{key}'", self.kind)))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), SpecError> {
        for (k, _, l) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(err(*l, format!("unknown key '{k}' in [{}]", self.kind)));
            }
        }
        Ok(())
    }
}

fn sections(text: &str) -> Result<Vec<Section>, SpecError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(head) = body.strip_prefix('[') {
            let head = head
                .strip_suffix(']')
                .ok_or_else(|| err(line, "section header must end with ']'"))?;
            let mut parts = head.split_whitespace();
            let kind = parts
                .next()
                .ok_or_else(|| err(line, "empty section header"))?;
            let arg = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(err(line, "section header takes at most one argument"));
            }
            out.push(Section {
                kind: kind.to_string(),
                arg,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| err(line, "expected 'key = value'"))?;
        let sec = out
            .last_mut()
            .ok_or_else(|| err(line, "entry before the first section header"))?;
        sec.entries
            .push((k.trim().to_string(), v.trim().to_string(), line));
    }
    Ok(out)
}

fn expr(src: &str, line: usize) -> Result<Expr, SpecError> {
    parse(src).map_err(|e| err(line, format!("bad expression '{src}': {e}")))
}

fn number(src: &str, line: usize) -> Result<f64, SpecError> {
    let e = expr(src, line)?;
    eval(&e, &Env::new())
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("'{src}' is not a constant")))
}

fn integer(src: &str, line: usize) -> Result<usize, SpecError> {
    src.parse()
        .map_err(|_| err(line, format!("'{src}' is not a non-negative integer")))
}

fn ident(src: &str, line: usize) -> Result<String, SpecError> {
    let ok = !src.is_empty()
        && src.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !src.starts_with(|c: char| c.is_ascii_digit());
    if ok {
        Ok(src.to_string())
    } else {
        Err(err(line, format!("'{src}' is not a valid name")))
    }
}

fn chart(sec: &Section) -> Result<Chart, SpecError> {
    sec.check_keys(&[
        "coords",
        "domain",
        "margin",
        "embedding",
        "projection",
        "conformal",
    ])?;
    let name = ident(
        sec.arg
            .as_deref()
            .ok_or_else(|| err(sec.line, "chart section needs a name: [chart <name>]"))?,
        sec.line,
    )?;
    let (coords, cl) = sec.required("coords")?;
    let coords: Vec<String> = coords
        .split_whitespace()
        .map(|c| ident(c, cl))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&str> = coords.iter().map(String::as_str).collect();
    let mut domain = Vec::new();
    for (d, l) in sec.all("domain") {
        let parts: Vec<&str> = d.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(err(l, "domain needs two bounds: 'domain = <lo> <hi>'"));
        }
        domain.push((number(parts[0], l)?, number(parts[1], l)?));
    }
    let embedding = sec
        .all("embedding")
        .into_iter()
        .map(|(e, l)| expr(e, l))
        .collect::<Result<Vec<_>, _>>()?;
    if embedding.is_empty() {
        return Err(err(sec.line, format!("chart '{name}' has no embedding")));
    }
    let geo = |e: crate::error::GeometryError| err(sec.line, e.to_string());
    let mut c = Chart::new(&name, &refs, &domain, embedding).map_err(geo)?;
    if let Some((m, l)) = sec.one("margin")? {
        c = c.with_margin(number(m, l)?).map_err(geo)?;
    }
    let proj = sec
        .all("projection")
        .into_iter()
        .map(|(e, l)| expr(e, l))
        .collect::<Result<Vec<_>, _>>()?;
    if !proj.is_empty() {
        c = c.with_projection(proj).map_err(geo)?;
    }
    if let Some((f, l)) = sec.one("conformal")? {
        c = c.with_conformal_factor(expr(f, l)?).map_err(geo)?;
    }
    Ok(c)
}

fn entries(sec: &Section, n: usize) -> Result<Vec<Expr>, SpecError> {
    let list = sec
        .all("entry")
        .into_iter()
        .map(|(e, l)| expr(e, l))
        .collect::<Result<Vec<_>, _>>()?;
    if list.len() != n {
        return Err(err(
            sec.line,
            format!("[{}] needs {n} entries, found {}", sec.kind, list.len()),
        ));
    }
    Ok(list)
}

/// Parse a spec file into a validated manifold.
pub fn parse_spec(text: &str) -> Result<ManifoldSpec, SpecError> {
    let secs = sections(text)?;
    for s in &secs {
        if ![
            "manifold",
            "chart",
            "structure",
            "metric",
            "quadrature",
            "perturbation",
        ]
        .contains(&s.kind.as_str())
        {
            return Err(err(s.line, format!("unknown section [{}]", s.kind)));
        }
    }
    let find = |kind: &str| -> Result<Option<&Section>, SpecError> {
        let all: Vec<&Section> = secs
            .iter()
            .filter(|s| s.kind == kind && s.arg.is_none())
            .collect();
        match all.len() {
            0 => Ok(None),
            1 => Ok(Some(all[0])),
            _ => Err(err(all[1].line, format!("section [{kind}] appears twice"))),
        }
    };
    let man = find("manifold")?.ok_or_else(|| err(0, "missing [manifold] section"))?;
    man.check_keys(&["name", "dim", "description"])?;
    let (name, nl) = man.required("name")?;
    let name = ident(name, nl)?;
    let (dim, dl) = man.required("dim")?;
    let dim = integer(dim, dl)?;
    if dim == 0 || dim % 2 != 0 {
        return Err(err(
            dl,
            format!("dimension must be even and positive, got {dim}"),
        ));
    }

    let chart_secs: Vec<&Section> = secs.iter().filter(|s| s.kind == "chart").collect();
    if chart_secs.is_empty() {
        return Err(err(0, "no [chart <name>] sections"));
    }
    let charts = chart_secs
        .iter()
        .map(|s| chart(s))
        .collect::<Result<Vec<_>, _>>()?;
    for (s, c) in chart_secs.iter().zip(&charts) {
        if c.dim() != dim {
            return Err(err(
                s.line,
                format!(
                    "chart '{}' has {} coordinates, dim is {dim}",
                    c.name(),
                    c.dim()
                ),
            ));
        }
    }
    let chart_index = |arg: &str, line: usize| -> Result<usize, SpecError> {
        charts
            .iter()
            .position(|c| c.name() == arg)
            .ok_or_else(|| err(line, format!("no chart named '{arg}'")))
    };

    let mut source = match find("structure")? {
        Some(s) => {
            s.check_keys(&["builtin"])?;
            let (b, l) = s.required("builtin")?;
            match b {
                "standard" => StructureSource::Explicit(vec![standard_j(dim); charts.len()]),
                "cross_product" => StructureSource::EmbeddedCrossProduct,
                other => {
                    return Err(err(
                        l,
                        format!("unknown builtin structure '{other}' (standard, cross_product)"),
                    ))
                }
            }
        }
        None => {
            let mut per = vec![None; charts.len()];
            for s in secs
                .iter()
                .filter(|s| s.kind == "structure" && s.arg.is_some())
            {
                s.check_keys(&["entry"])?;
                let c = chart_index(s.arg.as_deref().unwrap_or_default(), s.line)?;
                if per[c].is_some() {
                    return Err(err(s.line, "structure given twice for one chart"));
                }
                per[c] = Some(entries(s, dim * dim)?);
            }
            if per.iter().all(Option::is_none) {
                return Err(err(0, "missing structure: [structure] with 'builtin', or [structure <chart>] per chart"));
            }
            let list = per
                .into_iter()
                .enumerate()
                .map(|(c, p)| {
                    p.ok_or_else(|| {
                        err(0, format!("no structure for chart '{}'", charts[c].name()))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            StructureSource::Explicit(list)
        }
    };

    let pert: Vec<&Section> = secs.iter().filter(|s| s.kind == "perturbation").collect();
    if !pert.is_empty() {
        let mut eps = None;
        for s in &pert {
            s.check_keys(&["eps", "entry"])?;
            let (e, l) = s.required("eps")?;
            let e = number(e, l)?;
            if eps.is_some_and(|x| x != e) {
                return Err(err(l, "perturbation sections disagree on eps"));
            }
            eps = Some(e);
        }
        let ambient: Vec<&&Section> = pert.iter().filter(|s| s.arg.is_none()).collect();
        let perturbation = if let Some(s) = ambient.first() {
            if pert.len() > 1 {
                return Err(err(
                    s.line,
                    "use either one ambient [perturbation] or per-chart sections",
                ));
            }
            let n = charts[0].ambient_dim();
            Perturbation::Ambient(entries(s, n * n)?)
        } else {
            let mut per = vec![None; charts.len()];
            for s in &pert {
                let c = chart_index(s.arg.as_deref().unwrap_or_default(), s.line)?;
                per[c] = Some(entries(s, dim * dim)?);
            }
            let list = per
                .into_iter()
                .enumerate()
                .map(|(c, p)| {
                    p.ok_or_else(|| {
                        err(
                            0,
                            format!("no perturbation for chart '{}'", charts[c].name()),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Perturbation::Chart(list)
        };
        source = StructureSource::Conjugated {
            base: Box::new(source),
            perturbation,
            eps: eps.unwrap_or(0.0),
        };
    }

    let conformal = match find("metric")? {
        Some(s) => {
            s.check_keys(&["conformal"])?;
            s.one("conformal")?.map(|(e, l)| expr(e, l)).transpose()?
        }
        None => None,
    };

    let quad = find("quadrature")?.ok_or_else(|| err(0, "missing [quadrature] section"))?;
    quad.check_keys(&["type", "resolution"])?;
    let (kind, kl) = quad.required("type")?;
    let kind = match kind {
        "torus" => QuadratureKind::Torus,
        "sphere" => QuadratureKind::Sphere,
        other => {
            return Err(err(
                kl,
                format!("unknown quadrature type '{other}' (torus, sphere)"),
            ))
        }
    };
    let (res, rl) = quad.required("resolution")?;
    let res = integer(res, rl)?;
    if res < 2 {
        return Err(err(rl, "resolution must be at least 2"));
    }

    let spec = ManifoldSpec::new(&name, charts, source, conformal, kind, res)
        .map_err(|e| err(0, e.to_string()))?;
    Ok(match man.one("description")? {
        Some((d, _)) => spec.with_description(d),
        None => spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = "
[manifold]
name = skew  # comment
dim = 2

[chart torus]
coords = u v
domain = 0 2*pi
domain = 0 2*pi
embedding = cos(u)
embedding = sin(u)
embedding = cos(v)
embedding = sin(v)

[structure torus]
entry = 1
entry = -2
entry = 1
entry = -1

[quadrature]
type = torus
resolution = 16
";

    #[test]
    fn parses_explicit_torus() {
        let s = parse_spec(TORUS).unwrap();
        assert_eq!(s.name(), "skew");
        assert_eq!(s.dim(), 2);
        assert_eq!(s.default_resolution(), 16);
        assert_eq!(s.charts()[0].domain()[0].1, 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn reports_line_of_bad_expression() {
        let bad = TORUS.replace("entry = -2", "entry = -2 +");
        let e = parse_spec(&bad).unwrap_err();
        assert_eq!(e.line, 17);
        assert!(e.message.contains("bad expression"));
    }

    #[test]
    fn rejects_odd_dimension_and_unknown_keys() {
        assert!(parse_spec(&TORUS.replace("dim = 2", "dim = 3")).is_err());
        let e = parse_spec(&TORUS.replace("resolution = 16", "resolution = 16\ncolor = red"))
            .unwrap_err();
        assert!(e.message.contains("unknown key"));
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let e = parse_spec(&TORUS.replace("entry = -1\n", "")).unwrap_err();
        assert!(e.message.contains("needs 4 entries"), "{e}");
    }

    #[test]
    fn missing_sections_are_named() {
        let e = parse_spec("[manifold]\nname = a\ndim = 2\n").unwrap_err();
        assert!(e.message.contains("chart"));
    }
}
