//! Command-line front end. [`run`] takes the argument list and output
//! streams and returns the process exit code: 0 when every check passes,
//! 1 when a check fails or evaluation breaks down, 2 for usage and spec-file
//! errors.

pub mod specfile;

use std::io::Write;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::geometry::{zoo, Expected, ManifoldSpec};
use crate::verify::{
    convergence, diagnose, run_check, run_suite, with_threads, CheckResult, ConvergenceTable,
    Diagnosis, Report, SuiteConfig, ToleranceProfile,
};

pub use specfile::{parse_spec, SpecError};

pub const THREADS_ENV: &str = "BOCHNER_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "bochner-lab",
    version,
    about = "Bochner-type identities for almost complex structures, checked numerically"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: $BOCHNER_LAB_THREADS, else all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid resolution (default: per manifold)
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// strict or default
    #[arg(long = "tolerance-profile", global = true, default_value = "default")]
    profile: ToleranceProfile,
    /// Record wall time in reports
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Built-in manifolds and their known properties
    List,
    /// Integrated quantities and classification for one manifold
    Diagnose {
        /// Zoo name or spec-file path
        manifold: String,
    },
    /// Run one named check
    Verify { check: String, manifold: String },
    /// Run every check on the zoo
    Suite {
        /// Restrict to these manifolds (repeatable)
        #[arg(long = "manifold")]
        manifolds: Vec<String>,
    },
    /// A quantity on a sequence of resolutions
    Convergence {
        /// volume, i4 or selfadjoint
        quantity: String,
        manifold: String,
        /// Comma-separated resolutions, e.g. 4,8,12
        resolutions: String,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn broken(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

const ALIASES: &[(&str, &str)] = &[
    ("s2", "round_sphere_2"),
    ("s6", "s6_octonionic"),
    ("t2", "flat_torus_2"),
];

/// A zoo name, an alias or a spec-file path.
pub fn resolve_manifold(reference: &str) -> Result<(ManifoldSpec, Option<Expected>), String> {
    let name = ALIASES
        .iter()
        .find(|(a, _)| *a == reference)
        .map_or(reference, |(_, n)| n);
    if let Some(e) = zoo::lookup(name) {
        return Ok((e.spec, Some(e.expected)));
    }
    let text = std::fs::read_to_string(reference).map_err(|e| {
        format!("'{reference}' is neither a built-in manifold nor a readable spec file: {e}")
    })?;
    parse_spec(&text)
        .map(|s| (s, None))
        .map_err(|e| format!("{reference}: {e}"))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn tri(b: Option<bool>) -> &'static str {
    b.map_or("?", yes_no)
}

#[derive(Serialize)]
struct ListEntry {
    name: String,
    dim: usize,
    compatible: bool,
    kahler: Option<bool>,
    harmonic: Option<bool>,
    integrable: Option<bool>,
    default_resolution: usize,
    description: String,
}

#[derive(Serialize)]
struct ListOutput {
    manifolds: Vec<ListEntry>,
}

fn list(json: bool, out: &mut dyn Write) -> std::io::Result<i32> {
    let entries: Vec<ListEntry> = zoo::zoo()
        .into_iter()
        .map(|e| ListEntry {
            name: e.spec.name().to_string(),
            dim: e.spec.dim(),
            compatible: e.expected.compatible,
            kahler: e.expected.kahler,
            harmonic: e.expected.harmonic,
            integrable: e.expected.integrable,
            default_resolution: e.spec.default_resolution(),
            description: e.spec.description().to_string(),
        })
        .collect();
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&ListOutput { manifolds: entries }).expect("serializes")
        )?;
    } else {
        for e in &entries {
            writeln!(
                out,
                "{} dim={} compatible={} kahler={} harmonic={} integrable={} resolution={}  {}",
                e.name,
                e.dim,
                yes_no(e.compatible),
                tri(e.kahler),
                tri(e.harmonic),
                tri(e.integrable),
                e.default_resolution,
                e.description
            )?;
        }
    }
    Ok(0)
}

fn print_diagnosis(d: &Diagnosis, out: &mut dyn Write) -> std::io::Result<()> {
    let r = |x: [f64; 2]| format!("[{:.10}, {:.10}]", x[0], x[1]);
    writeln!(
        out,
        "manifold        {} (dim {}, resolution {})",
        d.manifold, d.dim, d.resolution
    )?;
    writeln!(out, "volume          {:.12}", d.volume)?;
    writeln!(out, "e(J)            {}", r(d.energy))?;
    writeln!(out, "S               {}", r(d.scalar))?;
    writeln!(out, "T1              {}", r(d.t1))?;
    writeln!(out, "T2              {}", r(d.t2))?;
    writeln!(out, "|nabla J|^2     {}", r(d.nabla_j_sq))?;
    writeln!(out, "int |nabla J|^2 {:.10}", d.int_nabla_j_sq)?;
    writeln!(out, "int |dJ|^2      {:.10}", d.int_dj_sq)?;
    writeln!(out, "int |delta J|^2 {:.10}", d.int_delta_j_sq)?;
    writeln!(out, "I4              {:.10}", d.i4)?;
    match d.i5 {
        Some(v) => writeln!(out, "I5              {v:.10}")?,
        None => writeln!(out, "I5              n/a (J not compatible)")?,
    }
    writeln!(out, "bochner residual {:.3e}", d.max_bochner_residual)?;
    writeln!(
        out,
        "classification  compatible={} kahler={} harmonic={} integrable={}",
        yes_no(d.compatible),
        yes_no(d.kahler),
        yes_no(d.harmonic),
        yes_no(d.integrable)
    )
}

fn print_check(r: &CheckResult, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{r}")?;
    for (k, v) in &r.values {
        writeln!(out, "    {k:<34} {v:.12e}")?;
    }
    Ok(())
}

fn print_report(rep: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    for r in &rep.results {
        writeln!(out, "{r}")?;
    }
    let failed = rep.results.iter().filter(|r| !r.pass).count();
    writeln!(
        out,
        "{} checks, {} failed, seed {}: {}",
        rep.results.len(),
        failed,
        rep.seed,
        if rep.verdict { "PASS" } else { "FAIL" }
    )
}

fn print_table(t: &ConvergenceTable, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{} on {} (reference {:.15} {})",
        t.quantity,
        t.manifold,
        t.reference,
        if t.exact_reference {
            "exact"
        } else {
            "from richest grid"
        }
    )?;
    writeln!(out, "{:>10} {:>24} {:>12}", "resolution", "value", "error")?;
    for row in &t.rows {
        writeln!(
            out,
            "{:>10} {:>24.15} {:>12.3e}",
            row.resolution, row.value, row.error
        )?;
    }
    Ok(())
}

fn json_line<T: Serialize>(v: &T, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(v).expect("serializes")
    )
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| broken(format!("output error: {e}"));
    let cfg = SuiteConfig {
        seed: cli.seed,
        profile: cli.profile,
        resolution: cli.resolution,
        timing: cli.timing,
        ..Default::default()
    };
    if cli.resolution.is_some_and(|r| r < 2) {
        return Err(usage("--resolution must be at least 2"));
    }
    match &cli.command {
        Command::List => list(cli.json, out).map_err(io),
        Command::Diagnose { manifold } => {
            let (spec, _) = resolve_manifold(manifold).map_err(usage)?;
            let d = diagnose(&spec, &cfg).map_err(|e| broken(format!("{}: {e}", spec.name())))?;
            if cli.json {
                json_line(&d, out).map_err(io)?;
            } else {
                print_diagnosis(&d, out).map_err(io)?;
            }
            Ok(if d.pass { 0 } else { 1 })
        }
        Command::Verify { check, manifold } => {
            if !crate::verify::is_known_check(check) {
                return Err(usage(format!(
                    "unknown check '{check}' (known: {}, perturbation_sweep)",
                    crate::verify::CHECKS.join(", ")
                )));
            }
            let (spec, expected) = resolve_manifold(manifold).map_err(usage)?;
            let r = run_check(check, &spec, expected.as_ref(), &cfg).map_err(usage)?;
            if cli.json {
                json_line(&r, out).map_err(io)?;
            } else {
                print_check(&r, out).map_err(io)?;
            }
            Ok(if r.pass { 0 } else { 1 })
        }
        Command::Suite { manifolds } => {
            let known = zoo::names();
            for m in manifolds {
                if !known.contains(&m.as_str()) {
                    return Err(usage(format!("unknown manifold '{m}' (see 'list')")));
                }
            }
            let cfg = SuiteConfig {
                manifolds: (!manifolds.is_empty()).then(|| manifolds.clone()),
                ..cfg
            };
            let rep = run_suite(&cfg);
            if cli.json {
                json_line(&rep, out).map_err(io)?;
            } else {
                print_report(&rep, out).map_err(io)?;
            }
            Ok(if rep.verdict { 0 } else { 1 })
        }
        Command::Convergence {
            quantity,
            manifold,
            resolutions,
        } => {
            if !crate::verify::CONVERGENCE_QUANTITIES.contains(&quantity.as_str()) {
                return Err(usage(format!(
                    "unknown quantity '{quantity}' (known: {})",
                    crate::verify::CONVERGENCE_QUANTITIES.join(", ")
                )));
            }
            let res: Vec<usize> = resolutions
                .split(',')
                .map(|s| s.trim().parse::<usize>().ok().filter(|r| *r >= 2))
                .collect::<Option<_>>()
                .ok_or_else(|| {
                    usage(format!(
                        "bad resolution list '{resolutions}' (expected e.g. 4,8,12)"
                    ))
                })?;
            let (spec, _) = resolve_manifold(manifold).map_err(usage)?;
            let t =
                convergence(&spec, quantity, &res, cli.seed).map_err(|e| broken(e.to_string()))?;
            if cli.json {
                json_line(&t, out).map_err(io)?;
            } else {
                print_table(&t, out).map_err(io)?;
            }
            Ok(0)
        }
    }
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, Failure> {
    if let Some(t) = cli.threads {
        return if t == 0 {
            Err(usage("--threads must be positive"))
        } else {
            Ok(Some(t))
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|t| *t > 0)
            .map(Some)
            .ok_or_else(|| usage(format!("{THREADS_ENV}='{v}' is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = match thread_count(&cli) {
        Ok(Some(t)) => with_threads(t, || execute(&cli, out)),
        Ok(None) => execute(&cli, out),
        Err(f) => Err(f),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["bochner-lab"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn list_covers_the_zoo() {
        let (code, out, _) = call(&["list"]);
        assert_eq!(code, 0);
        let listed: Vec<&str> = out.lines().map(|l| l.split(' ').next().unwrap()).collect();
        assert_eq!(listed, zoo::names());
        assert!(out.contains("s6_octonionic dim=6 compatible=yes"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["verify", "nope", "flat_torus_2"]).0, 2);
        let (code, _, err) = call(&["diagnose", "missing.spec"]);
        assert_eq!(code, 2);
        assert!(err.contains("missing.spec"));
        assert_eq!(call(&["convergence", "volume", "s2", "4,x"]).0, 2);
        assert_eq!(call(&["--threads", "0", "list"]).0, 2);
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(resolve_manifold("s6").unwrap().0.name(), "s6_octonionic");
        assert!(resolve_manifold("no_such_thing").is_err());
    }
}
