//! Command-line front end for `finsler-cone`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use finsler_cone::boundary::{boundary_grid, classify_boundary_convexity_with, ConvexityKind, Verdict};
use finsler_cone::flow::{integrate_geodesic, IntegrateOptions};
use finsler_cone::geometry::cone_direction_solve;
use finsler_cone::lightspace::fermat::fermat_boundary_verdict;
use finsler_cone::lightspace::nonhausdorff::assess_family;
use finsler_cone::lightspace::{glue_charts, sample_chart_boundary, sample_chart_interior, CauchySurface, ConeSign};
use finsler_cone::models::{build, catalog, load_model, BUILTIN_NAMES};
use finsler_cone::parallel::{configure_threads, Execution};
use finsler_cone::suite::{run_suite, standard_family, SuiteOptions, GROUPS};
use finsler_cone::tolerance::ToleranceConfig;
use finsler_cone::SpacetimeModel;

const EXIT_CONCAVE: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;
const EXIT_ERROR: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "finsler-cone", version, about = "Cone geodesics, boundary lightconvexity and lightspace sampling")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Built-in model name or path to a JSON model file.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Parameters for a built-in model, as JSON.
    #[arg(long, global = true)]
    params: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sign of the second fundamental form over a boundary grid.
    ClassifyBoundary {
        #[arg(long, value_enum, default_value = "light")]
        kind: Kind,
        /// Comma-separated times of the grid.
        #[arg(long, default_value = "0")]
        times: String,
        /// Boundary points per time.
        #[arg(long, default_value_t = 16)]
        count: usize,
        /// Tangent directions per point.
        #[arg(long, default_value_t = 2)]
        dirs: usize,
    },
    /// Integrate one geodesic.
    Shoot {
        /// Comma-separated initial point.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Comma-separated initial velocity.
        #[arg(long, allow_hyphen_values = true)]
        velocity: String,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long)]
        backward: bool,
        /// Replace the velocity by the future lightlike vector over its spatial part.
        #[arg(long)]
        lightlike: bool,
    },
    /// Sample and glue the lightspace charts over a Cauchy surface `t = time`.
    SampleLightspace {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        time: f64,
        /// Spatial grid points, `;`-separated, each comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, default_value_t = 6)]
        dirs: usize,
        /// Boundary points per time in the boundary charts; 0 skips them.
        #[arg(long, default_value_t = 0)]
        boundary_count: usize,
    },
    /// Run the built-in family of the model through the non-Hausdorff detector.
    DetectNonhausdorff,
    /// Convexity of the spatial boundary in the Fermat metric.
    FermatProbe {
        #[arg(long, default_value_t = 24)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        dirs: usize,
    },
    /// Run the verification suite.
    VerifyPaper {
        /// Run one check group only.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(GROUPS))]
        only: Option<String>,
    },
    /// List or describe the built-in models.
    Catalog {
        #[command(subcommand)]
        action: Option<CatalogAction>,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List,
    Describe { name: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Light,
    Time,
    Space,
}

impl From<Kind> for ConvexityKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Light => ConvexityKind::Light,
            Kind::Time => ConvexityKind::Time,
            Kind::Space => ConvexityKind::Space,
        }
    }
}

/// What a command produced: the whole document and its tidy rows.
struct Output {
    document: Value,
    rows: Vec<Value>,
    default: Format,
    exit: u8,
}

impl Output {
    fn new(document: impl Serialize, rows: Vec<Value>) -> Result<Self> {
        Ok(Self { document: serde_json::to_value(document)?, rows, default: Format::Json, exit: 0 })
    }
}

fn rows_of<T: Serialize>(items: &[T]) -> Result<Vec<Value>> {
    items.iter().map(|x| serde_json::to_value(x).map_err(Into::into)).collect()
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("not a number: {c:?}")))
        .collect()
}

fn model(g: &Global) -> Result<SpacetimeModel> {
    let name = g.model.as_deref().context("--model is required for this command")?;
    let mut m = match &g.params {
        Some(p) => {
            if !BUILTIN_NAMES.contains(&name) {
                bail!("--params applies to built-in models only");
            }
            build(name, &serde_json::from_str(p).context("--params is not valid JSON")?)?
        }
        None => load_model(name)?,
    };
    if let Some(t) = g.tol {
        m = m.with_tolerances(ToleranceConfig::uniform(t));
    }
    Ok(m)
}

fn run(cli: &Cli, exec: Execution) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::ClassifyBoundary { kind, times, count, dirs } => {
            let m = model(g)?;
            let pts = boundary_grid(&m, &parse_vec(times)?, *count)?;
            let r = classify_boundary_convexity_with(&m, (*kind).into(), &pts, *dirs, exec)?;
            let exit = if r.summary.strictly_concave > 0 {
                EXIT_CONCAVE
            } else if r.verdict == Verdict::Indeterminate || r.summary.convex == 0 {
                EXIT_INDETERMINATE
            } else {
                0
            };
            let rows = rows_of(&r.entries)?;
            Ok(Output { exit, ..Output::new(&r, rows)? })
        }
        Command::Shoot { point, velocity, t_max, backward, lightlike } => {
            let m = model(g)?;
            let p = parse_vec(point)?;
            let mut v = parse_vec(velocity)?;
            if p.len() != m.dim || v.len() != m.dim {
                bail!("point and velocity need {} components", m.dim);
            }
            if *lightlike {
                let axis: Vec<f64> = (0..m.dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
                v = cone_direction_solve(&m, &p, &v, &axis)?;
            }
            let mut opts = IntegrateOptions::new(*t_max);
            if let Some(t) = g.tol {
                opts = opts.with_tol(t);
            }
            if *backward {
                opts = opts.backward();
            }
            let sol = integrate_geodesic(&m, &p, &v, &opts)?;
            let rows = rows_of(&sol.samples)?;
            diagnostic(
                "info",
                json!({ "termination": sol.termination, "lagrangian_drift": sol.lagrangian_drift, "samples": sol.samples.len() }),
            );
            Ok(Output { default: Format::Jsonl, ..Output::new(&sol, rows)? })
        }
        Command::SampleLightspace { time, grid, dirs, boundary_count } => {
            let m = model(g)?;
            let grid: Vec<Vec<f64>> = match grid {
                Some(s) => s.split(';').map(parse_vec).collect::<Result<_>>()?,
                None => vec![m.interior_point.clone().context("model has no default interior point; pass --grid")?],
            };
            let s = CauchySurface { time: *time };
            let mut plus = sample_chart_interior(&m, s, &grid, *dirs, ConeSign::Plus)?;
            let mut minus = sample_chart_interior(&m, s, &grid, *dirs, ConeSign::Minus)?;
            if *boundary_count > 0 {
                let (t0, t1) = (*time + 0.5, *time - 0.5);
                plus.extend(sample_chart_boundary(&m, s, &[*time, t0], *boundary_count, 0, &[], ConeSign::Plus)?);
                minus.extend(sample_chart_boundary(&m, s, &[*time, t1], *boundary_count, 0, &[], ConeSign::Minus)?);
            }
            let glued = glue_charts(&plus, &minus)?;
            let rows = glued
                .points
                .iter()
                .zip(&glued.class_of)
                .map(|(q, c)| {
                    json!({
                        "chart": q.chart, "class": c, "base_index": q.base_index,
                        "direction_index": q.direction_index, "point": q.point, "coords": q.coords,
                    })
                })
                .collect();
            Ok(Output::new(&glued, rows)?)
        }
        Command::DetectNonhausdorff => {
            let m = model(g)?;
            let f = standard_family(&m, exec)?;
            let a = assess_family(&m, &f.family, &f.candidates, &f.options)?;
            let rows = rows_of(&a.evidence)?;
            diagnostic("info", json!({ "separation": a.separation, "certificate": a.certificate.is_some() }));
            match a.certificate {
                Some(c) => Ok(Output::new(&c, rows)?),
                None => Ok(Output::new("none", rows)?),
            }
        }
        Command::FermatProbe { count, dirs } => {
            let m = model(g)?;
            let r = fermat_boundary_verdict(&m, *count, *dirs)?;
            let exit = match r.verdict {
                Verdict::Convex => 0,
                Verdict::StrictlyConcave => EXIT_CONCAVE,
                Verdict::Indeterminate => EXIT_INDETERMINATE,
            };
            let rows = rows_of(&r.entries)?;
            Ok(Output { exit, ..Output::new(&r, rows)? })
        }
        Command::VerifyPaper { only } => {
            let opts = SuiteOptions { seed: g.seed, tol_override: g.tol, exec };
            let r = run_suite(only.as_deref(), &opts)?;
            for c in r.failures() {
                diagnostic(
                    "fail",
                    json!({ "check": c.id, "criterion": c.criterion, "value": c.value, "limit": c.limit, "detail": c.detail }),
                );
            }
            let exit = if r.all_passed() { 0 } else { EXIT_CONCAVE };
            let rows = rows_of(&r.checks)?;
            Ok(Output { exit, ..Output::new(&r, rows)? })
        }
        Command::Catalog { action } => {
            let entries = catalog();
            match action {
                None | Some(CatalogAction::List) => {
                    let rows: Vec<Value> =
                        entries.iter().map(|e| json!({ "name": e.name, "description": e.description })).collect();
                    Ok(Output::new(&rows, rows.clone())?)
                }
                Some(CatalogAction::Describe { name }) => {
                    let e = entries.iter().find(|e| &e.name == name).with_context(|| {
                        format!("unknown model {name:?}; built-in models: {}", BUILTIN_NAMES.join(", "))
                    })?;
                    let rows = rows_of(&e.expected_values)?;
                    Ok(Output::new(e, rows)?)
                }
            }
        }
    }
}

/// Flatten nested values into `key`, `key.sub` and `key_i` columns.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&format!("{prefix}_{i}"), x, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn write_output(o: &Output, format: Format, w: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &o.document)?;
            writeln!(w)?;
        }
        Format::Jsonl => {
            for r in &o.rows {
                serde_json::to_writer(&mut *w, r)?;
                writeln!(w)?;
            }
        }
        Format::Csv => {
            let mut csv = csv::WriterBuilder::new().flexible(true).from_writer(w);
            let mut header: Option<Vec<String>> = None;
            for r in &o.rows {
                let mut cells = Vec::new();
                flatten("", r, &mut cells);
                let keys: Vec<String> = cells.iter().map(|(k, _)| k.clone()).collect();
                if header.as_ref() != Some(&keys) {
                    csv.write_record(&keys)?;
                    header = Some(keys);
                }
                csv.write_record(cells.iter().map(|(_, v)| v))?;
            }
            csv.flush()?;
        }
    }
    Ok(())
}

/// One JSON object per line on standard error.
fn diagnostic(level: &str, fields: Value) {
    let mut obj = json!({ "level": level });
    if let (Some(o), Value::Object(f)) = (obj.as_object_mut(), fields) {
        o.extend(f);
    }
    eprintln!("{obj}");
}

/// The reader of standard output went away, as with `| head`.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<io::Error>()
            .map(io::Error::kind)
            .or_else(|| c.downcast_ref::<serde_json::Error>().and_then(|j| j.io_error_kind()))
            .or_else(|| match c.downcast_ref::<csv::Error>().map(csv::Error::kind) {
                Some(csv::ErrorKind::Io(e)) => Some(e.kind()),
                _ => None,
            });
        kind == Some(io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let exec = match cli.global.jobs {
        Some(1) => Execution::Sequential,
        Some(n) => {
            configure_threads(n);
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let result = run(&cli, exec).and_then(|o| {
        let format = cli.global.format.unwrap_or(o.default);
        match &cli.global.out {
            Some(p) => {
                let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
                let mut w = BufWriter::new(f);
                write_output(&o, format, &mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                write_output(&o, format, &mut w)?;
            }
        }
        Ok(o.exit)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            diagnostic("error", json!({ "message": format!("{e:#}") }));
            ExitCode::from(EXIT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_expands_arrays_and_objects() {
        let mut out = Vec::new();
        flatten("", &json!({ "t": 1.5, "x": [1, 2], "hit": { "kind": "a" }, "n": null }), &mut out);
        let keys: Vec<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["hit.kind", "n", "t", "x_0", "x_1"]);
        assert_eq!(out[0].1, "a");
    }

    #[test]
    fn vectors_parse_from_comma_lists() {
        assert!(parse_vec("1, -2.5").unwrap() == [1.0, -2.5]);
        assert!(parse_vec("1,x").is_err());
    }
}
