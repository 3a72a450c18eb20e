//! kdvgraph: command-line front end for star-graph KdV numerics.
//!
//! Exit codes: 0 on success, 1 on validation failure (bad flags, bad or
//! missing config, incompatible data), 2 on numeric failure (solver abort,
//! instability guard). Results go to stdout or `--out`; diagnostics to
//! stderr. Output is byte-identical for identical inputs.

mod emit;
mod initfile;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kdv_graph::forcing::{trace_check, TraceOp};
use kdv_graph::fracops::{frac_derivative, frac_integral};
use kdv_graph::graph::{operator_norm, StarGraphSpec};
use kdv_graph::matrix::{
    assemble, invertibility, sweep, SpectralParams, SweepFamily, DEFAULT_COND_CAP, DEFAULT_DET_TOL,
};
use kdv_graph::regularity::{admissible_s, search_params, SearchGrid};
use kdv_graph::signal::smooth_bump;
use kdv_graph::simulate::run;
use kdv_graph::{Error, Result};

use emit::{g6, write_out};

#[derive(Parser)]
#[command(
    name = "kdvgraph",
    version,
    about = "Vertex coupling matrices, regularity intervals, boundary forcing \
             operators, and Crank-Nicolson simulation for KdV on star graphs",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect and validate graph coupling data
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Vertex coupling matrix determinants and family sweeps
    #[command(subcommand)]
    Matrix(MatrixCmd),
    /// Admissible Sobolev regularity intervals and parameter search
    #[command(subcommand)]
    Regularity(RegularityCmd),
    /// Fractional integrals and derivatives on a reference bump
    #[command(subcommand)]
    Fracops(FracopsCmd),
    /// Boundary forcing operator trace identities
    #[command(subcommand)]
    Forcing(ForcingCmd),
    /// Evolve initial data on a truncated star graph
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Check the coupling data invariants and report the semigroup class
    Validate(ValidateArgs),
}

#[derive(Subcommand)]
enum MatrixCmd {
    /// Assemble the vertex matrix and print its determinant as re,im
    Det(DetArgs),
    /// Determinant sweep over a (k, m) family
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum RegularityCmd {
    /// Admissible regularity interval for given spectral orders
    Interval(IntervalArgs),
    /// Grid search for an invertible configuration admitting a given s
    Search(SearchArgs),
}

#[derive(Subcommand)]
enum FracopsCmd {
    /// Apply a fractional integral or derivative to the reference bump
    Demo(DemoArgs),
}

#[derive(Subcommand)]
enum ForcingCmd {
    /// Measure a vertex trace identity against its exact factor
    TraceCheck(TraceArgs),
}

/// Output encoding. csv is also the plain-text mode for scalar results.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// comma-separated text, floats at 6 significant digits
    Csv,
    /// structured JSON, floats at full precision
    Json,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// graph config JSON: {"k", "m", "a", "B"}
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetArgs {
    /// graph config JSON: {"k", "m", "a", "B"}
    #[arg(long)]
    config: PathBuf,
    /// first spectral order per negative edge (single value broadcasts)
    #[arg(long, value_delimiter = ',', default_value = "0.44")]
    lambda1: Vec<f64>,
    /// second spectral order per negative edge (single value broadcasts)
    #[arg(long, value_delimiter = ',', default_value = "0.22")]
    lambda2: Vec<f64>,
    /// spectral order per positive edge (single value broadcasts)
    #[arg(long, value_delimiter = ',', default_value = "0.44")]
    beta: Vec<f64>,
    /// |det| at or below this counts as non-invertible
    #[arg(long, default_value_t = DEFAULT_DET_TOL)]
    det_tol: f64,
    /// condition estimate at or above this counts as non-invertible
    #[arg(long, default_value_t = DEFAULT_COND_CAP)]
    cond_cap: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// a = 1 on every edge, B = I (requires k = m)
    Balanced,
    /// a = 1 on every edge, rank-one unit-norm B
    Uniform,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// sweep the balanced diagonal k = m = 1..kmax
    #[arg(long, conflicts_with = "pairs")]
    kmax: Option<usize>,
    /// explicit k:m pairs, e.g. 3:5,5:9
    #[arg(long, value_delimiter = ',')]
    pairs: Option<Vec<String>>,
    /// tied first spectral order for every negative edge
    #[arg(long, default_value_t = 0.44)]
    lambda1: f64,
    /// tied second spectral order for every negative edge
    #[arg(long, default_value_t = 0.22)]
    lambda2: f64,
    /// tied spectral order for every positive edge
    #[arg(long, default_value_t = 0.44)]
    beta: f64,
    /// |det| at or below this counts as non-invertible
    #[arg(long, default_value_t = DEFAULT_DET_TOL)]
    det_tol: f64,
    /// condition estimate at or above this counts as non-invertible
    #[arg(long, default_value_t = DEFAULT_COND_CAP)]
    cond_cap: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntervalArgs {
    /// first spectral order per negative edge, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    lambda1: Vec<f64>,
    /// second spectral order per negative edge, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    lambda2: Vec<f64>,
    /// spectral order per positive edge, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// graph config JSON: {"k", "m", "a", "B"}
    #[arg(long)]
    config: PathBuf,
    /// Sobolev regularity the configuration must admit
    #[arg(long)]
    s: f64,
    /// tied grid spacing for (lambda1, lambda2, beta)
    #[arg(long, default_value_t = 0.02)]
    step: f64,
    /// grid lower bound
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    /// grid upper bound
    #[arg(long, default_value_t = 0.5)]
    hi: f64,
    /// |det| at or below this counts as non-invertible
    #[arg(long, default_value_t = DEFAULT_DET_TOL)]
    det_tol: f64,
    /// condition estimate at or above this counts as non-invertible
    #[arg(long, default_value_t = DEFAULT_COND_CAP)]
    cond_cap: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// operator order
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// time grid step for the reference bump on [0, 2]
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// apply the fractional derivative instead of the integral
    #[arg(long)]
    derivative: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the signal here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// operator: V, Vinv, Vminus, or Vplus
    #[arg(long)]
    op: String,
    /// spectral order for the Vminus/Vplus classes
    #[arg(long, default_value_t = 0.44)]
    lambda: f64,
    /// quadrature time step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// graph config JSON: {"k", "m", "a", "B"}
    #[arg(long)]
    config: PathBuf,
    /// initial profiles JSON: {"L", "edges", "trace_tolerance"?}
    #[arg(long)]
    init: PathBuf,
    /// final time
    #[arg(long = "T", default_value_t = 1.0)]
    t_final: f64,
    /// spatial step
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// time step
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// enable the nonlinear transport term
    #[arg(long)]
    nonlinear: bool,
    /// emit a diagnostics row every this many steps
    #[arg(long, default_value_t = 100)]
    sample_every: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// write the diagnostics here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.cmd {
        Cmd::Graph(GraphCmd::Validate(a)) => cmd_validate(a),
        Cmd::Matrix(MatrixCmd::Det(a)) => cmd_det(a),
        Cmd::Matrix(MatrixCmd::Sweep(a)) => cmd_sweep(a),
        Cmd::Regularity(RegularityCmd::Interval(a)) => cmd_interval(a),
        Cmd::Regularity(RegularityCmd::Search(a)) => cmd_search(a),
        Cmd::Fracops(FracopsCmd::Demo(a)) => cmd_fracops_demo(a),
        Cmd::Forcing(ForcingCmd::TraceCheck(a)) => cmd_trace_check(a),
        Cmd::Simulate(a) => cmd_simulate(a),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(match e {
                Error::Numeric(_) => 2,
                _ => 1,
            });
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read config {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<StarGraphSpec> {
    StarGraphSpec::from_json_str(&read_text(path)?)
}

/// A single CLI value stands for every edge; otherwise one per edge.
fn broadcast(vals: &[f64], n: usize, name: &str) -> Result<Vec<f64>> {
    if vals.len() == n {
        Ok(vals.to_vec())
    } else if vals.len() == 1 {
        Ok(vec![vals[0]; n])
    } else {
        Err(Error::validation(format!(
            "{name} needs 1 or {n} comma-separated values, got {}",
            vals.len()
        )))
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let spec = load_spec(&a.config)?;
    let violations = spec.validate();
    let mut s = String::new();
    let code = if violations.is_empty() {
        let norm = operator_norm(&spec.b);
        let class = spec.coupling_class();
        match a.format {
            Format::Csv => {
                s.push_str(&format!(
                    "valid: k={} m={}, coupling {}, operator norm {}\n",
                    spec.k,
                    spec.m,
                    class,
                    g6(norm)
                ));
            }
            Format::Json => {
                let v = serde_json::json!({
                    "valid": true,
                    "k": spec.k,
                    "m": spec.m,
                    "coupling": class.to_string(),
                    "operator_norm": norm,
                    "violations": [],
                });
                s.push_str(&format!("{v}\n"));
            }
        }
        0
    } else {
        match a.format {
            Format::Csv => {
                for v in &violations {
                    s.push_str(&format!("violation {v}\n"));
                }
            }
            Format::Json => {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                let v = serde_json::json!({"valid": false, "violations": list});
                s.push_str(&format!("{v}\n"));
            }
        }
        1
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(code)
}

fn cmd_det(a: DetArgs) -> Result<i32> {
    let spec = load_spec(&a.config)?;
    let params = SpectralParams {
        lambda1: broadcast(&a.lambda1, spec.k, "--lambda1")?,
        lambda2: broadcast(&a.lambda2, spec.k, "--lambda2")?,
        beta: broadcast(&a.beta, spec.m, "--beta")?,
    };
    let vm = assemble(&spec, &params)?;
    let inv = invertibility(&vm, a.det_tol, a.cond_cap);
    let s = match a.format {
        Format::Csv => format!("{},{}\n", g6(inv.det.re), g6(inv.det.im)),
        Format::Json => {
            let v = serde_json::json!({
                "det_re": inv.det.re,
                "det_im": inv.det.im,
                "abs_det": inv.abs_det,
                "condition_estimate": inv.condition_estimate,
                "invertible": inv.invertible,
            });
            format!("{v}\n")
        }
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(0)
}

fn parse_pairs(items: &[String]) -> Result<Vec<(usize, usize)>> {
    items
        .iter()
        .map(|it| {
            let (k, m) = it
                .split_once(':')
                .ok_or_else(|| Error::validation(format!("pair '{it}' must look like k:m")))?;
            let k = k
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::validation(format!("bad k in pair '{it}'")))?;
            let m = m
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::validation(format!("bad m in pair '{it}'")))?;
            Ok((k, m))
        })
        .collect()
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let pairs: Vec<(usize, usize)> = match (a.kmax, &a.pairs) {
        (Some(n), None) => {
            if n == 0 {
                return Err(Error::validation("kmax must be at least 1"));
            }
            (1..=n).map(|k| (k, k)).collect()
        }
        (None, Some(p)) => parse_pairs(p)?,
        _ => return Err(Error::validation("pass exactly one of --kmax or --pairs")),
    };
    let family = match a.family {
        FamilyArg::Balanced => SweepFamily::Balanced,
        FamilyArg::Uniform => SweepFamily::Uniform,
    };
    let rows = sweep(
        family, &pairs, a.lambda1, a.lambda2, a.beta, a.det_tol, a.cond_cap,
    );
    let mut failed = 0usize;
    let mut s = String::new();
    match a.format {
        Format::Csv => {
            s.push_str("k,m,det_re,det_im,abs_det,invertible\n");
            for r in &rows {
                if let Some(err) = &r.error {
                    eprintln!("sweep ({}, {}): {err}", r.k, r.m);
                    failed += 1;
                    continue;
                }
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.k,
                    r.m,
                    g6(r.det.re),
                    g6(r.det.im),
                    g6(r.abs_det),
                    r.invertible
                ));
            }
        }
        Format::Json => {
            let mut arr = Vec::new();
            for r in &rows {
                if let Some(err) = &r.error {
                    eprintln!("sweep ({}, {}): {err}", r.k, r.m);
                    failed += 1;
                    continue;
                }
                arr.push(serde_json::json!({
                    "k": r.k,
                    "m": r.m,
                    "det_re": r.det.re,
                    "det_im": r.det.im,
                    "abs_det": r.abs_det,
                    "invertible": r.invertible,
                }));
            }
            s.push_str(&format!("{}\n", serde_json::Value::Array(arr)));
        }
    }
    write_out(a.out.as_deref(), &s)?;
    Ok(if failed > 0 { 1 } else { 0 })
}

fn cmd_interval(a: IntervalArgs) -> Result<i32> {
    let (l1, l2) = if a.lambda1.len() == a.lambda2.len() {
        (a.lambda1.clone(), a.lambda2.clone())
    } else if a.lambda1.len() == 1 {
        (vec![a.lambda1[0]; a.lambda2.len()], a.lambda2.clone())
    } else if a.lambda2.len() == 1 {
        (a.lambda1.clone(), vec![a.lambda2[0]; a.lambda1.len()])
    } else {
        return Err(Error::validation(format!(
            "--lambda1 and --lambda2 need matching lengths, got {} and {}",
            a.lambda1.len(),
            a.lambda2.len()
        )));
    };
    let params = SpectralParams {
        lambda1: l1,
        lambda2: l2,
        beta: a.beta.clone(),
    };
    let interval = admissible_s(&params);
    let s = match a.format {
        Format::Csv => format!("{interval}\n"),
        Format::Json => {
            let v = if interval.empty {
                serde_json::json!({"empty": true, "display": interval.to_string()})
            } else {
                serde_json::json!({
                    "empty": false,
                    "lo": interval.lo,
                    "hi": interval.hi,
                    "excludes_half": interval.excludes_half,
                    "display": interval.to_string(),
                })
            };
            format!("{v}\n")
        }
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(0)
}

fn cmd_search(a: SearchArgs) -> Result<i32> {
    let spec = load_spec(&a.config)?;
    let grid = SearchGrid {
        lo: a.lo,
        hi: a.hi,
        step: a.step,
    };
    let best = search_params(&spec, a.s, &grid, a.det_tol, a.cond_cap)?;
    let join = |v: &[f64]| v.iter().map(|x| g6(*x)).collect::<Vec<_>>().join(";");
    let s = match (&best, a.format) {
        (None, Format::Csv) => "no admissible invertible configuration on the grid\n".to_string(),
        (None, Format::Json) => format!("{}\n", serde_json::json!({"found": false})),
        (Some(r), Format::Csv) => format!(
            "lambda1,lambda2,beta,det_re,det_im,abs_det\n{},{},{},{},{},{}\n",
            join(&r.params.lambda1),
            join(&r.params.lambda2),
            join(&r.params.beta),
            g6(r.det.re),
            g6(r.det.im),
            g6(r.abs_det)
        ),
        (Some(r), Format::Json) => {
            let v = serde_json::json!({
                "found": true,
                "lambda1": r.params.lambda1,
                "lambda2": r.params.lambda2,
                "beta": r.params.beta,
                "det_re": r.det.re,
                "det_im": r.det.im,
                "abs_det": r.abs_det,
            });
            format!("{v}\n")
        }
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(0)
}

fn cmd_fracops_demo(a: DemoArgs) -> Result<i32> {
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(Error::validation(format!(
            "dt must be positive, got {}",
            a.dt
        )));
    }
    let n = (2.0 / a.dt).round() as usize + 1;
    if n > 10_000_000 {
        return Err(Error::validation(format!(
            "dt {} yields {} samples on [0, 2]; choose a coarser step",
            a.dt, n
        )));
    }
    let g = smooth_bump(n, a.dt, 0.25, 1.75)?;
    let result = if a.derivative {
        frac_derivative(&g, a.alpha)?
    } else {
        frac_integral(&g, a.alpha)?
    };
    let s = match a.format {
        Format::Csv => {
            let mut s = String::from("t,re,im\n");
            for (i, v) in result.values.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{}\n",
                    g6(result.time(i)),
                    g6(v.re),
                    g6(v.im)
                ));
            }
            s
        }
        Format::Json => {
            let t: Vec<f64> = (0..result.len()).map(|i| result.time(i)).collect();
            let re: Vec<f64> = result.values.iter().map(|v| v.re).collect();
            let im: Vec<f64> = result.values.iter().map(|v| v.im).collect();
            let v = serde_json::json!({
                "alpha": a.alpha,
                "dt": a.dt,
                "operator": if a.derivative { "derivative" } else { "integral" },
                "t": t,
                "re": re,
                "im": im,
            });
            format!("{v}\n")
        }
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(0)
}

fn cmd_trace_check(a: TraceArgs) -> Result<i32> {
    let op = TraceOp::parse(&a.op)?;
    let name = match op {
        TraceOp::V => "V",
        TraceOp::VInv => "Vinv",
        TraceOp::VMinus => "Vminus",
        TraceOp::VPlus => "Vplus",
    };
    let chk = trace_check(op, a.lambda, a.dt)?;
    let s = match a.format {
        Format::Csv => format!(
            "op {}, lambda {}, dt {}: exact factor {},{}, rel error {}\n",
            name,
            g6(chk.lambda),
            g6(chk.dt),
            g6(chk.exact_factor.re),
            g6(chk.exact_factor.im),
            g6(chk.rel_error)
        ),
        Format::Json => {
            let v = serde_json::json!({
                "op": name,
                "lambda": chk.lambda,
                "dt": chk.dt,
                "exact_re": chk.exact_factor.re,
                "exact_im": chk.exact_factor.im,
                "rel_error": chk.rel_error,
            });
            format!("{v}\n")
        }
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(0)
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let spec = load_spec(&a.config)?;
    let init = initfile::InitFile::parse(&read_text(&a.init)?)?;
    let data = init.build(spec.k, spec.m, a.h)?;
    let out = run(
        &spec,
        &data,
        a.t_final,
        a.dt,
        a.h,
        a.nonlinear,
        a.sample_every,
    )?;
    if out.far_exceeded {
        eprintln!(
            "warning: far-end amplitude reached {} of the initial amplitude; \
             the truncation window is no longer trustworthy",
            g6(out.max_far_fraction)
        );
    }
    let s = match a.format {
        Format::Csv => {
            let mut s = String::from("t,l2_total");
            for e in 1..=spec.edges() {
                s.push_str(&format!(",l2_edge_{e}"));
            }
            s.push_str(",r_value,r_deriv,r_second\n");
            for p in &out.samples {
                s.push_str(&g6(p.t));
                s.push(',');
                s.push_str(&g6(p.l2_total));
                for v in &p.l2_edges {
                    s.push(',');
                    s.push_str(&g6(*v));
                }
                s.push_str(&format!(
                    ",{},{},{}\n",
                    g6(p.r_value),
                    g6(p.r_deriv),
                    g6(p.r_second)
                ));
            }
            s
        }
        Format::Json => {
            let samples: Vec<serde_json::Value> = out
                .samples
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "t": p.t,
                        "l2_total": p.l2_total,
                        "l2_edges": p.l2_edges,
                        "r_value": p.r_value,
                        "r_deriv": p.r_deriv,
                        "r_second": p.r_second,
                    })
                })
                .collect();
            let v = serde_json::json!({
                "samples": samples,
                "max_far_fraction": out.max_far_fraction,
                "far_exceeded": out.far_exceeded,
            });
            format!("{v}\n")
        }
    };
    write_out(a.out.as_deref(), &s)?;
    Ok(0)
}
