//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a `verify` check failed, 2 domain error,
//! 64 usage error, 70 convergence or internal error.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use maxmean::dist::{self, Depth, ShiftedParam};
use maxmean::mc::{self, SimConfig, WeakConvergenceOptions};
use maxmean::ruin::{self, RiskModel};
use maxmean::series::{self, SeriesPolicy};
use maxmean::verify::{self, Suite, VerifyOptions};
use maxmean::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_SOFTWARE: u8 = 70;

#[derive(Parser)]
#[command(
    name = "maxmean",
    version,
    about = "Running maximum of exponential sample means"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form quantity at a point.
    Eval(EvalArgs),
    /// Ruin probability and minimum initial capital.
    #[command(subcommand)]
    Ruin(RuinCommand),
    /// Partial sums of Σ k^(k−1)/k!·x^(k−1)·e^(−kx) on a grid (CSV).
    Table(TableArgs),
    /// Monte Carlo estimates.
    Simulate(SimulateArgs),
    /// Run a verification suite and report pass/fail per check.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Subject {
    Cdf,
    Pdf,
    Quantile,
    CdfN,
    CdfShifted,
    QuantileShifted,
    CdfM2,
    Moment,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(value_enum)]
    subject: Subject,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    /// Sequence depth: a positive integer or `inf`.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Evaluate `cdf` at n = inf by the certified series instead of the closed form.
    #[arg(long)]
    series: bool,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_terms: usize,
}

#[derive(Subcommand)]
enum RuinCommand {
    /// Ruin probability ψ(u).
    Prob {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
    },
    /// Smallest initial capital with ruin probability α.
    MinCapital {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        /// Solve the capital equation by bisection instead of the closed form.
        #[arg(long)]
        bisection: bool,
    },
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 0.0)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    /// Number of series terms; omitted means the certified infinite sum.
    #[arg(long)]
    terms: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimTarget {
    /// P(max_{i≤n} S_i/(i+λ) ≤ x).
    RunningMax,
    CdfInf,
    CdfM2,
    Ruin,
    WeakConvergence,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    target: SimTarget,
    /// Grid points, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    u: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 100_000)]
    depth: usize,
    #[arg(long, default_value_t = 1_000)]
    horizon: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Largest degree of the exact volume check.
    #[arg(long, default_value_t = 12)]
    n_max: u32,
    /// Index n of the weak-convergence test.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Second index for the weak-convergence test; also checks that the KS
    /// statistic does not increase from n to it.
    #[arg(long)]
    n_compare: Option<usize>,
    /// Trajectories of the weak-convergence test.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Samples of each simulation check.
    #[arg(long, default_value_t = 1_000_000)]
    sim_samples: usize,
}

enum Failure {
    Lib(Error),
    Usage(String),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// `%.12g`-style rendering for text output.
fn fmt_sig(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let fixed = format!("{v:.decimals$}");
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn need<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn parse_depth(n: Option<String>, default: Option<Depth>) -> CliResult<Depth> {
    match (n, default) {
        (Some(s), _) => s
            .parse::<Depth>()
            .map_err(|e| Failure::Usage(e.to_string())),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Failure::Usage("missing required flag --n".into())),
    }
}

fn depth_json(n: Depth) -> Value {
    match n {
        Depth::Finite(n) => json!(n),
        Depth::Infinite => json!("inf"),
    }
}

/// Writes a single result. Text mode prints the value alone; JSON and CSV
/// carry the inputs alongside it.
fn emit(
    out: &mut impl Write,
    format: Format,
    fields: Map<String, Value>,
    value: f64,
) -> CliResult<()> {
    match format {
        Format::Text => writeln!(out, "{}", fmt_sig(value))?,
        Format::Json => {
            let mut obj = fields;
            obj.insert("value".into(), json!(value));
            writeln!(out, "{}", Value::Object(obj))?;
        }
        Format::Csv => {
            let mut keys: Vec<String> = fields.keys().cloned().collect();
            keys.push("value".into());
            writeln!(out, "{}", keys.join(","))?;
            let mut cells: Vec<String> = fields
                .values()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            cells.push(value.to_string());
            writeln!(out, "{}", cells.join(","))?;
        }
    }
    Ok(())
}

fn fields(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn cmd_eval(a: EvalArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    let subject = a
        .subject
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let mut f = vec![("subject", json!(subject))];
    let value = match a.subject {
        Subject::Cdf => {
            let x = need(a.x, "x")?;
            let n = parse_depth(a.n, Some(Depth::Infinite))?;
            f.extend([("x", json!(x)), ("n", depth_json(n))]);
            match n {
                Depth::Infinite if a.series => {
                    dist::cdf_inf_series(x, &SeriesPolicy::new(a.abs_tol, a.max_terms)?)?
                }
                Depth::Infinite => dist::cdf_inf(x),
                Depth::Finite(n) => dist::cdf_finite(x, n)?,
            }
        }
        Subject::CdfN => {
            let x = need(a.x, "x")?;
            let n = parse_depth(a.n, None)?;
            f.extend([("x", json!(x)), ("n", depth_json(n))]);
            match n {
                Depth::Finite(n) => dist::cdf_finite(x, n)?,
                Depth::Infinite => dist::cdf_inf(x),
            }
        }
        Subject::Pdf => {
            let x = need(a.x, "x")?;
            let d = dist::pdf_inf(x);
            f.extend([("x", json!(x)), ("right_limit", json!(d.right_limit))]);
            d.value
        }
        Subject::Quantile => {
            let u = need(a.u, "u")?;
            f.push(("u", json!(u)));
            dist::quantile_inf(u)?
        }
        Subject::CdfShifted => {
            let x = need(a.x, "x")?;
            let lambda = need(a.lambda, "lambda")?;
            let n = parse_depth(a.n, Some(Depth::Infinite))?;
            f.extend([
                ("x", json!(x)),
                ("n", depth_json(n)),
                ("lambda", json!(lambda)),
            ]);
            let p = ShiftedParam::new(lambda)?;
            match n {
                Depth::Finite(n) => dist::cdf_shifted(x, n, p)?,
                Depth::Infinite => dist::cdf_shifted_inf(x, p),
            }
        }
        Subject::QuantileShifted => {
            let u = need(a.u, "u")?;
            let lambda = need(a.lambda, "lambda")?;
            f.extend([("u", json!(u)), ("lambda", json!(lambda))]);
            dist::quantile_shifted_inf(u, ShiftedParam::new(lambda)?)?
        }
        Subject::CdfM2 => {
            let x = need(a.x, "x")?;
            f.push(("x", json!(x)));
            dist::cdf_m2(x)
        }
        Subject::Moment => {
            let alpha = need(a.alpha, "alpha")?;
            let n = parse_depth(a.n, None)?;
            f.extend([("n", depth_json(n)), ("alpha", json!(alpha))]);
            dist::moment(n, alpha)?
        }
    };
    emit(out, format, fields(&f), value)
}

fn cmd_ruin(c: RuinCommand, format: Format, out: &mut impl Write) -> CliResult<()> {
    match c {
        RuinCommand::Prob { theta, u } => {
            let v = ruin::ruin_probability(&RiskModel::new(theta, u)?)?;
            emit(
                out,
                format,
                fields(&[("theta", json!(theta)), ("u", json!(u))]),
                v,
            )
        }
        RuinCommand::MinCapital {
            alpha,
            theta,
            bisection,
        } => {
            let v = if bisection {
                ruin::min_capital_root(alpha, theta)?
            } else {
                ruin::min_capital(alpha, theta)?
            };
            emit(
                out,
                format,
                fields(&[("alpha", json!(alpha)), ("theta", json!(theta))]),
                v,
            )
        }
    }
}

fn cmd_table(a: TableArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    if a.points == 0 {
        return Err(Error::Domain("points must be at least 1".into()).into());
    }
    if !(a.x_min >= 0.0) || !(a.x_max >= a.x_min) || !a.x_max.is_finite() {
        return Err(Error::Domain("the grid needs 0 <= x-min <= x-max < inf".into()).into());
    }
    // Loose enough to certify the enclosure at x = 1 itself.
    let policy = SeriesPolicy::new(1e-10, 10_000_000)?;
    let step = if a.points > 1 {
        (a.x_max - a.x_min) / (a.points - 1) as f64
    } else {
        0.0
    };
    let mut rows = Vec::with_capacity(a.points);
    for i in 0..a.points {
        let x = a.x_min + step * i as f64;
        let closed = 1.0 - dist::cdf_inf(x);
        let (sum, bound) = match a.terms {
            Some(terms) => (
                series::partial_sum(x, terms),
                series::tail_upper_bound(x, terms),
            ),
            None => match series::identity_sum(x, &policy) {
                Ok(s) => (s.value(), s.half_width()),
                // Not reached for the default policy; kept as a one-sided fallback.
                Err(Error::Truncation { terms, .. }) => (
                    series::partial_sum(x, terms),
                    series::tail_upper_bound(x, terms),
                ),
                Err(e) => return Err(e.into()),
            },
        };
        rows.push((x, sum, bound, closed));
    }
    match format {
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|(x, s, b, c)| json!({"x": x, "series": s, "tail_bound": b, "closed_form": c}))
                .collect();
            writeln!(out, "{}", Value::Array(list))?;
        }
        Format::Csv | Format::Text => {
            writeln!(out, "x,series,tail_bound,closed_form")?;
            for (x, s, b, c) in rows {
                if format == Format::Csv {
                    writeln!(out, "{x},{s},{b},{c}")?;
                } else {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        fmt_sig(x),
                        fmt_sig(s),
                        fmt_sig(b),
                        fmt_sig(c)
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn estimate_json(x: Option<f64>, e: &mc::EstimateWithCI) -> Value {
    let mut v = json!({
        "estimate": e.estimate,
        "std_error": e.std_error,
        "n": e.n,
        "bias_bound": e.bias_bound,
    });
    if let Some(x) = x {
        v["x"] = json!(x);
    }
    v
}

fn cmd_simulate(a: SimulateArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    let cfg = SimConfig {
        seed: a.seed,
        samples: a.samples,
        depth: a.depth,
        workers: a.workers,
        horizon: a.horizon,
    };
    let grid_needed = || {
        if a.x.is_empty() {
            Err(Failure::Usage("missing required flag --x".into()))
        } else {
            Ok(a.x.clone())
        }
    };
    let estimates: Vec<(Option<f64>, mc::EstimateWithCI)> = match a.target {
        SimTarget::RunningMax => {
            let grid = grid_needed()?;
            let e = mc::estimate_cdf_running_max(&cfg, a.n, ShiftedParam::new(a.lambda)?, &grid)?;
            grid.into_iter().map(Some).zip(e).collect()
        }
        SimTarget::CdfInf => {
            let grid = grid_needed()?;
            let e = mc::estimate_cdf_inf(&cfg, &grid)?;
            grid.into_iter().map(Some).zip(e).collect()
        }
        SimTarget::CdfM2 => {
            let grid = grid_needed()?;
            let e = mc::estimate_cdf_m2(&cfg, &grid)?;
            grid.into_iter().map(Some).zip(e).collect()
        }
        SimTarget::Ruin => {
            let e = mc::estimate_ruin(&cfg, &RiskModel::new(a.theta, a.u)?)?;
            vec![(None, e)]
        }
        SimTarget::WeakConvergence => {
            let r = mc::weak_convergence_test(&cfg, a.n, &WeakConvergenceOptions::default())?;
            match format {
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string(&r).expect("plain struct"))?
                }
                Format::Csv => {
                    writeln!(out, "n,samples,statistic,statistic_upper,critical_value,bias_bound,truncated,pass")?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        r.n,
                        r.samples,
                        r.statistic,
                        r.statistic_upper,
                        r.critical_value,
                        r.bias_bound,
                        r.truncated,
                        r.pass
                    )?;
                }
                Format::Text => {
                    writeln!(out, "n               {}", r.n)?;
                    writeln!(out, "samples         {}", r.samples)?;
                    writeln!(out, "KS statistic    {}", fmt_sig(r.statistic))?;
                    writeln!(out, "KS upper bound  {}", fmt_sig(r.statistic_upper))?;
                    writeln!(out, "critical (1%)   {}", fmt_sig(r.critical_value))?;
                    writeln!(out, "bias bound      {}", fmt_sig(r.bias_bound))?;
                    writeln!(out, "capped paths    {}", r.truncated)?;
                    writeln!(out, "pass            {}", r.pass)?;
                }
            }
            return Ok(());
        }
    };
    match format {
        Format::Json => {
            let list: Vec<Value> = estimates
                .iter()
                .map(|(x, e)| estimate_json(*x, e))
                .collect();
            writeln!(out, "{}", Value::Array(list))?;
        }
        Format::Csv => {
            writeln!(out, "x,estimate,std_error,n,bias_bound")?;
            for (x, e) in &estimates {
                let x = x.map(|v| v.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{x},{},{},{},{}",
                    e.estimate, e.std_error, e.n, e.bias_bound
                )?;
            }
        }
        Format::Text => {
            for (x, e) in &estimates {
                let prefix = x
                    .map(|v| format!("x = {}  ", fmt_sig(v)))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{prefix}estimate {}  std_error {}  bias_bound {}  n {}",
                    fmt_sig(e.estimate),
                    fmt_sig(e.std_error),
                    fmt_sig(e.bias_bound),
                    e.n
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs, format: Format, out: &mut impl Write) -> CliResult<bool> {
    let suite: Suite = a.suite.parse()?;
    let opts = VerifyOptions {
        seed: a.seed,
        workers: a.workers,
        n_max: a.n_max,
        weak_n: a.n,
        weak_n_compare: a.n_compare,
        weak_samples: a.samples,
        sim_samples: a.sim_samples,
        ..VerifyOptions::default()
    };
    let report = verify::run(suite, &opts)?;
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("plain struct")
        )?,
        Format::Csv => {
            writeln!(out, "name,pass,value,target,tolerance,bias_bound")?;
            for c in &report.checks {
                writeln!(
                    out,
                    "\"{}\",{},{},{},{},{}",
                    c.name.replace('"', "\"\""),
                    c.pass,
                    c.value,
                    c.target,
                    c.tolerance,
                    c.bias_bound
                )?;
            }
        }
        Format::Text => {
            for c in &report.checks {
                writeln!(
                    out,
                    "[{}] {}: value {} target {} tolerance {} bias {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    fmt_sig(c.value),
                    fmt_sig(c.target),
                    fmt_sig(c.tolerance),
                    fmt_sig(c.bias_bound)
                )?;
            }
            let passed = report.checks.iter().filter(|c| c.pass).count();
            writeln!(
                out,
                "suite {}: {passed}/{} checks passed (seed {})",
                report.suite,
                report.checks.len(),
                report.seed
            )?;
        }
    }
    Ok(report.pass())
}

fn run(cli: Cli) -> CliResult<bool> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let format = cli.format;
    match cli.command {
        Command::Eval(a) => cmd_eval(a, format, &mut out)?,
        Command::Ruin(c) => cmd_ruin(c, format, &mut out)?,
        Command::Table(a) => cmd_table(a, format, &mut out)?,
        Command::Simulate(a) => cmd_simulate(a, format, &mut out)?,
        Command::Verify(a) => return cmd_verify(a, format, &mut out),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) | Error::Solvency { .. } => ExitCode::from(EXIT_DOMAIN),
                _ => ExitCode::from(EXIT_SOFTWARE),
            }
        }
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SOFTWARE)
        }
    }
}
