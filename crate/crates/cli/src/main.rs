//! Command-line front end: single solves, error tables, benchmarks and the
//! property verification suite.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use decomp1d::bench::{run_benchmark_with, BenchReport};
use decomp1d::norms::{
    h1_seminorm, sup_norm, tail_bound, tail_sum, theorem_bound_table, ErrorReport, Reference,
};
use decomp1d::problem::KAPPA_SAMPLES;
use decomp1d::sweep::{compute_error_report, error_table, Execution};
use decomp1d::{
    builtin_problem, fem_solve, solve_improved, solve_original, Method, MethodConfig, Problem,
    QuadratureRule, BUILTIN_IDS,
};

#[derive(Parser, Debug)]
#[command(
    name = "decomp1d",
    version,
    about = "Log-coefficient decomposition solver for -(k u')' = f on (0, L)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one configuration and print its error report.
    Solve(SolveArgs),
    /// Error grid over N and M (rows N, columns M).
    Table(TableArgs),
    /// Operation counts, median wall time and errors of all three methods.
    Bench(BenchArgs),
    /// Run the property checks and print one pass/fail line each.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Original,
    Improved,
    Direct,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Original => Method::Original,
            MethodArg::Improved => Method::Improved,
            MethodArg::Direct => Method::DirectFem,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Tail,
    Theorem,
    Equivalence,
    Decay,
    Order,
}

#[derive(Args, Debug)]
struct Common {
    /// Built-in problem.
    #[arg(long, default_value = "ex1", value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_IDS))]
    problem: String,

    /// Gauss points per element.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=5))]
    quad: u8,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,

    /// Number of elements.
    #[arg(long = "N", value_parser = positive)]
    n: usize,

    /// Truncation order (ignored by the direct solve).
    #[arg(long = "M", value_parser = positive)]
    m: Option<usize>,

    #[arg(long, value_enum, default_value_t = MethodArg::Improved)]
    method: MethodArg,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    common: Common,

    /// Comma-separated element counts.
    #[arg(long = "N-list", value_delimiter = ',', value_parser = positive, default_value = "8,32,128,512,2048")]
    n_list: Vec<usize>,

    /// Comma-separated truncation orders.
    #[arg(long = "M-list", value_delimiter = ',', value_parser = positive, default_value = "2,4,6,8,10")]
    m_list: Vec<usize>,

    #[arg(long, value_enum, default_value_t = MethodArg::Improved)]
    method: MethodArg,

    /// Evaluate the cells one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,

    #[arg(long = "N", value_parser = positive, default_value_t = 1 << 15)]
    n: usize,

    #[arg(long = "M", value_parser = positive, default_value_t = 10)]
    m: usize,

    /// Timed repetitions per method (at least 3).
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(3..))]
    reps: u32,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,

    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,

    /// Orders checked against the H1 truncation bound.
    #[arg(long = "M-list", value_delimiter = ',', value_parser = positive, default_value = "1,2,3,4,5,6,7,8")]
    m_list: Vec<usize>,

    /// Element count for the discrete checks.
    #[arg(long = "N", value_parser = positive, default_value_t = 128)]
    n: usize,

    /// Element counts of the convergence-order check.
    #[arg(long = "N-list", value_delimiter = ',', value_parser = positive, default_value = "32,64,128,256,512,1024,2048")]
    n_list: Vec<usize>,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// `d.dddd(-ee)`, e.g. `1.2839(-02)`.
fn sci_short(v: f64) -> String {
    if v == 0.0 {
        return "0.0000(+00)".into();
    }
    let s = format!("{v:.4e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}({sign}{:02})", exp.abs())
}

fn n_label(n: usize) -> String {
    if n.is_power_of_two() {
        format!("2^{}", n.trailing_zeros())
    } else {
        n.to_string()
    }
}

struct Output {
    sink: Box<dyn Write>,
}

impl Output {
    fn open(path: &Option<PathBuf>) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { sink })
    }

    fn line(&mut self, s: impl AsRef<str>) -> Result<()> {
        writeln!(self.sink, "{}", s.as_ref())?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.sink.flush()?;
        Ok(())
    }
}

fn problem(common: &Common) -> Result<Problem> {
    Ok(builtin_problem(&common.problem)?)
}

fn report_text(r: &ErrorReport) -> String {
    format!(
        "{:<5} N = {:<7} M = {:<3} {:<9} l2 = {}  h1 = {}  reference = {}",
        r.problem,
        r.n_elems,
        r.m,
        r.method.as_str(),
        sci_short(r.l2_error),
        sci_short(r.h1_error),
        r.reference.as_str()
    )
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let method = Method::from(args.method);
    let m = match (method, args.m) {
        (Method::DirectFem, m) => m.unwrap_or(0),
        (_, Some(m)) => m,
        (_, None) => bail!(UsageError(format!(
            "--M is required for the {method} method"
        ))),
    };
    let p = problem(&args.common)?;
    let cfg = MethodConfig::new(method, args.n, m, args.common.quad as usize)
        .map_err(|e| UsageError(e.to_string()))?;
    let reference = Reference::for_problem(&p)?;
    let report = compute_error_report(&p, &reference, &cfg)?;

    let mut out = Output::open(&args.common.out)?;
    match args.common.format {
        Format::Csv => {
            out.line(ErrorReport::CSV_HEADER)?;
            out.line(report.to_csv_row())?;
        }
        Format::Text => out.line(report_text(&report))?,
    }
    out.finish()
}

fn cmd_table(args: &TableArgs) -> Result<()> {
    let ns = sorted(args.n_list.clone());
    let ms = sorted(args.m_list.clone());
    let p = problem(&args.common)?;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let rows = error_table(
        &p,
        args.method.into(),
        &ns,
        &ms,
        args.common.quad as usize,
        exec,
    )?;

    let mut out = Output::open(&args.common.out)?;
    match args.common.format {
        Format::Csv => {
            out.line(ErrorReport::CSV_HEADER)?;
            for r in &rows {
                out.line(r.to_csv_row())?;
            }
        }
        Format::Text => {
            out.line(format!(
                "{} {} L2 errors ({} reference)",
                p.name(),
                Method::from(args.method),
                rows[0].reference.as_str()
            ))?;
            let mut header = format!("{:<10}", "");
            for m in &ms {
                header.push_str(&format!(" {:>12}", format!("M={m}")));
            }
            out.line(header)?;
            for (i, n) in ns.iter().enumerate() {
                let mut line = format!("{:<10}", format!("N = {}", n_label(*n)));
                for r in &rows[i * ms.len()..(i + 1) * ms.len()] {
                    line.push_str(&format!(" {:>12}", sci_short(r.l2_error)));
                }
                out.line(line)?;
            }
        }
    }
    out.finish()
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let p = problem(&args.common)?;
    let report: BenchReport = run_benchmark_with(
        &p,
        args.n,
        args.m,
        args.reps as usize,
        args.common.quad as usize,
    )?;
    let mut out = Output::open(&args.common.out)?;
    match args.common.format {
        Format::Csv => {
            out.line(BenchReport::CSV_HEADER)?;
            for row in report.csv_rows() {
                out.line(row)?;
            }
        }
        Format::Text => {
            out.line(format!(
                "{} N = {} M = {}",
                report.problem, report.n_elems, report.m
            ))?;
            out.line(format!(
                "{:<9} {:>6} {:>10} {:>14} {:>14} {:>12}",
                "method", "solves", "assemblies", "factorizations", "median ms", "l2_error"
            ))?;
            for b in &report.methods {
                out.line(format!(
                    "{:<9} {:>6} {:>10} {:>14} {:>14.3} {:>12}",
                    b.method.as_str(),
                    b.counts.solves,
                    b.counts.assemblies,
                    b.counts.factorizations,
                    b.wall_ns_median as f64 / 1e6,
                    sci_short(b.l2_error)
                ))?;
            }
        }
    }
    out.finish()
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verify_tail() -> Check {
    let mut bad = Vec::new();
    for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for m in 1..=15 {
            if tail_sum(x, m, 200) >= tail_bound(x, m) {
                bad.push(format!("x={x} M={m}"));
            }
        }
    }
    Check {
        name: "tail-bound",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "75 tails below bound".into()
        } else {
            format!("violations: {}", bad.join(", "))
        },
    }
}

fn verify_theorem(p: &Problem, ms: &[usize], out: &mut Output) -> Result<Check> {
    let m_max = *ms.last().expect("non-empty list");
    let table = theorem_bound_table(p, m_max, 1e-10)?;
    let mut bad = Vec::new();
    for c in table.iter().filter(|c| ms.contains(&c.m)) {
        out.line(format!(
            "  M = {:<3} |u - U_M|_H1 = {:.6e}  bound = {:.6e}",
            c.m, c.h1_error, c.bound
        ))?;
        if c.h1_error > c.bound {
            bad.push(c.m.to_string());
        }
    }
    Ok(Check {
        name: "theorem-bound",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} orders within bound", ms.len())
        } else {
            format!("bound exceeded for M = {}", bad.join(", "))
        },
    })
}

fn verify_equivalence(p: &Problem, n: usize, quad: &QuadratureRule) -> Result<Check> {
    let o = solve_original(p, n, 1, quad)?;
    let i = solve_improved(p, n, 1, quad)?;
    let d = o.u_m.max_abs_diff(&i.u_m)?;
    Ok(Check {
        name: "m1-equivalence",
        pass: d <= 1e-12,
        detail: format!("N = {n}, max nodal difference {d:.3e} (limit 1e-12)"),
    })
}

fn verify_decay(p: &Problem, n: usize, quad: &QuadratureRule) -> Result<Check> {
    let psi_sup = sup_norm(&p.psi(), p.length(), KAPPA_SAMPLES);
    let r = solve_original(p, n, 6, quad)?;
    let u0 = h1_seminorm(&r.u0);
    let mut factor = 1.0;
    let mut worst: f64 = 0.0;
    for (j, term) in r
        .terms
        .as_ref()
        .expect("original keeps terms")
        .iter()
        .enumerate()
    {
        factor *= psi_sup / (j + 1) as f64;
        let bound = 1.05 * factor * u0;
        worst = worst.max(if bound > 0.0 {
            h1_seminorm(term) / bound
        } else {
            0.0
        });
    }
    Ok(Check {
        name: "factorial-decay",
        pass: worst <= 1.0,
        detail: format!("N = {n}, j = 1..6, max |u_j|_H1 / bound = {worst:.3}"),
    })
}

fn verify_order(p: &Problem, ns: &[usize], quad: &QuadratureRule) -> Result<Check> {
    if ns.len() < 2 {
        bail!(UsageError("--N-list needs at least two entries".into()));
    }
    let reference = Reference::for_problem(p)?;
    let errs = ns
        .iter()
        .map(|&n| Ok(reference.errors(&fem_solve(p, n, quad)?)?.0))
        .collect::<Result<Vec<f64>>>()?;
    let orders: Vec<f64> = errs
        .windows(2)
        .zip(ns.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    Ok(Check {
        name: "direct-l2-order",
        pass: orders.iter().all(|o| (1.9..=2.1).contains(o)),
        detail: format!(
            "observed orders {}",
            orders
                .iter()
                .map(|o| format!("{o:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let p = problem(&args.common)?;
    let quad = QuadratureRule::gauss_legendre(args.common.quad as usize)?;
    let ms = sorted(args.m_list.clone());
    let ns = sorted(args.n_list.clone());
    let mut out = Output::open(&args.common.out)?;
    let want = |s: Suite| args.suite == Suite::All || args.suite == s;

    out.line(format!("verify {}", p.name()))?;
    let mut checks = Vec::new();
    if want(Suite::Tail) {
        checks.push(verify_tail());
    }
    if want(Suite::Theorem) {
        checks.push(verify_theorem(&p, &ms, &mut out)?);
    }
    if want(Suite::Equivalence) {
        checks.push(verify_equivalence(&p, args.n, &quad)?);
    }
    if want(Suite::Decay) {
        checks.push(verify_decay(&p, args.n, &quad)?);
    }
    if want(Suite::Order) {
        checks.push(verify_order(&p, &ns, &quad)?);
    }
    for c in &checks {
        out.line(format!(
            "{} {:<16} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ))?;
    }
    out.finish()?;
    Ok(checks.iter().all(|c| c.pass))
}

/// Marks errors in the request itself rather than in the computation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a).map(|_| true),
        Command::Table(a) => cmd_table(a).map(|_| true),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
