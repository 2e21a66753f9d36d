//! Argument parsing and command execution for the `skellam-markov` binary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use skellam_markov::bounds::{
    self, read_csv, write_csv, write_json, SweepOptions, SweepRow, TheoremId,
};
use skellam_markov::checks::{run_suite, CheckSuite, SuiteReport};
use skellam_markov::{
    build_component_with, exact_distribution, skellam_pmf, ChainParams, ComponentName, KVariant,
    NormKind, SkellamParams, TruncationBudget,
};

/// Environment variable that takes precedence over `--jobs`.
pub const JOBS_ENV: &str = "SKELLAM_MARKOV_JOBS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Clap(#[from] clap::Error),

    #[error(transparent)]
    Library(#[from] skellam_markov::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),

    #[error("{0} row(s) could not be computed")]
    RowErrors(usize),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        use skellam_markov::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Clap(e) => e.exit_code(),
            CliError::Library(E::Constraint(_)) => 3,
            CliError::Library(E::InvalidInput(_) | E::Unsupported(_)) => 2,
            CliError::Library(_) => 4,
            CliError::ChecksFailed(_) | CliError::RowErrors(_) => 5,
            CliError::Io { .. } => 6,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

#[derive(Debug, Parser)]
#[command(
    name = "skellam-markov",
    version,
    about = "Skellam approximation of symmetric Markov sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChainArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p1: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p2: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p3: f64,
    /// Admit 0 ≤ α, β < 1/2 instead of the strict region, with a warning.
    #[arg(long)]
    exploratory: bool,
}

#[derive(Debug, Args)]
struct TolArg {
    /// Truncation budget per operation.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Skellam pmf at one point.
    Pmf {
        #[arg(long)]
        l1: f64,
        #[arg(long)]
        l2: f64,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact law of the n-step sum as JSON.
    Exact {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A named component measure as JSON.
    Build {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        component: String,
        #[arg(long, default_value = "displayed")]
        k_variant: String,
        #[command(flatten)]
        tol: TolArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// An approximant of the n-step law as JSON.
    Approx {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        approx: String,
        #[command(flatten)]
        tol: TolArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One distance and bound-shape row.
    Compare {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        approx: String,
        #[arg(long)]
        metric: String,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distances and bound shapes over a parameter grid.
    Sweep {
        /// CSV file with columns alpha,beta,n and optionally p1,p2,p3.
        #[arg(long, conflicts_with_all = ["alpha", "beta", "n"])]
        grid: Option<PathBuf>,
        /// Comma-separated alpha values.
        #[arg(long)]
        alpha: Option<String>,
        /// Comma-separated beta values.
        #[arg(long)]
        beta: Option<String>,
        /// Comma-separated step counts.
        #[arg(long)]
        n: Option<String>,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        p1: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        p2: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        p3: f64,
        #[arg(long)]
        exploratory: bool,
        #[arg(long)]
        approx: String,
        /// Comma-separated norms: tv, local, wasserstein, lr:R, caplr:R.
        #[arg(long, default_value = "tv,local,wasserstein")]
        metrics: String,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Log-log slopes from a sweep CSV.
    Ratefit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        approx: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Randomized inequality and identity suites.
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Where and how results are written.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Output {
    fn plain(path: Option<PathBuf>) -> Self {
        Self {
            format: Format::Json,
            path,
        }
    }
}

impl From<OutputArgs> for Output {
    fn from(a: OutputArgs) -> Self {
        Self {
            format: a.format,
            path: a.out,
        }
    }
}

/// A parsed and validated command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Pmf {
        params: SkellamParams,
        k: i64,
        out: Output,
    },
    Exact {
        chain: ChainParams,
        n: u64,
        out: Output,
    },
    Build {
        chain: ChainParams,
        component: ComponentName,
        k_variant: KVariant,
        tol: f64,
        out: Output,
    },
    Approx {
        chain: ChainParams,
        n: u64,
        approximant: TheoremId,
        tol: f64,
        out: Output,
    },
    Compare {
        chain: ChainParams,
        n: u64,
        approximant: TheoremId,
        metric: NormKind,
        tol: f64,
        out: Output,
    },
    Sweep {
        grid: Vec<(ChainParams, u64)>,
        approximant: TheoremId,
        metrics: Vec<NormKind>,
        options: SweepOptions,
        out: Output,
    },
    RateFit {
        input: PathBuf,
        metric: Option<String>,
        approximant: Option<String>,
        out: Output,
    },
    Check {
        suite: CheckSuite,
        cases: usize,
        seed: u64,
        out: Output,
    },
}

fn flag_error(flag: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value for --{flag}: {err}"))
}

fn chain_params(alpha: f64, beta: f64, p: [f64; 3], exploratory: bool) -> CliResult<ChainParams> {
    let made = if exploratory {
        ChainParams::exploratory(alpha, beta, p[0], p[1], p[2])
    } else {
        ChainParams::new(alpha, beta, p[0], p[1], p[2])
    };
    made.map_err(|e| {
        let text = e.to_string();
        let flag = if text.contains("alpha") {
            "--alpha"
        } else if text.contains("beta") {
            "--beta"
        } else {
            "--p1/--p2/--p3"
        };
        match e {
            skellam_markov::Error::Constraint(msg) => {
                skellam_markov::Error::Constraint(format!("{flag}: {msg}")).into()
            }
            other => other.into(),
        }
    })
}

impl ChainArgs {
    fn validate(&self) -> CliResult<ChainParams> {
        chain_params(
            self.alpha,
            self.beta,
            [self.p1, self.p2, self.p3],
            self.exploratory,
        )
    }
}

fn check_tol(tol: f64) -> CliResult<f64> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(flag_error("tol", format!("{tol} must be finite and >= 0")))
    }
}

fn parse_flag<T: std::str::FromStr>(flag: &str, s: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| flag_error(flag, e))
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse_flag(flag, x))
        .collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(flag_error(flag, "empty list"));
    }
    Ok(items)
}

/// `SKELLAM_MARKOV_JOBS`, when set and non-empty, overrides `--jobs`.
pub fn resolve_jobs(flag: usize, env: Option<&str>) -> CliResult<usize> {
    match env.map(str::trim) {
        Some(v) if !v.is_empty() => v
            .parse()
            .map_err(|e| CliError::Usage(format!("invalid {JOBS_ENV} `{v}`: {e}"))),
        _ => Ok(flag),
    }
}

#[derive(Debug, Deserialize)]
struct GridLine {
    alpha: f64,
    beta: f64,
    p1: Option<f64>,
    p2: Option<f64>,
    p3: Option<f64>,
    n: u64,
}

fn read_grid(path: &Path, p: [f64; 3], exploratory: bool) -> CliResult<Vec<(ChainParams, u64)>> {
    let file =
        File::open(path).map_err(io_err(format!("cannot open grid file {}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut grid = Vec::new();
    for (i, line) in reader.deserialize::<GridLine>().enumerate() {
        let line = line.map_err(|e| flag_error("grid", format!("line {}: {e}", i + 2)))?;
        let start = [
            line.p1.unwrap_or(p[0]),
            line.p2.unwrap_or(p[1]),
            line.p3.unwrap_or(p[2]),
        ];
        grid.push((
            chain_params(line.alpha, line.beta, start, exploratory)?,
            line.n,
        ));
    }
    if grid.is_empty() {
        return Err(flag_error("grid", "no grid points"));
    }
    Ok(grid)
}

/// Parses `argv` (without the program name) into a validated [`Command`].
pub fn parse_command<I, S>(argv: I) -> CliResult<Command>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("skellam-markov"))
        .chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args)?;
    Ok(match cli.command {
        Sub::Pmf { l1, l2, k, out } => Command::Pmf {
            params: SkellamParams::new(l1, l2).map_err(|e| flag_error("l1/--l2", e))?,
            k,
            out: Output::plain(out),
        },
        Sub::Exact { chain, n, out } => Command::Exact {
            chain: chain.validate()?,
            n,
            out: Output::plain(out),
        },
        Sub::Build {
            chain,
            component,
            k_variant,
            tol,
            out,
        } => Command::Build {
            chain: chain.validate()?,
            component: parse_flag("component", &component)?,
            k_variant: match k_variant.as_str() {
                "displayed" => KVariant::Displayed,
                "proof" => KVariant::Proof,
                other => {
                    return Err(flag_error(
                        "k-variant",
                        format!("`{other}` is not displayed or proof"),
                    ))
                }
            },
            tol: check_tol(tol.tol)?,
            out: Output::plain(out),
        },
        Sub::Approx {
            chain,
            n,
            approx,
            tol,
            out,
        } => Command::Approx {
            chain: chain.validate()?,
            n,
            approximant: parse_flag("approx", &approx)?,
            tol: check_tol(tol.tol)?,
            out: Output::plain(out),
        },
        Sub::Compare {
            chain,
            n,
            approx,
            metric,
            tol,
            output,
        } => {
            let chain = chain.validate()?;
            let approximant: TheoremId = parse_flag("approx", &approx)?;
            let metric: NormKind = parse_flag("metric", &metric)?;
            bounds::bound_shape(approximant, metric, &chain, n.max(1))
                .map_err(|e| flag_error("metric", e))?;
            if n == 0 {
                return Err(flag_error("n", "must be >= 1"));
            }
            Command::Compare {
                chain,
                n,
                approximant,
                metric,
                tol: check_tol(tol.tol)?,
                out: output.into(),
            }
        }
        Sub::Sweep {
            grid,
            alpha,
            beta,
            n,
            p1,
            p2,
            p3,
            exploratory,
            approx,
            metrics,
            jobs,
            tol,
            output,
        } => {
            let grid = match grid {
                Some(path) => read_grid(&path, [p1, p2, p3], exploratory)?,
                None => {
                    let missing =
                        |flag: &str| CliError::Usage(format!("sweep needs --grid or --{flag}"));
                    let alphas: Vec<f64> =
                        parse_list("alpha", &alpha.ok_or_else(|| missing("alpha"))?)?;
                    let betas: Vec<f64> =
                        parse_list("beta", &beta.ok_or_else(|| missing("beta"))?)?;
                    let ns: Vec<u64> = parse_list("n", &n.ok_or_else(|| missing("n"))?)?;
                    let mut grid = Vec::new();
                    for &a in &alphas {
                        for &b in &betas {
                            let cp = chain_params(a, b, [p1, p2, p3], exploratory)?;
                            grid.extend(ns.iter().map(|&n| (cp, n)));
                        }
                    }
                    grid
                }
            };
            Command::Sweep {
                grid,
                approximant: parse_flag("approx", &approx)?,
                metrics: parse_list("metrics", &metrics)?,
                options: SweepOptions {
                    budget: check_tol(tol.tol)?,
                    jobs: resolve_jobs(jobs, std::env::var(JOBS_ENV).ok().as_deref())?,
                },
                out: output.into(),
            }
        }
        Sub::Ratefit {
            input,
            metric,
            approx,
            output,
        } => Command::RateFit {
            input,
            metric,
            approximant: approx,
            out: output.into(),
        },
        Sub::Check {
            suite,
            cases,
            seed,
            output,
        } => Command::Check {
            suite: parse_flag("suite", &suite)?,
            cases: if cases == 0 {
                return Err(flag_error("cases", "must be >= 1"));
            } else {
                cases
            },
            seed,
            out: output.into(),
        },
    })
}

/// Formats `x` with 12 significant digits.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn with_output<F>(path: Option<&Path>, stdout: &mut dyn Write, f: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(io_err(format!("cannot create {}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(io_err(format!("cannot write {}", p.display())))
        }
        None => f(stdout).map_err(io_err("cannot write to stdout")),
    }
}

fn warn_chain(chain: &ChainParams, stderr: &mut dyn Write) {
    if let Some(w) = chain.warning() {
        let _ = writeln!(stderr, "warning: {w}");
    }
}

#[derive(Debug, Serialize)]
struct FitRow {
    approximant: String,
    metric: String,
    alpha: f64,
    beta: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    points: usize,
    slope: f64,
    intercept: f64,
}

fn rate_fits(
    input: &Path,
    metric: Option<&str>,
    approximant: Option<&str>,
) -> CliResult<(Vec<FitRow>, usize)> {
    let file = File::open(input).map_err(io_err(format!("cannot open {}", input.display())))?;
    let rows = read_csv(file).map_err(|e| flag_error("input", e))?;
    let mut skipped = 0;
    let mut groups: Vec<(FitRow, Vec<(f64, f64)>)> = Vec::new();
    for row in rows {
        if metric.is_some_and(|m| m != row.metric)
            || approximant.is_some_and(|a| a != row.approximant)
        {
            continue;
        }
        if !(row.lhs.is_finite() && row.lhs > 0.0) {
            skipped += 1;
            continue;
        }
        let key = (
            row.approximant.as_str(),
            row.metric.as_str(),
            [row.alpha, row.beta, row.p1, row.p2, row.p3],
        );
        let slot = groups.iter_mut().find(|(g, _)| {
            (
                g.approximant.as_str(),
                g.metric.as_str(),
                [g.alpha, g.beta, g.p1, g.p2, g.p3],
            ) == key
        });
        match slot {
            Some((_, pts)) => pts.push((row.n as f64, row.lhs)),
            None => groups.push((
                FitRow {
                    approximant: row.approximant.clone(),
                    metric: row.metric.clone(),
                    alpha: row.alpha,
                    beta: row.beta,
                    p1: row.p1,
                    p2: row.p2,
                    p3: row.p3,
                    points: 0,
                    slope: f64::NAN,
                    intercept: f64::NAN,
                },
                vec![(row.n as f64, row.lhs)],
            )),
        }
    }
    if groups.is_empty() {
        return Err(flag_error("input", "no usable rows after filtering"));
    }
    let mut out = Vec::new();
    for (mut fit, pts) in groups {
        let f = bounds::rate_fit(&pts)?;
        fit.points = pts.len();
        fit.slope = f.slope;
        fit.intercept = f.intercept;
        out.push(fit);
    }
    Ok((out, skipped))
}

fn write_fits(fits: &[FitRow], format: Format, w: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, fits).map_err(io::Error::other)?;
            writeln!(w)
        }
        Format::Csv => {
            writeln!(
                w,
                "approximant,metric,alpha,beta,p1,p2,p3,points,slope,intercept"
            )?;
            for f in fits {
                writeln!(
                    w,
                    "{},{},{:?},{:?},{:?},{:?},{:?},{},{:?},{:?}",
                    f.approximant,
                    f.metric,
                    f.alpha,
                    f.beta,
                    f.p1,
                    f.p2,
                    f.p3,
                    f.points,
                    f.slope,
                    f.intercept
                )?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RecordOut<'a> {
    suite: &'a str,
    case: usize,
    name: &'a str,
    value: f64,
    limit: Option<f64>,
    ok: bool,
}

fn write_report(report: &SuiteReport, format: Format, w: &mut dyn Write) -> io::Result<()> {
    let suite = report.suite.as_str();
    let records: Vec<RecordOut> = report
        .records
        .iter()
        .map(|r| RecordOut {
            suite,
            case: r.case,
            name: &r.name,
            value: r.value,
            limit: (!r.is_diagnostic()).then_some(r.limit),
            ok: r.ok,
        })
        .collect();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &records).map_err(io::Error::other)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["suite", "case", "name", "value", "limit", "ok"])?;
            for r in &records {
                csv.write_record([
                    r.suite.to_string(),
                    r.case.to_string(),
                    r.name.to_string(),
                    format!("{:?}", r.value),
                    r.limit.map(|l| format!("{l:?}")).unwrap_or_default(),
                    r.ok.to_string(),
                ])?;
            }
            csv.flush()
        }
    }
}

fn write_rows(rows: &[SweepRow], format: Format, w: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(rows, w),
        Format::Json => {
            write_json(rows, &mut *w)?;
            writeln!(w)
        }
    }
}

fn finish_rows(rows: &[SweepRow], stderr: &mut dyn Write) -> CliResult<()> {
    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    if failed.is_empty() {
        return Ok(());
    }
    for row in &failed {
        let _ = writeln!(
            stderr,
            "warning: alpha={} beta={} n={} {}: {}",
            row.alpha,
            row.beta,
            row.n,
            row.metric,
            row.error.as_deref().unwrap_or_default()
        );
    }
    let _ = writeln!(
        stderr,
        "warning: {} of {} rows failed",
        failed.len(),
        rows.len()
    );
    Err(CliError::RowErrors(failed.len()))
}

/// Executes a validated command, writing results to `stdout` or the
/// requested file and diagnostics to `stderr`.
pub fn run_command(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Pmf { params, k, out } => {
            let value = skellam_pmf(*params, *k);
            with_output(out.path.as_deref(), stdout, |w| {
                writeln!(w, "{}", format_significant(value))
            })
        }
        Command::Exact { chain, n, out } => {
            warn_chain(chain, stderr);
            let f = exact_distribution(chain, *n);
            with_output(out.path.as_deref(), stdout, |w| {
                writeln!(w, "{}", f.to_json())
            })
        }
        Command::Build {
            chain,
            component,
            k_variant,
            tol,
            out,
        } => {
            warn_chain(chain, stderr);
            let mut tb = TruncationBudget::new(*tol);
            let m = build_component_with(chain, *component, *k_variant, &mut tb)?;
            with_output(out.path.as_deref(), stdout, |w| {
                writeln!(w, "{}", m.to_json())
            })
        }
        Command::Approx {
            chain,
            n,
            approximant,
            tol,
            out,
        } => {
            warn_chain(chain, stderr);
            let mut tb = TruncationBudget::new(*tol);
            let m = approximant.approximant(chain, *n, &mut tb)?;
            with_output(out.path.as_deref(), stdout, |w| {
                writeln!(w, "{}", m.to_json())
            })
        }
        Command::Compare {
            chain,
            n,
            approximant,
            metric,
            tol,
            out,
        } => {
            warn_chain(chain, stderr);
            let options = SweepOptions {
                budget: *tol,
                jobs: 1,
            };
            let rows = bounds::sweep(&[(*chain, *n)], *approximant, &[*metric], options)?;
            with_output(out.path.as_deref(), stdout, |w| {
                write_rows(&rows, out.format, w)
            })?;
            finish_rows(&rows, stderr)
        }
        Command::Sweep {
            grid,
            approximant,
            metrics,
            options,
            out,
        } => {
            if let Some(cp) = grid.iter().map(|(cp, _)| cp).find(|cp| cp.exploratory) {
                warn_chain(cp, stderr);
            }
            let rows = bounds::sweep(grid, *approximant, metrics, *options)?;
            with_output(out.path.as_deref(), stdout, |w| {
                write_rows(&rows, out.format, w)
            })?;
            finish_rows(&rows, stderr)
        }
        Command::RateFit {
            input,
            metric,
            approximant,
            out,
        } => {
            let (fits, skipped) = rate_fits(input, metric.as_deref(), approximant.as_deref())?;
            if skipped > 0 {
                let _ = writeln!(
                    stderr,
                    "warning: skipped {skipped} rows without a positive lhs"
                );
            }
            with_output(out.path.as_deref(), stdout, |w| {
                write_fits(&fits, out.format, w)
            })
        }
        Command::Check {
            suite,
            cases,
            seed,
            out,
        } => {
            let report = run_suite(*suite, *cases, *seed)?;
            with_output(out.path.as_deref(), stdout, |w| {
                write_report(&report, out.format, w)
            })?;
            let failed = report.failures().count();
            let _ = writeln!(
                stderr,
                "{suite}: {} checks, {failed} failed, max value/limit {:.6}",
                report.records.len(),
                report.worst_ratio()
            );
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
            Ok(())
        }
    }
}
