//! `eiskit` command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod parse;
mod report;
mod selftest;

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use eiskit::eisenstein::FEMode;
use eiskit::par::{self, Exec};
use eiskit::parabolic::{Partition, Permutation};
use eiskit::uniqueness::Constraint;
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(name = "eiskit", version, about = "Eisenstein series checks for SL(n, Z)")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Worker threads for the heavy loops.
    #[arg(long, global = true, env = "EISKIT_THREADS")]
    threads: Option<usize>,
    /// Run heavy loops on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    /// Write the structured report here.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Structured report format; without --output the report goes to stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// ρ-shift of a parabolic and of the Borel subgroup.
    Rho {
        #[arg(long, value_parser = parse::partition)]
        partition: Partition,
    },
    /// Langlands parameter α(s) of an Eisenstein series.
    Params(SeriesArgs),
    /// Hecke eigenvalues λ(m, s) of an Eisenstein series.
    DivisorSum {
        #[command(flatten)]
        series: SeriesArgs,
        /// Comma-separated indices.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
    /// Compare the coefficient data of (P, Φ, s) and (σP, σΦ, σs).
    CheckFe {
        #[command(flatten)]
        series: OptionalSeriesArgs,
        /// One-based block images, e.g. 2,1.
        #[arg(long, value_parser = parse::permutation)]
        sigma: Permutation,
        #[arg(long, value_enum, default_value = "symbolic")]
        mode: Mode,
        /// Indices for numeric samples.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        m: Vec<u64>,
        #[command(flatten)]
        point: PointArgs,
        /// Dirichlet terms for adjoint L-values.
        #[arg(long, default_value_t = eiskit::eisenstein::DEFAULT_DIRICHLET_TERMS)]
        terms: usize,
    },
    /// Extract a Fourier coefficient of the truncated Borel series by quadrature.
    Extract {
        #[arg(long, value_parser = parse::partition)]
        partition: Partition,
        #[arg(long, value_parser = parse::complex, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        s: Vec<Complex64>,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[command(flatten)]
        point: PointArgs,
        /// Truncation radius; defaults depend on n.
        #[arg(long)]
        radius: Option<f64>,
        /// Bruhat-cell modulus (n = 3).
        #[arg(long)]
        modulus: Option<f64>,
        /// Quadrature nodes per unipotent coordinate.
        #[arg(long)]
        nodes: Option<usize>,
        /// Relative tolerance against the predicted coefficient.
        #[arg(long, default_value_t = 5e-2)]
        tol: f64,
    },
    /// Evaluate a truncated Borel series at a point.
    Eval {
        #[arg(long, value_parser = parse::partition)]
        partition: Partition,
        #[arg(long, value_parser = parse::complex, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        s: Vec<Complex64>,
        #[command(flatten)]
        point: PointArgs,
        /// `height:<H>` or `smooth:<R>`.
        #[arg(long, default_value = "smooth:20")]
        truncation: String,
    },
    /// Decide whether an affine map of s preserves the divisor sum.
    Uniqueness {
        #[arg(long, value_parser = parse::partition)]
        partition: Partition,
        #[arg(long)]
        forms: Option<String>,
        /// JSON file with `A` and `b`; omit to list the permutation symmetries.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "weighted")]
        constraint: ConstraintArg,
        /// Random numeric cross-checks.
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample random non-symmetries and confirm each is rejected.
    Falsify {
        #[arg(long, value_parser = parse::partition)]
        partition: Partition,
        #[arg(long)]
        forms: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "weighted")]
        constraint: ConstraintArg,
    },
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[arg(long, value_parser = parse::partition)]
    partition: Partition,
    /// Comma-separated: `1`, `mock:<seed>` or a form JSON file per block.
    #[arg(long)]
    forms: Option<String>,
    /// r values, or r − 1 with the last solved from Σ nᵢsᵢ = 0.
    #[arg(long, value_parser = parse::complex, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    s: Vec<Complex64>,
}

#[derive(Debug, Args)]
struct OptionalSeriesArgs {
    #[arg(long, value_parser = parse::partition)]
    partition: Partition,
    #[arg(long)]
    forms: Option<String>,
    /// Defaults to a generic point.
    #[arg(long, value_parser = parse::complex, value_delimiter = ',', allow_hyphen_values = true)]
    s: Option<Vec<Complex64>>,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Unipotent coordinates x₁₂, x₁₃, …, row by row (default 0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// y₁, …, y_{n−1} (default all 1).
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Symbolic,
    Numeric,
}

impl From<Mode> for FEMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Symbolic => FEMode::Symbolic,
            Mode::Numeric => FEMode::Numeric,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConstraintArg {
    Weighted,
    Unweighted,
}

impl From<ConstraintArg> for Constraint {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::Weighted => Constraint::Weighted,
            ConstraintArg::Unweighted => Constraint::Unweighted,
        }
    }
}

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, files or inputs (exit 2).
    Usage(String),
    /// A check ran and failed; its report was still emitted (exit 1).
    Check,
}

impl Failure {
    pub fn usage(e: impl Display) -> Self {
        Self::Usage(e.to_string())
    }
}

/// Rendered outputs of one command.
pub struct Outcome {
    pub passed: bool,
    pub text: String,
    pub json: String,
    pub csv: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let Cli { global, command } = cli;
    if global.threads == Some(0) {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    let exec = if global.sequential { Exec::Sequential } else { Exec::Parallel };
    let outcome = match global.threads {
        Some(t) => par::with_threads(t, || dispatch(command, exec)),
        None => dispatch(command, exec),
    }?;
    emit(&global, &outcome)?;
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn dispatch(command: Command, exec: Exec) -> Result<Outcome, Failure> {
    use commands as c;
    match command {
        Command::Rho { partition } => c::rho(&partition),
        Command::Params(a) => c::params(&a.partition, a.forms.as_deref(), &a.s),
        Command::DivisorSum { series: a, m } => c::divisor_sum(&a.partition, a.forms.as_deref(), &a.s, &m),
        Command::CheckFe { series: a, sigma, mode, m, point, terms } => c::check_fe(c::FeInput {
            partition: &a.partition,
            forms: a.forms.as_deref(),
            s: a.s.as_deref(),
            sigma: &sigma,
            mode: mode.into(),
            m: &m,
            x: point.x.as_deref(),
            y: point.y.as_deref(),
            terms,
        }),
        Command::Extract { partition, s, m, point, radius, modulus, nodes, tol } => c::extract(c::ExtractInput {
            partition: &partition,
            s: &s,
            m,
            x: point.x.as_deref(),
            y: point.y.as_deref(),
            radius,
            modulus,
            nodes,
            tol,
            exec,
        }),
        Command::Eval { partition, s, point, truncation } => {
            c::eval(&partition, &s, point.x.as_deref(), point.y.as_deref(), &truncation, exec)
        }
        Command::Uniqueness { partition, forms, map, constraint, points, seed } => {
            c::uniqueness(&partition, forms.as_deref(), map.as_deref(), constraint.into(), points, seed)
        }
        Command::Falsify { partition, forms, trials, seed, constraint } => {
            c::falsify(&partition, forms.as_deref(), trials, seed, constraint.into(), exec)
        }
        Command::Selftest => selftest::run(exec),
    }
}

fn emit(global: &Global, outcome: &Outcome) -> Result<(), Failure> {
    let structured = |format: Format| match format {
        Format::Json => &outcome.json,
        Format::Csv => &outcome.csv,
    };
    match (&global.output, global.format) {
        (Some(path), format) => {
            let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
                Some("csv") => Format::Csv,
                _ => Format::Json,
            });
            fs::write(path, structured(format))
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            stdout(&outcome.text)
        }
        (None, Some(format)) => stdout(structured(format)),
        (None, None) => stdout(&outcome.text),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn stdout(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Usage(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}
