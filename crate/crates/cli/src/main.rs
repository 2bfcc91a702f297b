//! `sinhlog` command-line driver: identity suites, coefficient and moment
//! queries, excess and eigenvalue reports, and Monte Carlo experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sinhlog::coeffs::{
    coefficient_via_operator, lie_coefficient, sinhlog_closed_form, CoefficientSet,
};
use sinhlog::excess::{
    eps_sweep, excess_grid, grid_csv, linspace, sweep_csv, Axis, LinearVectorFieldSet,
};
use sinhlog::identities::{corrupted_antipode, run_suite, SuiteConfig};
use sinhlog::integrate::{global_error_experiment, ExperimentConfig};
use sinhlog::moments::expect_strat_product;
use sinhlog::par::Exec;
use sinhlog::{EpsPoly, Rational, Word};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] sinhlog::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "sinhlog",
    version,
    about = "Sinh-log and stochastic Taylor integrators for linear Stratonovich systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact identity suites; exits nonzero if any family fails.
    Identities {
        /// Largest operator grade n (words up to length n + 1).
        #[arg(long, default_value_t = 5)]
        max_grade: usize,
        /// Replace the antipode with a corrupted one (negative control).
        #[arg(long, hide = true)]
        corrupt_antipode: bool,
    },
    /// Print the coefficient of J_w for a series: log, sinhlog or lie.
    Coeff {
        word: String,
        series: String,
        /// Top-grade perturbation for sinhlog: a rational like 1/6, or `eps`.
        #[arg(default_value = "0")]
        eps: String,
    },
    /// Print E(J_u J_v) as a monomial in t.
    Moment { u: String, v: String },
    /// Grid of the mean-square excess over y0 = (u0, v0), as CSV.
    Excess(ExcessArgs),
    /// Eigenvalues of b(eps) for one value or a sweep, as CSV.
    Eigs(EigsArgs),
    /// Global-error experiment from a JSON config, as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct ExcessArgs {
    /// Config whose matrices define the system (defaults to the order-one example system).
    #[arg(long)]
    system: Option<PathBuf>,
    /// u0 axis as lo:hi:points.
    #[arg(long, value_parser = parse_axis, default_value = "-40:40:81", allow_hyphen_values = true)]
    u: Axis,
    /// v0 axis as lo:hi:points.
    #[arg(long, value_parser = parse_axis, default_value = "-40:40:81", allow_hyphen_values = true)]
    v: Axis,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Truncation length n.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Remainder perturbation; the exponential Lie series is eps = -1/6.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct EigsArgs {
    /// Single value in the b(eps) parametrisation (Lie series at 1/6).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["from", "to"])]
    eps: Option<f64>,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    fine_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    no_corrections: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, points] = parts.as_slice() else {
        return Err(format!("expected lo:hi:points, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(Axis {
        lo: num(lo)?,
        hi: num(hi)?,
        points: points
            .trim()
            .parse()
            .map_err(|e| format!("{points:?}: {e}"))?,
    })
}

fn parse_word(s: &str) -> CliResult<Word> {
    Ok(s.parse::<Word>()?)
}

fn parse_rational(s: &str) -> CliResult<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| sinhlog::Error::ParseRational(s.to_string()).into())
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn order_one_system() -> LinearVectorFieldSet {
    LinearVectorFieldSet::from_rows(&[
        vec![vec![0.105, -7.43], vec![0.03, 0.345]],
        vec![vec![-0.065, -9.44], vec![-0.005, 0.265]],
    ])
    .expect("valid example system")
}

fn coeff(word: &str, series: &str, eps: &str) -> CliResult<String> {
    let w = parse_word(word)?;
    if w.is_empty() {
        return Err(sinhlog::Error::EmptyWord.into());
    }
    match series {
        "sinhlog" if eps.trim() == "eps" => {
            Ok(sinhlog_closed_form(&w, &EpsPoly::eps())?.to_string())
        }
        "sinhlog" => Ok(sinhlog_closed_form(&w, &parse_rational(eps)?)?.to_string()),
        "log" | "lie" if !parse_rational(eps)?.eq(&Rational::from_integer(0)) => {
            Err(CliError::Usage(format!(
                "eps applies to the sinhlog series only, not {series}"
            )))
        }
        "log" => Ok(coefficient_via_operator(&w, &CoefficientSet::Log)?.to_string()),
        "lie" => Ok(lie_coefficient(&w)?.to_string()),
        other => Err(CliError::Usage(format!(
            "unknown series {other:?}; expected log, sinhlog or lie"
        ))),
    }
}

fn excess(args: &ExcessArgs) -> CliResult<()> {
    let vf = match &args.system {
        Some(path) => ExperimentConfig::from_json(&read(path)?)?.system()?,
        None => order_one_system(),
    };
    let grid = excess_grid(
        &vf,
        args.u,
        args.v,
        args.h,
        args.order,
        args.eps,
        exec(args.sequential),
    )?;
    emit(&grid_csv(&grid), args.out.as_deref())
}

fn eigs(args: &EigsArgs) -> CliResult<()> {
    let values = match args.eps {
        Some(e) => vec![e],
        None => linspace(args.from, args.to, args.steps),
    };
    let rows = eps_sweep(&values, Exec::Sequential)?;
    emit(&sweep_csv(&rows), args.out.as_deref())
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut config = ExperimentConfig::from_json(&read(&args.config)?)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(paths) = args.paths {
        config.paths = paths;
    }
    if let Some(fine) = args.fine_steps {
        config.fine_steps = fine;
    }
    if let Some(eps) = args.eps {
        config.eps = eps;
    }
    if let Some(order) = args.order {
        config.order = order;
    }
    if args.no_corrections {
        config.corrections = false;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from));
    let report = global_error_experiment(&config, exec(args.sequential))?;
    emit(&report.to_csv(), out.as_deref())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Identities {
            max_grade,
            corrupt_antipode,
        } => {
            let mut config = SuiteConfig {
                max_grade,
                ..SuiteConfig::default()
            };
            if corrupt_antipode {
                config.antipode = corrupted_antipode;
            }
            let report = run_suite(&config)?;
            print!("{report}");
            return Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Command::Coeff { word, series, eps } => println!("{}", coeff(&word, &series, &eps)?),
        Command::Moment { u, v } => println!(
            "{}",
            expect_strat_product(&parse_word(&u)?, &parse_word(&v)?)
        ),
        Command::Excess(args) => excess(&args)?,
        Command::Eigs(args) => eigs(&args)?,
        Command::Simulate(args) => simulate(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a = parse_axis("-1.5:2:7").unwrap();
        assert_eq!((a.lo, a.hi, a.points), (-1.5, 2.0, 7));
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("a:2:3").is_err());
    }

    #[test]
    fn coefficient_queries() {
        assert_eq!(coeff("12", "sinhlog", "0").unwrap(), "1/2*12 - 1/2*21");
        assert_eq!(coeff("1", "sinhlog", "0").unwrap(), "1*1");
        assert_eq!(coeff("12", "lie", "0").unwrap(), "1/4*12 - 1/4*21");
        assert!(coeff("13x", "sinhlog", "0").is_err());
        assert!(coeff("12", "magnus", "0").is_err());
        assert!(coeff("12", "lie", "1/3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
