//! Command-line front end for the coupling-problem solver.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | computation failed (degenerate input, internal check) |
//! | 2 | coupling constants not admissible |
//! | 3 | no solution exists |
//! | 4 | verification failed |
//! | 5 | convergence budget exhausted |
//! | 64 | usage error or malformed input file |
//! | 74 | I/O error |

pub mod formats;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use coupling_core::coupling::{
    solve_general, solve_with, stability_distances, verify, SolveOptions, VerifyOptions,
};
use coupling_core::peakon::{ch_forward, ch_reconstruct_u, PeakonError};
use coupling_core::scalar::{
    parse_rational, set_default_precision, Float, Rational, Scalar, ScalarKind,
};
use coupling_core::string::{
    exact_spectrum, string_recover, string_spectrum, RecoverOptions, StringError,
};
use coupling_core::{CouplingData, CouplingError, SolutionPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use formats::{FormatError, Problem};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(FormatError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    String(#[from] StringError),
    #[error(transparent)]
    Peakon(#[from] PeakonError),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("no convergence: {0}")]
    NotConverged(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e)
    }
}

fn coupling_code(e: &CouplingError) -> i32 {
    match e {
        CouplingError::NotAdmissible { .. } => 2,
        CouplingError::NoSolution { .. } => 3,
        CouplingError::BudgetExhausted { .. } => 5,
        CouplingError::ZeroLambda
        | CouplingError::DuplicateLambda { .. }
        | CouplingError::LengthMismatch { .. }
        | CouplingError::InvalidOptions(_) => 64,
        _ => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 64,
            CliError::Io { .. } => 74,
            CliError::Coupling(e) => coupling_code(e),
            CliError::String(StringError::Solver(e)) | CliError::Peakon(PeakonError::Solver(e)) => {
                coupling_code(e)
            }
            CliError::String(StringError::BudgetExhausted { .. }) => 5,
            CliError::String(_) | CliError::Peakon(_) => 1,
            CliError::VerificationFailed(_) => 4,
            CliError::NotConverged(_) => 5,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "coupling",
    version,
    about = "Solve coupling problems for entire functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Scalar kind, overriding the input file.
    #[arg(long, value_parser = formats::parse_kind)]
    kind: Option<ScalarKind>,
    /// Float precision in bits.
    #[arg(long = "prec-bits", value_name = "BITS", default_value_t = 256)]
    prec_bits: usize,
    /// Tolerance; its meaning depends on the subcommand.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a coupling problem.
    Solve {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Accept inadmissible data and decide solvability.
        #[arg(long)]
        general: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check a solution against a problem.
    Verify {
        #[arg(long, alias = "in", value_name = "PATH")]
        problem: PathBuf,
        #[arg(long, value_name = "PATH")]
        solution: PathBuf,
        /// Number of upper half-plane sample points.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Print the continued fraction, pivot and reduction of a problem.
    Cf {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Spectral data of a discrete string.
    StringForward {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Recover a discrete string from spectral data.
    StringRecover {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Spectral data of a multipeakon.
    PeakonForward {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the Camassa-Holm field of a multipeakon on a grid.
    PeakonField {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// `x0:x1:n,t0:t1:m`.
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = FieldFormat::Csv)]
        format: FieldFormat,
        #[command(flatten)]
        common: Common,
    },
    /// Solve perturbed problems converging to the input and report distances.
    Stability {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of perturbation steps.
        #[arg(long, default_value_t = 30)]
        steps: u32,
        /// Number of points on the comparison circle.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FieldFormat {
    Csv,
    Json,
}

/// Settings shared by every subcommand, validated once.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandConfig {
    pub subcommand: &'static str,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub kind: Option<ScalarKind>,
    pub prec_bits: usize,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl CommandConfig {
    fn new(subcommand: &'static str, input: &Path, common: &Common) -> Result<Self, CliError> {
        if common.prec_bits < 64 {
            return Err(CliError::Usage("--prec-bits must be at least 64".into()));
        }
        if let Some(t) = common.tol {
            if t.is_nan() || t <= 0.0 {
                return Err(CliError::Usage("--tol must be positive".into()));
            }
        }
        Ok(CommandConfig {
            subcommand,
            input: input.to_path_buf(),
            output: common.out.clone(),
            kind: common.kind,
            prec_bits: common.prec_bits,
            tol: common.tol,
            samples: None,
            seed: None,
        })
    }

    fn read_input(&self) -> Result<Vec<u8>, CliError> {
        read(&self.input)
    }

    /// Writes the result, then a one-line summary: to stdout when the result
    /// went to a file, to stderr otherwise.
    fn emit(&self, content: &str, summary: &str) -> Result<(), CliError> {
        match &self.output {
            Some(path) => {
                fs::write(path, content).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                println!("{summary}");
            }
            None => {
                print!("{content}");
                eprintln!("{summary}");
            }
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit code.
pub fn run<I, A>(argv: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve {
            input,
            general,
            common,
        } => {
            let cfg = CommandConfig::new("solve", &input, &common)?;
            set_default_precision(cfg.prec_bits);
            match formats::parse_problem(&cfg.read_input()?, cfg.kind)? {
                Problem::Rational(d) => solve_cmd(&cfg, &d, general),
                Problem::Float(d) => solve_cmd(&cfg, &d, general),
            }
        }
        Command::Verify {
            problem,
            solution,
            samples,
            common,
        } => {
            let mut cfg = CommandConfig::new("verify", &problem, &common)?;
            cfg.samples = Some(samples);
            set_default_precision(cfg.prec_bits);
            let sol = read(&solution)?;
            match formats::parse_problem(&cfg.read_input()?, cfg.kind)? {
                Problem::Rational(d) => verify_cmd(&cfg, &d, &formats::parse_solution(&sol)?),
                Problem::Float(d) => verify_cmd(&cfg, &d, &formats::parse_solution(&sol)?),
            }
        }
        Command::Cf { input, common } => {
            let cfg = CommandConfig::new("cf", &input, &common)?;
            set_default_precision(cfg.prec_bits);
            match formats::parse_problem(&cfg.read_input()?, cfg.kind)? {
                Problem::Rational(d) => cf_cmd(&cfg, &d),
                Problem::Float(d) => cf_cmd(&cfg, &d),
            }
        }
        Command::StringForward { input, common } => {
            let cfg = CommandConfig::new("string-forward", &input, &common)?;
            set_default_precision(cfg.prec_bits);
            let s = formats::parse_string::<Rational>(&cfg.read_input()?)?;
            let exact = match cfg.kind {
                Some(ScalarKind::Float) => None,
                _ => exact_spectrum(&s),
            };
            match exact {
                Some(d) => cfg.emit(
                    &formats::emit_spectral(&d),
                    &format!("{} eigenvalues (exact)", d.eigenvalues.len()),
                ),
                None if cfg.kind == Some(ScalarKind::Rational) => Err(CliError::Usage(
                    "the spectrum is irrational; use --kind float".into(),
                )),
                None => {
                    let d = string_spectrum(&s, cfg.prec_bits)?;
                    cfg.emit(
                        &formats::emit_spectral(&d),
                        &format!(
                            "{} eigenvalues ({} bits)",
                            d.eigenvalues.len(),
                            cfg.prec_bits
                        ),
                    )
                }
            }
        }
        Command::StringRecover { input, common } => {
            let cfg = CommandConfig::new("string-recover", &input, &common)?;
            set_default_precision(cfg.prec_bits);
            let bytes = cfg.read_input()?;
            match cfg.kind {
                Some(ScalarKind::Rational) => recover_cmd::<Rational>(&cfg, &bytes),
                _ => recover_cmd::<Float>(&cfg, &bytes),
            }
        }
        Command::PeakonForward { input, common } => {
            let cfg = CommandConfig::new("peakon-forward", &input, &common)?;
            set_default_precision(cfg.prec_bits);
            let mp = formats::parse_peakon(&cfg.read_input()?)?;
            let d = ch_forward(&mp)?;
            cfg.emit(
                &formats::emit_ch_spectral(&d),
                &format!(
                    "{} eigenvalues ({} bits)",
                    d.eigenvalues.len(),
                    cfg.prec_bits
                ),
            )
        }
        Command::PeakonField {
            input,
            grid,
            format,
            common,
        } => {
            let cfg = CommandConfig::new("peakon-field", &input, &common)?;
            set_default_precision(cfg.prec_bits);
            let (xs, ts) = parse_grid(&grid)?;
            let mp = formats::parse_peakon(&cfg.read_input()?)?;
            field_cmd(&cfg, &mp, &xs, &ts, format)
        }
        Command::Stability {
            input,
            seed,
            steps,
            samples,
            common,
        } => {
            let mut cfg = CommandConfig::new("stability", &input, &common)?;
            cfg.seed = Some(seed);
            cfg.samples = Some(samples);
            set_default_precision(cfg.prec_bits);
            match formats::parse_problem(&cfg.read_input()?, cfg.kind)? {
                Problem::Rational(d) => stability_cmd(&cfg, &d, steps),
                Problem::Float(d) => stability_cmd(&cfg, &d, steps),
            }
        }
    }
}

fn solve_options(cfg: &CommandConfig) -> SolveOptions {
    SolveOptions {
        rel_tol: cfg.tol.unwrap_or(SolveOptions::default().rel_tol),
    }
}

fn degree<T: Scalar>(p: &coupling_core::Polynomial<T>) -> usize {
    p.degree().unwrap_or(0)
}

fn solve_cmd<T: Scalar>(
    cfg: &CommandConfig,
    d: &CouplingData<T>,
    general: bool,
) -> Result<(), CliError> {
    let s = if general {
        solve_general(d)?
    } else {
        solve_with(d, &solve_options(cfg))?
    };
    cfg.emit(
        &formats::emit_solution(&s),
        &format!(
            "solved {} points: deg phi_minus = {}, deg phi_plus = {}",
            d.len(),
            degree(&s.phi_minus),
            degree(&s.phi_plus)
        ),
    )
}

fn verify_cmd<T: Scalar>(
    cfg: &CommandConfig,
    d: &CouplingData<T>,
    s: &SolutionPair<T>,
) -> Result<(), CliError> {
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        samples: cfg.samples.unwrap_or(defaults.samples),
        rel_tol: cfg.tol.unwrap_or(defaults.rel_tol),
        ..defaults
    };
    let report = verify(d, s, &opts);
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    let summary = if failed.is_empty() {
        "verification passed".to_string()
    } else {
        format!("verification failed: {}", failed.join(", "))
    };
    cfg.emit(&formats::emit_report(&report), &summary)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(failed.join(", ")))
    }
}

fn cf_cmd<T: Scalar>(cfg: &CommandConfig, d: &CouplingData<T>) -> Result<(), CliError> {
    let s = solve_with(d, &solve_options(cfg))?;
    let trace = s.trace.expect("the solver records a trace");
    let summary = format!(
        "{} triples, n0 = {}, delta = {}",
        trace.cf.len(),
        trace.n0,
        trace.delta
    );
    cfg.emit(&formats::emit_trace(&trace), &summary)
}

fn recover_cmd<T: Scalar>(cfg: &CommandConfig, bytes: &[u8]) -> Result<(), CliError> {
    let d = formats::parse_spectral::<T>(bytes)?;
    let defaults = RecoverOptions::default();
    let opts = RecoverOptions {
        kink_tol: cfg.tol.unwrap_or(defaults.kink_tol),
        ..defaults
    };
    let s = string_recover(&d, &opts)?;
    cfg.emit(
        &formats::emit_string(&s),
        &format!("recovered {} masses", s.len()),
    )
}

/// Parses `x0:x1:n,t0:t1:m` into `n` equally spaced `x` values and `m`
/// equally spaced `t` values (endpoints included).
fn parse_grid(spec: &str) -> Result<(Vec<Float>, Vec<Float>), CliError> {
    let bad = || {
        CliError::Usage(format!(
            "invalid --grid `{spec}` (expected x0:x1:n,t0:t1:m)"
        ))
    };
    let axis = |part: &str| -> Result<Vec<Float>, CliError> {
        let fields: Vec<&str> = part.split(':').collect();
        let [a, b, n] = fields[..] else {
            return Err(bad());
        };
        let a = parse_rational(a).map_err(|_| bad())?;
        let b = parse_rational(b).map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        let step = if n == 1 {
            Rational::zero()
        } else {
            (b - &a) / Rational::from_i64(n as i64 - 1)
        };
        Ok((0..n)
            .map(|i| {
                Float::from_rational(&(a.clone() + step.clone() * Rational::from_i64(i as i64)))
            })
            .collect())
    };
    let (x, t) = spec.split_once(',').ok_or_else(bad)?;
    Ok((axis(x)?, axis(t)?))
}

fn field_cmd(
    cfg: &CommandConfig,
    mp: &coupling_core::peakon::Multipeakon<Float>,
    xs: &[Float],
    ts: &[Float],
    format: FieldFormat,
) -> Result<(), CliError> {
    let d = ch_forward(mp)?;
    let cells: Vec<(&Float, &Float)> = ts
        .iter()
        .flat_map(|t| xs.iter().map(move |x| (t, x)))
        .collect();
    let us: Vec<Option<f64>> = cells
        .par_iter()
        .map(|(t, x)| ch_reconstruct_u(&d, x, t).ok().map(|u| u.to_f64()))
        .collect();
    let failed = us.iter().filter(|u| u.is_none()).count();
    let content = match format {
        FieldFormat::Csv => {
            let mut out = String::from("t,x,u\n");
            for ((t, x), u) in cells.iter().zip(&us) {
                let u = u.map_or_else(|| "nan".to_string(), |u| u.to_string());
                out.push_str(&format!("{},{},{}\n", t.to_f64(), x.to_f64(), u));
            }
            out
        }
        FieldFormat::Json => {
            let rows: Vec<&[Option<f64>]> = us.chunks(xs.len()).collect();
            let v = json!({
                "t": ts.iter().map(Float::to_f64).collect::<Vec<_>>(),
                "u": rows,
                "x": xs.iter().map(Float::to_f64).collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&v).expect("values are serializable");
            s.push('\n');
            s
        }
    };
    cfg.emit(
        &content,
        &format!("{} cells sampled, {} failed", cells.len(), failed),
    )
}

/// Distances between the solutions for `eta (1 + 2^-k u)` and for `eta`,
/// `k = 1..=steps`, with `u` drawn from the seed in `[-1/2, 1/2]`.
fn stability_cmd<T: Scalar>(
    cfg: &CommandConfig,
    d: &CouplingData<T>,
    steps: u32,
) -> Result<(), CliError> {
    let seed = cfg.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<Rational> = (0..d.len())
        .map(|_| Rational::from_i64(rng.random_range(-500..=500)) / Rational::from_i64(1000))
        .collect();
    let ut: Vec<T> = u.iter().map(T::from_rational).collect();
    let grid = cfg.samples.unwrap_or(32);
    let dist = stability_distances(d, &ut, steps, 1.0, grid)?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let last = dist.last().copied().unwrap_or(0.0);
    let monotone = dist.windows(2).all(|w| w[1] <= w[0]);
    let v = json!({
        "distances": dist,
        "final": last,
        "monotone": monotone,
        "seed": seed,
        "steps": steps,
        "u": u.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    });
    let mut content = serde_json::to_string_pretty(&v).expect("values are serializable");
    content.push('\n');
    cfg.emit(
        &content,
        &format!("final distance {last:e} after {steps} steps (monotone: {monotone})"),
    )?;
    if last < tol {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "final distance {last:e} is not below {tol:e}"
        )))
    }
}
