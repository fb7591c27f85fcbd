//! Command-line front end: model files in, JSON reports and trajectories out.

pub mod error;
pub mod evolve;
pub mod model_file;
pub mod report;
pub mod settings;
pub mod suite;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use qmsdf_core::analysis::{analyze, AnalysisOptions};
use qmsdf_core::Tolerance;

pub use error::{CliError, Result, EXIT_ANALYSIS_ERROR, EXIT_PASS, EXIT_USAGE, EXIT_VERDICT_FAIL};
use evolve::Picture;
use model_file::{parse_matrix, read_json, ModelFile};
use report::AnalysisReport;
use suite::SuiteOptions;

const AFTER_HELP: &str = "\
Exit codes:
  0  every verdict passed (or was skipped with a stated reason)
  1  usage error: bad flags, unreadable or malformed input files, invalid tolerances
  2  analysis error: a computation failed, or a verdict is \"error\"
  3  at least one verdict is \"fail\" (and none is \"error\")

Tolerances: defaults < the model file's \"tol\" object < LINDBLAD_TOL_<FIELD>
environment variables (e.g. LINDBLAD_TOL_RESIDUAL=1e-9) < --tol FIELD=VALUE.
Fields: rank_rel, eig_cluster_abs, residual, hermitian, unitary, faithful_min_eig.";

#[derive(Debug, Parser)]
#[command(name = "qmsdf", version, about = "Decoherence-free subalgebras and asymptotics of finite-dimensional quantum Markov semigroups", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analysis with a JSON report.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        /// Tolerance override FIELD=VALUE (repeatable).
        #[arg(long = "tol", value_name = "FIELD=VALUE")]
        tol: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout; the verdict table goes to stdout.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Analysis with verdict-only output.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "tol", value_name = "FIELD=VALUE")]
        tol: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evolve an observable or a state and print the trajectory.
    Evolve {
        #[arg(long)]
        model: PathBuf,
        /// JSON d×d array of [re, im] pairs.
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated times, e.g. 0,1,10.
        #[arg(long)]
        times: String,
        #[arg(long, value_enum)]
        picture: Picture,
        #[arg(long)]
        csv_out: Option<PathBuf>,
        /// Also write the trajectory as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
        #[arg(long = "tol", value_name = "FIELD=VALUE")]
        tol: Vec<String>,
    },
    /// Sample and analyze random models.
    RandomSuite {
        #[arg(long)]
        count: usize,
        /// Comma-separated dimensions in 2..=8.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample from the detailed-balance family and reject models without a faithful invariant state.
        #[arg(long)]
        require_faithful: bool,
        #[arg(long = "tol", value_name = "FIELD=VALUE")]
        tol: Vec<String>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

/// Output streams and environment of one invocation.
pub struct Io<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    pub env: Vec<(String, String)>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn tolerance(file: &std::collections::BTreeMap<String, f64>, env: &[(String, String)], cli: &[String]) -> Result<Tolerance> {
    let env = settings::env_overrides(env.iter().cloned())?;
    let cli = cli.iter().map(|s| settings::parse_override(s)).collect::<Result<Vec<_>>>()?;
    settings::resolve(file, &env, &cli)
}

/// Report for the model in `path`.
pub fn analyze_file(path: &Path, tol_args: &[String], seed: u64, env: &[(String, String)]) -> Result<AnalysisReport> {
    let file = ModelFile::read(path)?;
    let tol = tolerance(&file.tol, env, tol_args)?;
    let model = file.model(&tol)?;
    let options = AnalysisOptions {
        tol,
        seed,
        ..AnalysisOptions::default()
    };
    Ok(AnalysisReport::new(&analyze(&model, &options)?))
}

fn verdict_exit(report: &AnalysisReport) -> i32 {
    if report.summary["error"] > 0 {
        EXIT_ANALYSIS_ERROR
    } else if report.summary["fail"] > 0 {
        EXIT_VERDICT_FAIL
    } else {
        EXIT_PASS
    }
}

fn execute(command: Command, io: &mut Io<'_>) -> Result<i32> {
    match command {
        Command::Analyze { model, tol, seed, json_out } => {
            let report = analyze_file(&model, &tol, seed, &io.env)?;
            match json_out {
                Some(path) => {
                    write_file(&path, &report.to_json())?;
                    emit(io.stdout, &report.verdict_lines())?;
                }
                None => emit(io.stdout, &report.to_json())?,
            }
            Ok(verdict_exit(&report))
        }
        Command::Verify { model, tol, seed } => {
            let report = analyze_file(&model, &tol, seed, &io.env)?;
            emit(io.stdout, &report.verdict_lines())?;
            Ok(verdict_exit(&report))
        }
        Command::Evolve {
            model,
            input,
            times,
            picture,
            csv_out,
            json_out,
            tol,
        } => {
            let file = ModelFile::read(&model)?;
            let tol = tolerance(&file.tol, &io.env, &tol)?;
            let m = file.model(&tol)?;
            let x = parse_matrix(&read_json(&input)?, "input")?;
            let times = evolve::parse_times(&times)?;
            let trajectory = evolve::evolve(&m, &x, &times, picture, &tol)?;
            let csv = evolve::to_csv(&trajectory);
            if let Some(path) = json_out {
                write_file(&path, &evolve::to_json(&trajectory))?;
            }
            match csv_out {
                Some(path) => write_file(&path, &csv)?,
                None => emit(io.stdout, &csv)?,
            }
            Ok(EXIT_PASS)
        }
        Command::RandomSuite {
            count,
            dims,
            seed,
            require_faithful,
            tol,
            json_out,
        } => {
            let tol = tolerance(&Default::default(), &io.env, &tol)?;
            let opts = SuiteOptions {
                count,
                dims,
                seed,
                require_faithful,
                tol,
            };
            let report = suite::run_suite(&opts)?;
            let json = {
                let mut s = serde_json::to_string_pretty(&report).expect("suite report serializes");
                s.push('\n');
                s
            };
            match json_out {
                Some(path) => write_file(&path, &json)?,
                None => emit(io.stdout, &json)?,
            }
            emit(
                io.stderr,
                &format!(
                    "{}/{} models passed; N(T) = M_r passed on {}/{}\n",
                    report.passed, report.count, report.nt_equals_reversible_pass, report.count
                ),
            )?;
            Ok(if report.errored > 0 {
                EXIT_ANALYSIS_ERROR
            } else if report.failed > 0 {
                EXIT_VERDICT_FAIL
            } else {
                EXIT_PASS
            })
        }
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = io.stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                // --help and --version
                let _ = io.stdout.write_all(text.as_bytes());
                EXIT_PASS
            };
        }
    };
    match execute(cli.command, io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}
