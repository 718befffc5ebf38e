//! Command-line front end for adamxlab: run experiments, run the
//! verification suites, write CSV traces and render SVG plots.

pub mod config;
pub mod error;
pub mod plot;
pub mod trace_csv;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use adamxlab_core::harness::{run_oco, RecordMode, RegretTrace};
use adamxlab_core::verify::{run_suite, Overrides, Suite, SuiteReport};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

pub use config::{ConfigArgs, ExperimentConfig};
pub use error::{CliError, CliResult, EXIT_CHECK_FAILED, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};

/// Caps the number of batch worker threads.
pub const THREADS_ENV: &str = "ADAMXLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "adamxlab", version, about = "AMSGrad / AdamX / Adam regret experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteChoice {
    Counterexample,
    Bounds,
    Lemmas,
    All,
}

impl From<SuiteChoice> for Suite {
    fn from(c: SuiteChoice) -> Self {
        match c {
            SuiteChoice::Counterexample => Suite::Counterexample,
            SuiteChoice::Bounds => Suite::Bounds,
            SuiteChoice::Lemmas => Suite::Lemmas,
            SuiteChoice::All => Suite::All,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its trace CSV.
    Run(ConfigArgs),
    /// Run verification checks and print a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: SuiteChoice,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta1: Option<f64>,
        #[arg(long)]
        beta2: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long, short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Plot one or more trace CSVs to an SVG file.
    Plot {
        #[arg(required = true, value_name = "CSV")]
        inputs: Vec<PathBuf>,
        #[arg(long, short = 'o', value_name = "SVG")]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = plot::Metric::AvgRegret)]
        metric: plot::Metric,
    },
    /// Run a JSON array of experiment configs concurrently.
    Batch {
        #[arg(value_name = "CONFIGS")]
        configs: PathBuf,
        /// Directory for configs without an `output_path`.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// What `run` prints once the trace is written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub horizon: usize,
    pub regret: f64,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "T={} R(T)={} R(T)/T={}",
            self.horizon,
            self.regret,
            self.regret / self.horizon as f64
        )
    }
}

/// Runs `config` and returns the full trace.
pub fn execute(config: &ExperimentConfig) -> CliResult<RegretTrace> {
    config.validate()?;
    let problem = config.build_problem()?;
    Ok(run_oco(
        problem.as_ref(),
        config.optimizer.into(),
        &config.hyper(),
        config.steps,
        None,
        RecordMode::Full,
    )?)
}

/// Runs `config` and writes its CSV to `out`.
pub fn cmd_run_to<W: Write>(config: &ExperimentConfig, out: W) -> CliResult<RunSummary> {
    let trace = execute(config)?;
    trace_csv::write_trace(&trace, config.record_full, out)?;
    Ok(RunSummary {
        horizon: trace.horizon,
        regret: trace.regret(),
    })
}

/// Runs `config` and writes its CSV to `config.output_path`.
pub fn cmd_run(config: &ExperimentConfig) -> CliResult<RunSummary> {
    let path = config
        .output_path
        .as_ref()
        .ok_or_else(|| CliError::Usage("output_path is required".into()))?;
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
    cmd_run_to(config, std::io::BufWriter::new(file))
}

pub fn cmd_verify(suite: Suite, overrides: &Overrides) -> CliResult<SuiteReport> {
    Ok(run_suite(suite, overrides)?)
}

pub fn cmd_plot(inputs: &[PathBuf], output: &Path, metric: plot::Metric) -> CliResult<()> {
    let mut series = Vec::new();
    for path in inputs {
        let table = trace_csv::read_trace_file(path)?;
        let ys = table.column(metric.column()).expect("fixed column");
        let points = table.rows.iter().zip(ys).map(|(r, y)| (r.t as f64, y)).collect();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        series.push(plot::Series { label, points });
    }
    std::fs::write(output, plot::render_svg(&series, metric))
        .map_err(|e| CliError::io(format!("cannot write {}", output.display()), e))
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

/// Runs every config concurrently. Results come back in input order.
pub fn cmd_batch(
    configs: &[ExperimentConfig],
    out_dir: &Path,
) -> CliResult<Vec<CliResult<RunSummary>>> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let resolved: Vec<ExperimentConfig> = configs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut c = c.clone();
            if c.output_path.is_none() {
                c.output_path = Some(out_dir.join(format!("run-{k}.csv")));
            }
            c
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    for c in &resolved {
        if !seen.insert(c.output_path.clone()) {
            return Err(CliError::Usage(format!(
                "two configs write to {}",
                c.output_path.as_ref().unwrap().display()
            )));
        }
    }
    Ok(pool.install(|| resolved.par_iter().map(cmd_run).collect()))
}

fn load_batch(path: &Path) -> CliResult<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid batch file {}: {e}", path.display())))
}

/// Writes to stdout, ignoring a closed pipe (e.g. output piped into `head`).
fn print_line(s: &str) {
    let _ = writeln!(std::io::stdout(), "{s}");
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            match &config.output_path {
                Some(_) => print_line(&cmd_run(&config)?.to_string()),
                None => {
                    let stdout = std::io::stdout();
                    let summary = cmd_run_to(&config, stdout.lock())?;
                    eprintln!("{summary}");
                }
            }
            Ok(())
        }
        Command::Verify {
            suite,
            alpha,
            beta1,
            beta2,
            lambda,
            output,
        } => {
            let overrides = Overrides {
                alpha,
                beta1,
                beta2,
                lambda,
            };
            let report = cmd_verify(suite.into(), &overrides)?;
            let json = serde_json::to_string_pretty(&report).expect("reports serialize");
            match output {
                Some(p) => std::fs::write(&p, json + "\n")
                    .map_err(|e| CliError::io(format!("cannot write {}", p.display()), e))?,
                None => print_line(&json),
            }
            eprintln!("{} checks, {} failed", report.total, report.failed);
            if report.passed {
                Ok(())
            } else {
                let failing: Vec<_> = report.failures().collect();
                Err(CliError::CheckFailed(format!(
                    "failing checks: {}",
                    serde_json::to_string(&failing).expect("reports serialize")
                )))
            }
        }
        Command::Plot {
            inputs,
            output,
            metric,
        } => cmd_plot(&inputs, &output, metric),
        Command::Batch { configs, out_dir } => {
            let configs = load_batch(&configs)?;
            for c in &configs {
                c.validate()?;
            }
            let results = cmd_batch(&configs, &out_dir)?;
            let mut first_err = None;
            for (k, r) in results.into_iter().enumerate() {
                match r {
                    Ok(s) => print_line(&format!("[{k}] {s}")),
                    Err(e) => {
                        eprintln!("[{k}] error: {e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
