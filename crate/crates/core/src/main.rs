use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lumb::agent::parse_epoch_log;
use lumb::harness::{run_experiment_with_jobs, ExperimentConfig};
use lumb::validation::{run_suite, Suite};
use lumb::{optimize_exact, Error, Lumb, OptProblem, ProblemInstance};

#[derive(Parser)]
#[command(name = "lumb", version, about = "Linear-utility MNL bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config field, e.g. `--set n_seeds=1`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a validation suite: choice-model, geometric, optimizer, estimator or coverage.
    Validate {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Optimal assortment of an instance under its true utilities.
    Optimize {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        capacity: usize,
    },
    /// Rebuild the LUMB estimate from an epoch log.
    Replay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        epochs: PathBuf,
    },
    /// Write plot-ready CSVs for one or more results directories.
    ExportPlot {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit 2 for user input problems, 1 for everything else.
fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Config(_) | Error::Json(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn runtime_failure(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(1)
}

fn read(path: &PathBuf) -> Result<String, Error> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.clone()));
    }
    Ok(fs::read_to_string(path)?)
}

fn load_config(path: &PathBuf, overrides: &[String]) -> Result<ExperimentConfig, Error> {
    let text = read(path).map_err(|e| Error::Config(e.to_string()))?;
    let config = ExperimentConfig::from_json_with_overrides(&text, overrides)?;
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides, jobs } => {
            let config = match load_config(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(Error::Config(e.to_string())),
            };
            let outcome =
                run_experiment_with_jobs(&config, jobs.max(1)).and_then(|res| res.write(&config, &config.output));
            match outcome {
                Ok(()) => {
                    println!("wrote {}", config.output.display());
                    ExitCode::SUCCESS
                }
                Err(e) => runtime_failure(e),
            }
        }
        Command::Validate { suite, seed } => {
            let suite = match suite.parse::<Suite>() {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            match run_suite(suite, seed) {
                Ok(report) => {
                    println!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => runtime_failure(e),
            }
        }
        Command::Optimize { instance, capacity } => {
            let result = read(&instance)
                .and_then(|text| ProblemInstance::from_json(&text))
                .and_then(|inst| optimize_exact(&OptProblem::new(inst.utilities(), inst.rewards(), capacity)?));
            match result {
                Ok(sol) => {
                    println!("{}", serde_json::json!({ "assortment": sol.assortment, "value": sol.value }));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Replay { config, instance, epochs } => {
            let result = (|| {
                let config = load_config(&config, &[])?;
                let inst = ProblemInstance::from_json(&read(&instance)?)?;
                let records = parse_epoch_log(&read(&epochs)?)?;
                let agent = Lumb::replay(config.lumb_config(), inst.features(), inst.rewards(), inst.dim(), &records)?;
                Ok::<_, Error>(serde_json::json!({ "epochs": records.len(), "theta": agent.theta() }))
            })();
            match result {
                Ok(doc) => {
                    println!("{doc}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::ExportPlot { results, out } => match lumb::plot::export_plot(&results, &out) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => runtime_failure(e),
        },
    }
}
