use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

use abscop_harness::{
    config, error::HarnessError, presets, render_report, run_real_data, run_study, write_results,
    ExperimentConfig, StudyResult,
};

#[derive(Parser)]
#[command(
    name = "abscop",
    version,
    about = "Seeded simulation studies and CSV analysis for copula dependence functionals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation study from a config file or preset:<name>.
    Simulate {
        /// Path to a TOML config, or preset:<name>.
        config: String,
        /// Override the number of repetitions (scale toward the full design).
        #[arg(long)]
        reps: Option<usize>,
        /// Override the per-repetition sample size.
        #[arg(long)]
        sample_size: Option<usize>,
        /// Override the number of prior proposals per repetition.
        #[arg(long)]
        proposals: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a CSV of observations with the functionals of a config.
    Analyze {
        /// CSV with a header row and d numeric columns.
        data: PathBuf,
        /// Path to a TOML config, or preset:<name>.
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Work with shipped preset configurations.
    Presets {
        #[command(subcommand)]
        command: PresetCommand,
    },
    /// Print the aggregate table of a finished study.
    Report {
        /// Result directory holding aggregate.csv.
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// List available presets.
    List,
}

fn load_config_or_preset(arg: &str) -> Result<ExperimentConfig, HarnessError> {
    if let Some(name) = arg.strip_prefix("preset:") {
        let preset = presets::find(name).ok_or_else(|| HarnessError::Config {
            field: "config".to_string(),
            constraint: format!(
                "unknown preset {name:?}; run `abscop presets list` for the catalogue"
            ),
        })?;
        config::load_config_str(preset.toml, PathBuf::from("."))
    } else {
        config::load_config(Path::new(arg))
    }
}

/// Environment overrides: output directory and parallelism only.
fn apply_env(config: &mut ExperimentConfig) -> Result<(), HarnessError> {
    if let Ok(dir) = std::env::var("ABSCOP_OUT_DIR") {
        config.output_dir = Some(PathBuf::from(dir));
    }
    if let Ok(par) = std::env::var("ABSCOP_PARALLELISM") {
        config.parallelism = par.parse().map_err(|_| HarnessError::Config {
            field: "ABSCOP_PARALLELISM".to_string(),
            constraint: format!("must be a nonnegative integer, got {par:?}"),
        })?;
    }
    Ok(())
}

fn persist(
    result: &StudyResult,
    config: &ExperimentConfig,
    out: Option<PathBuf>,
) -> Result<PathBuf, HarnessError> {
    let dir = out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&config.study));
    write_results(result, &dir)?;
    Ok(dir)
}

fn print_summary(result: &StudyResult, dir: &Path) {
    if !result.truth.is_empty() {
        for (kind, value) in &result.truth {
            println!("true {kind} = {value:.6}");
        }
    }
    for a in &result.aggregates {
        let coverage = a
            .coverage
            .map(|c| format!("{c:.3}"))
            .unwrap_or_else(|| "-".to_string());
        let length = a
            .avg_length
            .map(|l| format!("{l:.4}"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:<14} {:<16} reps {:>4}/{:<4} coverage {coverage:>6} avg length {length:>8} neg-var {}",
            a.kind, a.method, a.reps_valid, a.reps_total, a.negative_variance
        );
    }
    if !result.failures.is_empty() {
        println!(
            "{} repetition failures (see metadata.json)",
            result.failures.len()
        );
    }
    println!("results written to {}", dir.display());
}

fn run() -> Result<(), HarnessError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config: cfg,
            reps,
            sample_size,
            proposals,
            out,
        } => {
            let mut config = load_config_or_preset(&cfg)?;
            if let Some(r) = reps {
                if r == 0 {
                    return Err(HarnessError::Config {
                        field: "--reps".to_string(),
                        constraint: "must be >= 1".to_string(),
                    });
                }
                config.repetitions = r;
            }
            if let Some(n) = sample_size {
                if n < 2 {
                    return Err(HarnessError::Config {
                        field: "--sample-size".to_string(),
                        constraint: "must be >= 2".to_string(),
                    });
                }
                config.n = n;
            }
            if let Some(b) = proposals {
                if b < 100 {
                    return Err(HarnessError::Config {
                        field: "--proposals".to_string(),
                        constraint: "must be >= 100".to_string(),
                    });
                }
                config.proposals = b;
            }
            apply_env(&mut config)?;
            let result = run_study(&config)?;
            let dir = persist(&result, &config, out)?;
            print_summary(&result, &dir);
            Ok(())
        }
        Command::Analyze {
            data,
            config: cfg,
            out,
        } => {
            let mut config = load_config_or_preset(&cfg)?;
            apply_env(&mut config)?;
            let result = run_real_data(&data, &config)?;
            let dir = persist(&result, &config, out)?;
            print_summary(&result, &dir);
            Ok(())
        }
        Command::Presets { command } => match command {
            PresetCommand::List => {
                for p in presets::PRESETS {
                    println!("{:<28} {}", p.name, p.description);
                }
                Ok(())
            }
        },
        Command::Report { dir } => {
            let table = render_report(&dir)?;
            print!("{table}");
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
