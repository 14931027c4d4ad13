//! `riskbandit`: run experiments, detect changes in bit streams, print bound
//! tables and generate instances.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
//! Errors go to standard error as a single line starting with `error:`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riskbandit::env::{generate_instance, write_instance_csv, GeneratorParams};
use riskbandit::harness::{bounds_table, detect_stream, read_bits, run_experiment, write_outputs, ExperimentConfig};
use riskbandit::policies::DetectorKind;

#[derive(Debug, Parser)]
#[command(name = "riskbandit", version, about = "Risk-averse piecewise-stationary bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed (overrides `base_seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Replication count (overrides `replications`).
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Run a change detector over a one-column CSV of bits.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Detector::Rbocpd)]
        detector: Detector,
    },
    /// Print the theory bounds for a config's instance.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a random switching instance as CSV.
    GenEnv {
        #[arg(long = "A")]
        arms: usize,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long = "K")]
        changes: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Minimum segment length (default T / (4 (K + 1))).
        #[arg(long)]
        min_seg: Option<usize>,
        /// Apply every change to all arms at once.
        #[arg(long)]
        global: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Detector {
    Rbocpd,
    Glr,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<riskbandit::Error> for Failure {
    fn from(e: riskbandit::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(2)
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    if !path.is_file() {
        return Err(Failure::Usage(format!("config not found: {}", path.display())));
    }
    Ok(ExperimentConfig::load(path)?)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            reps,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(r) = reps {
                if r == 0 {
                    return Err(Failure::Usage("--reps must be at least 1".into()));
                }
                cfg.replications = r;
            }
            let summary = run_experiment(&cfg)?;
            write_outputs(&summary, &cfg.output_dir)?;
            println!("algorithm,final_mean_regret,final_std,mean_restarts,forced_fraction");
            for a in &summary.algorithms {
                println!(
                    "{},{:.4},{:.4},{:.3},{:.5}",
                    a.algorithm,
                    a.final_mean(),
                    a.final_std(),
                    a.mean_restarts(),
                    a.forced_fraction
                );
            }
            eprintln!("wrote results to {}", cfg.output_dir.display());
            Ok(())
        }
        Command::Detect {
            input,
            delta,
            detector,
        } => {
            if !input.is_file() {
                return Err(Failure::Usage(format!("input not found: {}", input.display())));
            }
            let bits = read_bits(&input)?;
            let kind = match detector {
                Detector::Rbocpd => DetectorKind::Rbocpd,
                Detector::Glr => DetectorKind::Glr,
            };
            let fired = detect_stream(&bits, delta, kind)?;
            println!("t,restart");
            for t in fired {
                println!("{t},1");
            }
            Ok(())
        }
        Command::Bounds { config } => {
            let cfg = load_config(&config)?;
            println!("bound,value,note");
            for row in bounds_table(&cfg)? {
                println!("{},{},{}", row.bound, row.value, row.note);
            }
            Ok(())
        }
        Command::GenEnv {
            arms,
            horizon,
            changes,
            lambda,
            seed,
            out,
            min_seg,
            global,
        } => {
            let params = GeneratorParams {
                arms,
                horizon,
                changes,
                lambda,
                min_segment: min_seg,
                global_switch: global,
            };
            let instance = generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(seed))?;
            write_instance_csv(&instance, &out)?;
            Ok(())
        }
    }
}
