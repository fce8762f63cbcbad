use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use rgames_cli::runner::OUTPUT_DIR_ENV;
use rgames_cli::scenarios::{build_problem, scenarios_table};
use rgames_cli::{
    estimate_problem_constants, list_scenarios, run_experiment, CliError, ExperimentConfig,
    ScenarioName,
};

#[derive(Parser)]
#[command(
    name = "rgames",
    version,
    about = "Solvers for monotone Riemannian games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// List the built-in scenarios.
    Scenarios {
        #[arg(long)]
        json: bool,
    },
    /// Estimate μ and L of a scenario by sampling pairs.
    Estimate {
        scenario: String,
        #[arg(long, default_value_t = 400)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn estimate(scenario: &str, pairs: usize, seed: u64) -> Result<(), CliError> {
    let name = ScenarioName::parse(scenario)
        .ok_or_else(|| CliError::Config(format!("unknown scenario {scenario}")))?;
    let problem = build_problem(&ExperimentConfig::new(name))?;
    let (mu, lipschitz) = estimate_problem_constants(&problem, pairs, seed)?;
    let out = json!({
        "scenario": scenario,
        "pairs": pairs,
        "seed": seed,
        "mu_est": mu,
        "lipschitz_est": lipschitz,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("plain values serialize")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => {
            let env = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
            run_experiment(&config, env).map(|(code, dir)| {
                eprintln!("wrote {}", dir.display());
                code
            })
        }
        Command::Scenarios { json } => {
            if json {
                let rows = serde_json::to_string_pretty(&list_scenarios())
                    .expect("plain values serialize");
                println!("{rows}");
            } else {
                print!("{}", scenarios_table());
            }
            Ok(0)
        }
        Command::Estimate {
            scenario,
            pairs,
            seed,
        } => estimate(&scenario, pairs, seed).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
