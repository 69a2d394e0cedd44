//! `sip-interp`: minimal-norm and regularised interpolation in weighted ℓᵖ
//! spaces, with numerical verification commands.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 infeasible
//! constraints, 3 a numerical check exceeded its tolerance, 4 a regulariser
//! failed the admissibility probes.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sip_interp::space::axioms::AxiomSuiteConfig;

use commands::{AxiomArgs, CompareArgs, DecomposeArgs, ProbeArgs, SolveArgs};

#[derive(Parser)]
#[command(name = "sip-interp", version, about = "Interpolation in weighted lp spaces via semi-inner products")]
struct Cli {
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write a report.
    Solve {
        input: PathBuf,
        /// Solver settings as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also solve the constrained problem directly and record the discrepancy.
        #[arg(long)]
        oracle_check: bool,
        #[arg(long, default_value_t = 1e-4)]
        oracle_tolerance: f64,
        #[arg(long, env = "SIP_INTERP_SEED", default_value_t = 0)]
        seed: u64,
        /// Leave out wall_time so repeated runs give identical reports.
        #[arg(long)]
        omit_timing: bool,
    },
    /// Check the semi-inner-product axioms on random samples.
    VerifyAxioms {
        #[arg(long, value_delimiter = ',', default_values_t = [1.2, 1.5, 2.0, 3.0, 4.0, 7.0])]
        p_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 5, 10])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = "SIP_INTERP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Worker threads; the report does not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run both admissibility probes on a regulariser.
    ///
    /// The regulariser is inline JSON, a JSON file, power:ALPHA or a builtin
    /// custom name such as abs_first_coord.
    ProbeRegulariser {
        regulariser: String,
        /// DIM,P or JSON such as {"dim":3,"p":1.5,"weights":[1,2,1]}.
        #[arg(long, default_value = "3,3")]
        space: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = "SIP_INTERP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a problem directly under several regularisers and compare.
    CompareRegularisers {
        input: PathBuf,
        /// Regularisers in any form accepted by probe-regulariser; defaults to
        /// the one in the problem file.
        #[arg(long, num_args = 1..)]
        regs: Vec<String>,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Probe samples per regulariser.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, env = "SIP_INTERP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Split x into its best approximation from span(basis) and a normal residual.
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Solve {
            input,
            config,
            output,
            oracle_check,
            oracle_tolerance,
            seed,
            omit_timing,
        } => commands::solve(&SolveArgs {
            input,
            config,
            output,
            oracle_check,
            oracle_tolerance,
            seed,
            omit_timing,
        }),
        Command::VerifyAxioms {
            p_list,
            dims,
            samples,
            seed,
            tolerance,
            jobs,
            output,
        } => commands::verify_axioms(&AxiomArgs {
            config: AxiomSuiteConfig {
                p_list,
                dims,
                samples,
                seed,
                tolerance,
            },
            jobs,
            output,
        }),
        Command::ProbeRegulariser {
            regulariser,
            space,
            samples,
            seed,
            output,
        } => commands::probe_regulariser(&ProbeArgs {
            regulariser,
            space,
            samples,
            seed,
            output,
        }),
        Command::CompareRegularisers {
            input,
            regs,
            tolerance,
            samples,
            seed,
            output,
        } => commands::compare_regularisers(&CompareArgs {
            input,
            regs,
            tolerance,
            samples,
            seed,
            output,
        }),
        Command::Decompose {
            input,
            tolerance,
            output,
        } => commands::decompose(&DecomposeArgs {
            input,
            tolerance,
            output,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
