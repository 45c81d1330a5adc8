//! `flowreach` command-line interface.
//!
//! Exit codes: 0 on success, 2 on input or numerical errors, 3 when the verdict is
//! negative (relations fail, not controllable, target not reached, a suite fails).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flowreach::network::Mode;

#[derive(Parser, Debug)]
#[command(name = "flowreach", version, about = "Reachability and steering for transport flows on networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Vertex conditions: static or dynamic.
    #[arg(long, global = true, default_value = "static")]
    pub mode: Mode,
    /// Seed printed in every report and used by `selftest`.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Directory for the report and artifacts.
    #[arg(long, global = true, env = "FLOWREACH_OUT")]
    pub out: Option<PathBuf>,
    /// Print the report as JSON instead of key-value text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the graph matrices and check their relations.
    Matrices {
        network: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Krylov reachability (and the positive cone with --positive).
    Reach {
        network: PathBuf,
        /// Control vertex, 1-based.
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        positive: bool,
        /// Number of cone generators (default 2m).
        #[arg(long)]
        cone_k: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Evolve a state under the uncontrolled semigroup.
    Simulate {
        network: PathBuf,
        /// `piecewise-poly` (static) or `extended-state` (dynamic) file.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
        /// Control vertex, 1-based (only fixes the system; no control is applied).
        #[arg(long, default_value_t = 1)]
        vertex: usize,
        /// Write floats as hexadecimal literals.
        #[arg(long)]
        hex: bool,
    },
    /// Synthesize a control that steers zero to a target profile, then verify it.
    Steer {
        network: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        vertex: usize,
        /// Number of unit time steps (default: number of edges).
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        positive: bool,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Rows in the sampled control CSV.
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Run the seeded invariant suites.
    Selftest {
        #[arg(long)]
        quick: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common;
    let result = match cli.command {
        Command::Matrices { network, tol } => commands::matrices(&common, &network, tol),
        Command::Reach { network, vertex, positive, cone_k, tol } => {
            commands::reach(&common, &network, vertex, positive, cone_k, tol)
        }
        Command::Simulate { network, state, time, vertex, hex } => {
            commands::simulate(&common, &network, &state, time, vertex, hex)
        }
        Command::Steer { network, target, vertex, horizon, positive, tol, samples } => {
            commands::steer(&common, &network, &target, vertex, horizon, positive, tol, samples)
        }
        Command::Selftest { quick } => commands::selftest(&common, quick),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
