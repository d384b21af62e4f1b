mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use exit::{CliError, Status};

#[derive(Debug, Parser)]
#[command(
    name = "peskin",
    version,
    about = "Spectral simulator and verification bench for an elastic loop in Stokes flow"
)]
struct Cli {
    /// Worker threads for the quadrature (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a run configuration and write its trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial-data JSON overriding the config's `init`.
        #[arg(long, value_name = "JSON")]
        init: Option<String>,
        /// Snapshot spacing in time units.
        #[arg(long, value_name = "T")]
        snapshot_every: Option<f64>,
        /// Comma-separated modes whose magnitudes go into diagnostics.csv.
        #[arg(long, value_name = "LIST", value_delimiter = ',', allow_negative_numbers = true)]
        watch_modes: Option<Vec<i64>>,
    },
    /// Eigenvalues of the linearized mode-pair systems.
    LinearSpectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Quadrature identities and integral bounds of the dyadic kernels.
    VerifyKernels {
        /// Optional lattice configuration.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Function-space norms of every snapshot in a trajectory directory.
    MeasureNorms {
        /// Trajectory directory written by `simulate`.
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Decay rate and limiting circle of a trajectory directory.
    FitDecay {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Finite-difference check of the closed-form linearization.
    VerifyLinearization {
        #[command(flatten)]
        common: Common,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            common,
            init,
            snapshot_every,
            watch_modes,
        } => commands::simulate(&common.config, &common.out, init.as_deref(), snapshot_every, watch_modes),
        Command::LinearSpectrum { common } => commands::linear_spectrum(&common.config, &common.out),
        Command::VerifyKernels { config, out } => commands::verify_kernels(config.as_deref(), &out),
        Command::MeasureNorms { input, out } => commands::measure_norms(&input, &out),
        Command::FitDecay { input, out } => commands::fit_decay(&input, &out),
        Command::VerifyLinearization { common } => commands::verify_linearization(&common.config, &common.out),
    }
}

fn command() -> clap::Command {
    Cli::command().after_help(format!("Exit codes:\n{}", exit::table().trim_end()))
}

fn main() -> ExitCode {
    let parsed = command().try_get_matches().and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Usage.into() } else { Status::Ok.into() };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return Status::Usage.into();
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return Status::Usage.into();
        }
    }
    match dispatch(cli.command) {
        Ok(()) => Status::Ok.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.status().into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_lists_every_exit_code() {
        let help = command().render_long_help().to_string();
        for line in exit::table().lines() {
            assert!(help.contains(line.trim_end()), "missing `{line}`");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        command().debug_assert();
    }
}
