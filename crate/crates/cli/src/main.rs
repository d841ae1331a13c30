//! `gkw`: eigenvalues, identity checks and exports from the command line.
//!
//! Exit codes: 0 success, 1 I/O, 2 validation failure, 3 precision or
//! convergence failure, 4 usage error.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};

use commands::Identity;
use config::{Defaults, Flags, RunConfig};
use error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "gkw", version, about = "Eigenvalues of the Gauss-Kuzmin-Wirsing operator")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues from the layer recurrence, one record per n.
    Eigen,
    /// Checks an identity and reports residuals against a threshold.
    Validate {
        #[arg(value_enum)]
        identity: Identity,
    },
    /// Leading eigenvalues of the truncated matrix.
    Oracle,
    /// Table of c(n), ratios and eigenvalue errors for n = 1..=nmax.
    Asympt,
    /// Decomposition matrix of the eigenvalues by layer, with marginals.
    ExportMatrix,
}

fn defaults(cmd: &Command) -> Defaults {
    match cmd {
        Command::Validate { identity } => Defaults {
            ell: if *identity == Identity::Pair { 3 } else { 1 },
            l_max: 30,
            n_max: 40,
        },
        Command::Asympt => Defaults {
            ell: 1,
            l_max: 5,
            n_max: 20,
        },
        _ => Defaults {
            ell: 1,
            l_max: 5,
            n_max: 30,
        },
    }
}

fn name(cmd: &Command) -> String {
    match cmd {
        Command::Eigen => "eigen".into(),
        Command::Validate { identity } => format!("validate {identity:?}").to_lowercase(),
        Command::Oracle => "oracle".into(),
        Command::Asympt => "asympt".into(),
        Command::ExportMatrix => "export-matrix".into(),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&name(&cli.command), &cli.flags, defaults(&cli.command))?;
    match &cli.command {
        Command::Eigen => output::emit(&cfg, &commands::eigen(&cfg)?),
        Command::Validate { identity } => {
            let checks = commands::validate(&cfg, *identity)?;
            output::emit(&cfg, &checks.payload())?;
            if checks.passed() {
                eprintln!("{}: pass", cfg.command);
                Ok(())
            } else {
                Err(CliError::Validation(checks.failures().join(", ")))
            }
        }
        Command::Oracle => output::emit(&cfg, &commands::oracle(&cfg)?),
        Command::Asympt => output::emit(&cfg, &commands::asympt(&cfg)?),
        Command::ExportMatrix => output::emit(&cfg, &commands::export_matrix(&cfg)?),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("gkw: {e}");
        std::process::exit(e.exit_code());
    }
}
