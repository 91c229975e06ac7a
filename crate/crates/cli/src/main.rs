use clap::{Parser, Subcommand};
use pqflow::commands;
use std::path::PathBuf;

/// Numerical laboratory for the first (p,q)-Laplacian eigenvalue along
/// Ricci-harmonic flows.
#[derive(Parser)]
#[command(name = "pqflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run flow + monitor on one or more scenario files; writes CSV traces
    /// and prints a verdict per check.
    Run {
        /// Scenario files (parameter sweeps run in parallel, capped by
        /// PQFLOW_THREADS)
        files: Vec<PathBuf>,
    },
    /// Single eigensolve on a scenario's initial state.
    Eigen { file: PathBuf },
    /// Built-in invariant suite.
    Check,
    /// Render selected CSV columns against t as an SVG plot.
    Plot {
        csv: PathBuf,
        /// Comma-separated column names, e.g. lambda,Q
        #[arg(long)]
        cols: String,
        #[arg(short, long)]
        o: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { files } => commands::cmd_run(&files),
        Command::Eigen { file } => commands::cmd_eigen(&file),
        Command::Check => commands::cmd_check(),
        Command::Plot { csv, cols, o } => commands::cmd_plot(&csv, &cols, &o),
    };
    std::process::exit(code);
}
