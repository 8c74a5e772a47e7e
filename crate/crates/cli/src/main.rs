//! `xmem`: simulate storage, retrieval, and manipulation of weak resonant
//! x-ray pulses in a pulsed-field nuclear target, from the command line.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use xmem_cli::commands;

#[derive(Parser)]
#[command(name = "xmem", version, about = "Pulsed-field x-ray pulse storage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario and write its series and summary files.
    Run {
        /// Config file (TOML, schema 1).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in scenario name (see `xmem presets`).
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (default: $XMEM_OUT_DIR, then the working directory).
        #[arg(long)]
        out: Option<String>,
        /// Keep every k-th time sample in the series file.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Map retrieval efficiency over thickness and storage time.
    Sweep {
        /// Thickness axis: a value, a comma list, or lo:hi:count.
        #[arg(long)]
        thickness: String,
        /// Storage time(s) in ns (repeatable; default 75).
        #[arg(long = "storage-time")]
        storage_times: Vec<f64>,
        /// Zero the Γ/2 coherence damping.
        #[arg(long)]
        no_decay: bool,
        /// Evaluate grid points sequentially instead of in parallel.
        #[arg(long)]
        serial: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Golden-section search for the thickness maximizing first-echo efficiency.
    Optimize {
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Termination width of the search interval.
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
        #[arg(long = "storage-time", default_value_t = 75.0)]
        storage_time: f64,
        #[arg(long = "read-fwhm", default_value_t = 9.0)]
        read_fwhm: f64,
        #[arg(long)]
        no_decay: bool,
    },
    /// Run the built-in oracle suite and report pass/fail per check.
    Validate {
        /// Only the fast closed-form checks.
        #[arg(long)]
        quick: bool,
    },
    /// List the built-in scenario presets.
    Presets,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, preset, out, stride } => {
            commands::cmd_run(config, preset, out, stride)
        }
        Command::Sweep { thickness, storage_times, no_decay, serial, out } => {
            commands::cmd_sweep(thickness, storage_times, no_decay, serial, out)
        }
        Command::Optimize { lo, hi, tol, storage_time, read_fwhm, no_decay } => {
            commands::cmd_optimize(lo, hi, tol, storage_time, read_fwhm, no_decay)
        }
        Command::Validate { quick } => commands::cmd_validate(quick),
        Command::Presets => commands::cmd_presets(),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
