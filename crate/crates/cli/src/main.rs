//! Command-line front end of the solver.
//!
//! Subcommands read a problem (or optics) file, run the pipeline and write
//! CSV/JSON artifacts. Exit codes: 0 on success, 2 for malformed input
//! (files, flags, problem structure), 3 for numerical failures. Errors are
//! emitted as one JSON line on stderr: `{"error": kind, "message": text}`.

mod emit;
mod input;
mod run;

use clap::{Parser, Subcommand};
use run::Failure;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "spps",
    version,
    about = "Spectral-parameter power-series solver for multiparameter
Sturm-Liouville pencils",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the solution basis at given spectral points.
    Solve {
        /// Problem file (TOML).
        #[arg(long)]
        problem: PathBuf,
        /// Spectral point, comma-separated components (repeatable).
        /// Components are real or complex: 0.5  1+2i  -3i
        #[arg(long, allow_hyphen_values = true)]
        lambda: Vec<String>,
        /// Override the problem's memory mode: full | endpoint.
        #[arg(long)]
        mode: Option<String>,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the characteristic polynomial as JSON.
    Char {
        #[arg(long)]
        problem: PathBuf,
        /// Override the problem's memory mode: full | endpoint.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fix all parameters but one and locate roots along the free one.
    Section {
        #[arg(long)]
        problem: PathBuf,
        /// Fixed assignment i=value, 1-based (repeatable; d-1 of them).
        #[arg(long = "fix")]
        fix: Vec<String>,
        /// Sweep range lo:hi for the χ curve (default: trust interval).
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        /// Samples along the sweep.
        #[arg(long, default_value_t = 201)]
        count: usize,
        /// Root trust radius override.
        #[arg(long = "trust-radius")]
        trust_radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rasterize χ over a two-parameter window and trace eigencurves.
    Raster {
        #[arg(long)]
        problem: PathBuf,
        /// Swept parameter pair i,j (1-based; default 1,2 when d = 2).
        #[arg(long)]
        params: Option<String>,
        /// First axis: re|im:lo:hi.
        #[arg(long)]
        axis1: String,
        /// Second axis: re|im:lo:hi.
        #[arg(long)]
        axis2: String,
        /// Raster size n1xn2.
        #[arg(long, default_value = "64x64")]
        grid: String,
        /// Fixed assignment i=value for parameters outside the pair
        /// (repeatable).
        #[arg(long = "fix")]
        fix: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a reflectance/transmittance scan over a graded layer.
    Optics {
        /// Optics file (TOML) with layer parameters and scan lists.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the series solution against an independent integrator.
    Verify {
        #[arg(long)]
        problem: PathBuf,
        /// Spectral point, comma-separated components.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Fine steps of the check integrator (multiple of m; default 256·m).
        #[arg(long)]
        substeps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the nested-integral coefficient tables as CSV.
    PowersDump {
        #[arg(long)]
        problem: PathBuf,
        /// Keep only entries up to this total degree.
        #[arg(long = "max-degree")]
        max_degree: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            problem,
            lambda,
            mode,
            out,
        } => run::solve(
            &problem,
            &lambda,
            mode.as_deref(),
            &run::out_dir_or_default(out.as_deref()),
        ),
        Command::Char { problem, mode, out } => run::char_cmd(
            &problem,
            mode.as_deref(),
            &run::out_dir_or_default(out.as_deref()),
        ),
        Command::Section {
            problem,
            fix,
            range,
            count,
            trust_radius,
            out,
        } => run::section(
            &problem,
            &fix,
            range.as_deref(),
            count,
            trust_radius,
            &run::out_dir_or_default(out.as_deref()),
        ),
        Command::Raster {
            problem,
            params,
            axis1,
            axis2,
            grid,
            fix,
            out,
        } => run::raster(
            &problem,
            params.as_deref(),
            &axis1,
            &axis2,
            &grid,
            &fix,
            &run::out_dir_or_default(out.as_deref()),
        ),
        Command::Optics { config, out } => {
            run::optics(&config, &run::out_dir_or_default(out.as_deref()))
        }
        Command::Verify {
            problem,
            lambda,
            substeps,
            out,
        } => run::verify(
            &problem,
            &lambda,
            substeps,
            &run::out_dir_or_default(out.as_deref()),
        ),
        Command::PowersDump {
            problem,
            max_degree,
            out,
        } => run::powers_dump(
            &problem,
            max_degree,
            &run::out_dir_or_default(out.as_deref()),
        ),
    }
}

fn error_line(kind: &str, message: &str) -> String {
    let mut j = emit::Json::new();
    j.raw("{\"error\": ");
    j.string(kind);
    j.raw(", \"message\": ");
    j.string(message);
    j.raw("}");
    // Single line on stderr: strip the trailing newline added by finish and
    // re-add exactly one.
    j.finish()
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            match err.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    // Help/version go to stdout with success, as usual.
                    let _ = err.print();
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{}", error_line("Usage", &err.to_string()));
                    std::process::exit(2);
                }
            }
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(Failure::Input(e)) => {
            eprint!("{}", error_line(e.kind, &e.message));
            std::process::exit(2);
        }
        Err(Failure::Runtime { kind, message }) => {
            eprint!("{}", error_line(&kind, &message));
            std::process::exit(3);
        }
    }
}
