//! `newtonscope`: witness sets, Newton polytope oracles, polytope
//! reconstruction and tropical membership from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use newtonscope::oracle::OracleSettings;
use newtonscope_cli::{
    cmd_oracle, cmd_polytope, cmd_traces, cmd_tropical, cmd_witness, parse_direction, parse_monomial_map, resolve_seed,
    OracleInput, Report, SystemFile, TraceFormat,
};

#[derive(Parser)]
#[command(name = "newtonscope", version, about)]
struct Cli {
    /// Random seed; falls back to the file's `seed:` line, then NEWTONSCOPE_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a witness set of the (projected) variety.
    Witness { file: PathBuf },
    /// Answer one oracle query from a system file or a witness document.
    Oracle {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[command(flatten)]
        oracle: OracleFlags,
        /// Also export the path traces.
        #[arg(long, value_enum)]
        emit_traces: Option<Format>,
        #[arg(long, default_value = "traces")]
        trace_dir: PathBuf,
    },
    /// Reconstruct the homogenized Newton polytope.
    Polytope {
        file: PathBuf,
        #[command(flatten)]
        oracle: OracleFlags,
        /// Use the exact oracle on an explicit polynomial.
        #[arg(long)]
        symbolic: bool,
    },
    /// Test whether a direction lies in the tropical variety.
    Tropical {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[command(flatten)]
        oracle: OracleFlags,
        /// `none`, `random`, or a file holding an integer matrix.
        #[arg(long, default_value = "none")]
        monomial_map: String,
    },
    /// Export the traces stored in an oracle answer.
    Traces {
        answer: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value = "traces")]
        trace_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Svg,
}

impl From<Format> for TraceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => TraceFormat::Json,
            Format::Svg => TraceFormat::Svg,
        }
    }
}

#[derive(Args)]
struct OracleFlags {
    /// Decide once the step derivative is below 10^-c.
    #[arg(long, default_value_t = OracleSettings::default().certainty)]
    certainty: f64,
    /// Radius of the target discs.
    #[arg(long, default_value_t = OracleSettings::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = OracleSettings::default().min_tracks)]
    min_tracks: usize,
    #[arg(long, default_value_t = OracleSettings::default().max_tracks)]
    max_tracks: usize,
    /// Ratio between consecutive values of t.
    #[arg(long, default_value_t = OracleSettings::default().step_resolution)]
    step_resolution: f64,
}

impl From<&OracleFlags> for OracleSettings {
    fn from(f: &OracleFlags) -> Self {
        Self {
            certainty: f.certainty,
            epsilon: f.epsilon,
            min_tracks: f.min_tracks,
            max_tracks: f.max_tracks,
            step_resolution: f.step_resolution,
        }
    }
}

fn run(cli: Cli) -> Result<Report> {
    match &cli.command {
        Command::Witness { file } => {
            let f = SystemFile::load(file)?;
            cmd_witness(&f, resolve_seed(cli.seed, f.seed)?)
        }
        Command::Oracle { input, omega, oracle, emit_traces, trace_dir } => {
            let input = OracleInput::load(input)?;
            let seed = resolve_seed(cli.seed, input.file_seed())?;
            let omega = parse_direction(omega)?;
            let settings = OracleSettings::from(oracle);
            let emit = emit_traces.map(|f| (f.into(), trace_dir.as_path()));
            cmd_oracle(&input, &omega, &settings, seed, emit)
        }
        Command::Polytope { file, oracle, symbolic } => {
            let f = SystemFile::load(file)?;
            cmd_polytope(&f, &oracle.into(), *symbolic, resolve_seed(cli.seed, f.seed)?)
        }
        Command::Tropical { file, omega, oracle, monomial_map } => {
            let f = SystemFile::load(file)?;
            let seed = resolve_seed(cli.seed, f.seed)?;
            cmd_tropical(&f, &parse_direction(omega)?, &oracle.into(), &parse_monomial_map(monomial_map)?, seed)
        }
        Command::Traces { answer, format, trace_dir } => cmd_traces(answer, (*format).into(), trace_dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            println!("{}", report.json);
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
