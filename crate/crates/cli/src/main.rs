use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use stokeslab::states::TAIL_THRESHOLD;
use stokeslab::witnesses::WitnessId;
use stokeslab_cli::{
    build_state, cmd_identities, cmd_sample, cmd_sweep, cmd_witness, exit_code, Grid, SweepSpec,
};

/// Entanglement-witness laboratory for two polarized beams: exact witness
/// evaluation, parameter sweeps, and finite-shot sampling experiments on a
/// photon-number-truncated four-mode space.
#[derive(Parser)]
#[command(name = "stokeslab", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the Stokes operator-square identities at one truncation
    Identities {
        /// Per-beam total photon number cutoff (at most 10 here)
        #[arg(long)]
        nmax: u32,
    },
    /// Evaluate all ten separability conditions exactly on one state
    Witness {
        /// State spec, e.g. "bsv(gain=0.8)+noise(p=0.9)+loss(etaA=0.7)"
        #[arg(long)]
        state: String,
        /// Per-beam total photon number cutoff
        #[arg(long)]
        nmax: u32,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one real parameter of a state over a grid
    Sweep {
        /// State spec the sweep starts from
        #[arg(long)]
        state: String,
        /// Parameter to sweep: gain, p, etaA or etaB
        #[arg(long = "sweep")]
        param: String,
        /// Inclusive grid start:stop:step, e.g. 0:1:0.01
        #[arg(long)]
        grid: String,
        /// Per-beam total photon number cutoff
        #[arg(long)]
        nmax: u32,
        /// Witness subset by name (repeatable); default all ten
        #[arg(long = "witness")]
        witnesses: Vec<String>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample photon counts in all three bases and estimate every witness
    Sample {
        /// State spec to sample from
        #[arg(long)]
        state: String,
        /// Per-beam total photon number cutoff
        #[arg(long)]
        nmax: u32,
        /// Shots per measurement basis
        #[arg(long)]
        shots: usize,
        /// RNG seed (shots and bootstrap both derive from it)
        #[arg(long)]
        seed: u64,
        /// Bootstrap resamples for standard errors
        #[arg(long, default_value_t = stokeslab::sampling::DEFAULT_RESAMPLES)]
        resamples: usize,
        /// Write estimate CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the raw per-shot count records to this CSV
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn dispatch(command: Command) -> stokeslab::Result<()> {
    match command {
        Command::Identities { nmax } => {
            print!("{}", cmd_identities(nmax)?);
            Ok(())
        }
        Command::Witness { state, nmax, out } => {
            let (csv, tail) = cmd_witness(&state, nmax)?;
            warn_tail(tail);
            emit(out.as_deref(), &csv)
        }
        Command::Sweep { state, param, grid, nmax, witnesses, out } => {
            let spec = SweepSpec {
                state,
                param,
                grid: Grid::parse(&grid)?,
                n_max: nmax,
                witnesses: parse_witness_names(&witnesses)?,
            };
            // surface truncation quality before the long run
            warn_tail(build_state(&spec.state, nmax)?.tail_mass());
            emit(out.as_deref(), &cmd_sweep(&spec)?)
        }
        Command::Sample { state, nmax, shots, seed, resamples, out, records } => {
            let sampled = cmd_sample(&state, nmax, shots, seed, resamples, records.is_some())?;
            warn_tail(sampled.tail_mass);
            if let (Some(path), Some(csv)) = (records.as_deref(), sampled.records.as_deref()) {
                write_file(path, csv)?;
            }
            emit(out.as_deref(), &sampled.estimates)
        }
    }
}

fn parse_witness_names(names: &[String]) -> stokeslab::Result<Vec<WitnessId>> {
    names
        .iter()
        .map(|name| {
            WitnessId::from_name(name).ok_or_else(|| {
                stokeslab::Error::InvalidParameter(format!("unknown witness `{name}`"))
            })
        })
        .collect()
}

fn warn_tail(tail: f64) {
    if tail >= TAIL_THRESHOLD {
        eprintln!(
            "warning: truncation discards probability mass {tail:.3e} (threshold {TAIL_THRESHOLD:e}); increase --nmax"
        );
    }
}

fn emit(out: Option<&Path>, csv: &str) -> stokeslab::Result<()> {
    match out {
        Some(path) => write_file(path, csv),
        None => {
            print!("{csv}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, contents: &str) -> stokeslab::Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}
