use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qvss::protocol::Backend;
use qvss::PbmVariant;

mod commands;
mod output;

/// Quantum visual secret sharing simulator.
#[derive(Parser, Debug)]
#[command(name = "qvss", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a PBM image into n share files plus a session file.
    Share(ShareArgs),
    /// Rebuild the image from all n shares and the session.
    Recover(RecoverArgs),
    /// Report what a subset of participants can learn.
    Audit(AuditArgs),
    /// Write the preparation or XOR circuit as OpenQASM.
    EmitCircuit(EmitArgs),
    /// Compare the pixel-expansion baseline with the quantum scheme.
    Compare(CompareArgs),
    /// Replay the four-pixel (3, 3) walkthrough.
    Demo(DemoArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BackendArg {
    Statevector,
    Sampled,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Statevector => Backend::StateVector,
            BackendArg::Sampled => Backend::Sampled,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    P1,
    P4,
}

impl From<FormatArg> for PbmVariant {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::P1 => PbmVariant::Plain,
            FormatArg::P4 => PbmVariant::Raw,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CircuitKind {
    Prepare,
    Xor,
}

#[derive(Args, Debug)]
struct ShareArgs {
    /// Secret image (PBM, P1 or P4).
    #[arg(long)]
    input: PathBuf,
    /// Number of participants.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "statevector")]
    backend: BackendArg,
    /// Master seed; drawn from entropy and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    /// Directory written by `share`; supplies the session and every share_*.qvs.
    #[arg(long)]
    in_dir: Option<PathBuf>,
    /// Session file (overrides the one in --in-dir).
    #[arg(long)]
    session: Option<PathBuf>,
    /// Share file; repeat for each participant (overrides --in-dir shares).
    #[arg(long = "share")]
    shares: Vec<PathBuf>,
    /// Where to write the recovered PBM.
    #[arg(long)]
    output: PathBuf,
    /// Image to compare the result against.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Measurement seed; drawn from entropy and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "p1")]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    session: PathBuf,
    /// Comma-separated participant indices, e.g. 1,2.
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<usize>,
}

#[derive(Args, Debug)]
struct EmitArgs {
    #[arg(long, value_enum)]
    kind: CircuitKind,
    /// Register width; inferred from --input for the XOR circuit.
    #[arg(long)]
    n: Option<usize>,
    /// Pixel bit encoded by the preparation circuit.
    #[arg(long, default_value_t = 0)]
    b: u8,
    /// Basis-state input for the XOR circuit, e.g. 101000.
    #[arg(long)]
    input: Option<String>,
    /// Write the assembly here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Simulate the circuit and print the resulting distribution.
    #[arg(long)]
    simulate: bool,
    /// Measurement shots to sample when simulating.
    #[arg(long, default_value_t = 0)]
    shots: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Share(a) => commands::share(a),
        Command::Recover(a) => commands::recover(a),
        Command::Audit(a) => commands::audit(a),
        Command::EmitCircuit(a) => commands::emit_circuit(a),
        Command::Compare(a) => commands::compare(a),
        Command::Demo(a) => commands::demo(a),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
