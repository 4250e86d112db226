use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ztc::canonical::{hex0x, to_canonical};
use ztc::verify::read_entries;
use ztc::{parse_scenario, run_to_transcript, verify_transcript, Metrics};
use ztc_core::group::{GroupParams, Keypair, Profile};
use ztc_core::ledger::Address;
use ztc_core::sim::RunStatus;
use ztc_core::SplitMix64;

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "ztc", version, about = "Zero-trust cross-chain transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Tiny,
    Production,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its transcript.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_ticks: Option<u64>,
    },
    /// Check a transcript's hash chain, proofs and invariants.
    Verify {
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Summarize a transcript.
    Metrics {
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Derive a keypair from a seed.
    Keygen {
        #[arg(long, value_enum)]
        profile: ProfileArg,
        #[arg(long)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            out,
            max_ticks,
        } => run(&scenario, seed, &out, max_ticks),
        Command::Verify { transcript } => verify(&transcript),
        Command::Metrics { transcript } => metrics(&transcript),
        Command::Keygen { profile, seed } => keygen(profile, seed),
    }
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn run(path: &PathBuf, seed: Option<u64>, out: &PathBuf, max_ticks: Option<u64>) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return input_error(format!("{}: {e}", path.display())),
    };
    let mut scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => return input_error(format!("{}: {e}", path.display())),
    };
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(max) = max_ticks {
        scenario.max_ticks = max;
    }
    let (output, transcript) = match run_to_transcript(&scenario) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    if let Err(e) = fs::write(out, transcript.to_jsonl()) {
        return input_error(format!("{}: {e}", out.display()));
    }
    println!(
        "{} records, status {}, final tick {}, final hash {}",
        output.records.len(),
        output.status.as_str(),
        output.final_tick,
        hex0x(&transcript.final_hash())
    );
    match output.status {
        RunStatus::Quiescent => ExitCode::SUCCESS,
        RunStatus::MaxTicksExceeded => {
            eprintln!("warning: max_ticks exceeded before quiescence");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn verify(path: &PathBuf) -> ExitCode {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => return input_error(format!("{}: {e}", path.display())),
    };
    let report = verify_transcript(&bytes);
    print!("{report}");
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        if let Some(locus) = report.first_failure() {
            println!("first failure at {locus}");
        }
        ExitCode::from(EXIT_FAILURE)
    }
}

fn metrics(path: &PathBuf) -> ExitCode {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => return input_error(format!("{}: {e}", path.display())),
    };
    let entries = match read_entries(&bytes) {
        Ok(e) => e,
        Err((locus, detail)) => return input_error(format!("unreadable transcript at {locus}: {detail}")),
    };
    println!("{}", to_canonical(&Metrics::from_entries(&entries).to_json()));
    ExitCode::SUCCESS
}

fn keygen(profile: ProfileArg, seed: u64) -> ExitCode {
    let profile = match profile {
        ProfileArg::Tiny => Profile::Tiny,
        ProfileArg::Production => Profile::Production,
    };
    let params = GroupParams::new(profile);
    let keys = Keypair::generate(&params, &mut SplitMix64::new(seed));
    let json = ztc::canonical::object([
        ("profile", profile.as_str().into()),
        ("secret", hex0x(&params.encode_scalar(keys.secret())).into()),
        ("public", hex0x(&params.encode_element(keys.public())).into()),
        (
            "address",
            Address::from_public_key(&params, keys.public()).to_hex().into(),
        ),
    ]);
    println!("{}", to_canonical(&json));
    ExitCode::SUCCESS
}
