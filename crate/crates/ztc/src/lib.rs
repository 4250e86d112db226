//! File formats, offline verification and the command-line front end for
//! the `ztc-core` simulator.

pub mod audit;
pub mod canonical;
pub mod metrics;
pub mod scenario_json;
pub mod transcript;
pub mod verify;

use ztc_core::scenario::Scenario;
use ztc_core::sim::{self, RunOutput, SimError};

pub use metrics::Metrics;
pub use scenario_json::{parse_scenario, ParseError};
pub use transcript::Transcript;
pub use verify::{verify_transcript, Locus, Report};

pub const FORMAT_VERSION: &str = "1";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs `scenario` and renders its transcript.
pub fn run_to_transcript(scenario: &Scenario) -> Result<(RunOutput, Transcript), SimError> {
    let output = sim::run(scenario)?;
    let transcript = Transcript::from_run(scenario, &output);
    Ok((output, transcript))
}
