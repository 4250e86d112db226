#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use ztc::Transcript;
use ztc_core::scenario::Scenario;

/// Runs a scenario and returns its transcript bytes and records.
pub fn run(s: &Scenario) -> (Transcript, Vec<u8>) {
    let (_, t) = ztc::run_to_transcript(s).expect("generated scenarios are valid");
    let bytes = t.to_jsonl().into_bytes();
    (t, bytes)
}
