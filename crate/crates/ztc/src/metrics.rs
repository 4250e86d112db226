//! Run summary derived purely from transcript records.

use std::collections::BTreeMap;

use serde_json::Value as Json;

use crate::canonical::{dec, int_field, object, str_field};
use crate::transcript::Entry;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    /// Transfer envelopes handed to the network by origins, replays included.
    pub submitted: u64,
    pub valid: u64,
    pub invalid: BTreeMap<String, u64>,
    /// Submitted but never decided by the relay.
    pub pending: u64,
    pub dropped: u64,
    pub refunded: u64,
    pub timed_out: u64,
    pub finalized: u64,
    /// Initiation to receipt finalization, one per receipt-finalized escrow.
    pub latencies: Vec<u64>,
    /// Relay-side proof verifications.
    pub proofs_verified: u64,
    pub executions: u64,
}

impl Metrics {
    pub fn from_entries(entries: &[Entry]) -> Self {
        let mut m = Metrics::default();
        for e in entries {
            let p = &e.payload;
            match e.kind.as_str() {
                "Initiate" => m.submitted += 1,
                "Tamper"
                    if str_field(p, "mutation") == Some("replay_nonce") && p.get("skipped").is_none() =>
                {
                    m.submitted += 1
                }
                "Ingress" => {
                    match str_field(p, "decision") {
                        Some("Valid") => m.valid += 1,
                        Some(reason) => *m.invalid.entry(reason.to_owned()).or_default() += 1,
                        None => {}
                    }
                    if str_field(p, "proof_check").is_some_and(|c| c != "NotChecked") {
                        m.proofs_verified += 1;
                    }
                }
                "Drop" => m.dropped += 1,
                "Execute" => m.executions += 1,
                "Finalize" => match str_field(p, "closure") {
                    Some("finalized") => {
                        m.finalized += 1;
                        if let Some(l) = int_field(p, "latency") {
                            m.latencies.push(l as u64);
                        }
                    }
                    Some("refunded") => m.refunded += 1,
                    _ => {}
                },
                "TimeoutRefund" => {
                    m.timed_out += 1;
                    m.refunded += 1;
                }
                "TimeoutFinalize" => {
                    m.timed_out += 1;
                    m.finalized += 1;
                }
                _ => {}
            }
        }
        m.pending = m.submitted.saturating_sub(m.valid + m.invalid_total());
        m.latencies.sort_unstable();
        m
    }

    pub fn invalid_total(&self) -> u64 {
        self.invalid.values().sum()
    }

    /// `(min, lower median, max)`.
    pub fn latency_summary(&self) -> Option<(u64, u64, u64)> {
        let l = &self.latencies;
        Some((*l.first()?, l[(l.len() - 1) / 2], *l.last()?))
    }

    pub fn to_json(&self) -> Json {
        let latency = match self.latency_summary() {
            Some((min, median, max)) => object([
                ("count", dec(self.latencies.len() as u64)),
                ("min", dec(min)),
                ("median", dec(median)),
                ("max", dec(max)),
            ]),
            None => object([("count", dec(0u64))]),
        };
        let invalid = self.invalid.iter().map(|(k, v)| (k.clone(), dec(*v))).collect();
        object([
            ("submitted", dec(self.submitted)),
            ("valid", dec(self.valid)),
            ("invalid", Json::Object(invalid)),
            ("invalid_total", dec(self.invalid_total())),
            ("pending", dec(self.pending)),
            ("dropped", dec(self.dropped)),
            ("refunded", dec(self.refunded)),
            ("timed_out", dec(self.timed_out)),
            ("finalized", dec(self.finalized)),
            ("latency", latency),
            ("proofs_verified", dec(self.proofs_verified)),
            ("executions", dec(self.executions)),
        ])
    }
}
