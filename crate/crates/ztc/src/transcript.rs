//! Hash-chained JSONL transcripts.
//!
//! Line 0 is the header, lines `1..=n` are the records and the last line is
//! the trailer. Every line is the canonical JSON of its object.
//!
//! The header carries `header_hash`, the SHA-256 of its own canonical form
//! without that key. Record `i` carries
//! `running_hash = SHA-256(prev || canonical record without running_hash)`
//! where `prev` is the previous record's `running_hash` (the header hash
//! for record 0). The trailer's `final_hash` equals the last running hash.

use std::collections::BTreeMap;

use serde_json::Value as Json;
use ztc_core::group::Profile;
use ztc_core::hash::{sha256, Hash32};
use ztc_core::record::Record;
use ztc_core::scenario::Scenario;
use ztc_core::sim::RunOutput;

use crate::canonical::{dec, hex0x, object, to_canonical, to_json};
use crate::metrics::Metrics;
use crate::scenario_json::scenario_hash;
use crate::{ARTIFACT_VERSION, FORMAT_VERSION};

#[derive(Clone, Debug, PartialEq)]
pub struct Header {
    pub scenario_hash: Hash32,
    pub seed: u64,
    pub profile: Profile,
    pub max_ticks: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub tick: u64,
    pub actor: String,
    pub kind: String,
    pub payload: Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trailer {
    pub status: String,
    pub final_tick: u64,
    pub snapshots: BTreeMap<String, Json>,
    pub metrics: Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub header: Header,
    pub entries: Vec<Entry>,
    pub trailer: Trailer,
}

impl Header {
    /// Without `header_hash`.
    pub fn body_json(&self) -> Json {
        object([
            ("type", Json::from("header")),
            ("format_version", Json::from(FORMAT_VERSION)),
            ("artifact_version", Json::from(ARTIFACT_VERSION)),
            ("scenario_hash", Json::from(hex0x(&self.scenario_hash))),
            ("seed", dec(self.seed)),
            ("profile", Json::from(self.profile.as_str())),
            ("max_ticks", dec(self.max_ticks)),
        ])
    }
}

impl Entry {
    pub fn from_record(record: &Record) -> Self {
        Entry {
            tick: record.tick,
            actor: record.actor.label(),
            kind: record.kind.as_str().to_owned(),
            payload: to_json(&record.payload),
        }
    }

    /// Without `running_hash`.
    pub fn body_json(&self, index: usize) -> Json {
        object([
            ("type", Json::from("record")),
            ("index", dec(index as u64)),
            ("tick", dec(self.tick)),
            ("actor", Json::from(self.actor.clone())),
            ("kind", Json::from(self.kind.clone())),
            ("payload", self.payload.clone()),
        ])
    }
}

impl Trailer {
    pub fn to_json(&self, final_hash: &Hash32, record_count: usize) -> Json {
        object([
            ("type", Json::from("trailer")),
            ("final_hash", Json::from(hex0x(final_hash))),
            ("record_count", dec(record_count as u64)),
            ("status", Json::from(self.status.clone())),
            ("final_tick", dec(self.final_tick)),
            (
                "snapshots",
                Json::Object(self.snapshots.clone().into_iter().collect()),
            ),
            ("metrics", self.metrics.clone()),
        ])
    }
}

pub fn header_hash(body: &Json) -> Hash32 {
    sha256(&[to_canonical(body).as_bytes()])
}

pub fn chain_hash(prev: &Hash32, body: &Json) -> Hash32 {
    sha256(&[prev, to_canonical(body).as_bytes()])
}

impl Transcript {
    pub fn from_run(scenario: &Scenario, output: &RunOutput) -> Self {
        let entries: Vec<Entry> = output.records.iter().map(Entry::from_record).collect();
        let metrics = Metrics::from_entries(&entries).to_json();
        Transcript {
            header: Header {
                scenario_hash: scenario_hash(scenario),
                seed: scenario.seed,
                profile: scenario.profile,
                max_ticks: scenario.max_ticks,
            },
            entries,
            trailer: Trailer {
                status: output.status.as_str().to_owned(),
                final_tick: output.final_tick,
                snapshots: output
                    .snapshots
                    .iter()
                    .map(|(name, v)| (name.clone(), to_json(v)))
                    .collect(),
                metrics,
            },
        }
    }

    /// Canonical JSONL, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut header = self.header.body_json();
        let mut prev = header_hash(&header);
        header["header_hash"] = Json::from(hex0x(&prev));
        push_line(&mut out, &header);
        for (i, entry) in self.entries.iter().enumerate() {
            let mut line = entry.body_json(i);
            prev = chain_hash(&prev, &line);
            line["running_hash"] = Json::from(hex0x(&prev));
            push_line(&mut out, &line);
        }
        push_line(&mut out, &self.trailer.to_json(&prev, self.entries.len()));
        out
    }

    pub fn final_hash(&self) -> Hash32 {
        let mut prev = header_hash(&self.header.body_json());
        for (i, entry) in self.entries.iter().enumerate() {
            prev = chain_hash(&prev, &entry.body_json(i));
        }
        prev
    }
}

fn push_line(out: &mut String, json: &Json) {
    out.push_str(&to_canonical(json));
    out.push('\n');
}
