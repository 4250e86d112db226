//! Offline transcript verification.
//!
//! Needs nothing beyond the transcript bytes. Every check reports pass,
//! fail or skip; malformed input never panics.

use std::collections::BTreeMap;
use std::fmt;
use std::thread;

use serde_json::Value as Json;
use ztc_core::bridge::wrapped_id;
use ztc_core::group::{Commitment, GroupParams, Profile};
use ztc_core::hash::Hash32;
use ztc_core::ledger::{AssetId, ChainId, Transaction};
use ztc_core::sim::RunStatus;
use ztc_core::zkp::{verify_tx_proof, TxValidityProof};

use crate::audit;
use crate::canonical::{hex0x, int_field, parse_dec, parse_hash, parse_hex, str_field, to_canonical};
use crate::metrics::Metrics;
use crate::transcript::{chain_hash, header_hash, Entry};
use crate::FORMAT_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Locus {
    Header,
    Record(usize),
    Trailer,
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::Header => f.write_str("header"),
            Locus::Record(i) => write!(f, "record {i}"),
            Locus::Trailer => f.write_str("trailer"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass(String),
    Fail { loci: Vec<Locus>, detail: String },
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
}

impl Check {
    pub fn passed(&self) -> bool {
        !matches!(self.outcome, Outcome::Fail { .. })
    }

    pub fn loci(&self) -> &[Locus] {
        match &self.outcome {
            Outcome::Fail { loci, .. } => loci,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Where the hash chain first breaks, else the first locus of any failure.
    pub fn first_failure(&self) -> Option<Locus> {
        if let Some(l) = self.check("hash_chain").and_then(|c| c.loci().first()) {
            return Some(*l);
        }
        self.checks.iter().flat_map(|c| c.loci().iter()).min().copied()
    }

    fn push(&mut self, name: &'static str, outcome: Outcome) {
        self.checks.push(Check { name, outcome });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.outcome {
                Outcome::Pass(d) => writeln!(f, "PASS {}: {d}", c.name)?,
                Outcome::Skipped(d) => writeln!(f, "SKIP {}: {d}", c.name)?,
                Outcome::Fail { loci, detail } => {
                    let at: Vec<String> = loci.iter().take(5).map(Locus::to_string).collect();
                    let more = if loci.len() > 5 {
                        format!(" (+{} more)", loci.len() - 5)
                    } else {
                        String::new()
                    };
                    writeln!(f, "FAIL {}: {detail} [at {}{more}]", c.name, at.join(", "))?
                }
            }
        }
        Ok(())
    }
}

fn fail(locus: Locus, detail: impl Into<String>) -> Outcome {
    Outcome::Fail {
        loci: vec![locus],
        detail: detail.into(),
    }
}

/// Lines as parsed, before any semantic check.
struct Parsed {
    header: Json,
    records: Vec<Json>,
    trailer: Json,
}

fn locus_of(line: usize, n_lines: usize) -> Locus {
    match line {
        0 => Locus::Header,
        l if l + 1 == n_lines => Locus::Trailer,
        l => Locus::Record(l - 1),
    }
}

fn parse_lines(bytes: &[u8]) -> Result<Parsed, (Locus, String)> {
    let mut lines: Vec<&[u8]> = bytes.split(|b| *b == b'\n').collect();
    if lines.pop() != Some(&[][..]) {
        let locus = if !lines.is_empty() {
            Locus::Trailer
        } else {
            Locus::Header
        };
        return Err((locus, "missing final newline".into()));
    }
    if lines.len() < 2 {
        return Err((Locus::Header, "need at least a header and a trailer".into()));
    }
    let mut parsed = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let locus = locus_of(i, lines.len());
        let text = std::str::from_utf8(line).map_err(|_| (locus, "not UTF-8".to_owned()))?;
        let json: Json = serde_json::from_str(text).map_err(|e| (locus, format!("not JSON: {e}")))?;
        if to_canonical(&json) != text {
            return Err((locus, "not in canonical form".into()));
        }
        parsed.push(json);
    }
    let trailer = parsed.pop().expect("two or more lines");
    let header = parsed.remove(0);
    Ok(Parsed {
        header,
        records: parsed,
        trailer,
    })
}

fn without(json: &Json, key: &str) -> Json {
    let mut j = json.clone();
    if let Some(m) = j.as_object_mut() {
        m.remove(key);
    }
    j
}

/// Checks the chain in order and returns the first break.
fn check_chain(p: &Parsed) -> Result<Hash32, (Locus, String)> {
    let h = &p.header;
    if str_field(h, "type") != Some("header") || str_field(h, "format_version") != Some(FORMAT_VERSION) {
        return Err((Locus::Header, "not a format 1 header".into()));
    }
    let stored = str_field(h, "header_hash").and_then(parse_hash);
    let mut prev = header_hash(&without(h, "header_hash"));
    if stored != Some(prev) {
        return Err((Locus::Header, "header_hash mismatch".into()));
    }
    for (i, r) in p.records.iter().enumerate() {
        let at = Locus::Record(i);
        if str_field(r, "type") != Some("record") || int_field(r, "index") != Some(i as u128) {
            return Err((at, "bad record type or index".into()));
        }
        let stored = str_field(r, "running_hash").and_then(parse_hash);
        let expected = chain_hash(&prev, &without(r, "running_hash"));
        if stored != Some(expected) {
            return Err((at, "running_hash mismatch".into()));
        }
        prev = expected;
    }
    let t = &p.trailer;
    if str_field(t, "type") != Some("trailer") {
        return Err((Locus::Trailer, "not a trailer".into()));
    }
    if str_field(t, "final_hash") != Some(hex0x(&prev).as_str()) {
        return Err((
            Locus::Trailer,
            "final_hash does not match the last running hash".into(),
        ));
    }
    if int_field(t, "record_count") != Some(p.records.len() as u128) {
        return Err((Locus::Trailer, "record_count mismatch".into()));
    }
    Ok(prev)
}

fn entries(p: &Parsed) -> Option<Vec<Entry>> {
    p.records
        .iter()
        .map(|r| {
            Some(Entry {
                tick: u64::try_from(int_field(r, "tick")?).ok()?,
                actor: str_field(r, "actor")?.to_owned(),
                kind: str_field(r, "kind")?.to_owned(),
                payload: r.get("payload")?.clone(),
            })
        })
        .collect()
}

/// Records of a well-formed transcript, without checking the hash chain.
pub fn read_entries(bytes: &[u8]) -> Result<Vec<Entry>, (Locus, String)> {
    let parsed = parse_lines(bytes)?;
    entries(&parsed).ok_or((Locus::Header, "records lack tick, actor, kind or payload".into()))
}

pub fn verify_transcript(bytes: &[u8]) -> Report {
    let mut report = Report::default();
    let parsed = match parse_lines(bytes) {
        Ok(p) => p,
        Err((locus, detail)) => {
            report.push("hash_chain", fail(locus, detail));
            return report;
        }
    };
    match check_chain(&parsed) {
        Ok(h) => report.push(
            "hash_chain",
            Outcome::Pass(format!(
                "{} records, final hash {}",
                parsed.records.len(),
                hex0x(&h)
            )),
        ),
        Err((locus, detail)) => report.push("hash_chain", fail(locus, detail)),
    }
    let Some(entries) = entries(&parsed) else {
        report.push(
            "structure",
            fail(Locus::Header, "records lack tick, actor, kind or payload"),
        );
        return report;
    };
    let profile = str_field(&parsed.header, "profile").and_then(Profile::parse);
    let Some(profile) = profile else {
        report.push("structure", fail(Locus::Header, "unknown profile"));
        return report;
    };
    let params = GroupParams::new(profile);

    report.push("header", check_header(&parsed.header, &entries));
    report.push("proofs", check_proofs(&entries, &params));
    report.push("run_end", check_run_end(&parsed.trailer, &entries));
    let snapshots = final_snapshots(&entries);
    report.push("snapshots", check_snapshots(&parsed.trailer, &snapshots));
    report.push("metrics", check_metrics(&parsed.trailer, &entries));
    let quiescent = str_field(&parsed.trailer, "status") == Some(RunStatus::Quiescent.as_str());
    if quiescent {
        report.push("conservation", check_conservation(&snapshots));
        report.push("bridge", check_bridge(&snapshots));
    } else {
        report.push(
            "conservation",
            Outcome::Skipped("run did not reach quiescence".into()),
        );
        report.push("bridge", Outcome::Skipped("run did not reach quiescence".into()));
    }
    let violations = audit::scan(&entries, &params);
    if violations.is_empty() {
        report.push(
            "zero_trust",
            Outcome::Pass("relay payloads carry no private values".into()),
        );
    } else {
        report.push(
            "zero_trust",
            Outcome::Fail {
                loci: violations.iter().map(|v| Locus::Record(v.index)).collect(),
                detail: violations[0].detail.clone(),
            },
        );
    }
    report
}

fn find_kind<'a>(entries: &'a [Entry], kind: &str) -> Option<(usize, &'a Entry)> {
    entries.iter().enumerate().find(|(_, e)| e.kind == kind)
}

fn check_header(header: &Json, entries: &[Entry]) -> Outcome {
    let Some((i, start)) = find_kind(entries, "RunStart") else {
        return fail(Locus::Header, "no RunStart record");
    };
    for key in ["seed", "profile"] {
        if header.get(key) != start.payload.get(key) {
            return fail(Locus::Record(i), format!("header {key} differs from RunStart"));
        }
    }
    Outcome::Pass("seed and profile agree with RunStart".into())
}

fn check_run_end(trailer: &Json, entries: &[Entry]) -> Outcome {
    let Some((i, end)) = entries.iter().enumerate().rev().find(|(_, e)| e.kind == "RunEnd") else {
        return fail(Locus::Trailer, "no RunEnd record");
    };
    if i + 1 != entries.len() {
        return fail(Locus::Record(i), "RunEnd is not the last record");
    }
    for key in ["status", "final_tick"] {
        if trailer.get(key) != end.payload.get(key) {
            return fail(Locus::Trailer, format!("trailer {key} differs from RunEnd"));
        }
    }
    Outcome::Pass(format!("status {}", str_field(trailer, "status").unwrap_or("?")))
}

/// Chain name to (record index, snapshot).
fn final_snapshots(entries: &[Entry]) -> BTreeMap<String, (usize, Json)> {
    entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == "FinalSnapshot")
        .filter_map(|(i, e)| Some((e.actor.strip_prefix("chain:")?.to_owned(), (i, e.payload.clone()))))
        .collect()
}

fn check_snapshots(trailer: &Json, snapshots: &BTreeMap<String, (usize, Json)>) -> Outcome {
    let Some(listed) = trailer.get("snapshots").and_then(Json::as_object) else {
        return fail(Locus::Trailer, "trailer has no snapshots");
    };
    if listed.len() != snapshots.len() {
        return fail(
            Locus::Trailer,
            "trailer and FinalSnapshot records list different chains",
        );
    }
    for (name, (_, snap)) in snapshots {
        if listed.get(name) != Some(snap) {
            return fail(
                Locus::Trailer,
                format!("snapshot of {name} differs from its FinalSnapshot record"),
            );
        }
    }
    Outcome::Pass(format!("{} chains", snapshots.len()))
}

fn check_metrics(trailer: &Json, entries: &[Entry]) -> Outcome {
    let m = Metrics::from_entries(entries);
    if trailer.get("metrics") != Some(&m.to_json()) {
        return fail(
            Locus::Trailer,
            "metrics differ from a recomputation over the records",
        );
    }
    if m.submitted != m.valid + m.invalid_total() + m.pending {
        return fail(Locus::Trailer, "submitted != valid + invalid + pending");
    }
    Outcome::Pass(format!(
        "{} submitted, {} valid, {} invalid",
        m.submitted,
        m.valid,
        m.invalid_total()
    ))
}

/// Re-runs the relay's proof check for one Ingress payload.
fn recheck(payload: &Json, params: &GroupParams) -> Result<(), String> {
    let expected = str_field(payload, "proof_check").ok_or("no proof_check")?;
    let bytes = |key: &str| -> Result<Vec<u8>, String> {
        let s = payload
            .get("tx")
            .and_then(|t| str_field(t, key))
            .or_else(|| str_field(payload, key));
        s.and_then(parse_hex).ok_or_else(|| format!("{key} is not hex"))
    };
    let tx = Transaction::decode(&bytes("wire")?, params).map_err(|e| format!("tx: {e:?}"))?;
    let proof = TxValidityProof::decode(&bytes("proof")?, params).map_err(|e| format!("proof: {e:?}"))?;
    if str_field(payload, "tx_hash") != Some(hex0x(&tx.hash()).as_str()) {
        return Err("tx_hash does not match the transaction".into());
    }
    let commitment = params
        .decode_element(&bytes("commitment")?)
        .map(Commitment)
        .map_err(|e| format!("commitment: {e:?}"))?;
    let pk_bytes = bytes("sender_pk")?;
    let pk = if pk_bytes.is_empty() {
        None
    } else {
        Some(
            params
                .decode_element(&pk_bytes)
                .map_err(|e| format!("sender_pk: {e:?}"))?,
        )
    };
    let got = verify_tx_proof(&tx, &commitment, &proof, pk.as_ref(), params);
    if got.as_str() != expected {
        return Err(format!("recorded {expected}, recomputed {}", got.as_str()));
    }
    if !got.is_valid() && str_field(payload, "decision") != Some(expected) {
        return Err("decision disagrees with a failed proof check".into());
    }
    Ok(())
}

fn check_proofs(entries: &[Entry], params: &GroupParams) -> Outcome {
    let jobs: Vec<(usize, &Json)> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == "Ingress" && str_field(&e.payload, "proof_check") != Some("NotChecked"))
        .map(|(i, e)| (i, &e.payload))
        .collect();
    if jobs.is_empty() {
        return Outcome::Pass("no proofs to check".into());
    }
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len());
    let chunk = jobs.len().div_ceil(workers);
    let mut failures: Vec<(usize, String)> = thread::scope(|s| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .filter_map(|(i, p)| recheck(p, params).err().map(|e| (*i, e)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap_or_default())
            .collect()
    });
    failures.sort();
    if failures.is_empty() {
        Outcome::Pass(format!("{} proofs re-verified", jobs.len()))
    } else {
        Outcome::Fail {
            loci: failures.iter().map(|(i, _)| Locus::Record(*i)).collect(),
            detail: failures[0].1.clone(),
        }
    }
}

fn num(v: Option<&Json>) -> Option<u128> {
    v?.as_str().and_then(parse_dec)
}

/// `"<asset>/<chain>"` into its parts.
fn split_pair(key: &str) -> Option<(AssetId, ChainId)> {
    let (a, c) = key.split_once('/')?;
    Some((AssetId::from_hex(a)?, ChainId::from_hex(c)?))
}

/// Per-asset tally of one chain's balances plus open escrows.
fn holdings(snap: &Json) -> Option<BTreeMap<String, u128>> {
    let mut held: BTreeMap<String, u128> = BTreeMap::new();
    for account in snap.get("accounts")?.as_object()?.values() {
        for (asset, v) in account.get("balances")?.as_object()? {
            *held.entry(asset.clone()).or_default() += num(Some(v))?;
        }
    }
    for e in snap.get("escrows")?.as_object()?.values() {
        let asset = str_field(e, "debit_asset")?;
        *held.entry(asset.to_owned()).or_default() += int_field(e, "amount")? + int_field(e, "fee")?;
    }
    Some(held)
}

fn check_conservation(snapshots: &BTreeMap<String, (usize, Json)>) -> Outcome {
    let mut supply: BTreeMap<String, u128> = BTreeMap::new();
    let mut circulating: BTreeMap<String, u128> = BTreeMap::new();
    let mut wrapped_expected: BTreeMap<String, u128> = BTreeMap::new();
    let mut wrapped_held: BTreeMap<String, u128> = BTreeMap::new();
    for (name, (i, snap)) in snapshots {
        let at = Locus::Record(*i);
        let parsed = (|| {
            let assets = snap.get("assets")?.as_object()?;
            let bridge = snap.get("bridge")?;
            let chain = str_field(snap, "chain_id")?;
            Some((assets, bridge, chain, holdings(snap)?))
        })();
        let Some((assets, bridge, chain, held)) = parsed else {
            return fail(at, format!("snapshot of {name} is malformed"));
        };
        for (id, spec) in assets {
            let Some(total) = int_field(spec, "total_supply") else {
                return fail(at, format!("asset {id} has no total_supply"));
            };
            if *supply.entry(id.clone()).or_insert(total) != total {
                return fail(at, format!("asset {id} has inconsistent total_supply"));
            }
        }
        for (key, v) in bridge
            .get("locked")
            .and_then(Json::as_object)
            .into_iter()
            .flatten()
        {
            let asset = key.split('/').next().unwrap_or_default().to_owned();
            *circulating.entry(asset).or_default() += num(Some(v)).unwrap_or(0);
        }
        for (key, v) in bridge
            .get("wrapped_supply")
            .and_then(Json::as_object)
            .into_iter()
            .flatten()
        {
            let Some((asset, home)) = split_pair(key) else {
                return fail(at, format!("bad bridge key {key}"));
            };
            let w = format!("{}@{chain}", wrapped_id(&asset, &home).to_hex());
            *wrapped_expected.entry(w).or_default() += num(Some(v)).unwrap_or(0);
        }
        for (asset, amount) in held {
            if assets.contains_key(&asset) {
                *circulating.entry(asset).or_default() += amount;
            } else {
                *wrapped_held.entry(format!("{asset}@{chain}")).or_default() += amount;
            }
        }
    }
    let last = snapshots.values().map(|(i, _)| *i).max().unwrap_or(0);
    for (asset, total) in &supply {
        let got = circulating.get(asset).copied().unwrap_or(0);
        if got != *total {
            return fail(
                Locus::Record(last),
                format!("asset {asset}: {got} accounted for, supply {total}"),
            );
        }
    }
    let wrapped_held: BTreeMap<_, _> = wrapped_held.into_iter().filter(|(_, v)| *v != 0).collect();
    let wrapped_expected: BTreeMap<_, _> = wrapped_expected.into_iter().filter(|(_, v)| *v != 0).collect();
    if wrapped_held != wrapped_expected {
        return fail(
            Locus::Record(last),
            "wrapped balances differ from the minted wrapped supply",
        );
    }
    Outcome::Pass(format!("{} assets conserved", supply.len()))
}

fn check_bridge(snapshots: &BTreeMap<String, (usize, Json)>) -> Outcome {
    let mut locked: BTreeMap<(String, String, String), u128> = BTreeMap::new();
    let mut wrapped: BTreeMap<(String, String, String), u128> = BTreeMap::new();
    let last = snapshots.values().map(|(i, _)| *i).max().unwrap_or(0);
    for (i, snap) in snapshots.values() {
        let Some(chain) = str_field(snap, "chain_id") else {
            return fail(Locus::Record(*i), "snapshot has no chain_id");
        };
        let bridge = snap.get("bridge");
        for (book, home_side) in [("locked", true), ("wrapped_supply", false)] {
            for (key, v) in bridge
                .and_then(|b| b.get(book))
                .and_then(Json::as_object)
                .into_iter()
                .flatten()
            {
                let Some((asset, other)) = key.split_once('/') else {
                    return fail(Locus::Record(*i), format!("bad bridge key {key}"));
                };
                let amount = num(Some(v)).unwrap_or(0);
                if amount == 0 {
                    continue;
                }
                if home_side {
                    locked.insert((asset.to_owned(), chain.to_owned(), other.to_owned()), amount);
                } else {
                    wrapped.insert((asset.to_owned(), other.to_owned(), chain.to_owned()), amount);
                }
            }
        }
    }
    if locked != wrapped {
        return fail(Locus::Record(last), "locked and wrapped supply disagree");
    }
    Outcome::Pass(format!("{} bridged pairs balanced", locked.len()))
}
