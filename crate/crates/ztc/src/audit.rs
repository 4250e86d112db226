//! Zero-trust audit of relay-logged payloads.
//!
//! The relay may see commitments, proofs, keys, hashes and the public
//! transfer fields (amount, fee, nonce). Anything else, in particular any
//! balance, is a violation. Every key path a relay record may carry is
//! listed; unknown keys fail the audit rather than pass unexamined.

use serde_json::Value as Json;
use ztc_core::group::GroupParams;
use ztc_core::ledger::Transaction;
use ztc_core::zkp::TxValidityProof;

use crate::canonical::{hex0x, int_field, parse_dec, parse_hex, str_field};
use crate::transcript::Entry;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub detail: String,
}

/// Integer-valued paths the relay is allowed to log.
const PUBLIC_INTS: [&str; 4] = ["hop_count", "tx.amount", "tx.fee", "tx.nonce"];

fn allowed_paths(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "Ingress" => &[
            "commitment",
            "decision",
            "hop_count",
            "kind",
            "proof",
            "proof_check",
            "sender_pk",
            "tx",
            "tx.amount",
            "tx.asset",
            "tx.dest_chain",
            "tx.fee",
            "tx.nonce",
            "tx.origin_chain",
            "tx.receiver",
            "tx.sender",
            "tx.wire",
            "tx_hash",
        ],
        "ReceiptForwarded" => &["origin", "result", "tx_hash"],
        "ReceiptUnmatched" => &["tx_hash", "discarded"],
        "ChainRegistered" => &[
            "chain",
            "chain_id",
            "external",
            "receiver_policy",
            "receiver_policy[]",
        ],
        _ => return None,
    })
}

pub fn scan(entries: &[Entry], params: &GroupParams) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, e) in entries.iter().enumerate().filter(|(_, e)| e.actor == "relay") {
        let mut flag = |detail: String| out.push(Violation { index, detail });
        let Some(allowed) = allowed_paths(&e.kind) else {
            flag(format!("unexpected relay record kind {}", e.kind));
            continue;
        };
        let mut leaves = Vec::new();
        walk(&e.payload, String::new(), &mut leaves);
        for (path, leaf) in leaves {
            if !allowed.contains(&path.as_str()) {
                flag(format!("{}: key {path:?} is not a relay-visible field", e.kind));
            } else if leaf.as_str().and_then(parse_dec).is_some() && !PUBLIC_INTS.contains(&path.as_str()) {
                flag(format!(
                    "{}: integer at {path:?} is not a public transfer field",
                    e.kind
                ));
            }
        }
        if e.kind == "Ingress" {
            if let Err(detail) = wire_matches(&e.payload, params) {
                flag(format!("Ingress: {detail}"));
            }
        }
    }
    out
}

/// `(path, leaf)` pairs; objects contribute their own path too.
fn walk<'a>(v: &'a Json, path: String, out: &mut Vec<(String, &'a Json)>) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_owned()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        Json::Object(m) => {
            if !path.is_empty() {
                out.push((path.clone(), v));
            }
            for (k, child) in m {
                walk(child, join(k), out);
            }
        }
        Json::Array(items) => {
            out.push((path.clone(), v));
            for child in items {
                walk(child, format!("{path}[]"), out);
            }
        }
        _ => out.push((path, v)),
    }
}

/// The opaque byte fields decode exactly and add nothing to the listed
/// public fields.
fn wire_matches(payload: &Json, params: &GroupParams) -> Result<(), String> {
    let tx_json = payload.get("tx").ok_or("no tx")?;
    let wire = str_field(tx_json, "wire")
        .and_then(parse_hex)
        .ok_or("wire is not hex")?;
    let tx = Transaction::decode(&wire, params).map_err(|_| "wire does not decode")?;
    if tx.encode(params) != wire {
        return Err("wire carries trailing or non-canonical bytes".into());
    }
    let listed = [
        (
            "amount",
            int_field(tx_json, "amount") == Some(u128::from(tx.amount)),
        ),
        ("fee", int_field(tx_json, "fee") == Some(u128::from(tx.fee))),
        ("nonce", int_field(tx_json, "nonce") == Some(u128::from(tx.nonce))),
        (
            "sender",
            str_field(tx_json, "sender") == Some(tx.sender.to_hex().as_str()),
        ),
        (
            "receiver",
            str_field(tx_json, "receiver") == Some(tx.receiver.to_hex().as_str()),
        ),
        (
            "asset",
            str_field(tx_json, "asset") == Some(tx.asset.to_hex().as_str()),
        ),
        (
            "origin_chain",
            str_field(tx_json, "origin_chain") == Some(tx.origin_chain.to_hex().as_str()),
        ),
        (
            "dest_chain",
            str_field(tx_json, "dest_chain") == Some(tx.dest_chain.to_hex().as_str()),
        ),
    ];
    if let Some((field, _)) = listed.iter().find(|(_, ok)| !ok) {
        return Err(format!("listed tx.{field} differs from the wire encoding"));
    }
    let proof_bytes = str_field(payload, "proof")
        .and_then(parse_hex)
        .ok_or("proof is not hex")?;
    let proof = TxValidityProof::decode(&proof_bytes, params).map_err(|_| "proof does not decode")?;
    if proof.encode(params) != proof_bytes {
        return Err("proof carries trailing or non-canonical bytes".into());
    }
    for key in ["commitment", "sender_pk"] {
        let bytes = str_field(payload, key)
            .and_then(parse_hex)
            .ok_or(format!("{key} is not hex"))?;
        if !bytes.is_empty() && params.decode_element(&bytes).is_err() {
            return Err(format!("{key} is not a group element"));
        }
    }
    if str_field(payload, "tx_hash") != Some(hex0x(&tx.hash()).as_str()) {
        return Err("tx_hash does not match the wire encoding".into());
    }
    Ok(())
}
