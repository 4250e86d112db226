//! Canonical JSON: sorted keys, no whitespace, integers as decimal strings,
//! bytes as `0x`-prefixed lowercase hex.

use serde_json::{Map, Value as Json};
use ztc_core::hash::{sha256, Hash32};
use ztc_core::record::Value;

pub fn to_json(value: &Value) -> Json {
    match value {
        Value::Int(v) => Json::String(v.to_string()),
        Value::Text(s) => Json::String(s.clone()),
        Value::Bytes(b) => Json::String(hex0x(b)),
        Value::Bool(b) => Json::Bool(*b),
        Value::List(items) => Json::Array(items.iter().map(to_json).collect()),
        Value::Map(m) => Json::Object(m.iter().map(|(k, v)| (k.clone(), to_json(v))).collect()),
    }
}

/// `serde_json` keeps object keys in a `BTreeMap`, so compact output is
/// already key-sorted.
pub fn to_canonical(json: &Json) -> String {
    serde_json::to_string(json).expect("JSON values always serialize")
}

pub fn hash_json(json: &Json) -> Hash32 {
    sha256(&[to_canonical(json).as_bytes()])
}

pub fn hex0x(bytes: &[u8]) -> String {
    format!("0x{}", hex::encode(bytes))
}

/// Lowercase `0x` hex only, matching [`hex0x`].
pub fn parse_hex(s: &str) -> Option<Vec<u8>> {
    let digits = s.strip_prefix("0x")?;
    if digits.bytes().any(|b| b.is_ascii_uppercase()) {
        return None;
    }
    hex::decode(digits).ok()
}

pub fn parse_hash(s: &str) -> Option<Hash32> {
    parse_hex(s)?.try_into().ok()
}

/// Canonical decimal: no sign, no leading zeros.
pub fn parse_dec(s: &str) -> Option<u128> {
    if s.is_empty() || (s.len() > 1 && s.starts_with('0')) || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn dec(v: impl Into<u128>) -> Json {
    Json::String(v.into().to_string())
}

pub fn str_field<'a>(obj: &'a Json, key: &str) -> Option<&'a str> {
    obj.get(key)?.as_str()
}

pub fn int_field(obj: &Json, key: &str) -> Option<u128> {
    parse_dec(str_field(obj, key)?)
}

pub fn object(pairs: impl IntoIterator<Item = (&'static str, Json)>) -> Json {
    Json::Object(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect::<Map<_, _>>(),
    )
}
