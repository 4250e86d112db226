//! Structured transcript records.
//!
//! The core emits records as plain trees; the `ztc` crate renders them as
//! canonical JSON (sorted keys, integers as decimal strings, bytes as
//! `0x`-prefixed lowercase hex) and hash-chains them.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(u128),
    Text(String),
    Bytes(Vec<u8>),
    Bool(bool),
    List(Vec<Value>),
    Map(BTreeMap<String, Value>),
}

impl Value {
    pub fn map() -> MapBuilder {
        MapBuilder::default()
    }

    pub fn as_map(&self) -> Option<&BTreeMap<String, Value>> {
        match self {
            Value::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.as_map()?.get(key)
    }

    pub fn as_int(&self) -> Option<u128> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            Value::Bytes(b) => Some(b),
            _ => None,
        }
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(u128::from(v))
    }
}

impl From<u128> for Value {
    fn from(v: u128) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<Vec<u8>> for Value {
    fn from(v: Vec<u8>) -> Self {
        Value::Bytes(v)
    }
}

impl From<&[u8]> for Value {
    fn from(v: &[u8]) -> Self {
        Value::Bytes(v.to_vec())
    }
}

impl<const N: usize> From<[u8; N]> for Value {
    fn from(v: [u8; N]) -> Self {
        Value::Bytes(v.to_vec())
    }
}

#[derive(Default)]
pub struct MapBuilder(BTreeMap<String, Value>);

impl MapBuilder {
    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_owned(), value.into());
        self
    }

    pub fn build(self) -> Value {
        Value::Map(self.0)
    }
}

impl From<MapBuilder> for Value {
    fn from(b: MapBuilder) -> Self {
        b.build()
    }
}

/// Who produced a record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Actor {
    Scenario,
    Net,
    Relay,
    Chain(String),
}

impl Actor {
    pub fn label(&self) -> String {
        match self {
            Actor::Scenario => "scenario".into(),
            Actor::Net => "net".into(),
            Actor::Relay => "relay".into(),
            Actor::Chain(name) => alloc::format!("chain:{name}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordKind {
    RunStart,
    AssetRegistered,
    AccountOpened,
    ChainRegistered,
    Initiate,
    InitiateRejected,
    Tamper,
    Send,
    Drop,
    Deliver,
    Ingress,
    ReceiptForwarded,
    ReceiptUnmatched,
    Execute,
    Finalize,
    FinalizeRejected,
    TimeoutRefund,
    TimeoutFinalize,
    Partition,
    Heal,
    FinalSnapshot,
    RunEnd,
}

impl RecordKind {
    pub const ALL: [RecordKind; 22] = [
        RecordKind::RunStart,
        RecordKind::AssetRegistered,
        RecordKind::AccountOpened,
        RecordKind::ChainRegistered,
        RecordKind::Initiate,
        RecordKind::InitiateRejected,
        RecordKind::Tamper,
        RecordKind::Send,
        RecordKind::Drop,
        RecordKind::Deliver,
        RecordKind::Ingress,
        RecordKind::ReceiptForwarded,
        RecordKind::ReceiptUnmatched,
        RecordKind::Execute,
        RecordKind::Finalize,
        RecordKind::FinalizeRejected,
        RecordKind::TimeoutRefund,
        RecordKind::TimeoutFinalize,
        RecordKind::Partition,
        RecordKind::Heal,
        RecordKind::FinalSnapshot,
        RecordKind::RunEnd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::RunStart => "RunStart",
            RecordKind::AssetRegistered => "AssetRegistered",
            RecordKind::AccountOpened => "AccountOpened",
            RecordKind::ChainRegistered => "ChainRegistered",
            RecordKind::Initiate => "Initiate",
            RecordKind::InitiateRejected => "InitiateRejected",
            RecordKind::Tamper => "Tamper",
            RecordKind::Send => "Send",
            RecordKind::Drop => "Drop",
            RecordKind::Deliver => "Deliver",
            RecordKind::Ingress => "Ingress",
            RecordKind::ReceiptForwarded => "ReceiptForwarded",
            RecordKind::ReceiptUnmatched => "ReceiptUnmatched",
            RecordKind::Execute => "Execute",
            RecordKind::Finalize => "Finalize",
            RecordKind::FinalizeRejected => "FinalizeRejected",
            RecordKind::TimeoutRefund => "TimeoutRefund",
            RecordKind::TimeoutFinalize => "TimeoutFinalize",
            RecordKind::Partition => "Partition",
            RecordKind::Heal => "Heal",
            RecordKind::FinalSnapshot => "FinalSnapshot",
            RecordKind::RunEnd => "RunEnd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub tick: u64,
    pub actor: Actor,
    pub kind: RecordKind,
    pub payload: Value,
}
