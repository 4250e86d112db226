//! Scenario files: JSON, `format_version` "1".
//!
//! Integers are written as decimal strings; plain JSON integers are also
//! accepted on input. Unknown keys are rejected so that a misspelt field
//! cannot silently fall back to its default.

use std::collections::BTreeMap;

use serde_json::{Map, Value as Json};
use thiserror::Error;
use ztc_core::group::Profile;
use ztc_core::hash::Hash32;
use ztc_core::ledger::DEFAULT_ESCROW_TIMEOUT;
use ztc_core::netsim::LinkConfig;
use ztc_core::scenario::{
    AccountDecl, Action, AssetDecl, ChainDecl, Event, LinkDecl, Mutation, PolicyDecl, Scenario,
    ScenarioError, TransferAction, DEFAULT_MAX_TICKS,
};

use crate::canonical::{dec, hash_json, object, parse_dec};
use crate::FORMAT_VERSION;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("unknown reference: {0}")]
    UnknownReference(String),
    #[error("event {index} has a tick earlier than its predecessor")]
    NonMonotonicTick { index: usize },
    #[error("{0}")]
    Invalid(String),
}

impl From<ScenarioError> for ParseError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::UnknownReference(name) => ParseError::UnknownReference(name),
            ScenarioError::NonMonotonicTick { index } => ParseError::NonMonotonicTick { index },
            other => ParseError::Invalid(other.to_string()),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let json: Json = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let scenario = from_json(&json)?;
    scenario.validate()?;
    Ok(scenario)
}

/// SHA-256 of the canonical rendering.
pub fn scenario_hash(scenario: &Scenario) -> Hash32 {
    hash_json(&to_json(scenario))
}

pub fn to_canonical_text(scenario: &Scenario) -> String {
    crate::canonical::to_canonical(&to_json(scenario))
}

struct Obj<'a> {
    map: &'a Map<String, Json>,
    path: String,
}

impl<'a> Obj<'a> {
    fn new(value: &'a Json, path: String, allowed: &[&str]) -> Result<Self, ParseError> {
        let map = value
            .as_object()
            .ok_or_else(|| field_err(&path, "expected an object"))?;
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(field_err(&path, &format!("unknown key {key:?}")));
        }
        Ok(Obj { map, path })
    }

    fn at(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn opt(&self, key: &str) -> Option<&'a Json> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn req(&self, key: &str) -> Result<&'a Json, ParseError> {
        self.opt(key).ok_or_else(|| field_err(&self.at(key), "missing"))
    }

    fn string(&self, key: &str) -> Result<String, ParseError> {
        as_string(self.req(key)?, &self.at(key))
    }

    fn opt_string(&self, key: &str) -> Result<Option<String>, ParseError> {
        self.opt(key).map(|v| as_string(v, &self.at(key))).transpose()
    }

    fn int(&self, key: &str) -> Result<u64, ParseError> {
        as_u64(self.req(key)?, &self.at(key))
    }

    fn int_or(&self, key: &str, default: u64) -> Result<u64, ParseError> {
        self.opt(key).map_or(Ok(default), |v| as_u64(v, &self.at(key)))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ParseError> {
        match self.opt(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| field_err(&self.at(key), "expected a boolean")),
        }
    }

    fn list(&self, key: &str) -> Result<&'a [Json], ParseError> {
        match self.opt(key) {
            None => Ok(&[]),
            Some(v) => v
                .as_array()
                .map(Vec::as_slice)
                .ok_or_else(|| field_err(&self.at(key), "expected an array")),
        }
    }
}

fn field_err(path: &str, message: &str) -> ParseError {
    ParseError::Field {
        path: path.to_owned(),
        message: message.to_owned(),
    }
}

fn as_string(v: &Json, path: &str) -> Result<String, ParseError> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| field_err(path, "expected a string"))
}

fn as_u64(v: &Json, path: &str) -> Result<u64, ParseError> {
    let parsed = match v {
        Json::String(s) => parse_dec(s).and_then(|n| u64::try_from(n).ok()),
        Json::Number(n) => n.as_u64(),
        _ => None,
    };
    parsed.ok_or_else(|| field_err(path, "expected an unsigned 64-bit integer"))
}

pub fn from_json(json: &Json) -> Result<Scenario, ParseError> {
    let top = Obj::new(
        json,
        "scenario".into(),
        &[
            "format_version",
            "seed",
            "profile",
            "max_ticks",
            "escrow_timeout",
            "chains",
            "links",
            "events",
        ],
    )?;
    let version = top.string("format_version")?;
    if version != FORMAT_VERSION {
        return Err(field_err(
            &top.at("format_version"),
            &format!("unsupported version {version:?}"),
        ));
    }
    let profile = match top.opt_string("profile")? {
        None => Profile::Production,
        Some(s) => {
            Profile::parse(&s).ok_or_else(|| field_err(&top.at("profile"), "expected tiny or production"))?
        }
    };
    let mut scenario = Scenario::new(top.int("seed")?, profile);
    scenario.max_ticks = top.int_or("max_ticks", DEFAULT_MAX_TICKS)?;
    scenario.escrow_timeout = top.int_or("escrow_timeout", DEFAULT_ESCROW_TIMEOUT)?;
    for (i, c) in top.list("chains")?.iter().enumerate() {
        scenario
            .chains
            .push(chain_from(c, format!("scenario.chains[{i}]"))?);
    }
    for (i, l) in top.list("links")?.iter().enumerate() {
        let o = Obj::new(
            l,
            format!("scenario.links[{i}]"),
            &["from", "to", "base_latency", "jitter", "drop_num", "drop_den"],
        )?;
        scenario.links.push(LinkDecl {
            from: o.string("from")?,
            to: o.string("to")?,
            config: LinkConfig {
                base_latency: o.int("base_latency")?,
                jitter: o.int_or("jitter", 0)?,
                drop_num: o.int_or("drop_num", 0)?,
                drop_den: o.int_or("drop_den", 1)?,
            },
        });
    }
    for (i, e) in top.list("events")?.iter().enumerate() {
        scenario
            .events
            .push(event_from(e, format!("scenario.events[{i}]"))?);
    }
    Ok(scenario)
}

fn chain_from(json: &Json, path: String) -> Result<ChainDecl, ParseError> {
    let o = Obj::new(
        json,
        path,
        &["chain_id", "external", "receiver_policy", "assets", "accounts"],
    )?;
    let receiver_policy = match o.opt("receiver_policy") {
        None => PolicyDecl::AllowAll,
        Some(Json::String(s)) if s == "allow_all" => PolicyDecl::AllowAll,
        Some(v @ Json::Object(_)) => {
            let p = Obj::new(v, o.at("receiver_policy"), &["allowlist"])?;
            let names = p
                .list("allowlist")?
                .iter()
                .enumerate()
                .map(|(i, n)| as_string(n, &format!("{}[{i}]", p.at("allowlist"))))
                .collect::<Result<_, _>>()?;
            PolicyDecl::Allowlist(names)
        }
        Some(_) => {
            return Err(field_err(
                &o.at("receiver_policy"),
                "expected \"allow_all\" or {\"allowlist\": [...]}",
            ))
        }
    };
    let mut assets = Vec::new();
    for (i, a) in o.list("assets")?.iter().enumerate() {
        let a = Obj::new(
            a,
            format!("{}[{i}]", o.at("assets")),
            &["label", "name", "symbol", "decimals", "total_supply", "home"],
        )?;
        let label = a.string("label")?;
        let decimals = a.int_or("decimals", 0)?;
        assets.push(AssetDecl {
            name: a.opt_string("name")?.unwrap_or_else(|| label.clone()),
            symbol: a.opt_string("symbol")?.unwrap_or_else(|| label.clone()),
            decimals: u32::try_from(decimals).map_err(|_| field_err(&a.at("decimals"), "too large"))?,
            total_supply: a.int("total_supply")?,
            home: a.bool_or("home", false)?,
            label,
        });
    }
    let mut accounts = Vec::new();
    for (i, a) in o.list("accounts")?.iter().enumerate() {
        let a = Obj::new(
            a,
            format!("{}[{i}]", o.at("accounts")),
            &["name", "address", "balances", "frozen"],
        )?;
        let mut balances = BTreeMap::new();
        if let Some(b) = a.opt("balances") {
            let map = b
                .as_object()
                .ok_or_else(|| field_err(&a.at("balances"), "expected an object"))?;
            for (label, amount) in map {
                balances.insert(
                    label.clone(),
                    as_u64(amount, &format!("{}.{label}", a.at("balances")))?,
                );
            }
        }
        accounts.push(AccountDecl {
            name: a.string("name")?,
            address: a.opt_string("address")?,
            balances,
            frozen: a.bool_or("frozen", false)?,
        });
    }
    Ok(ChainDecl {
        name: o.string("chain_id")?,
        external: o.bool_or("external", false)?,
        receiver_policy,
        assets,
        accounts,
    })
}

const TRANSFER_KEYS: [&str; 9] = [
    "tick",
    "action",
    "from_chain",
    "from_account",
    "to_chain",
    "to_account",
    "asset",
    "amount",
    "fee",
];

fn event_from(json: &Json, path: String) -> Result<Event, ParseError> {
    let action_name = json
        .get("action")
        .and_then(Json::as_str)
        .ok_or_else(|| field_err(&format!("{path}.action"), "missing"))?;
    let allowed: &[&str] = match action_name {
        "transfer" | "bridge_lock" | "bridge_burn" => &TRANSFER_KEYS,
        "partition" => &["tick", "action", "a", "b", "until"],
        "heal" => &["tick", "action", "a", "b"],
        "tamper" => &["tick", "action", "target", "mutation"],
        other => {
            return Err(field_err(
                &format!("{path}.action"),
                &format!("unknown action {other:?}"),
            ))
        }
    };
    let o = Obj::new(json, path, allowed)?;
    let transfer = |o: &Obj| -> Result<TransferAction, ParseError> {
        Ok(TransferAction {
            from_chain: o.string("from_chain")?,
            from_account: o.string("from_account")?,
            to_chain: o.string("to_chain")?,
            to_account: o.string("to_account")?,
            asset: o.string("asset")?,
            amount: o.int("amount")?,
            fee: o.int_or("fee", 0)?,
        })
    };
    let action = match action_name {
        "transfer" => Action::Transfer(transfer(&o)?),
        "bridge_lock" => Action::BridgeLock(transfer(&o)?),
        "bridge_burn" => Action::BridgeBurn(transfer(&o)?),
        "partition" => Action::Partition {
            a: o.string("a")?,
            b: o.string("b")?,
            until: o.opt("until").map(|v| as_u64(v, &o.at("until"))).transpose()?,
        },
        "heal" => Action::Heal {
            a: o.string("a")?,
            b: o.string("b")?,
        },
        _ => {
            let target =
                usize::try_from(o.int("target")?).map_err(|_| field_err(&o.at("target"), "too large"))?;
            let name = o.string("mutation")?;
            let mutation = Mutation::parse(&name)
                .ok_or_else(|| field_err(&o.at("mutation"), &format!("unknown mutation {name:?}")))?;
            Action::Tamper { target, mutation }
        }
    };
    Ok(Event {
        tick: o.int("tick")?,
        action,
    })
}

pub fn to_json(s: &Scenario) -> Json {
    let chains = s.chains.iter().map(chain_json).collect();
    let links = s
        .links
        .iter()
        .map(|l| {
            object([
                ("from", Json::from(l.from.clone())),
                ("to", Json::from(l.to.clone())),
                ("base_latency", dec(l.config.base_latency)),
                ("jitter", dec(l.config.jitter)),
                ("drop_num", dec(l.config.drop_num)),
                ("drop_den", dec(l.config.drop_den)),
            ])
        })
        .collect();
    let events = s.events.iter().map(event_json).collect();
    object([
        ("format_version", Json::from(FORMAT_VERSION)),
        ("seed", dec(s.seed)),
        ("profile", Json::from(s.profile.as_str())),
        ("max_ticks", dec(s.max_ticks)),
        ("escrow_timeout", dec(s.escrow_timeout)),
        ("chains", Json::Array(chains)),
        ("links", Json::Array(links)),
        ("events", Json::Array(events)),
    ])
}

fn chain_json(c: &ChainDecl) -> Json {
    let policy = match &c.receiver_policy {
        PolicyDecl::AllowAll => Json::from("allow_all"),
        PolicyDecl::Allowlist(names) => object([("allowlist", Json::from(names.clone()))]),
    };
    let assets = c
        .assets
        .iter()
        .map(|a| {
            object([
                ("label", Json::from(a.label.clone())),
                ("name", Json::from(a.name.clone())),
                ("symbol", Json::from(a.symbol.clone())),
                ("decimals", dec(a.decimals)),
                ("total_supply", dec(a.total_supply)),
                ("home", Json::from(a.home)),
            ])
        })
        .collect();
    let accounts = c
        .accounts
        .iter()
        .map(|a| {
            let balances = a.balances.iter().map(|(k, v)| (k.clone(), dec(*v))).collect();
            let mut obj = object([
                ("name", Json::from(a.name.clone())),
                ("balances", Json::Object(balances)),
                ("frozen", Json::from(a.frozen)),
            ]);
            if let Some(addr) = &a.address {
                obj["address"] = Json::from(addr.clone());
            }
            obj
        })
        .collect();
    object([
        ("chain_id", Json::from(c.name.clone())),
        ("external", Json::from(c.external)),
        ("receiver_policy", policy),
        ("assets", Json::Array(assets)),
        ("accounts", Json::Array(accounts)),
    ])
}

fn event_json(e: &Event) -> Json {
    let mut obj = object([("tick", dec(e.tick)), ("action", Json::from(e.action.name()))]);
    let mut set = |k: &str, v: Json| obj[k] = v;
    match &e.action {
        Action::Transfer(t) | Action::BridgeLock(t) | Action::BridgeBurn(t) => {
            set("from_chain", Json::from(t.from_chain.clone()));
            set("from_account", Json::from(t.from_account.clone()));
            set("to_chain", Json::from(t.to_chain.clone()));
            set("to_account", Json::from(t.to_account.clone()));
            set("asset", Json::from(t.asset.clone()));
            set("amount", dec(t.amount));
            set("fee", dec(t.fee));
        }
        Action::Partition { a, b, until } => {
            set("a", Json::from(a.clone()));
            set("b", Json::from(b.clone()));
            if let Some(u) = until {
                set("until", dec(*u));
            }
        }
        Action::Heal { a, b } => {
            set("a", Json::from(a.clone()));
            set("b", Json::from(b.clone()));
        }
        Action::Tamper { target, mutation } => {
            set("target", dec(*target as u64));
            set("mutation", Json::from(mutation.as_str()));
        }
    }
    obj
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "format_version": "1",
        "seed": "7",
        "profile": "tiny",
        "chains": [{"chain_id": "A"}]
    }"#;

    #[test]
    fn minimal_file_has_no_events() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.chains.len(), 1);
        assert!(s.events.is_empty());
        assert_eq!(s.max_ticks, DEFAULT_MAX_TICKS);
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_scenario("{\n  \"seed\": \"1\",\n  oops\n}").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn misspelt_key_names_its_path() {
        let text = MINIMAL.replace("\"chain_id\"", "\"chian_id\"");
        match parse_scenario(&text).unwrap_err() {
            ParseError::Field { path, .. } => assert_eq!(path, "scenario.chains[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integers_accept_numbers_and_reject_junk() {
        let text = MINIMAL.replace("\"7\"", "7");
        assert_eq!(parse_scenario(&text).unwrap().seed, 7);
        let text = MINIMAL.replace("\"7\"", "\"07\"");
        assert!(matches!(parse_scenario(&text), Err(ParseError::Field { .. })));
    }
}
