mod common;

use common::*;
use ztc_core::bridge::wrapped_id;
use ztc_core::group::Profile;
use ztc_core::ledger::{AssetId, ChainId};
use ztc_core::netsim::LinkConfig;
use ztc_core::record::{RecordKind, Value};
use ztc_core::scenario::{Action, Scenario};
use ztc_core::sim::{run, RunOutput, RunStatus};

fn bridge_scenario() -> Scenario {
    let mut s = Scenario::new(11, Profile::Tiny);
    s.chains = vec![
        chain(
            "home",
            vec![asset("ETH", 60, true)],
            vec![account("alice", &[("ETH", 60)])],
        ),
        chain("ext", vec![asset("ETH", 60, false)], vec![account("bob", &[])]),
    ];
    s.chains[1].external = true;
    s
}

fn lock(tick: u64, amount: u64) -> ztc_core::scenario::Event {
    at(
        tick,
        Action::BridgeLock(xfer(("home", "alice"), ("ext", "bob"), "ETH", amount, 0)),
    )
}

fn burn(tick: u64, amount: u64) -> ztc_core::scenario::Event {
    at(
        tick,
        Action::BridgeBurn(xfer(("ext", "bob"), ("home", "alice"), "ETH", amount, 0)),
    )
}

fn book(out: &RunOutput, chain: &str, field: &str) -> u128 {
    let snap = &out.snapshots.iter().find(|(n, _)| n == chain).unwrap().1;
    let entries = snap
        .get("bridge")
        .and_then(|b| b.get(field))
        .and_then(Value::as_map)
        .unwrap();
    entries.values().filter_map(Value::as_int).sum()
}

fn locked_and_wrapped(out: &RunOutput) -> (u128, u128) {
    (book(out, "home", "locked"), book(out, "ext", "wrapped_supply"))
}

#[test]
fn wrapped_id_depends_on_asset_and_home() {
    let x = AssetId::from_label("ETH");
    let a = ChainId::from_name("a");
    let b = ChainId::from_name("b");
    assert_ne!(wrapped_id(&x, &a), wrapped_id(&x, &b));
    assert_ne!(wrapped_id(&x, &a), wrapped_id(&AssetId::from_label("DOT"), &a));
    assert_ne!(wrapped_id(&x, &a), x);
}

#[test]
fn lock_fifty() {
    let mut s = bridge_scenario();
    s.events = vec![lock(1, 50)];
    assert_eq!(locked_and_wrapped(&run(&s).unwrap()), (50, 50));
}

#[test]
fn lock_zero_still_gets_a_receipt() {
    let mut s = bridge_scenario();
    s.events = vec![lock(1, 0)];
    let out = run(&s).unwrap();
    assert_eq!(locked_and_wrapped(&out), (0, 0));
    assert_eq!(
        out.records
            .iter()
            .filter(|r| r.kind == RecordKind::Finalize)
            .count(),
        1
    );
}

#[test]
fn locks_add_up() {
    let mut s = bridge_scenario();
    s.events = vec![lock(1, 30), lock(2, 20)];
    assert_eq!(locked_and_wrapped(&run(&s).unwrap()), (50, 50));
}

#[test]
fn burn_after_lock() {
    let mut s = bridge_scenario();
    s.events = vec![lock(1, 50), burn(30, 20)];
    assert_eq!(locked_and_wrapped(&run(&s).unwrap()), (30, 30));
}

#[test]
fn burning_more_than_held_is_refused() {
    let mut s = bridge_scenario();
    s.events = vec![lock(1, 50), burn(30, 60)];
    let out = run(&s).unwrap();
    let rejected: Vec<_> = out
        .records
        .iter()
        .filter(|r| r.kind == RecordKind::InitiateRejected)
        .map(|r| r.payload.get("error").and_then(Value::as_text).unwrap())
        .collect();
    assert_eq!(rejected, ["NotEnoughBalance"]);
    assert_eq!(locked_and_wrapped(&out), (50, 50));
}

#[test]
fn dropped_mint_refunds_and_unlocks() {
    let mut s = bridge_scenario();
    s.links = vec![link(
        "relay",
        "ext",
        LinkConfig {
            drop_num: 1,
            drop_den: 1,
            ..LinkConfig::fixed(1)
        },
    )];
    s.events = vec![lock(1, 50)];
    let out = run(&s).unwrap();
    assert_eq!(out.status, RunStatus::Quiescent);
    assert_eq!(
        out.records
            .iter()
            .filter(|r| r.kind == RecordKind::TimeoutRefund)
            .count(),
        1
    );
    assert_eq!(locked_and_wrapped(&out), (0, 0));
}

#[test]
fn lock_from_a_non_home_chain_is_refused() {
    let mut s = bridge_scenario();
    s.chains[1].accounts[0].balances.insert("ETH".into(), 10);
    s.chains[0].accounts[0].balances.insert("ETH".into(), 50);
    s.events = vec![at(
        1,
        Action::BridgeLock(xfer(("ext", "bob"), ("home", "alice"), "ETH", 5, 0)),
    )];
    let out = run(&s).unwrap();
    let r = out
        .records
        .iter()
        .find(|r| r.kind == RecordKind::InitiateRejected)
        .unwrap();
    assert_eq!(
        r.payload.get("error").and_then(Value::as_text),
        Some("NotHomeChain")
    );
}
