#![allow(dead_code)]

use std::collections::BTreeMap;

use ztc_core::group::Profile;
use ztc_core::netsim::LinkConfig;
use ztc_core::scenario::{
    AccountDecl, Action, AssetDecl, ChainDecl, Event, LinkDecl, Mutation, PolicyDecl, Scenario,
    TransferAction,
};

pub fn asset(label: &str, supply: u64, home: bool) -> AssetDecl {
    AssetDecl {
        label: label.into(),
        name: format!("{label} token"),
        symbol: label.into(),
        decimals: 0,
        total_supply: supply,
        home,
    }
}

pub fn account(name: &str, balances: &[(&str, u64)]) -> AccountDecl {
    AccountDecl {
        name: name.into(),
        address: None,
        balances: balances
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<_, _>>(),
        frozen: false,
    }
}

pub fn chain(name: &str, assets: Vec<AssetDecl>, accounts: Vec<AccountDecl>) -> ChainDecl {
    ChainDecl {
        name: name.into(),
        external: false,
        receiver_policy: PolicyDecl::AllowAll,
        assets,
        accounts,
    }
}

pub fn link(from: &str, to: &str, config: LinkConfig) -> LinkDecl {
    LinkDecl {
        from: from.into(),
        to: to.into(),
        config,
    }
}

pub fn xfer(from: (&str, &str), to: (&str, &str), asset: &str, amount: u64, fee: u64) -> TransferAction {
    TransferAction {
        from_chain: from.0.into(),
        from_account: from.1.into(),
        to_chain: to.0.into(),
        to_account: to.1.into(),
        asset: asset.into(),
        amount,
        fee,
    }
}

pub fn at(tick: u64, action: Action) -> Event {
    Event { tick, action }
}

pub fn tamper(tick: u64, target: usize, mutation: Mutation) -> Event {
    at(tick, Action::Tamper { target, mutation })
}

/// Two chains A and B sharing asset DOT (home A): alice on A holds
/// `alice_balance`, bob on B holds the rest of the supply.
pub fn two_chains(profile: Profile, alice_balance: u64, supply: u64) -> Scenario {
    let mut s = Scenario::new(7, profile);
    s.chains = vec![
        chain(
            "A",
            vec![asset("DOT", supply, true)],
            vec![account("alice", &[("DOT", alice_balance)])],
        ),
        chain(
            "B",
            vec![asset("DOT", supply, false)],
            vec![account("bob", &[("DOT", supply - alice_balance)])],
        ),
    ];
    s
}
