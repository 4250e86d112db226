//! Scenario model consumed by the simulation loop.
//!
//! Everything is referenced by name: chains by their name, accounts by
//! name within their chain, assets by label. [`Scenario::validate`] checks
//! every reference before a run starts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::group::Profile;
use crate::ledger::DEFAULT_ESCROW_TIMEOUT;
use crate::netsim::LinkConfig;

pub const DEFAULT_MAX_TICKS: u64 = 10_000;
pub const RELAY_NODE: &str = "relay";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssetDecl {
    pub label: String,
    pub name: String,
    pub symbol: String,
    pub decimals: u32,
    pub total_supply: u64,
    /// This chain is the asset's home; only the home may lock it.
    pub home: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccountDecl {
    pub name: String,
    /// Explicit `0x` address. Such accounts have no key and can only
    /// receive.
    pub address: Option<String>,
    /// Asset label to genesis balance.
    pub balances: BTreeMap<String, u64>,
    pub frozen: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyDecl {
    AllowAll,
    /// Account names of this chain.
    Allowlist(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainDecl {
    pub name: String,
    pub external: bool,
    pub receiver_policy: PolicyDecl,
    pub assets: Vec<AssetDecl>,
    pub accounts: Vec<AccountDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDecl {
    /// Chain name or `"relay"`.
    pub from: String,
    pub to: String,
    pub config: LinkConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mutation {
    AmountPlusOne,
    FeePlusOne,
    ZeroSignature,
    ReplayNonce,
    SwapSender,
    RebindHash,
}

impl Mutation {
    pub const ALL: [Mutation; 6] = [
        Mutation::AmountPlusOne,
        Mutation::FeePlusOne,
        Mutation::ZeroSignature,
        Mutation::ReplayNonce,
        Mutation::SwapSender,
        Mutation::RebindHash,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::AmountPlusOne => "amount+1",
            Mutation::FeePlusOne => "fee+1",
            Mutation::ZeroSignature => "zero_signature",
            Mutation::ReplayNonce => "replay_nonce",
            Mutation::SwapSender => "swap_sender",
            Mutation::RebindHash => "rebind_hash",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

/// A value movement between two named accounts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferAction {
    pub from_chain: String,
    pub from_account: String,
    pub to_chain: String,
    pub to_account: String,
    pub asset: String,
    pub amount: u64,
    pub fee: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Transfer(TransferAction),
    /// `from_chain` must be the asset's home.
    BridgeLock(TransferAction),
    /// `to_chain` must be the asset's home.
    BridgeBurn(TransferAction),
    Partition {
        a: String,
        b: String,
        until: Option<u64>,
    },
    Heal {
        a: String,
        b: String,
    },
    /// `target` indexes the transfer-like events (transfer, lock, burn)
    /// in scenario order.
    Tamper {
        target: usize,
        mutation: Mutation,
    },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Transfer(_) => "transfer",
            Action::BridgeLock(_) => "bridge_lock",
            Action::BridgeBurn(_) => "bridge_burn",
            Action::Partition { .. } => "partition",
            Action::Heal { .. } => "heal",
            Action::Tamper { .. } => "tamper",
        }
    }

    pub fn transfer(&self) -> Option<&TransferAction> {
        match self {
            Action::Transfer(t) | Action::BridgeLock(t) | Action::BridgeBurn(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub seed: u64,
    pub profile: Profile,
    pub max_ticks: u64,
    pub escrow_timeout: u64,
    pub chains: Vec<ChainDecl>,
    /// Chain/relay pairs without a declared link get a 1-tick lossless one.
    pub links: Vec<LinkDecl>,
    pub events: Vec<Event>,
}

impl Scenario {
    pub fn new(seed: u64, profile: Profile) -> Self {
        Scenario {
            seed,
            profile,
            max_ticks: DEFAULT_MAX_TICKS,
            escrow_timeout: DEFAULT_ESCROW_TIMEOUT,
            chains: Vec::new(),
            links: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn chain(&self, name: &str) -> Option<&ChainDecl> {
        self.chains.iter().find(|c| c.name == name)
    }

    /// Indices into `events` of the transfer-like events, in order.
    pub fn transfer_events(&self) -> Vec<usize> {
        self.events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.action.transfer().is_some())
            .map(|(i, _)| i)
            .collect()
    }

    /// Home chain name of an asset label.
    pub fn home_of(&self, label: &str) -> Option<&str> {
        self.chains
            .iter()
            .find(|c| c.assets.iter().any(|a| a.label == label && a.home))
            .map(|c| c.name.as_str())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        use ScenarioError::*;
        let mut names = BTreeSet::new();
        for chain in &self.chains {
            if chain.name == RELAY_NODE || !names.insert(chain.name.as_str()) {
                return Err(Invalid(format!(
                    "duplicate or reserved chain name {:?}",
                    chain.name
                )));
            }
            let mut accounts = BTreeSet::new();
            for account in &chain.accounts {
                if !accounts.insert(account.name.as_str()) {
                    return Err(Invalid(format!(
                        "duplicate account {}/{}",
                        chain.name, account.name
                    )));
                }
                if let Some(addr) = &account.address {
                    if crate::ledger::Address::from_hex(addr).is_none() {
                        return Err(Invalid(format!("bad address {addr:?}")));
                    }
                }
                for label in account.balances.keys() {
                    if !chain.assets.iter().any(|a| &a.label == label) {
                        return Err(UnknownReference(format!("{}/{}", chain.name, label)));
                    }
                }
            }
            let mut labels = BTreeSet::new();
            for asset in &chain.assets {
                if !labels.insert(asset.label.as_str()) {
                    return Err(Invalid(format!(
                        "asset {} declared twice on {}",
                        asset.label, chain.name
                    )));
                }
            }
            if let PolicyDecl::Allowlist(list) = &chain.receiver_policy {
                for name in list {
                    if !accounts.contains(name.as_str()) {
                        return Err(UnknownReference(format!("{}/{}", chain.name, name)));
                    }
                }
            }
        }
        self.validate_assets()?;
        let node_known = |n: &str| n == RELAY_NODE || names.contains(n);
        for link in &self.links {
            for end in [&link.from, &link.to] {
                if !node_known(end) {
                    return Err(UnknownReference(end.clone()));
                }
            }
            if link.config.drop_den == 0 || link.config.drop_num > link.config.drop_den {
                return Err(Invalid(format!(
                    "bad drop fraction on {} -> {}",
                    link.from, link.to
                )));
            }
        }
        let n_transfers = self.transfer_events().len();
        let mut last_tick = 0;
        for (i, event) in self.events.iter().enumerate() {
            if event.tick < last_tick {
                return Err(NonMonotonicTick { index: i });
            }
            last_tick = event.tick;
            match &event.action {
                Action::Transfer(t) | Action::BridgeLock(t) | Action::BridgeBurn(t) => {
                    self.validate_transfer(t)?
                }
                Action::Partition { a, b, until } => {
                    for end in [a, b] {
                        if !node_known(end) {
                            return Err(UnknownReference(end.clone()));
                        }
                    }
                    if until.is_some_and(|u| u <= event.tick) {
                        return Err(Invalid(format!("partition at event {i} ends before it starts")));
                    }
                }
                Action::Heal { a, b } => {
                    for end in [a, b] {
                        if !node_known(end) {
                            return Err(UnknownReference(end.clone()));
                        }
                    }
                }
                Action::Tamper { target, mutation } => {
                    if *target >= n_transfers {
                        return Err(UnknownReference(format!("transfer #{target}")));
                    }
                    let target_tick = self.events[self.transfer_events()[*target]].tick;
                    if *mutation == Mutation::ReplayNonce && event.tick <= target_tick {
                        return Err(Invalid(format!(
                            "replay tamper at event {i} must come after its target"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_assets(&self) -> Result<(), ScenarioError> {
        use ScenarioError::*;
        let mut specs: BTreeMap<&str, &AssetDecl> = BTreeMap::new();
        let mut homes: BTreeMap<&str, usize> = BTreeMap::new();
        let mut circulating: BTreeMap<&str, u128> = BTreeMap::new();
        for chain in &self.chains {
            for asset in &chain.assets {
                match specs.get(asset.label.as_str()) {
                    Some(prev)
                        if (
                            prev.name.as_str(),
                            prev.symbol.as_str(),
                            prev.decimals,
                            prev.total_supply,
                        ) != (
                            asset.name.as_str(),
                            asset.symbol.as_str(),
                            asset.decimals,
                            asset.total_supply,
                        ) =>
                    {
                        return Err(Invalid(format!("asset {} declared inconsistently", asset.label)));
                    }
                    _ => {
                        specs.insert(&asset.label, asset);
                    }
                }
                if asset.home {
                    *homes.entry(&asset.label).or_default() += 1;
                }
            }
            for account in &chain.accounts {
                for (label, amount) in &account.balances {
                    *circulating.entry(label.as_str()).or_default() += u128::from(*amount);
                }
            }
        }
        for (label, spec) in &specs {
            if homes.get(label).copied().unwrap_or(0) > 1 {
                return Err(Invalid(format!("asset {label} has more than one home chain")));
            }
            let total = circulating.get(label).copied().unwrap_or(0);
            if total != u128::from(spec.total_supply) {
                return Err(SupplyMismatch {
                    asset: String::from(*label),
                    declared: spec.total_supply,
                    genesis: total,
                });
            }
        }
        Ok(())
    }

    fn validate_transfer(&self, t: &TransferAction) -> Result<(), ScenarioError> {
        use ScenarioError::UnknownReference;
        for (chain, account) in [(&t.from_chain, &t.from_account), (&t.to_chain, &t.to_account)] {
            let decl = self.chain(chain).ok_or_else(|| UnknownReference(chain.clone()))?;
            if !decl.accounts.iter().any(|a| &a.name == account) {
                return Err(UnknownReference(format!("{chain}/{account}")));
            }
        }
        let from = self.chain(&t.from_chain).expect("checked above");
        if !from.assets.iter().any(|a| a.label == t.asset) {
            return Err(UnknownReference(format!("{}/{}", t.from_chain, t.asset)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioError {
    UnknownReference(String),
    NonMonotonicTick {
        index: usize,
    },
    SupplyMismatch {
        asset: String,
        declared: u64,
        genesis: u128,
    },
    Invalid(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::UnknownReference(name) => write!(f, "unknown reference: {name}"),
            ScenarioError::NonMonotonicTick { index } => {
                write!(f, "event {index} has a tick earlier than its predecessor")
            }
            ScenarioError::SupplyMismatch {
                asset,
                declared,
                genesis,
            } => write!(
                f,
                "asset {asset}: total_supply {declared} but genesis balances sum to {genesis}"
            ),
            ScenarioError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for ScenarioError {}
