//! Random scenario generator.

use std::collections::{BTreeMap, BTreeSet};

use ztc_core::group::{GroupParams, Profile};
use ztc_core::netsim::LinkConfig;
use ztc_core::scenario::{
    AccountDecl, Action, AssetDecl, ChainDecl, Event, LinkDecl, Mutation, PolicyDecl, Scenario,
    TransferAction,
};
use ztc_core::sim::account_keypair;
use ztc_core::SplitMix64;

pub struct Knobs {
    pub profile: Profile,
    pub drops: bool,
    pub partitions: bool,
    pub tampers: bool,
    pub bridge: bool,
}

impl Knobs {
    pub fn everything(profile: Profile) -> Self {
        Knobs {
            profile,
            drops: true,
            partitions: true,
            tampers: true,
            bridge: true,
        }
    }
}

fn pick<'a, T>(rng: &mut SplitMix64, items: &'a [T]) -> &'a T {
    &items[rng.below(items.len() as u64) as usize]
}

fn chance(rng: &mut SplitMix64, num: u64, den: u64) -> bool {
    rng.below(den) < num
}

fn range(rng: &mut SplitMix64, lo: u64, hi: u64) -> u64 {
    lo + rng.below(hi - lo + 1)
}

pub fn scenario(seed: u64, knobs: &Knobs) -> Scenario {
    let mut rng = SplitMix64::new(seed);
    let rng = &mut rng;
    let mut s = Scenario::new(rng.next_u64(), knobs.profile);
    s.escrow_timeout = range(rng, 30, 150);

    let n_chains = range(rng, 2, 3) as usize;
    let chain_names: Vec<String> = (0..n_chains).map(|i| format!("C{i}")).collect();
    let mut chains: Vec<ChainDecl> = chain_names
        .iter()
        .map(|name| ChainDecl {
            name: name.clone(),
            external: chance(rng, 1, 4),
            receiver_policy: PolicyDecl::AllowAll,
            assets: Vec::new(),
            accounts: Vec::new(),
        })
        .collect();
    let params = GroupParams::new(knobs.profile);
    for chain in &mut chains {
        let mut taken = BTreeSet::new();
        for i in 0..range(rng, 1, 3) {
            let address = chance(rng, 1, 12).then(|| {
                let bytes: Vec<u8> = (0..20).map(|_| rng.below(256) as u8).collect();
                format!("0x{}", hex::encode(bytes))
            });
            // the tiny group has few keys, so derived addresses can collide
            let mut name = format!("u{i}");
            while address.is_none()
                && !taken.insert(
                    account_keypair(s.seed, &chain.name, &name, &params)
                        .public()
                        .clone(),
                )
            {
                name.push('x');
            }
            chain.accounts.push(AccountDecl {
                name,
                address,
                balances: BTreeMap::new(),
                frozen: chance(rng, 1, 10),
            });
        }
        if chance(rng, 1, 5) {
            let names: Vec<String> = chain
                .accounts
                .iter()
                .filter(|_| chance(rng, 1, 2))
                .map(|a| a.name.clone())
                .collect();
            chain.receiver_policy = PolicyDecl::Allowlist(names);
        }
    }

    let supply_cap = match knobs.profile {
        Profile::Tiny => 63,
        Profile::Production => 1 << 40,
    };
    let n_assets = range(rng, 1, 2) as usize;
    let mut assets = Vec::new();
    for a in 0..n_assets {
        let label = format!("T{a}");
        let home = rng.below(n_chains as u64) as usize;
        let total = range(rng, supply_cap / 3, supply_cap);
        let decl = AssetDecl {
            label: label.clone(),
            name: format!("Token {a}"),
            symbol: label.clone(),
            decimals: rng.below(19) as u32,
            total_supply: total,
            home: false,
        };
        let mut registered = vec![home];
        for c in 0..n_chains {
            if c != home && chance(rng, 4, 5) {
                registered.push(c);
            }
        }
        for &c in &registered {
            chains[c].assets.push(AssetDecl {
                home: c == home,
                ..decl.clone()
            });
        }
        // genesis: split the supply over accounts of chains holding the asset
        let mut holders = Vec::new();
        for &c in &registered {
            for i in 0..chains[c].accounts.len() {
                holders.push((c, i));
            }
        }
        let mut left = total;
        for (k, &(c, i)) in holders.iter().enumerate() {
            let remaining = (holders.len() - k) as u64;
            let share = if remaining == 1 {
                left
            } else {
                rng.below(2 * left / remaining + 1).min(left)
            };
            if share > 0 {
                chains[c].accounts[i].balances.insert(label.clone(), share);
            }
            left -= share;
        }
        assets.push((label, home, registered));
    }
    s.chains = chains;

    for name in &chain_names {
        for (from, to) in [(name.as_str(), "relay"), ("relay", name.as_str())] {
            let mut config = LinkConfig::fixed(range(rng, 0, 4));
            config.jitter = rng.below(3);
            if knobs.drops && chance(rng, 1, 3) {
                config.drop_num = 1;
                config.drop_den = range(rng, 4, 8);
            }
            s.links.push(LinkDecl {
                from: from.into(),
                to: to.into(),
                config,
            });
        }
    }

    let mut events = Vec::new();
    let mut tick = 0;
    let n_transfers = range(rng, 3, 10);
    let mut transfer_ticks = Vec::new();
    for _ in 0..n_transfers {
        tick += rng.below(16);
        let (label, home, registered) = pick(rng, &assets).clone();
        let kind = if knobs.bridge { rng.below(4) } else { 0 };
        let remotes: Vec<usize> = registered.iter().copied().filter(|&c| c != home).collect();
        // lock: home to a remote; burn: a remote back home. Rarely a
        // misdirected one, to exercise the refusals.
        let kind = if remotes.is_empty() && !chance(rng, 1, 10) {
            0
        } else {
            kind
        };
        let (from, to) = match kind {
            1 if !remotes.is_empty() => (home, *pick(rng, &remotes)),
            2 if !remotes.is_empty() => (*pick(rng, &remotes), home),
            1 | 2 => (home, home),
            _ => {
                let from = *pick(rng, &registered);
                let hop = if chance(rng, 1, 12) {
                    0
                } else {
                    range(rng, 1, n_chains as u64 - 1)
                };
                (from, (from + hop as usize) % n_chains)
            }
        };
        let from_chain = &s.chains[from];
        let to_chain = &s.chains[to];
        let t = TransferAction {
            from_chain: from_chain.name.clone(),
            from_account: pick(rng, &from_chain.accounts).name.clone(),
            to_chain: to_chain.name.clone(),
            to_account: pick(rng, &to_chain.accounts).name.clone(),
            asset: label,
            amount: if chance(rng, 3, 4) {
                rng.below(supply_cap / 8 + 1)
            } else {
                rng.below(supply_cap / 3 + 1)
            },
            fee: rng.below(4),
        };
        let action = match kind {
            1 => Action::BridgeLock(t),
            2 => Action::BridgeBurn(t),
            _ => Action::Transfer(t),
        };
        transfer_ticks.push(tick);
        events.push(Event { tick, action });
    }
    if knobs.partitions {
        for _ in 0..rng.below(3) {
            let at = rng.below(tick + 10);
            let chain = pick(rng, &chain_names).clone();
            let (a, b) = if chance(rng, 1, 2) {
                (chain, "relay".to_owned())
            } else {
                ("relay".to_owned(), chain)
            };
            let until = chance(rng, 2, 3).then(|| at + range(rng, 1, 40));
            if until.is_none() {
                events.push(Event {
                    tick: at + range(rng, 1, 40),
                    action: Action::Heal {
                        a: a.clone(),
                        b: b.clone(),
                    },
                });
            }
            events.push(Event {
                tick: at,
                action: Action::Partition { a, b, until },
            });
        }
    }
    if knobs.tampers {
        let mut targets: Vec<usize> = (0..transfer_ticks.len()).collect();
        for _ in 0..rng.below(4) {
            if targets.is_empty() {
                break;
            }
            let target = targets.remove(rng.below(targets.len() as u64) as usize);
            let mutation = *pick(rng, &Mutation::ALL);
            let at = if mutation == Mutation::ReplayNonce {
                transfer_ticks[target] + range(rng, 1, 30)
            } else {
                rng.below(tick + 1)
            };
            events.push(Event {
                tick: at,
                action: Action::Tamper { target, mutation },
            });
        }
    }
    // stable: transfers keep their relative order, so tamper targets hold
    events.sort_by_key(|e| e.tick);
    s.events = events;
    s
}
