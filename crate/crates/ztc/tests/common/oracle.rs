//! Naive reference interpreter.
//!
//! Replays a scenario with plain integer bookkeeping and no cryptography.
//! Network fates come from the transcript: the oracle walks the net
//! records in order, requiring every send it expects to appear next and
//! taking each message's delivery (or drop) from there. Every ledger and
//! relay decision is the oracle's own.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::Value as Json;
use ztc::canonical::{int_field, str_field};
use ztc::transcript::Entry;
use ztc_core::bridge::wrapped_id;
use ztc_core::ledger::{operator_address, AssetId, ChainId};
use ztc_core::scenario::{Action, Mutation, PolicyDecl, Scenario, TransferAction};

const OPERATOR: &str = "<operator>";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Plain,
    Lock,
    Burn,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Effect {
    Finalize,
    Refund,
    /// Receipt names a hash with no escrow, or reports a replay.
    Nothing,
}

#[derive(Clone, Debug)]
enum Msg {
    ToRelay { idx: usize, mutation: Option<Mutation> },
    ToDest { idx: usize },
    Outcome { idx: usize, valid: bool },
    Receipt { idx: usize, effect: Effect },
}

struct Transfer {
    kind: Kind,
    t: TransferAction,
    debit: AssetId,
    open: bool,
    expiry: u64,
    executed: Option<bool>,
}

/// Balances keyed by (chain, holder, asset hex); bridge books keyed by
/// (asset label, home chain, remote chain).
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Books {
    pub balances: BTreeMap<(String, String, String), u128>,
    pub locked: BTreeMap<(String, String, String), u128>,
    pub wrapped: BTreeMap<(String, String, String), u128>,
}

impl Books {
    fn nonzero(self) -> Self {
        let keep =
            |m: BTreeMap<(String, String, String), u128>| m.into_iter().filter(|(_, v)| *v != 0).collect();
        Books {
            balances: keep(self.balances),
            locked: keep(self.locked),
            wrapped: keep(self.wrapped),
        }
    }
}

struct Oracle<'a> {
    s: &'a Scenario,
    books: Books,
    transfers: Vec<Option<Transfer>>,
    seen: BTreeSet<(usize, bool)>,
    msgs: BTreeMap<u128, Msg>,
    net: VecDeque<&'a Entry>,
    tampers: BTreeMap<usize, Mutation>,
}

fn native(label: &str) -> AssetId {
    AssetId::from_label(label)
}

fn wrapped(label: &str, home: &str) -> AssetId {
    wrapped_id(&native(label), &ChainId::from_name(home))
}

fn env_kind(kind: Kind) -> &'static str {
    match kind {
        Kind::Plain => "XTransfer",
        _ => "BridgeOp",
    }
}

impl<'a> Oracle<'a> {
    fn registered(&self, chain: &str, label: &str) -> bool {
        self.s
            .chain(chain)
            .is_some_and(|c| c.assets.iter().any(|a| a.label == label))
    }

    fn bal(&mut self, chain: &str, holder: &str, asset: &AssetId) -> &mut u128 {
        self.books
            .balances
            .entry((chain.to_owned(), holder.to_owned(), asset.to_hex()))
            .or_default()
    }

    fn expect_send(&mut self, from: &str, to: &str, kind: &str, msg: Msg) -> Result<(), String> {
        let e = self
            .net
            .pop_front()
            .ok_or_else(|| format!("expected send {from}->{to}, transcript ended"))?;
        let p = &e.payload;
        let matches = (e.kind == "Send" || e.kind == "Drop")
            && str_field(p, "from") == Some(from)
            && str_field(p, "to") == Some(to)
            && str_field(p, "kind") == Some(kind);
        if !matches {
            return Err(format!("expected send {from}->{to} {kind}, found {} {p}", e.kind));
        }
        if e.kind == "Send" {
            let seq = int_field(p, "seq").ok_or("send without seq")?;
            self.msgs.insert(seq, msg);
        }
        Ok(())
    }

    fn initiate(&mut self, idx: usize, kind: Kind, t: &TransferAction, tick: u64) -> Result<(), String> {
        let s = self.s;
        let sender = s
            .chain(&t.from_chain)
            .and_then(|c| c.accounts.iter().find(|a| a.name == t.from_account));
        let sender = sender.ok_or("undeclared sender")?;
        let home = s.home_of(&t.asset);
        let debit = match kind {
            Kind::Burn => wrapped(&t.asset, &t.to_chain),
            _ => native(&t.asset),
        };
        let refused = sender.address.is_some()
            || t.from_chain == t.to_chain
            || !self.registered(&t.from_chain, &t.asset)
            || (kind == Kind::Lock && home != Some(t.from_chain.as_str()))
            || (kind == Kind::Burn && home == Some(t.from_chain.as_str()))
            || sender.frozen
            || *self.bal(&t.from_chain, &t.from_account, &debit) < u128::from(t.amount) + u128::from(t.fee);
        if refused {
            self.transfers.push(None);
            return Ok(());
        }
        *self.bal(&t.from_chain, &t.from_account, &debit) -= u128::from(t.amount) + u128::from(t.fee);
        self.transfers.push(Some(Transfer {
            kind,
            t: t.clone(),
            debit,
            open: true,
            expiry: tick + s.escrow_timeout,
            executed: None,
        }));
        let mutation = self.tampers.get(&idx).copied();
        self.expect_send(
            &t.from_chain,
            "relay",
            env_kind(kind),
            Msg::ToRelay { idx, mutation },
        )
    }

    fn event(&mut self, action: &Action, tick: u64, transfer_idx: &mut usize) -> Result<(), String> {
        let kind = match action {
            Action::Transfer(_) => Kind::Plain,
            Action::BridgeLock(_) => Kind::Lock,
            Action::BridgeBurn(_) => Kind::Burn,
            Action::Tamper {
                target,
                mutation: Mutation::ReplayNonce,
            } => {
                let Some(Some(tr)) = self.transfers.get(*target) else {
                    return Ok(());
                };
                let (from, kind) = (tr.t.from_chain.clone(), env_kind(tr.kind));
                return self.expect_send(
                    &from,
                    "relay",
                    kind,
                    Msg::ToRelay {
                        idx: *target,
                        mutation: None,
                    },
                );
            }
            _ => return Ok(()),
        };
        let idx = *transfer_idx;
        *transfer_idx += 1;
        self.initiate(idx, kind, action.transfer().expect("transfer-like"), tick)
    }

    fn tr(&self, idx: usize) -> &Transfer {
        self.transfers[idx]
            .as_ref()
            .expect("message for an initiated transfer")
    }

    fn relay_ingress(&mut self, idx: usize, mutation: Option<Mutation>) -> Result<(), String> {
        let (from, to, kind, receiver) = {
            let tr = self.tr(idx);
            (
                tr.t.from_chain.clone(),
                tr.t.to_chain.clone(),
                tr.kind,
                tr.t.to_account.clone(),
            )
        };
        let key = (idx, mutation == Some(Mutation::SwapSender));
        if !self.seen.insert(key) {
            return self.expect_send(
                "relay",
                &from,
                "Receipt",
                Msg::Receipt {
                    idx,
                    effect: Effect::Nothing,
                },
            );
        }
        if let Some(m) = mutation {
            let effect = match m {
                Mutation::ZeroSignature | Mutation::RebindHash => Effect::Refund,
                _ => Effect::Nothing,
            };
            return self.expect_send("relay", &from, "Receipt", Msg::Receipt { idx, effect });
        }
        let allowed = match &self.s.chain(&to).expect("declared").receiver_policy {
            PolicyDecl::AllowAll => true,
            PolicyDecl::Allowlist(names) => names.contains(&receiver),
        };
        if !allowed {
            return self.expect_send(
                "relay",
                &from,
                "Receipt",
                Msg::Receipt {
                    idx,
                    effect: Effect::Refund,
                },
            );
        }
        self.expect_send("relay", &to, env_kind(kind), Msg::ToDest { idx })
    }

    fn execute(&mut self, idx: usize) -> Result<(), String> {
        let (kind, t, open) = {
            let tr = self.tr(idx);
            (tr.kind, tr.t.clone(), tr.open)
        };
        let receiver_frozen = self
            .s
            .chain(&t.to_chain)
            .and_then(|c| c.accounts.iter().find(|a| a.name == t.to_account))
            .is_some_and(|a| a.frozen);
        let amount = u128::from(t.amount);
        let lock_key = (t.asset.clone(), t.to_chain.clone(), t.from_chain.clone());
        let valid = open
            && !receiver_frozen
            && match kind {
                Kind::Plain | Kind::Lock => self.registered(&t.to_chain, &t.asset),
                Kind::Burn => {
                    self.s.home_of(&t.asset) == Some(t.to_chain.as_str())
                        && self.books.locked.get(&lock_key).copied().unwrap_or(0) >= amount
                }
            };
        if valid {
            match kind {
                Kind::Plain => *self.bal(&t.to_chain, &t.to_account, &native(&t.asset)) += amount,
                Kind::Lock => {
                    *self.bal(&t.to_chain, &t.to_account, &wrapped(&t.asset, &t.from_chain)) += amount;
                    let key = (t.asset.clone(), t.from_chain.clone(), t.to_chain.clone());
                    *self.books.wrapped.entry(key).or_default() += amount;
                }
                Kind::Burn => {
                    *self.books.locked.entry(lock_key).or_default() -= amount;
                    *self.bal(&t.to_chain, &t.to_account, &native(&t.asset)) += amount;
                }
            }
        }
        if let Some(tr) = self.transfers[idx].as_mut() {
            tr.executed = Some(valid);
        }
        self.expect_send(&t.to_chain, "relay", "Receipt", Msg::Outcome { idx, valid })
    }

    fn close(&mut self, idx: usize, finalize: bool) {
        let (kind, t, debit) = {
            let tr = self.transfers[idx].as_mut().expect("initiated");
            tr.open = false;
            (tr.kind, tr.t.clone(), tr.debit)
        };
        let amount = u128::from(t.amount);
        if !finalize {
            *self.bal(&t.from_chain, &t.from_account, &debit) += amount + u128::from(t.fee);
            return;
        }
        match kind {
            Kind::Plain => {}
            Kind::Lock => {
                let key = (t.asset.clone(), t.from_chain.clone(), t.to_chain.clone());
                *self.books.locked.entry(key).or_default() += amount;
            }
            Kind::Burn => {
                let key = (t.asset.clone(), t.to_chain.clone(), t.from_chain.clone());
                *self.books.wrapped.entry(key).or_default() -= amount;
            }
        }
        *self.bal(&t.from_chain, OPERATOR, &debit) += u128::from(t.fee);
    }

    fn deliver(&mut self) -> Result<(), String> {
        let e = self.net.pop_front().expect("peeked");
        let seq = int_field(&e.payload, "seq").ok_or("deliver without seq")?;
        let msg = self
            .msgs
            .remove(&seq)
            .ok_or_else(|| format!("delivery of unknown message {seq}"))?;
        match msg {
            Msg::ToRelay { idx, mutation } => self.relay_ingress(idx, mutation),
            Msg::ToDest { idx } => self.execute(idx),
            Msg::Outcome { idx, valid } => {
                let from = self.tr(idx).t.from_chain.clone();
                let effect = if valid { Effect::Finalize } else { Effect::Refund };
                self.expect_send("relay", &from, "Receipt", Msg::Receipt { idx, effect })
            }
            Msg::Receipt { idx, effect } => {
                if self.tr(idx).open && effect != Effect::Nothing {
                    self.close(idx, effect == Effect::Finalize);
                }
                Ok(())
            }
        }
    }

    fn next_expiry(&self) -> Option<u64> {
        self.transfers
            .iter()
            .flatten()
            .filter(|t| t.open)
            .map(|t| t.expiry)
            .min()
    }

    fn expire(&mut self, tick: u64) {
        for idx in 0..self.transfers.len() {
            let due = self.transfers[idx]
                .as_ref()
                .filter(|t| t.open && t.expiry <= tick)
                .map(|t| t.executed == Some(true));
            if let Some(finalize) = due {
                self.close(idx, finalize);
            }
        }
    }
}

/// Final books predicted for `scenario`, given the transcript's network
/// fates. Assumes the run reached quiescence.
pub fn predict(s: &Scenario, entries: &[Entry]) -> Result<Books, String> {
    let mut o = Oracle {
        s,
        books: Books::default(),
        transfers: Vec::new(),
        seen: BTreeSet::new(),
        msgs: BTreeMap::new(),
        net: entries
            .iter()
            .filter(|e| matches!(e.kind.as_str(), "Send" | "Drop" | "Deliver"))
            .collect(),
        tampers: s
            .events
            .iter()
            .filter_map(|e| match e.action {
                Action::Tamper { target, mutation } if mutation != Mutation::ReplayNonce => {
                    Some((target, mutation))
                }
                _ => None,
            })
            .collect(),
    };
    for chain in &s.chains {
        for account in &chain.accounts {
            for (label, amount) in &account.balances {
                *o.bal(&chain.name, &account.name, &native(label)) += u128::from(*amount);
            }
        }
    }
    let mut next_event = 0;
    let mut transfer_idx = 0;
    loop {
        let front = o.net.front().copied();
        let candidates = [
            s.events.get(next_event).map(|e| (e.tick, 0)),
            front.filter(|e| e.kind == "Deliver").map(|e| (e.tick, 1)),
            o.next_expiry().map(|t| (t, 2)),
        ];
        let Some((tick, phase)) = candidates.into_iter().flatten().min() else {
            if let Some(e) = front {
                return Err(format!("unexpected {} {}", e.kind, e.payload));
            }
            break;
        };
        match phase {
            0 => {
                let event = &s.events[next_event];
                next_event += 1;
                o.event(&event.action, tick, &mut transfer_idx)?;
            }
            1 => o.deliver()?,
            _ => o.expire(tick),
        }
    }
    Ok(o.books.nonzero())
}

/// The books as the run's final snapshots report them.
pub fn observed(s: &Scenario, entries: &[Entry]) -> Result<Books, String> {
    let mut names: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut chain_names: BTreeMap<String, String> = BTreeMap::new();
    for c in &s.chains {
        let id = ChainId::from_name(&c.name);
        chain_names.insert(id.to_hex(), c.name.clone());
        names.insert(
            (c.name.clone(), operator_address(&id).to_hex()),
            OPERATOR.to_owned(),
        );
    }
    let mut labels: BTreeMap<String, String> = BTreeMap::new();
    for c in &s.chains {
        for a in &c.assets {
            labels.insert(native(&a.label).to_hex(), a.label.clone());
        }
    }
    let mut books = Books::default();
    for e in entries {
        let Some(chain) = e.actor.strip_prefix("chain:") else {
            continue;
        };
        let p = &e.payload;
        match e.kind.as_str() {
            "AccountOpened" => {
                let addr = str_field(p, "address").ok_or("no address")?;
                let name = str_field(p, "name").ok_or("no name")?;
                names.insert((chain.to_owned(), addr.to_owned()), name.to_owned());
            }
            "FinalSnapshot" => {
                let accounts = p.get("accounts").and_then(Json::as_object).ok_or("no accounts")?;
                for (addr, account) in accounts {
                    let holder = names
                        .get(&(chain.to_owned(), addr.clone()))
                        .cloned()
                        .unwrap_or_else(|| addr.clone());
                    for (asset, v) in account
                        .get("balances")
                        .and_then(Json::as_object)
                        .ok_or("no balances")?
                    {
                        let amount = v
                            .as_str()
                            .and_then(ztc::canonical::parse_dec)
                            .ok_or("bad balance")?;
                        books
                            .balances
                            .insert((chain.to_owned(), holder.clone(), asset.clone()), amount);
                    }
                }
                let bridge = p.get("bridge").ok_or("no bridge")?;
                for (book, home_side) in [("locked", true), ("wrapped_supply", false)] {
                    for (key, v) in bridge.get(book).and_then(Json::as_object).ok_or("no book")? {
                        let (asset, other) = key.split_once('/').ok_or("bad key")?;
                        let label = labels.get(asset).cloned().ok_or("unknown asset in bridge book")?;
                        let other = chain_names
                            .get(other)
                            .cloned()
                            .ok_or("unknown chain in bridge book")?;
                        let amount = v
                            .as_str()
                            .and_then(ztc::canonical::parse_dec)
                            .ok_or("bad amount")?;
                        if home_side {
                            books.locked.insert((label, chain.to_owned(), other), amount);
                        } else {
                            books.wrapped.insert((label, other, chain.to_owned()), amount);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(books.nonzero())
}

/// `Ok` when prediction and observation agree exactly.
pub fn check(s: &Scenario, entries: &[Entry]) -> Result<(), String> {
    let predicted = predict(s, entries)?;
    let observed = observed(s, entries)?;
    if predicted == observed {
        Ok(())
    } else {
        Err(format!("oracle {predicted:?}\nrun    {observed:?}"))
    }
}
