//! The simulation loop.
//!
//! Per tick the order is fixed: scenario events, then every delivery due at
//! the tick (including zero-latency sends made while processing it), then
//! escrow timeouts. The loop jumps straight to the next tick that has work
//! and stops at the first quiescent point after the last event, or when
//! the next unit of work lies beyond `max_ticks`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::group::{GroupParams, Keypair, Signature};
use crate::hash::{sha256, Hash32};
use crate::ledger::{
    Address, AssetId, AssetSpec, ChainId, ChainState, Closure, Directory, LedgerError, Transaction,
    TransferKind, TransferRequest,
};
use crate::netsim::{LinkConfig, Network, NodeId, SendOutcome};
use crate::record::{Actor, Record, RecordKind, Value};
use crate::relay::{Envelope, EnvelopeKind, IngressEvent, Payload, ReceiverPolicy, RelayState};
use crate::rng::SplitMix64;
use crate::scenario::{Action, Mutation, PolicyDecl, Scenario, ScenarioError, TransferAction, RELAY_NODE};
use crate::zkp::TxValidityProof;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Quiescent,
    MaxTicksExceeded,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Quiescent => "quiescent",
            RunStatus::MaxTicksExceeded => "max_ticks_exceeded",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<Record>,
    pub status: RunStatus,
    pub final_tick: u64,
    /// Chain name to final snapshot, in chain declaration order.
    pub snapshots: Vec<(String, Value)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimError {
    Scenario(ScenarioError),
    Setup(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Scenario(e) => write!(f, "{e}"),
            SimError::Setup(msg) => write!(f, "setup failed: {msg}"),
        }
    }
}

impl core::error::Error for SimError {}

impl From<ScenarioError> for SimError {
    fn from(e: ScenarioError) -> Self {
        SimError::Scenario(e)
    }
}

/// Label of the key stream for account `name` on `chain`.
pub fn key_label(chain: &str, name: &str) -> String {
    format!("ZTC/KEY/{chain}/{name}")
}

/// The keypair the simulator gives a keyed account.
pub fn account_keypair(seed: u64, chain: &str, name: &str, params: &GroupParams) -> Keypair {
    let mut rng = SplitMix64::fork(seed, key_label(chain, name).as_bytes());
    Keypair::generate(params, &mut rng)
}

pub fn relay_keypair(seed: u64, params: &GroupParams) -> Keypair {
    Keypair::generate(params, &mut SplitMix64::fork(seed, b"ZTC/RELAY/KEY"))
}

struct ChainsView<'a>(&'a BTreeMap<ChainId, ChainState>);

impl Directory for ChainsView<'_> {
    fn public_key(&self, chain: &ChainId, address: &Address) -> Option<crate::group::Element> {
        self.0.get(chain)?.public_key(address).cloned()
    }

    fn tx_commitment(
        &self,
        chain: &ChainId,
        address: &Address,
        nonce: u64,
    ) -> Option<crate::group::Commitment> {
        self.0.get(chain)?.tx_commitment(address, nonce).cloned()
    }

    fn escrow_open(&self, chain: &ChainId, tx_hash: &Hash32) -> bool {
        self.0.get(chain).is_some_and(|c| c.escrow_open(tx_hash))
    }
}

/// Value rendering of a transaction with its wire bytes.
pub fn tx_value(tx: &Transaction, params: &GroupParams) -> Value {
    Value::map()
        .with("amount", tx.amount)
        .with("asset", tx.asset.to_hex())
        .with("dest_chain", tx.dest_chain.to_hex())
        .with("fee", tx.fee)
        .with("nonce", tx.nonce)
        .with("origin_chain", tx.origin_chain.to_hex())
        .with("receiver", tx.receiver.to_hex())
        .with("sender", tx.sender.to_hex())
        .with("wire", tx.encode(params))
        .build()
}

fn payload_tx_hash(env: &Envelope) -> Hash32 {
    match &env.payload {
        Payload::Transfer { tx, .. } => tx.hash(),
        Payload::Receipt(r) => r.tx_hash,
        Payload::Outcome { tx_hash, .. } => *tx_hash,
    }
}

fn node_label(node: &NodeId, names: &BTreeMap<ChainId, String>) -> String {
    match node {
        NodeId::Relay => RELAY_NODE.into(),
        NodeId::Chain(id) => names.get(id).cloned().unwrap_or_else(|| id.to_hex()),
    }
}

struct World<'s> {
    scenario: &'s Scenario,
    params: GroupParams,
    chains: BTreeMap<ChainId, ChainState>,
    chain_ids: BTreeMap<String, ChainId>,
    chain_names: BTreeMap<ChainId, String>,
    addresses: BTreeMap<(ChainId, String), Address>,
    wallet: BTreeMap<(ChainId, Address), Keypair>,
    relay: RelayState,
    net: Network,
    tampers: BTreeMap<usize, Mutation>,
    /// Transfer index to the envelope as the origin built it.
    originals: BTreeMap<usize, Envelope>,
    records: Vec<Record>,
    tick: u64,
}

/// Runs a validated scenario to quiescence or `max_ticks`.
pub fn run(scenario: &Scenario) -> Result<RunOutput, SimError> {
    scenario.validate()?;
    let mut world = World::setup(scenario)?;
    let status = world.event_loop();
    Ok(world.finish(status))
}

impl<'s> World<'s> {
    fn setup(scenario: &'s Scenario) -> Result<Self, SimError> {
        let params = GroupParams::new(scenario.profile);
        let seed = scenario.seed;
        let relay_keys = relay_keypair(seed, &params);
        let relay_pk = params.encode_element(relay_keys.public());
        let relay = RelayState::new(relay_keys, SplitMix64::fork(seed, b"ZTC/RELAY/SIG"));
        let mut world = World {
            scenario,
            params,
            chains: BTreeMap::new(),
            chain_ids: BTreeMap::new(),
            chain_names: BTreeMap::new(),
            addresses: BTreeMap::new(),
            wallet: BTreeMap::new(),
            relay,
            net: Network::new(seed),
            tampers: BTreeMap::new(),
            originals: BTreeMap::new(),
            records: Vec::new(),
            tick: 0,
        };
        world.push(
            Actor::Scenario,
            RecordKind::RunStart,
            Value::map()
                .with("profile", scenario.profile.as_str())
                .with("relay_pk", relay_pk)
                .with("seed", seed)
                .build(),
        );
        for decl in &scenario.chains {
            world.setup_chain(decl)?;
        }
        for decl in &scenario.chains {
            world.register_route(decl)?;
        }
        world.setup_links()?;
        for event in &scenario.events {
            if let Action::Tamper { target, mutation } = &event.action {
                if *mutation != Mutation::ReplayNonce {
                    world.tampers.insert(*target, *mutation);
                }
            }
        }
        Ok(world)
    }

    fn setup_chain(&mut self, decl: &crate::scenario::ChainDecl) -> Result<(), SimError> {
        let seed = self.scenario.seed;
        let rng = SplitMix64::fork(seed, format!("ZTC/CHAIN/{}", decl.name).as_bytes());
        let mut chain = ChainState::new(&decl.name, decl.external, self.scenario.escrow_timeout, rng);
        let actor = Actor::Chain(decl.name.clone());
        let setup_err = |e: LedgerError| SimError::Setup(format!("{}: {e}", decl.name));
        for asset in &decl.assets {
            let spec = AssetSpec {
                canonical_id: AssetId::from_label(&asset.label),
                name: asset.name.clone(),
                symbol: asset.symbol.clone(),
                decimals: asset.decimals,
                total_supply: asset.total_supply,
            };
            chain.register_asset(spec, asset.home).map_err(setup_err)?;
            self.push(
                actor.clone(),
                RecordKind::AssetRegistered,
                Value::map()
                    .with("asset", AssetId::from_label(&asset.label).to_hex())
                    .with("decimals", u64::from(asset.decimals))
                    .with("home", asset.home)
                    .with("label", asset.label.as_str())
                    .with("name", asset.name.as_str())
                    .with("symbol", asset.symbol.as_str())
                    .with("total_supply", asset.total_supply)
                    .build(),
            );
        }
        for account in &decl.accounts {
            let (address, pk) = match &account.address {
                Some(hex) => (Address::from_hex(hex).expect("validated"), None),
                None => {
                    let keys = account_keypair(seed, &decl.name, &account.name, &self.params);
                    let address = Address::from_public_key(&self.params, keys.public());
                    let pk = keys.public().clone();
                    self.wallet.insert((chain.id, address), keys);
                    (address, Some(pk))
                }
            };
            chain
                .open_account(address, pk.clone(), account.frozen)
                .map_err(setup_err)?;
            let mut balances = BTreeMap::new();
            for (label, amount) in &account.balances {
                let asset = AssetId::from_label(label);
                chain
                    .mint_genesis(&address, &asset, *amount, &self.params)
                    .map_err(setup_err)?;
                balances.insert(asset.to_hex(), Value::from(*amount));
            }
            let pk_bytes = pk.map(|pk| self.params.encode_element(&pk)).unwrap_or_default();
            self.push(
                actor.clone(),
                RecordKind::AccountOpened,
                Value::map()
                    .with("address", address.to_hex())
                    .with("balances", Value::Map(balances))
                    .with("frozen", account.frozen)
                    .with("name", account.name.as_str())
                    .with("pk", pk_bytes)
                    .build(),
            );
            self.addresses.insert((chain.id, account.name.clone()), address);
        }
        self.chain_ids.insert(decl.name.clone(), chain.id);
        self.chain_names.insert(chain.id, decl.name.clone());
        self.chains.insert(chain.id, chain);
        Ok(())
    }

    fn register_route(&mut self, decl: &crate::scenario::ChainDecl) -> Result<(), SimError> {
        let id = self.chain_ids[&decl.name];
        let policy = match &decl.receiver_policy {
            PolicyDecl::AllowAll => ReceiverPolicy::AllowAll,
            PolicyDecl::Allowlist(names) => {
                ReceiverPolicy::Allowlist(names.iter().map(|n| self.addresses[&(id, n.clone())]).collect())
            }
        };
        let policy_value = match &policy {
            ReceiverPolicy::AllowAll => Value::from("allow_all"),
            ReceiverPolicy::Allowlist(set) => {
                Value::List(set.iter().map(|a| Value::from(a.to_hex())).collect())
            }
        };
        self.relay
            .register_chain(id, NodeId::Chain(id), policy)
            .map_err(|e| SimError::Setup(format!("{}: {e}", decl.name)))?;
        self.push(
            Actor::Relay,
            RecordKind::ChainRegistered,
            Value::map()
                .with("chain", decl.name.as_str())
                .with("chain_id", id.to_hex())
                .with("external", decl.external)
                .with("receiver_policy", policy_value)
                .build(),
        );
        Ok(())
    }

    fn node(&self, name: &str) -> NodeId {
        if name == RELAY_NODE {
            NodeId::Relay
        } else {
            NodeId::Chain(self.chain_ids[name])
        }
    }

    fn setup_links(&mut self) -> Result<(), SimError> {
        let mut configs: BTreeMap<(NodeId, NodeId), LinkConfig> = BTreeMap::new();
        for id in self.chains.keys() {
            configs.insert((NodeId::Chain(*id), NodeId::Relay), LinkConfig::default());
            configs.insert((NodeId::Relay, NodeId::Chain(*id)), LinkConfig::default());
        }
        for link in &self.scenario.links {
            configs.insert((self.node(&link.from), self.node(&link.to)), link.config);
        }
        for ((from, to), config) in configs {
            self.net
                .add_link(from, to, config)
                .map_err(|e| SimError::Setup(format!("{e}")))?;
        }
        Ok(())
    }

    fn push(&mut self, actor: Actor, kind: RecordKind, payload: Value) {
        self.records.push(Record {
            tick: self.tick,
            actor,
            kind,
            payload,
        });
    }

    fn chain_actor(&self, id: &ChainId) -> Actor {
        Actor::Chain(self.chain_names[id].clone())
    }

    fn label(&self, node: &NodeId) -> String {
        node_label(node, &self.chain_names)
    }

    fn quiescent(&self) -> bool {
        self.net.in_flight() == 0 && self.chains.values().all(|c| c.escrows().is_empty())
    }

    fn event_loop(&mut self) -> RunStatus {
        let events = &self.scenario.events;
        let max_ticks = self.scenario.max_ticks;
        let mut next_event = 0;
        let mut transfer_index = 0;
        loop {
            let candidates = [
                events.get(next_event).map(|e| e.tick),
                self.net.next_delivery_tick(),
                self.chains.values().filter_map(|c| c.next_expiry()).min(),
            ];
            let Some(next) = candidates.into_iter().flatten().min() else {
                return RunStatus::Quiescent;
            };
            if next > max_ticks {
                self.tick = max_ticks;
                return RunStatus::MaxTicksExceeded;
            }
            self.tick = self.tick.max(next);
            while next_event < events.len() && events[next_event].tick == self.tick {
                let action = &events[next_event].action;
                if action.transfer().is_some() {
                    self.do_transfer(next_event, transfer_index, action);
                    transfer_index += 1;
                } else {
                    self.do_action(next_event, action);
                }
                next_event += 1;
            }
            while let Some(delivery) = self.net.pop_due(self.tick) {
                self.push(
                    Actor::Net,
                    RecordKind::Deliver,
                    Value::map()
                        .with("from", self.label(&delivery.from))
                        .with("kind", delivery.envelope.kind.as_str())
                        .with("seq", delivery.seq)
                        .with("to", self.label(&delivery.to))
                        .with("tx_hash", payload_tx_hash(&delivery.envelope))
                        .build(),
                );
                match delivery.to {
                    NodeId::Relay => self.relay_ingress(delivery.envelope),
                    NodeId::Chain(id) => self.chain_ingress(id, delivery.envelope),
                }
            }
            self.expire_escrows();
            if next_event == events.len() && self.quiescent() {
                return RunStatus::Quiescent;
            }
        }
    }

    fn send(&mut self, from: NodeId, to: NodeId, envelope: Envelope) {
        let tx_hash = payload_tx_hash(&envelope);
        let kind = envelope.kind.as_str();
        let base = Value::map()
            .with("from", self.label(&from))
            .with("kind", kind)
            .with("to", self.label(&to))
            .with("tx_hash", tx_hash);
        match self.net.send(from, to, envelope, self.tick) {
            Ok(SendOutcome::Scheduled { deliver_tick, seq }) => self.push(
                Actor::Net,
                RecordKind::Send,
                base.with("deliver_tick", deliver_tick).with("seq", seq).build(),
            ),
            Ok(SendOutcome::Dropped(cause)) => self.push(
                Actor::Net,
                RecordKind::Drop,
                base.with("cause", cause.as_str()).build(),
            ),
            Err(e) => self.push(
                Actor::Net,
                RecordKind::Drop,
                base.with("cause", format!("{e}")).build(),
            ),
        }
    }

    fn do_transfer(&mut self, event_index: usize, transfer_index: usize, action: &Action) {
        let t: &TransferAction = action.transfer().expect("transfer-like action");
        let kind = match action {
            Action::BridgeLock(_) => TransferKind::BridgeLock,
            Action::BridgeBurn(_) => TransferKind::BridgeBurn,
            _ => TransferKind::Plain,
        };
        let origin = self.chain_ids[&t.from_chain];
        let dest = self.chain_ids[&t.to_chain];
        let sender = self.addresses[&(origin, t.from_account.clone())];
        let receiver = self.addresses[&(dest, t.to_account.clone())];
        let actor = self.chain_actor(&origin);
        let header = Value::map()
            .with("amount", t.amount)
            .with("event", event_index as u64)
            .with("fee", t.fee)
            .with("kind", kind.as_str())
            .with("transfer", transfer_index as u64);
        let Some(keys) = self.wallet.get(&(origin, sender)).cloned() else {
            self.push(
                actor,
                RecordKind::InitiateRejected,
                header.with("error", "NoSigningKey").build(),
            );
            return;
        };
        let request = TransferRequest {
            kind,
            receiver,
            amount: t.amount,
            asset: AssetId::from_label(&t.asset),
            fee: t.fee,
            dest_chain: dest,
        };
        let tick = self.tick;
        let chain = self.chains.get_mut(&origin).expect("validated chain");
        let (tx, proof) = match chain.initiate_transfer(&keys, &request, tick, &self.params) {
            Ok(pair) => pair,
            Err(e) => {
                self.push(
                    actor,
                    RecordKind::InitiateRejected,
                    header.with("error", e.as_str()).build(),
                );
                return;
            }
        };
        let escrow = &chain.escrows()[&tx.hash()];
        let expiry = escrow.expiry_tick;
        let debit_asset = escrow.debit_asset;
        self.push(
            actor,
            RecordKind::Initiate,
            header
                .with("debit_asset", debit_asset.to_hex())
                .with("expiry_tick", expiry)
                .with("tx", tx_value(&tx, &self.params))
                .with("tx_hash", tx.hash())
                .build(),
        );
        let env_kind = match kind {
            TransferKind::Plain => EnvelopeKind::XTransfer,
            _ => EnvelopeKind::BridgeOp,
        };
        let envelope = Envelope {
            kind: env_kind,
            origin_chain: origin,
            dest_chain: dest,
            payload: Payload::Transfer { tx, proof },
            hop_count: 1,
        };
        self.originals.insert(transfer_index, envelope.clone());
        let envelope = match self.tampers.get(&transfer_index).copied() {
            Some(mutation) => self.tamper(transfer_index, mutation, envelope),
            None => envelope,
        };
        self.send(NodeId::Chain(origin), NodeId::Relay, envelope);
    }

    fn tamper(&mut self, transfer_index: usize, mutation: Mutation, mut env: Envelope) -> Envelope {
        let before = payload_tx_hash(&env);
        if let Payload::Transfer { tx, proof } = &mut env.payload {
            apply_mutation(mutation, tx, proof);
        }
        let after = payload_tx_hash(&env);
        self.push(
            Actor::Scenario,
            RecordKind::Tamper,
            Value::map()
                .with("mutation", mutation.as_str())
                .with("original_tx_hash", before)
                .with("tampered_tx_hash", after)
                .with("transfer", transfer_index as u64)
                .build(),
        );
        env
    }

    fn do_action(&mut self, event_index: usize, action: &Action) {
        match action {
            Action::Partition { a, b, until } => {
                let (na, nb) = (self.node(a), self.node(b));
                self.net.partition(na, nb, self.tick, *until);
                let mut v = Value::map().with("a", a.as_str()).with("b", b.as_str());
                if let Some(u) = until {
                    v = v.with("until", *u);
                }
                self.push(Actor::Net, RecordKind::Partition, v.build());
            }
            Action::Heal { a, b } => {
                let (na, nb) = (self.node(a), self.node(b));
                self.net.heal(na, nb, self.tick);
                self.push(
                    Actor::Net,
                    RecordKind::Heal,
                    Value::map().with("a", a.as_str()).with("b", b.as_str()).build(),
                );
            }
            Action::Tamper {
                target,
                mutation: Mutation::ReplayNonce,
            } => {
                let payload = Value::map()
                    .with("event", event_index as u64)
                    .with("mutation", Mutation::ReplayNonce.as_str())
                    .with("transfer", *target as u64);
                match self.originals.get(target).cloned() {
                    Some(env) => {
                        let hash = payload_tx_hash(&env);
                        self.push(
                            Actor::Scenario,
                            RecordKind::Tamper,
                            payload
                                .with("original_tx_hash", hash)
                                .with("tampered_tx_hash", hash)
                                .build(),
                        );
                        self.send(NodeId::Chain(env.origin_chain), NodeId::Relay, env);
                    }
                    None => self.push(
                        Actor::Scenario,
                        RecordKind::Tamper,
                        payload.with("skipped", true).build(),
                    ),
                }
            }
            Action::Tamper { .. } => {}
            Action::Transfer(_) | Action::BridgeLock(_) | Action::BridgeBurn(_) => {
                unreachable!("transfers are handled by do_transfer")
            }
        }
    }

    fn relay_ingress(&mut self, envelope: Envelope) {
        let transfer = match &envelope.payload {
            Payload::Transfer { tx, proof } => Some((tx.clone(), proof.clone())),
            _ => None,
        };
        let kind = envelope.kind;
        let hop_count = envelope.hop_count;
        let outcome = self
            .relay
            .ingress(envelope, &ChainsView(&self.chains), &self.params);
        match outcome.event {
            IngressEvent::Transfer(decision) => {
                let (tx, proof) = transfer.expect("transfer event carries a transfer");
                let view = ChainsView(&self.chains);
                let commitment = view
                    .tx_commitment(&tx.origin_chain, &tx.sender, tx.nonce)
                    .map(|c| self.params.encode_element(&c.0))
                    .unwrap_or_default();
                let pk = view
                    .public_key(&tx.origin_chain, &tx.sender)
                    .map(|pk| self.params.encode_element(&pk))
                    .unwrap_or_default();
                let proof_check = decision
                    .proof_check
                    .map_or(Value::from("NotChecked"), |r| Value::from(r.as_str()));
                self.push(
                    Actor::Relay,
                    RecordKind::Ingress,
                    Value::map()
                        .with("commitment", commitment)
                        .with("decision", decision.decision.as_str())
                        .with("hop_count", u64::from(hop_count))
                        .with("kind", kind.as_str())
                        .with("proof", proof.encode(&self.params))
                        .with("proof_check", proof_check)
                        .with("sender_pk", pk)
                        .with("tx", tx_value(&tx, &self.params))
                        .with("tx_hash", decision.tx_hash)
                        .build(),
                );
            }
            IngressEvent::ReceiptForwarded {
                tx_hash,
                result,
                origin,
            } => {
                let origin = self.chain_names[&origin].clone();
                self.push(
                    Actor::Relay,
                    RecordKind::ReceiptForwarded,
                    Value::map()
                        .with("origin", origin)
                        .with("result", result.as_str())
                        .with("tx_hash", tx_hash)
                        .build(),
                );
            }
            IngressEvent::ReceiptUnmatched { tx_hash } => self.push(
                Actor::Relay,
                RecordKind::ReceiptUnmatched,
                Value::map().with("tx_hash", tx_hash).build(),
            ),
            IngressEvent::Discarded => self.push(
                Actor::Relay,
                RecordKind::ReceiptUnmatched,
                Value::map().with("discarded", true).build(),
            ),
        }
        for out in outcome.outbound {
            let to = NodeId::Chain(out.dest_chain);
            self.send(NodeId::Relay, to, out);
        }
    }

    fn chain_ingress(&mut self, id: ChainId, envelope: Envelope) {
        match envelope.payload {
            Payload::Transfer { tx, proof } => self.execute(id, &tx, &proof),
            Payload::Receipt(receipt) => {
                let relay_pk = self.relay.public_key().clone();
                let chain = self.chains.get_mut(&id).expect("routed chain");
                let tick = self.tick;
                let result = chain.finalize_receipt(&receipt, &relay_pk, &self.params);
                let actor = self.chain_actor(&id);
                let base = Value::map()
                    .with("result", receipt.result.as_str())
                    .with("tx_hash", receipt.tx_hash);
                match result {
                    Ok((entry, closure)) => {
                        let closure = match closure {
                            Closure::Finalized => "finalized",
                            Closure::Refunded => "refunded",
                            Closure::Ignored => "ignored",
                        };
                        self.push(
                            actor,
                            RecordKind::Finalize,
                            base.with("amount", entry.amount)
                                .with("closure", closure)
                                .with("created_tick", entry.created_tick)
                                .with("debit_asset", entry.debit_asset.to_hex())
                                .with("fee", entry.fee)
                                .with("latency", tick - entry.created_tick)
                                .build(),
                        );
                    }
                    Err(e) => self.push(
                        actor,
                        RecordKind::FinalizeRejected,
                        base.with("error", e.as_str()).build(),
                    ),
                }
            }
            Payload::Outcome { .. } => {
                let actor = self.chain_actor(&id);
                self.push(
                    actor,
                    RecordKind::FinalizeRejected,
                    Value::map().with("error", "UnexpectedOutcome").build(),
                );
            }
        }
    }

    fn execute(&mut self, id: ChainId, tx: &Transaction, proof: &TxValidityProof) {
        let mut chain = self.chains.remove(&id).expect("routed chain");
        let result = chain.execute_inbound(tx, proof, &ChainsView(&self.chains), &self.params);
        self.chains.insert(id, chain);
        let tx_hash = tx.hash();
        let actor = self.chain_actor(&id);
        self.push(
            actor,
            RecordKind::Execute,
            Value::map()
                .with("amount", tx.amount)
                .with("asset", tx.asset.to_hex())
                .with("receiver", tx.receiver.to_hex())
                .with("result", result.as_str())
                .with("tx_hash", tx_hash)
                .build(),
        );
        let outcome = Envelope {
            kind: EnvelopeKind::Receipt,
            origin_chain: id,
            dest_chain: tx.origin_chain,
            payload: Payload::Outcome { tx_hash, result },
            hop_count: 1,
        };
        self.send(NodeId::Chain(id), NodeId::Relay, outcome);
    }

    fn expire_escrows(&mut self) {
        let tick = self.tick;
        let ids: Vec<ChainId> = self
            .chains
            .iter()
            .filter(|(_, c)| c.next_expiry().is_some_and(|t| t <= tick))
            .map(|(id, _)| *id)
            .collect();
        for id in ids {
            let mut chain = self.chains.remove(&id).expect("listed chain");
            let chains = &self.chains;
            let lookup = |dest: &ChainId, h: &Hash32| chains.get(dest).and_then(|c| c.executed(h));
            let expired = chain.expire_escrows(tick, &lookup, &self.params);
            self.chains.insert(id, chain);
            let actor = self.chain_actor(&id);
            for e in expired {
                let kind = match e.closure {
                    Closure::Finalized => RecordKind::TimeoutFinalize,
                    _ => RecordKind::TimeoutRefund,
                };
                self.push(
                    actor.clone(),
                    kind,
                    Value::map()
                        .with("amount", e.entry.amount)
                        .with("created_tick", e.entry.created_tick)
                        .with("debit_asset", e.entry.debit_asset.to_hex())
                        .with("fee", e.entry.fee)
                        .with("latency", tick - e.entry.created_tick)
                        .with("tx_hash", e.entry.tx_hash)
                        .build(),
                );
            }
        }
    }

    fn finish(mut self, status: RunStatus) -> RunOutput {
        let mut snapshots = Vec::new();
        for decl in &self.scenario.chains {
            let id = self.chain_ids[&decl.name];
            let snap = self.chains[&id].snapshot(&self.params);
            self.push(
                Actor::Chain(decl.name.clone()),
                RecordKind::FinalSnapshot,
                snap.clone(),
            );
            snapshots.push((decl.name.clone(), snap));
        }
        let c = self.net.counters();
        self.push(
            Actor::Scenario,
            RecordKind::RunEnd,
            Value::map()
                .with("delivered", c.delivered)
                .with("dropped", c.dropped)
                .with("final_tick", self.tick)
                .with("in_flight", self.net.in_flight() as u64)
                .with(
                    "open_escrows",
                    self.chains
                        .values()
                        .map(|c| c.escrows().len() as u64)
                        .sum::<u64>(),
                )
                .with("sent", c.sent)
                .with("status", status.as_str())
                .build(),
        );
        RunOutput {
            records: self.records,
            status,
            final_tick: self.tick,
            snapshots,
        }
    }
}

/// Applies an in-flight mutation. `ReplayNonce` is a re-send and does not
/// change the envelope.
pub fn apply_mutation(mutation: Mutation, tx: &mut Transaction, proof: &mut TxValidityProof) {
    match mutation {
        Mutation::AmountPlusOne => tx.amount = tx.amount.wrapping_add(1),
        Mutation::FeePlusOne => tx.fee = tx.fee.wrapping_add(1),
        Mutation::ZeroSignature => tx.signature = Signature::zeroed(),
        Mutation::SwapSender => core::mem::swap(&mut tx.sender, &mut tx.receiver),
        Mutation::RebindHash => proof.binding_hash = sha256(&[&proof.binding_hash]),
        Mutation::ReplayNonce => {}
    }
}
