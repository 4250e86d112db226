//! Deterministic discrete-event network.
//!
//! Links are directed and each owns two RNG streams (drop, jitter) forked
//! from the run seed by link label, so adding a link never perturbs the
//! draws of another. Envelopes are delivered in `(tick, sequence)` order,
//! where the sequence number is assigned at send time.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ledger::ChainId;
use crate::relay::Envelope;
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Relay,
    Chain(ChainId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Relay => f.write_str("relay"),
            NodeId::Chain(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkConfig {
    pub base_latency: u64,
    /// Extra delay drawn uniformly from `[0, jitter]`.
    pub jitter: u64,
    pub drop_num: u64,
    /// Always positive; `drop_num <= drop_den`.
    pub drop_den: u64,
}

impl LinkConfig {
    pub fn fixed(base_latency: u64) -> Self {
        LinkConfig {
            base_latency,
            jitter: 0,
            drop_num: 0,
            drop_den: 1,
        }
    }
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig::fixed(1)
    }
}

#[derive(Clone, Debug)]
struct Link {
    config: LinkConfig,
    drop_rng: SplitMix64,
    jitter_rng: SplitMix64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetError {
    UnknownLink { from: NodeId, to: NodeId },
    InvalidConfig,
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::UnknownLink { from, to } => write!(f, "unknown link {from} -> {to}"),
            NetError::InvalidConfig => f.write_str("drop probability must be a fraction in [0, 1]"),
        }
    }
}

impl core::error::Error for NetError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropCause {
    Random,
    Partition,
}

impl DropCause {
    pub fn as_str(self) -> &'static str {
        match self {
            DropCause::Random => "random",
            DropCause::Partition => "partition",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SendOutcome {
    Scheduled { deliver_tick: u64, seq: u64 },
    Dropped(DropCause),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub tick: u64,
    pub seq: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub envelope: Envelope,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NetCounters {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Partition {
    a: NodeId,
    b: NodeId,
    from_tick: u64,
    /// Exclusive end; `None` until healed.
    to_tick: Option<u64>,
}

impl Partition {
    fn cuts(&self, x: &NodeId, y: &NodeId, tick: u64) -> bool {
        let pair = (self.a == *x && self.b == *y) || (self.a == *y && self.b == *x);
        pair && self.from_tick <= tick && !self.to_tick.is_some_and(|end| tick >= end)
    }
}

pub fn link_label(from: &NodeId, to: &NodeId, purpose: &str) -> String {
    format!("ZTC/LINK/{from}/{to}/{purpose}")
}

#[derive(Clone, Debug)]
pub struct Network {
    seed: u64,
    links: BTreeMap<(NodeId, NodeId), Link>,
    queue: BTreeMap<(u64, u64), (NodeId, NodeId, Envelope)>,
    next_seq: u64,
    partitions: Vec<Partition>,
    counters: NetCounters,
}

impl Network {
    pub fn new(seed: u64) -> Self {
        Network {
            seed,
            links: BTreeMap::new(),
            queue: BTreeMap::new(),
            next_seq: 0,
            partitions: Vec::new(),
            counters: NetCounters::default(),
        }
    }

    /// Adds or reconfigures a directed link. Reconfiguring keeps the
    /// link's RNG streams.
    pub fn add_link(&mut self, from: NodeId, to: NodeId, config: LinkConfig) -> Result<(), NetError> {
        if config.drop_den == 0 || config.drop_num > config.drop_den {
            return Err(NetError::InvalidConfig);
        }
        let seed = self.seed;
        self.links
            .entry((from, to))
            .and_modify(|l| l.config = config)
            .or_insert_with(|| Link {
                config,
                drop_rng: SplitMix64::fork(seed, link_label(&from, &to, "drop").as_bytes()),
                jitter_rng: SplitMix64::fork(seed, link_label(&from, &to, "jitter").as_bytes()),
            });
        Ok(())
    }

    pub fn has_link(&self, from: &NodeId, to: &NodeId) -> bool {
        self.links.contains_key(&(*from, *to))
    }

    pub fn link_config(&self, from: &NodeId, to: &NodeId) -> Option<LinkConfig> {
        self.links.get(&(*from, *to)).map(|l| l.config)
    }

    /// Both draws are taken on every send so a link's streams advance
    /// identically whatever the outcome.
    pub fn send(
        &mut self,
        from: NodeId,
        to: NodeId,
        envelope: Envelope,
        now: u64,
    ) -> Result<SendOutcome, NetError> {
        let link = self
            .links
            .get_mut(&(from, to))
            .ok_or(NetError::UnknownLink { from, to })?;
        let c = link.config;
        let drop_draw = link.drop_rng.below(c.drop_den);
        let jitter = link.jitter_rng.up_to(c.jitter);
        self.counters.sent += 1;
        if self.partitions.iter().any(|p| p.cuts(&from, &to, now)) {
            self.counters.dropped += 1;
            return Ok(SendOutcome::Dropped(DropCause::Partition));
        }
        if drop_draw < c.drop_num {
            self.counters.dropped += 1;
            return Ok(SendOutcome::Dropped(DropCause::Random));
        }
        let deliver_tick = now.saturating_add(c.base_latency).saturating_add(jitter);
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.insert((deliver_tick, seq), (from, to, envelope));
        Ok(SendOutcome::Scheduled { deliver_tick, seq })
    }

    pub fn partition(&mut self, a: NodeId, b: NodeId, from_tick: u64, to_tick: Option<u64>) {
        self.partitions.push(Partition {
            a,
            b,
            from_tick,
            to_tick,
        });
    }

    /// Ends every partition between `a` and `b` still open at `tick`.
    pub fn heal(&mut self, a: NodeId, b: NodeId, tick: u64) {
        for p in &mut self.partitions {
            if p.cuts(&a, &b, tick) {
                p.to_tick = Some(tick);
            }
        }
    }

    pub fn is_partitioned(&self, a: &NodeId, b: &NodeId, tick: u64) -> bool {
        self.partitions.iter().any(|p| p.cuts(a, b, tick))
    }

    pub fn next_delivery_tick(&self) -> Option<u64> {
        self.queue.keys().next().map(|(t, _)| *t)
    }

    /// Removes and returns the first envelope due at or before `tick`.
    pub fn pop_due(&mut self, tick: u64) -> Option<Delivery> {
        let (&(t, seq), _) = self.queue.iter().next()?;
        if t > tick {
            return None;
        }
        let (from, to, envelope) = self.queue.remove(&(t, seq)).expect("key just observed");
        self.counters.delivered += 1;
        Some(Delivery {
            tick: t,
            seq,
            from,
            to,
            envelope,
        })
    }

    /// Removes every envelope due at or before `tick`, in delivery order.
    pub fn step(&mut self, tick: u64) -> Vec<Delivery> {
        let mut out = Vec::new();
        while let Some(d) = self.pop_due(tick) {
            out.push(d);
        }
        out
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn counters(&self) -> NetCounters {
        self.counters
    }
}
