//! The relay hub: routing, ingress verification and signed receipts.
//!
//! [`RelayState`] holds routing, replay and pending-receipt bookkeeping and
//! its own signing key. It holds no balances; every funding decision is a
//! proof check against commitments the origin chain publishes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::group::{Element, GroupParams, Keypair, Signature};
use crate::hash::{sha256, Hash32};
use crate::ledger::{Address, ChainId, Directory, Transaction};
use crate::netsim::NodeId;
use crate::rng::SplitMix64;
use crate::zkp::{verify_tx_proof, InvalidReason, TxValidityProof, ValidityResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnvelopeKind {
    XTransfer,
    Receipt,
    BridgeOp,
}

impl EnvelopeKind {
    pub fn code(self) -> u8 {
        match self {
            EnvelopeKind::XTransfer => 1,
            EnvelopeKind::Receipt => 2,
            EnvelopeKind::BridgeOp => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(EnvelopeKind::XTransfer),
            2 => Some(EnvelopeKind::Receipt),
            3 => Some(EnvelopeKind::BridgeOp),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnvelopeKind::XTransfer => "XTransfer",
            EnvelopeKind::Receipt => "Receipt",
            EnvelopeKind::BridgeOp => "BridgeOp",
        }
    }
}

/// Signed outcome routed back to the origin chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelayReceipt {
    pub tx_hash: Hash32,
    pub result: ValidityResult,
    pub relay_signature: Signature,
}

impl RelayReceipt {
    /// `tx_hash || result.encode()`.
    pub fn message(tx_hash: &Hash32, result: &ValidityResult) -> Vec<u8> {
        let mut m = tx_hash.to_vec();
        m.extend_from_slice(&result.encode());
        m
    }

    pub fn sign(
        tx_hash: Hash32,
        result: ValidityResult,
        keys: &Keypair,
        params: &GroupParams,
        rng: &mut SplitMix64,
    ) -> Self {
        let relay_signature = params.sign(keys, &Self::message(&tx_hash, &result), rng);
        RelayReceipt {
            tx_hash,
            result,
            relay_signature,
        }
    }

    pub fn verify(&self, relay_pk: &Element, params: &GroupParams) -> bool {
        params.verify(
            relay_pk,
            &Self::message(&self.tx_hash, &self.result),
            &self.relay_signature,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    /// Transaction plus proof, carried by XTransfer and BridgeOp envelopes.
    Transfer { tx: Transaction, proof: TxValidityProof },
    /// Relay-signed receipt on its way to the origin.
    Receipt(RelayReceipt),
    /// Destination's execution result on its way to the relay.
    Outcome { tx_hash: Hash32, result: ValidityResult },
}

const PAYLOAD_TRANSFER: u8 = 1;
const PAYLOAD_RECEIPT: u8 = 2;
const PAYLOAD_OUTCOME: u8 = 3;

impl Payload {
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        match self {
            Payload::Transfer { tx, proof } => {
                enc.u8(PAYLOAD_TRANSFER)
                    .field(&tx.encode(params))
                    .field(&proof.encode(params));
            }
            Payload::Receipt(r) => {
                enc.u8(PAYLOAD_RECEIPT)
                    .field(&r.tx_hash)
                    .field(&r.result.encode())
                    .field(&params.encode_signature(&r.relay_signature));
            }
            Payload::Outcome { tx_hash, result } => {
                enc.u8(PAYLOAD_OUTCOME).field(tx_hash).field(&result.encode());
            }
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let payload = match dec.u8()? {
            PAYLOAD_TRANSFER => Payload::Transfer {
                tx: Transaction::decode(dec.field()?, params)?,
                proof: TxValidityProof::decode(dec.field()?, params)?,
            },
            PAYLOAD_RECEIPT => Payload::Receipt(RelayReceipt {
                tx_hash: dec.fixed()?,
                result: decode_result(dec.field()?)?,
                relay_signature: params.decode_signature(dec.field()?)?,
            }),
            PAYLOAD_OUTCOME => Payload::Outcome {
                tx_hash: dec.fixed()?,
                result: decode_result(dec.field()?)?,
            },
            other => return Err(DecodeError::UnknownTag(other)),
        };
        dec.finish()?;
        Ok(payload)
    }
}

fn decode_result(bytes: &[u8]) -> Result<ValidityResult, DecodeError> {
    ValidityResult::decode(bytes).ok_or(DecodeError::NonCanonical)
}

/// XCMP-style message between chains, always routed through the relay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub origin_chain: ChainId,
    pub dest_chain: ChainId,
    pub payload: Payload,
    /// 1 on the first hop into the relay, 2 once forwarded.
    pub hop_count: u32,
}

impl Envelope {
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u8(self.kind.code())
            .field(&self.origin_chain.0)
            .field(&self.dest_chain.0)
            .field(&self.payload.encode(params))
            .u64(u64::from(self.hop_count));
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let code = dec.u8()?;
        let kind = EnvelopeKind::from_code(code).ok_or(DecodeError::UnknownTag(code))?;
        let env = Envelope {
            kind,
            origin_chain: ChainId(dec.fixed()?),
            dest_chain: ChainId(dec.fixed()?),
            payload: Payload::decode(dec.field()?, params)?,
            hop_count: u32::try_from(dec.u64()?).map_err(|_| DecodeError::NonCanonical)?,
        };
        dec.finish()?;
        Ok(env)
    }

    pub fn hash(&self, params: &GroupParams) -> Hash32 {
        sha256(&[&self.encode(params)])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReceiverPolicy {
    AllowAll,
    Allowlist(BTreeSet<Address>),
}

impl ReceiverPolicy {
    pub fn admits(&self, receiver: &Address) -> bool {
        match self {
            ReceiverPolicy::AllowAll => true,
            ReceiverPolicy::Allowlist(set) => set.contains(receiver),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub net_address: NodeId,
    pub policy: ReceiverPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelayError {
    DuplicateChain,
}

impl fmt::Display for RelayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelayError::DuplicateChain => f.write_str("DuplicateChain"),
        }
    }
}

impl core::error::Error for RelayError {}

/// The relay's verdict on one transfer envelope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngressDecision {
    /// Hash recomputed from the transaction as received.
    pub tx_hash: Hash32,
    pub decision: ValidityResult,
    /// Output of `verify_tx_proof`, if the check was reached.
    pub proof_check: Option<ValidityResult>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IngressEvent {
    Transfer(IngressDecision),
    ReceiptForwarded {
        tx_hash: Hash32,
        result: ValidityResult,
        origin: ChainId,
    },
    /// An outcome with no pending entry, or from the wrong chain.
    ReceiptUnmatched {
        tx_hash: Hash32,
    },
    /// Structurally unusable envelope (wrong payload for its kind).
    Discarded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngressOutcome {
    pub event: IngressEvent,
    pub outbound: Vec<Envelope>,
}

#[derive(Clone, Debug)]
pub struct RelayState {
    keys: Keypair,
    rng: SplitMix64,
    routes: BTreeMap<ChainId, Route>,
    seen: BTreeSet<(ChainId, Address, u64)>,
    /// `tx_hash -> (origin, destination)` for forwarded transfers.
    pending: BTreeMap<Hash32, (ChainId, ChainId)>,
}

impl RelayState {
    pub fn new(keys: Keypair, rng: SplitMix64) -> Self {
        RelayState {
            keys,
            rng,
            routes: BTreeMap::new(),
            seen: BTreeSet::new(),
            pending: BTreeMap::new(),
        }
    }

    pub fn public_key(&self) -> &Element {
        self.keys.public()
    }

    pub fn register_chain(
        &mut self,
        chain: ChainId,
        net_address: NodeId,
        policy: ReceiverPolicy,
    ) -> Result<(), RelayError> {
        if self.routes.contains_key(&chain) {
            return Err(RelayError::DuplicateChain);
        }
        self.routes.insert(chain, Route { net_address, policy });
        Ok(())
    }

    pub fn route(&self, chain: &ChainId) -> Option<&Route> {
        self.routes.get(chain)
    }

    pub fn seen_len(&self) -> usize {
        self.seen.len()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Processes one inbound envelope. Total over untrusted input: every
    /// transfer gets a decision, and every rejection becomes a signed
    /// receipt to the origin when the origin is routable.
    pub fn ingress(
        &mut self,
        env: Envelope,
        directory: &dyn Directory,
        params: &GroupParams,
    ) -> IngressOutcome {
        match env.kind {
            EnvelopeKind::XTransfer | EnvelopeKind::BridgeOp => self.ingress_transfer(env, directory, params),
            EnvelopeKind::Receipt => self.ingress_outcome(env, params),
        }
    }

    fn ingress_transfer(
        &mut self,
        env: Envelope,
        directory: &dyn Directory,
        params: &GroupParams,
    ) -> IngressOutcome {
        let Payload::Transfer { tx, proof } = &env.payload else {
            return discarded();
        };
        let tx_hash = tx.hash();
        let origin = env.origin_chain;
        let (decision, proof_check) = self.decide(&env, tx, proof, directory, params);
        let mut outbound = Vec::new();
        if decision.is_valid() {
            self.pending.insert(tx_hash, (origin, tx.dest_chain));
            outbound.push(Envelope {
                hop_count: env.hop_count + 1,
                ..env.clone()
            });
        } else if self.routes.contains_key(&origin) {
            outbound.push(self.receipt_envelope(origin, tx_hash, decision, params));
        }
        IngressOutcome {
            event: IngressEvent::Transfer(IngressDecision {
                tx_hash,
                decision,
                proof_check,
            }),
            outbound,
        }
    }

    fn decide(
        &mut self,
        env: &Envelope,
        tx: &Transaction,
        proof: &TxValidityProof,
        directory: &dyn Directory,
        params: &GroupParams,
    ) -> (ValidityResult, Option<ValidityResult>) {
        use InvalidReason::*;
        let invalid = |r| (ValidityResult::Invalid(r), None);
        if env.hop_count != 1 || env.origin_chain != tx.origin_chain || env.dest_chain != tx.dest_chain {
            return invalid(MalformedProof);
        }
        if !self.routes.contains_key(&tx.origin_chain) || !self.routes.contains_key(&tx.dest_chain) {
            return invalid(UnknownChain);
        }
        if !self.seen.insert((tx.origin_chain, tx.sender, tx.nonce)) {
            return invalid(ReplayedNonce);
        }
        let Some(published) = directory.tx_commitment(&tx.origin_chain, &tx.sender, tx.nonce) else {
            return invalid(MalformedProof);
        };
        let pk = directory.public_key(&tx.origin_chain, &tx.sender);
        let check = verify_tx_proof(tx, &published, proof, pk.as_ref(), params);
        if !check.is_valid() {
            return (check, Some(check));
        }
        if !self.routes[&tx.dest_chain].policy.admits(&tx.receiver) {
            return (ValidityResult::Invalid(UnauthorizedRecipient), Some(check));
        }
        (ValidityResult::Valid, Some(check))
    }

    fn ingress_outcome(&mut self, env: Envelope, params: &GroupParams) -> IngressOutcome {
        let Payload::Outcome { tx_hash, result } = env.payload else {
            return discarded();
        };
        match self.pending.get(&tx_hash) {
            Some((origin, dest)) if *dest == env.origin_chain => {
                let origin = *origin;
                self.pending.remove(&tx_hash);
                IngressOutcome {
                    event: IngressEvent::ReceiptForwarded {
                        tx_hash,
                        result,
                        origin,
                    },
                    outbound: alloc::vec![self.receipt_envelope(origin, tx_hash, result, params)],
                }
            }
            _ => IngressOutcome {
                event: IngressEvent::ReceiptUnmatched { tx_hash },
                outbound: Vec::new(),
            },
        }
    }

    fn receipt_envelope(
        &mut self,
        origin: ChainId,
        tx_hash: Hash32,
        result: ValidityResult,
        params: &GroupParams,
    ) -> Envelope {
        let receipt = RelayReceipt::sign(tx_hash, result, &self.keys, params, &mut self.rng);
        Envelope {
            kind: EnvelopeKind::Receipt,
            origin_chain: origin,
            dest_chain: origin,
            payload: Payload::Receipt(receipt),
            hop_count: 2,
        }
    }
}

fn discarded() -> IngressOutcome {
    IngressOutcome {
        event: IngressEvent::Discarded,
        outbound: Vec::new(),
    }
}
