//! Lock-and-mint bridging on top of the ordinary transfer primitive.
//!
//! An asset `X` whose home is chain `h` appears on any other chain as the
//! wrapped asset `W(X, h) = SHA-256("ZTC/WRAP" || X || h)`. Bridge
//! transactions carry `W(X, h)` in `tx.asset` in both directions, so the
//! receiving side can tell a mint (origin is home) from an unlock
//! (destination is home) without any trusted intermediary.
//!
//! The home chain tracks `locked[(X, remote)]`, the remote tracks
//! `wrapped_supply[(X, home)]`. At every quiescent point the two agree.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::group::{GroupParams, Keypair};
use crate::hash::sha256;
use crate::ledger::{Address, AssetId, ChainId, ChainState, LedgerError, TransferKind, TransferRequest};
use crate::record::Value;
use crate::relay::{Envelope, EnvelopeKind, Payload};

pub const TAG_WRAP: &[u8] = b"ZTC/WRAP";

pub fn wrapped_id(asset: &AssetId, home: &ChainId) -> AssetId {
    AssetId(sha256(&[TAG_WRAP, &asset.0, &home.0]))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BridgeBook {
    /// Home side: units of `asset` locked against `remote`.
    pub locked: BTreeMap<(AssetId, ChainId), u64>,
    /// Remote side: wrapped units of `asset` minted against `home`.
    pub wrapped_supply: BTreeMap<(AssetId, ChainId), u64>,
}

impl BridgeBook {
    pub fn locked(&self, asset: &AssetId, remote: &ChainId) -> u64 {
        self.locked.get(&(*asset, *remote)).copied().unwrap_or(0)
    }

    pub fn wrapped_supply(&self, asset: &AssetId, home: &ChainId) -> u64 {
        self.wrapped_supply.get(&(*asset, *home)).copied().unwrap_or(0)
    }

    pub(crate) fn lock(&mut self, asset: AssetId, remote: ChainId, amount: u64) {
        *self.locked.entry((asset, remote)).or_default() += amount;
    }

    /// `false`, leaving the book unchanged, if less than `amount` is locked.
    pub(crate) fn unlock(&mut self, asset: AssetId, remote: ChainId, amount: u64) -> bool {
        let slot = self.locked.entry((asset, remote)).or_default();
        match slot.checked_sub(amount) {
            Some(rest) => {
                *slot = rest;
                true
            }
            None => false,
        }
    }

    pub(crate) fn mint(&mut self, asset: AssetId, home: ChainId, amount: u64) {
        *self.wrapped_supply.entry((asset, home)).or_default() += amount;
    }

    pub(crate) fn burn(&mut self, asset: AssetId, home: ChainId, amount: u64) {
        let slot = self.wrapped_supply.entry((asset, home)).or_default();
        *slot = slot
            .checked_sub(amount)
            .expect("wrapped supply covers every finalized burn");
    }

    pub fn to_value(&self) -> Value {
        let render = |m: &BTreeMap<(AssetId, ChainId), u64>| {
            Value::Map(
                m.iter()
                    .map(|((a, c), v)| (pair_key(a, c), Value::from(*v)))
                    .collect(),
            )
        };
        Value::map()
            .with("locked", render(&self.locked))
            .with("wrapped_supply", render(&self.wrapped_supply))
            .build()
    }
}

/// `"<asset hex>/<chain hex>"`.
pub fn pair_key(asset: &AssetId, chain: &ChainId) -> String {
    let mut s = asset.to_hex();
    s.push('/');
    s.push_str(&chain.to_hex());
    s
}

fn bridge_envelope(
    chain: &mut ChainState,
    kind: TransferKind,
    from: &Keypair,
    to: Address,
    asset: AssetId,
    amount: u64,
    fee: u64,
    other: ChainId,
    tick: u64,
    params: &GroupParams,
) -> Result<Envelope, LedgerError> {
    let request = TransferRequest {
        kind,
        receiver: to,
        amount,
        asset,
        fee,
        dest_chain: other,
    };
    let (tx, proof) = chain.initiate_transfer(from, &request, tick, params)?;
    Ok(Envelope {
        kind: EnvelopeKind::BridgeOp,
        origin_chain: chain.id,
        dest_chain: other,
        payload: Payload::Transfer { tx, proof },
        hop_count: 1,
    })
}

/// Locks `amount` of `asset` on its home chain and emits the BridgeOp that
/// mints the wrapped form on `remote`.
#[allow(clippy::too_many_arguments)]
pub fn lock_and_mint(
    home: &mut ChainState,
    asset: AssetId,
    amount: u64,
    fee: u64,
    from_home: &Keypair,
    to_remote: Address,
    remote: ChainId,
    tick: u64,
    params: &GroupParams,
) -> Result<Envelope, LedgerError> {
    let kind = TransferKind::BridgeLock;
    bridge_envelope(
        home, kind, from_home, to_remote, asset, amount, fee, remote, tick, params,
    )
}

/// Burns wrapped units of `asset` on `remote_chain` and emits the BridgeOp
/// that unlocks them on `home`.
#[allow(clippy::too_many_arguments)]
pub fn burn_and_unlock(
    remote_chain: &mut ChainState,
    asset: AssetId,
    amount: u64,
    fee: u64,
    from_remote: &Keypair,
    to_home: Address,
    home: ChainId,
    tick: u64,
    params: &GroupParams,
) -> Result<Envelope, LedgerError> {
    let kind = TransferKind::BridgeBurn;
    bridge_envelope(
        remote_chain,
        kind,
        from_remote,
        to_home,
        asset,
        amount,
        fee,
        home,
        tick,
        params,
    )
}
