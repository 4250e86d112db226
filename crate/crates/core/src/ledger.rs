//! Per-parachain state machine.
//!
//! A [`ChainState`] owns plaintext balances and the blindings behind its
//! published Pedersen commitments. Only the commitments, public keys and
//! escrow/execution status are readable by other actors, through
//! [`Directory`].
//!
//! Outbound transfers are two-phase: [`ChainState::initiate_transfer`]
//! moves `amount + fee` into an escrow entry keyed by the transaction hash,
//! and exactly one of [`ChainState::finalize_receipt`] or
//! [`ChainState::expire_escrows`] later closes it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bridge::{wrapped_id, BridgeBook};
use crate::codec::{DecodeError, Decoder, Encoder};
use crate::group::{Commitment, Element, GroupParams, Keypair, Scalar, Signature};
use crate::hash::{sha256, Hash32};
use crate::record::Value;
use crate::relay::RelayReceipt;
use crate::rng::SplitMix64;
use crate::zkp::{generate_tx_proof, verify_tx_proof, InvalidReason, ProofError};
use crate::zkp::{TxValidityProof, ValidityResult};

pub const DEFAULT_ESCROW_TIMEOUT: u64 = 1000;

fn hex_into(out: &mut String, bytes: &[u8]) {
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
}

/// `0x`-prefixed lowercase hex.
pub fn hex0x(bytes: &[u8]) -> String {
    let mut s = String::from("0x");
    hex_into(&mut s, bytes);
    s
}

fn parse_hex<const N: usize>(s: &str) -> Option<[u8; N]> {
    let digits = s.strip_prefix("0x")?;
    if digits.len() != 2 * N || !digits.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f')) {
        return None;
    }
    let mut out = [0u8; N];
    for (i, byte) in out.iter_mut().enumerate() {
        *byte = u8::from_str_radix(&digits[2 * i..2 * i + 2], 16).ok()?;
    }
    Some(out)
}

macro_rules! fixed_id {
    ($name:ident, $len:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            /// Parses the lowercase `0x` rendering.
            pub fn from_hex(s: &str) -> Option<Self> {
                parse_hex::<$len>(s).map($name)
            }

            pub fn to_hex(&self) -> String {
                hex0x(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.to_hex())
            }
        }
    };
}

fixed_id!(Address, 20);
fixed_id!(ChainId, 32);
fixed_id!(AssetId, 32);

impl Address {
    /// First 20 bytes of `SHA-256(encode(pk))`.
    pub fn from_public_key(params: &GroupParams, pk: &Element) -> Self {
        let digest = sha256(&[&params.encode_element(pk)]);
        let mut out = [0u8; 20];
        out.copy_from_slice(&digest[..20]);
        Address(out)
    }
}

impl ChainId {
    pub fn from_name(name: &str) -> Self {
        ChainId(sha256(&[name.as_bytes()]))
    }
}

impl AssetId {
    pub fn from_label(label: &str) -> Self {
        AssetId(sha256(&[label.as_bytes()]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssetSpec {
    pub canonical_id: AssetId,
    pub name: String,
    pub symbol: String,
    pub decimals: u32,
    pub total_supply: u64,
}

/// A cross-chain transfer intent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub sender: Address,
    pub receiver: Address,
    pub amount: u64,
    pub asset: AssetId,
    pub fee: u64,
    pub nonce: u64,
    pub origin_chain: ChainId,
    pub dest_chain: ChainId,
    pub signature: Signature,
}

impl Transaction {
    /// Length-prefixed fields in declaration order, signature excluded.
    pub fn canonical_encoding(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode_body(&mut enc);
        enc.finish()
    }

    fn encode_body(&self, enc: &mut Encoder) {
        enc.field(&self.sender.0)
            .field(&self.receiver.0)
            .u64(self.amount)
            .field(&self.asset.0)
            .u64(self.fee)
            .u64(self.nonce)
            .field(&self.origin_chain.0)
            .field(&self.dest_chain.0);
    }

    pub fn hash(&self) -> Hash32 {
        sha256(&[&self.canonical_encoding()])
    }

    /// Canonical body followed by the signature field.
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode_body(&mut enc);
        enc.field(&params.encode_signature(&self.signature));
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let tx = Transaction {
            sender: Address(dec.fixed()?),
            receiver: Address(dec.fixed()?),
            amount: dec.u64()?,
            asset: AssetId(dec.fixed()?),
            fee: dec.u64()?,
            nonce: dec.u64()?,
            origin_chain: ChainId(dec.fixed()?),
            dest_chain: ChainId(dec.fixed()?),
            signature: params.decode_signature(dec.field()?)?,
        };
        dec.finish()?;
        Ok(tx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransferKind {
    /// Native units leave the origin and reappear at the destination.
    Plain,
    /// Home chain locks the asset; the remote mints its wrapped form.
    BridgeLock,
    /// Remote burns wrapped units; the home chain unlocks the asset.
    BridgeBurn,
}

impl TransferKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferKind::Plain => "plain",
            TransferKind::BridgeLock => "bridge_lock",
            TransferKind::BridgeBurn => "bridge_burn",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccountState {
    pub balances: BTreeMap<AssetId, u64>,
    pub nonce: u64,
    pub frozen: bool,
}

impl AccountState {
    pub fn balance(&self, key: &AssetId) -> u64 {
        self.balances.get(key).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscrowEntry {
    pub tx_hash: Hash32,
    pub kind: TransferKind,
    pub sender: Address,
    pub receiver: Address,
    /// Balance key the escrow was debited from and refunds go back to.
    pub debit_asset: AssetId,
    /// The registered asset behind `debit_asset`.
    pub underlying: AssetId,
    pub amount: u64,
    pub fee: u64,
    pub nonce: u64,
    pub dest_chain: ChainId,
    pub created_tick: u64,
    pub expiry_tick: u64,
}

/// What a transfer asks for; the chain fills in sender, nonce and origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferRequest {
    pub kind: TransferKind,
    pub receiver: Address,
    pub amount: u64,
    /// The registered asset. For bridge burns this is the underlying asset,
    /// not its wrapped id.
    pub asset: AssetId,
    pub fee: u64,
    pub dest_chain: ChainId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LedgerError {
    DuplicateAsset,
    DuplicateAccount,
    UnknownAsset,
    UnknownAccount,
    UnknownEscrow,
    NotEnoughBalance,
    SelfTransfer,
    AccountFrozen,
    KeyMismatch,
    /// A lock was requested on a chain that is not the asset's home.
    NotHomeChain,
    /// A burn was requested on the asset's home chain.
    WrappedOnHome,
    BadReceiptSignature,
    /// Genesis minting beyond the declared total supply.
    SupplyExceeded,
    Proof(ProofError),
}

impl fmt::Display for LedgerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LedgerError::Proof(e) => write!(f, "proof error: {e}"),
            other => write!(f, "{}", other.as_str()),
        }
    }
}

impl core::error::Error for LedgerError {}

impl LedgerError {
    pub fn as_str(&self) -> &'static str {
        match self {
            LedgerError::DuplicateAsset => "DuplicateAsset",
            LedgerError::DuplicateAccount => "DuplicateAccount",
            LedgerError::UnknownAsset => "UnknownAsset",
            LedgerError::UnknownAccount => "UnknownAccount",
            LedgerError::UnknownEscrow => "UnknownEscrow",
            LedgerError::NotEnoughBalance => "NotEnoughBalance",
            LedgerError::SelfTransfer => "SelfTransfer",
            LedgerError::AccountFrozen => "AccountFrozen",
            LedgerError::KeyMismatch => "KeyMismatch",
            LedgerError::NotHomeChain => "NotHomeChain",
            LedgerError::WrappedOnHome => "WrappedOnHome",
            LedgerError::BadReceiptSignature => "BadReceiptSignature",
            LedgerError::SupplyExceeded => "SupplyExceeded",
            LedgerError::Proof(ProofError::NotEnoughBalance) => "NotEnoughBalance",
            LedgerError::Proof(_) => "ProofError",
        }
    }
}

impl From<ProofError> for LedgerError {
    fn from(e: ProofError) -> Self {
        match e {
            ProofError::NotEnoughBalance => LedgerError::NotEnoughBalance,
            ProofError::KeyMismatch => LedgerError::KeyMismatch,
            other => LedgerError::Proof(other),
        }
    }
}

/// Public state of every chain, as seen by verifiers.
pub trait Directory {
    fn public_key(&self, chain: &ChainId, address: &Address) -> Option<Element>;
    /// The commitment the sender's `nonce`-th outbound proof was built on.
    fn tx_commitment(&self, chain: &ChainId, address: &Address, nonce: u64) -> Option<Commitment>;
    /// Whether `chain` still holds an open escrow for `tx_hash`.
    fn escrow_open(&self, chain: &ChainId, tx_hash: &Hash32) -> bool;
}

/// How an escrow entry was closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Finalized,
    Refunded,
    /// `ReplayedNonce` receipts concern a duplicate, not the original.
    Ignored,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expired {
    pub entry: EscrowEntry,
    pub closure: Closure,
}

#[derive(Clone, Debug)]
pub struct ChainState {
    pub id: ChainId,
    pub name: String,
    pub external: bool,
    pub escrow_timeout: u64,
    operator: Address,
    rng: SplitMix64,
    accounts: BTreeMap<Address, AccountState>,
    keys: BTreeMap<Address, Element>,
    assets: BTreeMap<AssetId, AssetSpec>,
    home_assets: BTreeSet<AssetId>,
    blindings: BTreeMap<(Address, AssetId), Scalar>,
    commitments: BTreeMap<(Address, AssetId), Commitment>,
    tx_commitments: BTreeMap<(Address, u64), Commitment>,
    escrows: BTreeMap<Hash32, EscrowEntry>,
    executed: BTreeMap<Hash32, ValidityResult>,
    bridge: BridgeBook,
}

impl ChainState {
    /// A chain with only its operator account. `rng` supplies blindings and
    /// prover randomness.
    pub fn new(name: &str, external: bool, escrow_timeout: u64, rng: SplitMix64) -> Self {
        let id = ChainId::from_name(name);
        let operator = operator_address(&id);
        let mut accounts = BTreeMap::new();
        accounts.insert(operator, AccountState::default());
        ChainState {
            id,
            name: name.into(),
            external,
            escrow_timeout,
            operator,
            rng,
            accounts,
            keys: BTreeMap::new(),
            assets: BTreeMap::new(),
            home_assets: BTreeSet::new(),
            blindings: BTreeMap::new(),
            commitments: BTreeMap::new(),
            tx_commitments: BTreeMap::new(),
            escrows: BTreeMap::new(),
            executed: BTreeMap::new(),
            bridge: BridgeBook::default(),
        }
    }

    pub fn operator(&self) -> Address {
        self.operator
    }

    pub fn register_asset(&mut self, spec: AssetSpec, home: bool) -> Result<(), LedgerError> {
        if self.assets.contains_key(&spec.canonical_id) {
            return Err(LedgerError::DuplicateAsset);
        }
        if home {
            self.home_assets.insert(spec.canonical_id);
        }
        self.assets.insert(spec.canonical_id, spec);
        Ok(())
    }

    pub fn asset(&self, id: &AssetId) -> Option<&AssetSpec> {
        self.assets.get(id)
    }

    pub fn assets(&self) -> impl Iterator<Item = &AssetSpec> {
        self.assets.values()
    }

    pub fn is_home(&self, id: &AssetId) -> bool {
        self.home_assets.contains(id)
    }

    /// Opens an account, registering `pk` in the key registry if given.
    pub fn open_account(
        &mut self,
        address: Address,
        pk: Option<Element>,
        frozen: bool,
    ) -> Result<(), LedgerError> {
        if self.accounts.contains_key(&address) {
            return Err(LedgerError::DuplicateAccount);
        }
        self.accounts.insert(
            address,
            AccountState {
                frozen,
                ..AccountState::default()
            },
        );
        if let Some(pk) = pk {
            self.keys.insert(address, pk);
        }
        Ok(())
    }

    /// Genesis credit of a registered asset.
    pub fn mint_genesis(
        &mut self,
        address: &Address,
        asset: &AssetId,
        amount: u64,
        params: &GroupParams,
    ) -> Result<(), LedgerError> {
        let spec = self.assets.get(asset).ok_or(LedgerError::UnknownAsset)?;
        let supply = spec.total_supply;
        let account = self
            .accounts
            .get_mut(address)
            .ok_or(LedgerError::UnknownAccount)?;
        let next = account
            .balance(asset)
            .checked_add(amount)
            .filter(|v| *v <= supply)
            .ok_or(LedgerError::SupplyExceeded)?;
        account.balances.insert(*asset, next);
        self.refresh_commitment(address, asset, params);
        Ok(())
    }

    pub fn account(&self, address: &Address) -> Option<&AccountState> {
        self.accounts.get(address)
    }

    pub fn accounts(&self) -> &BTreeMap<Address, AccountState> {
        &self.accounts
    }

    pub fn balance(&self, address: &Address, key: &AssetId) -> u64 {
        self.accounts.get(address).map_or(0, |a| a.balance(key))
    }

    pub fn public_key(&self, address: &Address) -> Option<&Element> {
        self.keys.get(address)
    }

    pub fn published_commitment(&self, address: &Address, key: &AssetId) -> Option<&Commitment> {
        self.commitments.get(&(*address, *key))
    }

    pub fn tx_commitment(&self, address: &Address, nonce: u64) -> Option<&Commitment> {
        self.tx_commitments.get(&(*address, nonce))
    }

    pub fn escrows(&self) -> &BTreeMap<Hash32, EscrowEntry> {
        &self.escrows
    }

    pub fn escrow_open(&self, tx_hash: &Hash32) -> bool {
        self.escrows.contains_key(tx_hash)
    }

    /// Result of a previous `execute_inbound` for this hash.
    pub fn executed(&self, tx_hash: &Hash32) -> Option<ValidityResult> {
        self.executed.get(tx_hash).copied()
    }

    pub fn bridge(&self) -> &BridgeBook {
        &self.bridge
    }

    /// Test hook: overwrite the lock ledger to force an inconsistent state.
    pub fn bridge_mut(&mut self) -> &mut BridgeBook {
        &mut self.bridge
    }

    /// Commitment to the current balance under a fresh blinding.
    fn refresh_commitment(&mut self, address: &Address, key: &AssetId, params: &GroupParams) {
        let blinding = params.random_scalar(&mut self.rng);
        let value = params.scalar(self.balance(address, key));
        self.commitments
            .insert((*address, *key), params.commit(&value, &blinding));
        self.blindings.insert((*address, *key), blinding);
    }

    fn credit(&mut self, address: &Address, key: &AssetId, amount: u64, params: &GroupParams) {
        let account = self.accounts.entry(*address).or_default();
        let next = account
            .balance(key)
            .checked_add(amount)
            .expect("balances are bounded by a u64 total supply");
        account.balances.insert(*key, next);
        self.refresh_commitment(address, key, params);
    }

    /// Debits `amount + fee` into escrow and returns the signed transaction
    /// with its validity proof. State is untouched on error.
    pub fn initiate_transfer(
        &mut self,
        sender: &Keypair,
        request: &TransferRequest,
        tick: u64,
        params: &GroupParams,
    ) -> Result<(Transaction, TxValidityProof), LedgerError> {
        if request.dest_chain == self.id {
            return Err(LedgerError::SelfTransfer);
        }
        if !self.assets.contains_key(&request.asset) {
            return Err(LedgerError::UnknownAsset);
        }
        let home = self.is_home(&request.asset);
        let (debit_key, tx_asset) = match request.kind {
            TransferKind::Plain => (request.asset, request.asset),
            TransferKind::BridgeLock if home => (request.asset, wrapped_id(&request.asset, &self.id)),
            TransferKind::BridgeLock => return Err(LedgerError::NotHomeChain),
            TransferKind::BridgeBurn if home => return Err(LedgerError::WrappedOnHome),
            TransferKind::BridgeBurn => {
                let w = wrapped_id(&request.asset, &request.dest_chain);
                (w, w)
            }
        };
        let sender_addr = Address::from_public_key(params, sender.public());
        let account = self
            .accounts
            .get(&sender_addr)
            .ok_or(LedgerError::UnknownAccount)?;
        if account.frozen {
            return Err(LedgerError::AccountFrozen);
        }
        if self.keys.get(&sender_addr) != Some(sender.public()) {
            return Err(LedgerError::KeyMismatch);
        }
        let balance = account.balance(&debit_key);
        let debit = u128::from(request.amount) + u128::from(request.fee);
        if u128::from(balance) < debit {
            return Err(LedgerError::NotEnoughBalance);
        }
        let nonce = account.nonce;
        if !self.commitments.contains_key(&(sender_addr, debit_key)) {
            self.refresh_commitment(&sender_addr, &debit_key, params);
        }
        let published = self.commitments[&(sender_addr, debit_key)].clone();
        let blinding = self.blindings[&(sender_addr, debit_key)].clone();

        let mut tx = Transaction {
            sender: sender_addr,
            receiver: request.receiver,
            amount: request.amount,
            asset: tx_asset,
            fee: request.fee,
            nonce,
            origin_chain: self.id,
            dest_chain: request.dest_chain,
            signature: Signature::zeroed(),
        };
        let proof = generate_tx_proof(&tx, sender, balance, &blinding, params, &mut self.rng)?;
        tx.signature = proof.auth_signature.clone();

        let account = self.accounts.get_mut(&sender_addr).expect("checked above");
        account.balances.insert(debit_key, balance - debit as u64);
        account.nonce += 1;
        self.tx_commitments.insert((sender_addr, nonce), published);
        self.refresh_commitment(&sender_addr, &debit_key, params);
        let tx_hash = tx.hash();
        self.escrows.insert(
            tx_hash,
            EscrowEntry {
                tx_hash,
                kind: request.kind,
                sender: sender_addr,
                receiver: request.receiver,
                debit_asset: debit_key,
                underlying: request.asset,
                amount: request.amount,
                fee: request.fee,
                nonce,
                dest_chain: request.dest_chain,
                created_tick: tick,
                expiry_tick: tick.saturating_add(self.escrow_timeout),
            },
        );
        Ok((tx, proof))
    }

    /// Destination-side re-verification and credit. Idempotent per
    /// transaction hash: a repeat returns the first result unchanged.
    pub fn execute_inbound(
        &mut self,
        tx: &Transaction,
        proof: &TxValidityProof,
        directory: &dyn Directory,
        params: &GroupParams,
    ) -> ValidityResult {
        let tx_hash = tx.hash();
        if let Some(previous) = self.executed.get(&tx_hash) {
            return *previous;
        }
        let result = self.try_execute(tx, &tx_hash, proof, directory, params);
        self.executed.insert(tx_hash, result);
        result
    }

    fn try_execute(
        &mut self,
        tx: &Transaction,
        tx_hash: &Hash32,
        proof: &TxValidityProof,
        directory: &dyn Directory,
        params: &GroupParams,
    ) -> ValidityResult {
        let failed = ValidityResult::Invalid(InvalidReason::ExecutionFailed);
        let Some(published) = directory.tx_commitment(&tx.origin_chain, &tx.sender, tx.nonce) else {
            return ValidityResult::Invalid(InvalidReason::MalformedProof);
        };
        let pk = directory.public_key(&tx.origin_chain, &tx.sender);
        let verdict = verify_tx_proof(tx, &published, proof, pk.as_ref(), params);
        if !verdict.is_valid() {
            return verdict;
        }
        if tx.dest_chain != self.id || !directory.escrow_open(&tx.origin_chain, tx_hash) {
            return failed;
        }
        if self.accounts.get(&tx.receiver).is_some_and(|a| a.frozen) {
            return failed;
        }
        let credit_key = if self.assets.contains_key(&tx.asset) {
            tx.asset
        } else if let Some(x) = self.underlying_of(&tx.asset, &tx.origin_chain) {
            if self.is_home(&x) {
                return failed;
            }
            self.bridge.mint(x, tx.origin_chain, tx.amount);
            tx.asset
        } else if let Some(x) = self.underlying_of(&tx.asset, &self.id) {
            if !self.is_home(&x) || !self.bridge.unlock(x, tx.origin_chain, tx.amount) {
                return failed;
            }
            x
        } else {
            return failed;
        };
        let current = self.balance(&tx.receiver, &credit_key);
        if current.checked_add(tx.amount).is_none() {
            return failed;
        }
        self.credit(&tx.receiver, &credit_key, tx.amount, params);
        ValidityResult::Valid
    }

    /// Registered asset `x` with `wrapped_id(x, home) == wrapped`.
    fn underlying_of(&self, wrapped: &AssetId, home: &ChainId) -> Option<AssetId> {
        self.assets
            .keys()
            .find(|x| wrapped_id(x, home) == *wrapped)
            .copied()
    }

    /// Closes the escrow named by a relay receipt.
    pub fn finalize_receipt(
        &mut self,
        receipt: &RelayReceipt,
        relay_pk: &Element,
        params: &GroupParams,
    ) -> Result<(EscrowEntry, Closure), LedgerError> {
        if !receipt.verify(relay_pk, params) {
            return Err(LedgerError::BadReceiptSignature);
        }
        let entry = self
            .escrows
            .get(&receipt.tx_hash)
            .cloned()
            .ok_or(LedgerError::UnknownEscrow)?;
        let closure = match receipt.result {
            ValidityResult::Valid => Closure::Finalized,
            ValidityResult::Invalid(InvalidReason::ReplayedNonce) => Closure::Ignored,
            ValidityResult::Invalid(_) => Closure::Refunded,
        };
        self.close(&entry, closure, params);
        Ok((entry, closure))
    }

    fn close(&mut self, entry: &EscrowEntry, closure: Closure, params: &GroupParams) {
        match closure {
            Closure::Ignored => return,
            Closure::Refunded => self.credit(
                &entry.sender,
                &entry.debit_asset,
                entry.amount + entry.fee,
                params,
            ),
            Closure::Finalized => {
                match entry.kind {
                    TransferKind::Plain => {}
                    TransferKind::BridgeLock => {
                        self.bridge.lock(entry.underlying, entry.dest_chain, entry.amount)
                    }
                    TransferKind::BridgeBurn => {
                        self.bridge.burn(entry.underlying, entry.dest_chain, entry.amount)
                    }
                }
                let operator = self.operator;
                self.credit(&operator, &entry.debit_asset, entry.fee, params);
            }
        }
        self.escrows.remove(&entry.tx_hash);
    }

    /// Earliest expiry tick among open escrows.
    pub fn next_expiry(&self) -> Option<u64> {
        self.escrows.values().map(|e| e.expiry_tick).min()
    }

    /// Closes every escrow whose expiry tick has been reached. Entries the
    /// destination executed successfully are finalized; all others are
    /// refunded. `executed_at_dest` reports the destination's result.
    pub fn expire_escrows(
        &mut self,
        tick: u64,
        executed_at_dest: &dyn Fn(&ChainId, &Hash32) -> Option<ValidityResult>,
        params: &GroupParams,
    ) -> Vec<Expired> {
        let due: Vec<EscrowEntry> = self
            .escrows
            .values()
            .filter(|e| e.expiry_tick <= tick)
            .cloned()
            .collect();
        due.into_iter()
            .map(|entry| {
                let closure = match executed_at_dest(&entry.dest_chain, &entry.tx_hash) {
                    Some(ValidityResult::Valid) => Closure::Finalized,
                    _ => Closure::Refunded,
                };
                self.close(&entry, closure, params);
                Expired { entry, closure }
            })
            .collect()
    }

    /// Deterministic public view: `{chain_id, accounts, escrows, assets,
    /// commitments, bridge}`. Blindings are never exported.
    pub fn snapshot(&self, params: &GroupParams) -> Value {
        let mut accounts = BTreeMap::new();
        for (addr, account) in &self.accounts {
            let balances = account
                .balances
                .iter()
                .map(|(k, v)| (k.to_hex(), Value::from(*v)))
                .collect();
            accounts.insert(
                addr.to_hex(),
                Value::map()
                    .with("balances", Value::Map(balances))
                    .with("frozen", account.frozen)
                    .with("nonce", account.nonce)
                    .build(),
            );
        }
        let escrows = self
            .escrows
            .iter()
            .map(|(h, e)| (hex0x(h), escrow_value(e)))
            .collect();
        let assets = self
            .assets
            .iter()
            .map(|(id, spec)| {
                let v = Value::map()
                    .with("decimals", u64::from(spec.decimals))
                    .with("home", self.is_home(id))
                    .with("name", spec.name.as_str())
                    .with("symbol", spec.symbol.as_str())
                    .with("total_supply", spec.total_supply)
                    .build();
                (id.to_hex(), v)
            })
            .collect();
        let mut commitments: BTreeMap<String, Value> = BTreeMap::new();
        for ((addr, key), c) in &self.commitments {
            let entry = commitments
                .entry(addr.to_hex())
                .or_insert_with(|| Value::Map(BTreeMap::new()));
            if let Value::Map(m) = entry {
                m.insert(key.to_hex(), Value::Text(hex0x(&params.encode_element(&c.0))));
            }
        }
        Value::map()
            .with("accounts", Value::Map(accounts))
            .with("assets", Value::Map(assets))
            .with("bridge", self.bridge.to_value())
            .with("chain_id", self.id.to_hex())
            .with("commitments", Value::Map(commitments))
            .with("escrows", Value::Map(escrows))
            .build()
    }
}

fn escrow_value(e: &EscrowEntry) -> Value {
    Value::map()
        .with("amount", e.amount)
        .with("created_tick", e.created_tick)
        .with("debit_asset", e.debit_asset.to_hex())
        .with("dest_chain", e.dest_chain.to_hex())
        .with("expiry_tick", e.expiry_tick)
        .with("fee", e.fee)
        .with("kind", e.kind.as_str())
        .with("nonce", e.nonce)
        .with("receiver", e.receiver.to_hex())
        .with("sender", e.sender.to_hex())
        .build()
}

/// Per-chain fee sink; has no key so it can never send.
pub fn operator_address(chain: &ChainId) -> Address {
    let digest = sha256(&[b"ZTC/OPERATOR", &chain.0]);
    let mut out = [0u8; 20];
    out.copy_from_slice(&digest[..20]);
    Address(out)
}
