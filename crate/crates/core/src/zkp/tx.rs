use alloc::vec::Vec;

use super::range::{protocol_range_bits, prove_range, verify_range, RangeProof};
use super::{InvalidReason, ProofError, ValidityResult};
use crate::codec::{DecodeError, Decoder, Encoder};
use crate::group::{Commitment, Element, GroupParams, Keypair, Scalar, Signature};
use crate::hash::Hash32;
use crate::ledger::{Address, Transaction};
use crate::rng::SplitMix64;

pub const TAG_TX: &[u8] = b"ZTC/FS/tx";

/// The bundle the relay and destination verify.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxValidityProof {
    /// The origin chain's published commitment to the sender's balance.
    pub balance_commitment: Commitment,
    /// Range proof over `balance - amount - fee`.
    pub range_proof: RangeProof,
    /// Sender's signature over `binding_hash`.
    pub auth_signature: Signature,
    /// Canonical transaction hash every challenge is bound to.
    pub binding_hash: Hash32,
}

impl TxValidityProof {
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.field(&params.encode_element(&self.balance_commitment.0))
            .field(&self.range_proof.encode(params))
            .field(&params.encode_signature(&self.auth_signature))
            .field(&self.binding_hash);
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let proof = TxValidityProof {
            balance_commitment: Commitment(params.decode_element(dec.field()?)?),
            range_proof: RangeProof::decode(dec.field()?, params)?,
            auth_signature: params.decode_signature(dec.field()?)?,
            binding_hash: dec.fixed::<32>()?,
        };
        dec.finish()?;
        Ok(proof)
    }
}

/// `field(TAG_TX) || field(binding_hash)`; the root of every challenge
/// context inside a transaction proof.
pub fn tx_context(binding_hash: &Hash32) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.field(TAG_TX).field(binding_hash);
    enc.finish()
}

/// `balance_commitment * G^(-(amount + fee))`.
pub fn range_target(
    params: &GroupParams,
    balance_commitment: &Commitment,
    amount: u64,
    fee: u64,
) -> Commitment {
    let debit = params.scalar_u128(u128::from(amount) + u128::from(fee));
    params.commit_sub_public(balance_commitment, &debit)
}

/// Builds the proof on the origin chain, which holds the witness.
pub fn generate_tx_proof(
    tx: &Transaction,
    sender: &Keypair,
    balance: u64,
    balance_blinding: &Scalar,
    params: &GroupParams,
    rng: &mut SplitMix64,
) -> Result<TxValidityProof, ProofError> {
    if Address::from_public_key(params, sender.public()) != tx.sender {
        return Err(ProofError::KeyMismatch);
    }
    let debit = u128::from(tx.amount) + u128::from(tx.fee);
    if u128::from(balance) < debit {
        return Err(ProofError::NotEnoughBalance);
    }
    let remaining = (u128::from(balance) - debit) as u64;
    let binding_hash = tx.hash();
    let balance_commitment = params.commit(&params.scalar(balance), balance_blinding);
    let range_proof = prove_range(
        remaining,
        balance_blinding,
        protocol_range_bits(params),
        &tx_context(&binding_hash),
        params,
        rng,
    )?;
    let auth_signature = params.sign(sender, &binding_hash, rng);
    Ok(TxValidityProof {
        balance_commitment,
        range_proof,
        auth_signature,
        binding_hash,
    })
}

/// Total over untrusted input. `sender_pk` is the key the caller resolved
/// for `tx.sender` from the origin chain's key registry.
///
/// Checks run in a fixed order and the first failure decides the reason:
/// hash or commitment mismatch and structural defects give
/// `MalformedProof`, signature problems `InvalidSignature`, and a failing
/// range proof `NotEnoughBalance`.
pub fn verify_tx_proof(
    tx: &Transaction,
    published_commitment: &Commitment,
    proof: &TxValidityProof,
    sender_pk: Option<&Element>,
    params: &GroupParams,
) -> ValidityResult {
    use InvalidReason::*;
    let binding_hash = tx.hash();
    if proof.binding_hash != binding_hash || proof.balance_commitment != *published_commitment {
        return ValidityResult::Invalid(MalformedProof);
    }
    let signed = match sender_pk {
        Some(pk) => {
            Address::from_public_key(params, pk) == tx.sender
                && tx.signature == proof.auth_signature
                && params.verify(pk, &binding_hash, &proof.auth_signature)
        }
        None => false,
    };
    if !signed {
        return ValidityResult::Invalid(InvalidSignature);
    }
    if proof.range_proof.n_bits != protocol_range_bits(params) || !proof.range_proof.is_well_formed(params) {
        return ValidityResult::Invalid(MalformedProof);
    }
    let target = range_target(params, published_commitment, tx.amount, tx.fee);
    if !verify_range(&target, &proof.range_proof, &tx_context(&binding_hash), params) {
        return ValidityResult::Invalid(NotEnoughBalance);
    }
    ValidityResult::Valid
}
