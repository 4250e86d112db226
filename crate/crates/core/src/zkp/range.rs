use alloc::vec::Vec;

use num_bigint::BigUint;

use super::bit::{bit_challenge, verify_bit, BitCommitPhase, BitProof};
use super::ProofError;
use crate::codec::{DecodeError, Decoder, Encoder};
use crate::group::{Commitment, Element, GroupParams, Profile, Scalar};
use crate::rng::SplitMix64;

pub const TAG_AGG: &[u8] = b"ZTC/FS/agg";

/// Schnorr proof of knowledge of `d` with `target / W = H^d`, where `W` is
/// the weighted product of the bit commitments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregationProof {
    pub a: Element,
    pub z: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeProof {
    pub n_bits: u32,
    pub bit_commitments: Vec<Commitment>,
    pub bit_proofs: Vec<BitProof>,
    pub aggregation: AggregationProof,
}

/// Range width used by transaction proofs: 64 bits in production, 6 in the
/// tiny group so that every provable value stays below `q = 101`.
pub fn protocol_range_bits(params: &GroupParams) -> u32 {
    match params.profile() {
        Profile::Production => 64,
        Profile::Tiny => 6,
    }
}

/// Largest width `prove_range` accepts for this group.
pub fn max_range_bits(params: &GroupParams) -> u32 {
    protocol_range_bits(params)
}

fn check_width(n_bits: u32, params: &GroupParams) -> Result<(), ProofError> {
    if n_bits == 0 || n_bits > max_range_bits(params) {
        return Err(ProofError::InvalidBitWidth(n_bits));
    }
    Ok(())
}

/// Context of bit `index`: `field(context) || field("bit") || field(index)`.
pub fn bit_context(context: &[u8], index: u32) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.field(context).field(b"bit").u64(u64::from(index));
    enc.finish()
}

/// `prod C_i^(2^i)`, evaluated by Horner's rule from the top bit down.
pub fn weighted_product(params: &GroupParams, commitments: &[Commitment]) -> Element {
    let mut acc = params.identity();
    for c in commitments.iter().rev() {
        acc = params.op(&params.op(&acc, &acc), &c.0);
    }
    acc
}

/// `hash_to_scalar(TAG_AGG, field(context) || target || W || A)`.
pub fn aggregation_challenge(
    params: &GroupParams,
    context: &[u8],
    target: &Commitment,
    weighted: &Element,
    a: &Element,
) -> Scalar {
    let mut enc = Encoder::new();
    enc.field(context)
        .field(&params.encode_element(&target.0))
        .field(&params.encode_element(weighted))
        .field(&params.encode_element(a));
    params.hash_to_scalar(TAG_AGG, &enc.finish())
}

/// First move of the interactive range proof: every bit commitment and
/// first message, plus the aggregation nonce commitment.
#[derive(Clone, Debug)]
pub struct RangeCommitPhase {
    pub n_bits: u32,
    pub bits: Vec<BitCommitPhase>,
    pub weighted: Element,
    pub agg_a: Element,
    agg_nonce: Scalar,
    agg_witness: Scalar,
}

impl RangeCommitPhase {
    pub fn start(
        value: u64,
        blinding: &Scalar,
        n_bits: u32,
        params: &GroupParams,
        rng: &mut SplitMix64,
    ) -> Result<Self, ProofError> {
        check_width(n_bits, params)?;
        if n_bits < 64 && value >> n_bits != 0 {
            return Err(ProofError::ValueOutOfRange { value, n_bits });
        }
        let mut bits = Vec::with_capacity(n_bits as usize);
        let mut weighted_blinding = Scalar::zero();
        for i in 0..n_bits {
            let r_i = params.random_scalar(rng);
            let weight = params.scalar_from_biguint(&(BigUint::from(1u32) << i));
            weighted_blinding = params.add(&weighted_blinding, &params.mul(&weight, &r_i));
            bits.push(BitCommitPhase::start((value >> i) & 1, &r_i, params, rng));
        }
        let commitments: Vec<Commitment> = bits.iter().map(|b| b.commitment.clone()).collect();
        let weighted = weighted_product(params, &commitments);
        let agg_witness = params.sub(blinding, &weighted_blinding);
        let agg_nonce = params.random_scalar(rng);
        let agg_a = params.exp_h(&agg_nonce);
        Ok(RangeCommitPhase {
            n_bits,
            bits,
            weighted,
            agg_a,
            agg_nonce,
            agg_witness,
        })
    }

    pub fn commitments(&self) -> Vec<Commitment> {
        self.bits.iter().map(|b| b.commitment.clone()).collect()
    }

    pub fn respond(
        &self,
        bit_challenges: &[Scalar],
        agg_challenge: &Scalar,
        params: &GroupParams,
    ) -> RangeProof {
        assert_eq!(bit_challenges.len(), self.bits.len());
        let bit_proofs = self
            .bits
            .iter()
            .zip(bit_challenges)
            .map(|(b, e)| b.respond(e, params))
            .collect();
        let z = params.add(&self.agg_nonce, &params.mul(agg_challenge, &self.agg_witness));
        RangeProof {
            n_bits: self.n_bits,
            bit_commitments: self.commitments(),
            bit_proofs,
            aggregation: AggregationProof {
                a: self.agg_a.clone(),
                z,
            },
        }
    }

    /// Fiat–Shamir challenges for this first message.
    pub fn challenges(
        &self,
        target: &Commitment,
        context: &[u8],
        params: &GroupParams,
    ) -> (Vec<Scalar>, Scalar) {
        let bit_challenges = self
            .bits
            .iter()
            .enumerate()
            .map(|(i, b)| {
                bit_challenge(
                    params,
                    &bit_context(context, i as u32),
                    &b.commitment,
                    &b.a0,
                    &b.a1,
                )
            })
            .collect();
        let agg = aggregation_challenge(params, context, target, &self.weighted, &self.agg_a);
        (bit_challenges, agg)
    }
}

/// Proves that `commit(value, blinding)` hides a value in `[0, 2^n_bits)`.
pub fn prove_range(
    value: u64,
    blinding: &Scalar,
    n_bits: u32,
    context: &[u8],
    params: &GroupParams,
    rng: &mut SplitMix64,
) -> Result<RangeProof, ProofError> {
    let phase = RangeCommitPhase::start(value, blinding, n_bits, params, rng)?;
    let target = params.commit(&params.scalar(value), blinding);
    let (bit_challenges, agg) = phase.challenges(&target, context, params);
    Ok(phase.respond(&bit_challenges, &agg, params))
}

impl RangeProof {
    /// Lists agree with `n_bits` and the width is allowed for the group.
    pub fn is_well_formed(&self, params: &GroupParams) -> bool {
        check_width(self.n_bits, params).is_ok()
            && self.bit_commitments.len() == self.n_bits as usize
            && self.bit_proofs.len() == self.n_bits as usize
    }

    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(u64::from(self.n_bits))
            .u64(self.bit_commitments.len() as u64);
        for c in &self.bit_commitments {
            enc.field(&params.encode_element(&c.0));
        }
        enc.u64(self.bit_proofs.len() as u64);
        for p in &self.bit_proofs {
            enc.field(&p.encode(params));
        }
        let mut agg = Encoder::new();
        agg.field(&params.encode_element(&self.aggregation.a))
            .field(&params.encode_scalar(&self.aggregation.z));
        enc.field(&agg.finish());
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let n_bits = u32::try_from(dec.u64()?).map_err(|_| DecodeError::NonCanonical)?;
        let count = dec.u64()?;
        // a list can never be longer than the input that encodes it
        if count > bytes.len() as u64 {
            return Err(DecodeError::Truncated);
        }
        let mut bit_commitments = Vec::with_capacity(count as usize);
        for _ in 0..count {
            bit_commitments.push(Commitment(params.decode_element(dec.field()?)?));
        }
        let count = dec.u64()?;
        if count > bytes.len() as u64 {
            return Err(DecodeError::Truncated);
        }
        let mut bit_proofs = Vec::with_capacity(count as usize);
        for _ in 0..count {
            bit_proofs.push(BitProof::decode(dec.field()?, params)?);
        }
        let mut agg = Decoder::new(dec.field()?);
        let aggregation = AggregationProof {
            a: params.decode_element(agg.field()?)?,
            z: params.decode_scalar(agg.field()?)?,
        };
        agg.finish()?;
        dec.finish()?;
        Ok(RangeProof {
            n_bits,
            bit_commitments,
            bit_proofs,
            aggregation,
        })
    }
}

/// False on length mismatch, any failing bit, or a failing aggregation.
pub fn verify_range(target: &Commitment, proof: &RangeProof, context: &[u8], params: &GroupParams) -> bool {
    if !proof.is_well_formed(params) || !params.is_member(&target.0) {
        return false;
    }
    let bits_ok = proof
        .bit_commitments
        .iter()
        .zip(&proof.bit_proofs)
        .enumerate()
        .all(|(i, (c, p))| verify_bit(c, p, &bit_context(context, i as u32), params));
    if !bits_ok {
        return false;
    }
    let weighted = weighted_product(params, &proof.bit_commitments);
    let difference = params.op(&target.0, &params.inv(&weighted));
    let c = aggregation_challenge(params, context, target, &weighted, &proof.aggregation.a);
    params.exp_h(&proof.aggregation.z) == params.op(&proof.aggregation.a, &params.exp(&difference, &c))
}
