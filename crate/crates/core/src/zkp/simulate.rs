//! Witness-free proof simulation for the tiny group.
//!
//! The simulator picks every challenge and response first, derives the
//! first messages that make the verification equations hold, and keeps the
//! attempt only if the Fiat–Shamir hash lands on the chosen challenge. With
//! `q = 101` that takes about a hundred tries per component; in the
//! production group it would never finish, which is the point. Accepted
//! attempts are uniform over all accepting transcripts, the same
//! distribution the honest prover produces.

use alloc::vec::Vec;

use super::bit::{bit_challenge, BitProof};
use super::range::{
    aggregation_challenge, bit_context, protocol_range_bits, weighted_product, AggregationProof, RangeProof,
};
use super::tx::{range_target, tx_context, TxValidityProof};
use super::ProofError;
use crate::group::{Commitment, GroupParams, Profile};
use crate::ledger::Transaction;
use crate::rng::SplitMix64;

fn require_tiny(params: &GroupParams) -> Result<(), ProofError> {
    match params.profile() {
        Profile::Tiny => Ok(()),
        Profile::Production => Err(ProofError::SimulationUnsupported),
    }
}

/// Accepting bit proof for an arbitrary commitment `c` under `context`.
pub fn simulate_bit(
    c: &Commitment,
    context: &[u8],
    params: &GroupParams,
    rng: &mut SplitMix64,
) -> Result<BitProof, ProofError> {
    require_tiny(params)?;
    let shifted = params.op(&c.0, &params.exp_g(&params.neg(&params.scalar(1))));
    loop {
        let e0 = params.random_scalar(rng);
        let e1 = params.random_scalar(rng);
        let z0 = params.random_scalar(rng);
        let z1 = params.random_scalar(rng);
        let a0 = params.op(&params.exp_h(&z0), &params.exp(&c.0, &params.neg(&e0)));
        let a1 = params.op(&params.exp_h(&z1), &params.exp(&shifted, &params.neg(&e1)));
        if bit_challenge(params, context, c, &a0, &a1) == params.add(&e0, &e1) {
            return Ok(BitProof {
                a0,
                a1,
                e0,
                e1,
                z0,
                z1,
            });
        }
    }
}

/// Accepting range proof for an arbitrary target, with uniformly random
/// bit commitments.
pub fn simulate_range(
    target: &Commitment,
    n_bits: u32,
    context: &[u8],
    params: &GroupParams,
    rng: &mut SplitMix64,
) -> Result<RangeProof, ProofError> {
    require_tiny(params)?;
    if n_bits == 0 || n_bits > protocol_range_bits(params) {
        return Err(ProofError::InvalidBitWidth(n_bits));
    }
    let bit_commitments: Vec<Commitment> = (0..n_bits)
        .map(|_| Commitment(params.exp_h(&params.random_scalar(rng))))
        .collect();
    let bit_proofs = bit_commitments
        .iter()
        .enumerate()
        .map(|(i, c)| simulate_bit(c, &bit_context(context, i as u32), params, rng))
        .collect::<Result<Vec<_>, _>>()?;
    let weighted = weighted_product(params, &bit_commitments);
    let difference = params.op(&target.0, &params.inv(&weighted));
    let aggregation = loop {
        let c = params.random_scalar(rng);
        let z = params.random_scalar(rng);
        let a = params.op(&params.exp_h(&z), &params.exp(&difference, &params.neg(&c)));
        if aggregation_challenge(params, context, target, &weighted, &a) == c {
            break AggregationProof { a, z };
        }
    };
    Ok(RangeProof {
        n_bits,
        bit_commitments,
        bit_proofs,
        aggregation,
    })
}

/// An accepting transaction proof built from public data only: the
/// transaction (whose signature is public), and the published balance
/// commitment. No balance, blinding or secret key is used.
pub fn simulate_tx_proof(
    tx: &Transaction,
    published_commitment: &Commitment,
    params: &GroupParams,
    rng: &mut SplitMix64,
) -> Result<TxValidityProof, ProofError> {
    require_tiny(params)?;
    let binding_hash = tx.hash();
    let target = range_target(params, published_commitment, tx.amount, tx.fee);
    let range_proof = simulate_range(
        &target,
        protocol_range_bits(params),
        &tx_context(&binding_hash),
        params,
        rng,
    )?;
    Ok(TxValidityProof {
        balance_commitment: published_commitment.clone(),
        range_proof,
        auth_signature: tx.signature.clone(),
        binding_hash,
    })
}
