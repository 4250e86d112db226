//! Special-soundness extractors.
//!
//! Given two accepting transcripts that share a first message but answer
//! different challenges, each extractor recovers the prover's witness.
//! They are the constructive half of the soundness argument and are used by
//! tests that fork a proof at its challenge.

use num_bigint::BigUint;

use super::bit::BitProof;
use super::range::{AggregationProof, RangeProof};
use crate::group::{Commitment, GroupParams, Scalar};

/// `(z - z') / (e - e')`, or `None` when the challenges coincide.
fn solve(params: &GroupParams, z: &Scalar, z2: &Scalar, e: &Scalar, e2: &Scalar) -> Option<Scalar> {
    let den = params.invert(&params.sub(e, e2))?;
    Some(params.mul(&params.sub(z, z2), &den))
}

/// Opening `(bit, r)` of `c` from two bit transcripts with the same
/// `(a0, a1)` and different challenge splits.
pub fn extract_bit(
    c: &Commitment,
    first: &BitProof,
    second: &BitProof,
    params: &GroupParams,
) -> Option<(u64, Scalar)> {
    if first.a0 != second.a0 || first.a1 != second.a1 {
        return None;
    }
    let (bit, r) = if first.e0 != second.e0 {
        (0, solve(params, &first.z0, &second.z0, &first.e0, &second.e0)?)
    } else {
        (1, solve(params, &first.z1, &second.z1, &first.e1, &second.e1)?)
    };
    (params.commit(&params.scalar(bit), &r) == *c).then_some((bit, r))
}

/// Witness of an aggregation proof from two challenges on the same `A`.
pub fn extract_aggregation(
    first: (&AggregationProof, &Scalar),
    second: (&AggregationProof, &Scalar),
    params: &GroupParams,
) -> Option<Scalar> {
    if first.0.a != second.0.a {
        return None;
    }
    solve(params, &first.0.z, &second.0.z, first.1, second.1)
}

/// Opening `(value, blinding)` of `target` from two forked range proofs.
///
/// Every bit proof and the aggregation proof must answer a different
/// challenge in the two transcripts.
pub fn extract_range(
    target: &Commitment,
    first: (&RangeProof, &Scalar),
    second: (&RangeProof, &Scalar),
    params: &GroupParams,
) -> Option<(Scalar, Scalar)> {
    let (p1, c1) = first;
    let (p2, c2) = second;
    if p1.bit_commitments != p2.bit_commitments || p1.bit_proofs.len() != p2.bit_proofs.len() {
        return None;
    }
    let mut value = Scalar::zero();
    let mut blinding = Scalar::zero();
    for (i, (c, (b1, b2))) in p1
        .bit_commitments
        .iter()
        .zip(p1.bit_proofs.iter().zip(&p2.bit_proofs))
        .enumerate()
    {
        let (bit, r) = extract_bit(c, b1, b2, params)?;
        let weight = params.scalar_from_biguint(&(BigUint::from(1u32) << i));
        value = params.add(&value, &params.mul(&weight, &params.scalar(bit)));
        blinding = params.add(&blinding, &params.mul(&weight, &r));
    }
    let delta = extract_aggregation((&p1.aggregation, c1), (&p2.aggregation, c2), params)?;
    let blinding = params.add(&blinding, &delta);
    (params.commit(&value, &blinding) == *target).then_some((value, blinding))
}
