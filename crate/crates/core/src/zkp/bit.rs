use alloc::vec::Vec;

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::group::{Commitment, Element, GroupParams, Scalar};
use crate::rng::SplitMix64;

pub const TAG_BIT: &[u8] = b"ZTC/FS/bit";

/// Fiat–Shamir OR-proof that `C = G^b H^r` with `b` in {0, 1}.
///
/// Branch 0 proves knowledge of `log_H(C)`, branch 1 of `log_H(C / G)`.
/// Exactly one branch is real; the other is simulated, and the challenge
/// split `e0 + e1` must equal the hash of the context and first messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitProof {
    pub a0: Element,
    pub a1: Element,
    pub e0: Scalar,
    pub e1: Scalar,
    pub z0: Scalar,
    pub z1: Scalar,
}

impl BitProof {
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.field(&params.encode_element(&self.a0))
            .field(&params.encode_element(&self.a1))
            .field(&params.encode_scalar(&self.e0))
            .field(&params.encode_scalar(&self.e1))
            .field(&params.encode_scalar(&self.z0))
            .field(&params.encode_scalar(&self.z1));
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let proof = BitProof {
            a0: params.decode_element(dec.field()?)?,
            a1: params.decode_element(dec.field()?)?,
            e0: params.decode_scalar(dec.field()?)?,
            e1: params.decode_scalar(dec.field()?)?,
            z0: params.decode_scalar(dec.field()?)?,
            z1: params.decode_scalar(dec.field()?)?,
        };
        dec.finish()?;
        Ok(proof)
    }
}

/// `C / G`, the statement of branch 1.
fn shifted(params: &GroupParams, c: &Commitment) -> Element {
    params.op(&c.0, &params.exp_g(&params.neg(&params.scalar(1))))
}

/// `hash_to_scalar(TAG_BIT, field(context) || C || a0 || a1)`.
pub fn bit_challenge(
    params: &GroupParams,
    context: &[u8],
    c: &Commitment,
    a0: &Element,
    a1: &Element,
) -> Scalar {
    let mut enc = Encoder::new();
    enc.field(context)
        .field(&params.encode_element(&c.0))
        .field(&params.encode_element(a0))
        .field(&params.encode_element(a1));
    params.hash_to_scalar(TAG_BIT, &enc.finish())
}

/// Prover state after the first move of the interactive protocol.
///
/// [`prove_bit`] answers the Fiat–Shamir challenge; tests answer two
/// different challenges from the same state to exercise extraction.
#[derive(Clone, Debug)]
pub struct BitCommitPhase {
    pub commitment: Commitment,
    pub a0: Element,
    pub a1: Element,
    real_branch: usize,
    nonce: Scalar,
    sim_challenge: Scalar,
    sim_response: Scalar,
    blinding: Scalar,
}

impl BitCommitPhase {
    /// Any `bit` other than 0 runs the branch-1 prover; for values outside
    /// {0, 1} the resulting proof does not verify.
    pub fn start(bit: u64, blinding: &Scalar, params: &GroupParams, rng: &mut SplitMix64) -> Self {
        let commitment = params.commit(&params.scalar(bit), blinding);
        let real_branch = usize::from(bit != 0);
        let nonce = params.random_scalar(rng);
        let sim_challenge = params.random_scalar(rng);
        let sim_response = params.random_scalar(rng);

        let real_a = params.exp_h(&nonce);
        let sim_statement = if real_branch == 0 {
            shifted(params, &commitment)
        } else {
            commitment.0.clone()
        };
        // a = H^z * Y^(-e) satisfies the verification equation by construction
        let sim_a = params.op(
            &params.exp_h(&sim_response),
            &params.exp(&sim_statement, &params.neg(&sim_challenge)),
        );
        let (a0, a1) = if real_branch == 0 {
            (real_a, sim_a)
        } else {
            (sim_a, real_a)
        };
        BitCommitPhase {
            commitment,
            a0,
            a1,
            real_branch,
            nonce,
            sim_challenge,
            sim_response,
            blinding: blinding.clone(),
        }
    }

    pub fn respond(&self, challenge: &Scalar, params: &GroupParams) -> BitProof {
        let real_challenge = params.sub(challenge, &self.sim_challenge);
        let real_response = params.add(&self.nonce, &params.mul(&real_challenge, &self.blinding));
        let (e0, e1, z0, z1) = if self.real_branch == 0 {
            (
                real_challenge,
                self.sim_challenge.clone(),
                real_response,
                self.sim_response.clone(),
            )
        } else {
            (
                self.sim_challenge.clone(),
                real_challenge,
                self.sim_response.clone(),
                real_response,
            )
        };
        BitProof {
            a0: self.a0.clone(),
            a1: self.a1.clone(),
            e0,
            e1,
            z0,
            z1,
        }
    }
}

pub fn prove_bit(
    bit: u64,
    blinding: &Scalar,
    context: &[u8],
    params: &GroupParams,
    rng: &mut SplitMix64,
) -> (Commitment, BitProof) {
    let phase = BitCommitPhase::start(bit, blinding, params, rng);
    let e = bit_challenge(params, context, &phase.commitment, &phase.a0, &phase.a1);
    let proof = phase.respond(&e, params);
    (phase.commitment, proof)
}

/// Checks the challenge split and both branch equations. Returns false,
/// never panics, on malformed input.
pub fn verify_bit(c: &Commitment, proof: &BitProof, context: &[u8], params: &GroupParams) -> bool {
    if !params.is_member(&c.0) {
        return false;
    }
    let e = bit_challenge(params, context, c, &proof.a0, &proof.a1);
    if params.add(&proof.e0, &proof.e1) != e {
        return false;
    }
    let lhs0 = params.exp_h(&proof.z0);
    let rhs0 = params.op(&proof.a0, &params.exp(&c.0, &proof.e0));
    if lhs0 != rhs0 {
        return false;
    }
    let lhs1 = params.exp_h(&proof.z1);
    let rhs1 = params.op(&proof.a1, &params.exp(&shifted(params, c), &proof.e1));
    lhs1 == rhs1
}
