//! Non-interactive sigma-protocol proofs that a cross-chain transaction is
//! authorized and funded.
//!
//! A [`TxValidityProof`] is built on the origin chain, where the witness
//! (plaintext balance and its blinding) lives, and checked by the relay at
//! ingress and again by the destination before execution. The verifier sees
//! only the sender's published balance commitment, the public amount and
//! fee, and the proof.
//!
//! The proof is a bit-decomposition range proof over
//! `balance - amount - fee`: one CDS OR-proof per bit that the bit
//! commitment opens to 0 or 1, plus a Schnorr proof that the weighted
//! product of bit commitments and the debited balance commitment differ by
//! a known power of `H`. Every Fiat–Shamir challenge is derived from a
//! context that contains the canonical transaction hash, so a proof cannot
//! be moved to another transaction.

use core::fmt;

mod bit;
pub mod extract;
mod range;
mod simulate;
mod tx;

pub use bit::{bit_challenge, prove_bit, verify_bit, BitCommitPhase, BitProof, TAG_BIT};
pub use range::{
    aggregation_challenge, bit_context, max_range_bits, protocol_range_bits, prove_range, verify_range,
    weighted_product, AggregationProof, RangeCommitPhase, RangeProof, TAG_AGG,
};
pub use simulate::{simulate_bit, simulate_range, simulate_tx_proof};
pub use tx::{generate_tx_proof, range_target, tx_context, verify_tx_proof, TxValidityProof, TAG_TX};

/// Why a transaction was rejected.
///
/// The first three mirror the classic runtime taxonomy; the rest cover
/// failures the cross-chain flow adds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvalidReason {
    NotEnoughBalance,
    InvalidSignature,
    ExecutionFailed,
    MalformedProof,
    ReplayedNonce,
    UnknownChain,
    UnauthorizedRecipient,
}

impl InvalidReason {
    pub const ALL: [InvalidReason; 7] = [
        InvalidReason::NotEnoughBalance,
        InvalidReason::InvalidSignature,
        InvalidReason::ExecutionFailed,
        InvalidReason::MalformedProof,
        InvalidReason::ReplayedNonce,
        InvalidReason::UnknownChain,
        InvalidReason::UnauthorizedRecipient,
    ];

    pub fn code(self) -> u8 {
        match self {
            InvalidReason::NotEnoughBalance => 1,
            InvalidReason::InvalidSignature => 2,
            InvalidReason::ExecutionFailed => 3,
            InvalidReason::MalformedProof => 4,
            InvalidReason::ReplayedNonce => 5,
            InvalidReason::UnknownChain => 6,
            InvalidReason::UnauthorizedRecipient => 7,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.code() == code)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::NotEnoughBalance => "NotEnoughBalance",
            InvalidReason::InvalidSignature => "InvalidSignature",
            InvalidReason::ExecutionFailed => "ExecutionFailed",
            InvalidReason::MalformedProof => "MalformedProof",
            InvalidReason::ReplayedNonce => "ReplayedNonce",
            InvalidReason::UnknownChain => "UnknownChain",
            InvalidReason::UnauthorizedRecipient => "UnauthorizedRecipient",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValidityResult {
    Valid,
    Invalid(InvalidReason),
}

impl ValidityResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityResult::Valid)
    }

    pub fn reason(&self) -> Option<InvalidReason> {
        match self {
            ValidityResult::Valid => None,
            ValidityResult::Invalid(r) => Some(*r),
        }
    }

    /// Two bytes: status (0 valid, 1 invalid) then reason code (0 if valid).
    pub fn encode(&self) -> [u8; 2] {
        match self {
            ValidityResult::Valid => [0, 0],
            ValidityResult::Invalid(r) => [1, r.code()],
        }
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        match bytes {
            [0, 0] => Some(ValidityResult::Valid),
            [1, code] => InvalidReason::from_code(*code).map(ValidityResult::Invalid),
            _ => None,
        }
    }

    /// `"Valid"` or the reason name.
    pub fn as_str(&self) -> &'static str {
        match self {
            ValidityResult::Valid => "Valid",
            ValidityResult::Invalid(r) => r.as_str(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s == "Valid" {
            Some(ValidityResult::Valid)
        } else {
            InvalidReason::parse(s).map(ValidityResult::Invalid)
        }
    }
}

impl fmt::Display for ValidityResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofError {
    #[error("balance does not cover amount plus fee")]
    NotEnoughBalance,
    #[error("signing key does not match the sender address")]
    KeyMismatch,
    #[error("value {value} does not fit in {n_bits} bits")]
    ValueOutOfRange { value: u64, n_bits: u32 },
    #[error("range width {0} is not supported by this group")]
    InvalidBitWidth(u32),
    #[error("witness-free simulation needs the tiny group")]
    SimulationUnsupported,
}
