//! Core of the zero-trust cross-chain transfer simulator.
//!
//! Parachains move value through a relay hub. The hub never sees account
//! balances: every cross-chain transaction carries a non-interactive
//! sigma-protocol proof that the sender's committed balance covers the
//! amount plus fee, bound to the transaction hash and authorized by a
//! Schnorr signature. The destination re-verifies before crediting, and a
//! signed receipt travels back to release or refund the origin's escrow.
//!
//! ```text
//! core/
//!  ├─ rng.rs        SplitMix64 streams, forked per (link, purpose)
//!  ├─ codec.rs      canonical length-prefixed encodings
//!  ├─ group.rs      Schnorr group, Pedersen commitments, signatures
//!  ├─ zkp/          bit OR-proofs, range proofs, transaction proofs
//!  ├─ ledger.rs     per-parachain accounts, escrow, asset registry
//!  ├─ bridge.rs     lock-and-mint / burn-and-unlock bookkeeping
//!  ├─ relay.rs      relay hub: routing, ingress verification, receipts
//!  ├─ netsim.rs     deterministic discrete-event network
//!  ├─ scenario.rs   scenario model consumed by the simulation loop
//!  ├─ record.rs     structured transcript records
//!  └─ sim.rs        the event loop tying everything together
//! ```
//!
//! The crate is `no_std` (with `alloc`). File formats, the transcript hash
//! chain and the command line live in the companion `ztc` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bridge;
pub mod codec;
pub mod group;
pub mod hash;
pub mod ledger;
pub mod netsim;
pub mod record;
pub mod relay;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod zkp;

pub use group::{Commitment, Element, GroupParams, Keypair, Profile, Scalar, Signature};
pub use ledger::{Address, AssetId, AssetSpec, ChainId, ChainState, Transaction};
pub use relay::{Envelope, EnvelopeKind, RelayReceipt, RelayState};
pub use rng::SplitMix64;
pub use zkp::{InvalidReason, TxValidityProof, ValidityResult};
