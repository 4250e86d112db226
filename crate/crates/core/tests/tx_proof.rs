use std::collections::BTreeSet;

use proptest::prelude::*;
use ztc_core::codec::Encoder;
use ztc_core::group::{Commitment, Element, GroupParams, Keypair, Profile, Scalar, Signature};
use ztc_core::ledger::{Address, AssetId, ChainId, Transaction};
use ztc_core::rng::SplitMix64;
use ztc_core::zkp::*;

struct Case {
    params: GroupParams,
    keys: Keypair,
    tx: Transaction,
    blinding: Scalar,
    balance: u64,
}

impl Case {
    fn new(profile: Profile, balance: u64, amount: u64, fee: u64, seed: u64) -> Self {
        let params = GroupParams::new(profile);
        let mut rng = SplitMix64::new(seed);
        let keys = Keypair::generate(&params, &mut rng);
        let blinding = params.random_scalar(&mut rng);
        let tx = Transaction {
            sender: Address::from_public_key(&params, keys.public()),
            receiver: Address([0x56; 20]),
            amount,
            asset: AssetId::from_label("DOT"),
            fee,
            nonce: 0,
            origin_chain: ChainId::from_name("A"),
            dest_chain: ChainId::from_name("B"),
            signature: Signature::zeroed(),
        };
        Case {
            params,
            keys,
            tx,
            blinding,
            balance,
        }
    }

    fn published(&self) -> Commitment {
        self.params
            .commit(&self.params.scalar(self.balance), &self.blinding)
    }

    fn prove(&mut self, rng: &mut SplitMix64) -> Result<TxValidityProof, ProofError> {
        let proof = generate_tx_proof(
            &self.tx,
            &self.keys,
            self.balance,
            &self.blinding,
            &self.params,
            rng,
        )?;
        self.tx.signature = proof.auth_signature.clone();
        Ok(proof)
    }

    fn verify(&self, tx: &Transaction, proof: &TxValidityProof) -> ValidityResult {
        verify_tx_proof(
            tx,
            &self.published(),
            proof,
            Some(self.keys.public()),
            &self.params,
        )
    }
}

fn dlog_g(params: &GroupParams, target: &Element) -> Option<u64> {
    (0..101u64).find(|&v| params.exp_g(&params.scalar(v)) == *target)
}

#[test]
fn full_balance_spend_proves_zero() {
    let mut case = Case::new(Profile::Production, 100, 100, 0, 1);
    let proof = case.prove(&mut SplitMix64::new(2)).unwrap();
    assert_eq!(case.verify(&case.tx, &proof), ValidityResult::Valid);
}

#[test]
fn one_short_is_refused() {
    let mut case = Case::new(Profile::Production, 99, 100, 0, 1);
    assert_eq!(
        case.prove(&mut SplitMix64::new(2)),
        Err(ProofError::NotEnoughBalance)
    );
}

#[test]
fn wrong_key_is_refused() {
    let mut case = Case::new(Profile::Tiny, 30, 10, 1, 1);
    case.keys = Keypair::generate(&case.params, &mut SplitMix64::new(99));
    assert_eq!(case.prove(&mut SplitMix64::new(2)), Err(ProofError::KeyMismatch));
}

#[test]
fn tiny_range_target_opens_to_nineteen() {
    let mut case = Case::new(Profile::Tiny, 30, 10, 1, 3);
    let proof = case.prove(&mut SplitMix64::new(4)).unwrap();
    assert_eq!(case.verify(&case.tx, &proof), ValidityResult::Valid);
    let p = &case.params;
    let target = range_target(p, &case.published(), 10, 1);
    let unblinded = p.op(&target.0, &p.inv(&p.exp_h(&case.blinding)));
    assert_eq!(dlog_g(p, &unblinded), Some(19));
}

#[test]
fn tampers_map_to_reasons() {
    use InvalidReason::*;
    let mut case = Case::new(Profile::Production, 500, 100, 3, 5);
    let proof = case.prove(&mut SplitMix64::new(6)).unwrap();
    let tx = case.tx.clone();
    let reason = |tx: &Transaction, proof: &TxValidityProof| case.verify(tx, proof).reason();

    assert_eq!(
        reason(
            &Transaction {
                amount: 101,
                ..tx.clone()
            },
            &proof
        ),
        Some(MalformedProof)
    );
    assert_eq!(
        reason(&Transaction { fee: 4, ..tx.clone() }, &proof),
        Some(MalformedProof)
    );
    let swapped = Transaction {
        sender: tx.receiver,
        receiver: tx.sender,
        ..tx.clone()
    };
    assert_eq!(reason(&swapped, &proof), Some(MalformedProof));
    let rebound = TxValidityProof {
        binding_hash: [0; 32],
        ..proof.clone()
    };
    assert_eq!(reason(&tx, &rebound), Some(MalformedProof));
    let zeroed = Transaction {
        signature: Signature::zeroed(),
        ..tx.clone()
    };
    assert_eq!(reason(&zeroed, &proof), Some(InvalidSignature));
    let stripped = TxValidityProof {
        auth_signature: Signature::zeroed(),
        ..proof.clone()
    };
    assert_eq!(reason(&zeroed, &stripped), Some(InvalidSignature));

    let p = &case.params;
    assert_eq!(
        verify_tx_proof(&tx, &case.published(), &proof, None, p).reason(),
        Some(InvalidSignature)
    );
    let other = Keypair::generate(p, &mut SplitMix64::new(7));
    assert_eq!(
        verify_tx_proof(&tx, &case.published(), &proof, Some(other.public()), p).reason(),
        Some(InvalidSignature)
    );
    let stale = p.commit(&p.scalar(500), &p.random_scalar(&mut SplitMix64::new(8)));
    assert_eq!(
        verify_tx_proof(&tx, &stale, &proof, Some(case.keys.public()), p).reason(),
        Some(MalformedProof)
    );

    let mut short = proof.clone();
    short.range_proof.bit_proofs.pop();
    assert_eq!(reason(&tx, &short), Some(MalformedProof));
}

#[test]
fn bit_commitment_reused_across_proofs_fails() {
    let mut a = Case::new(Profile::Production, 500, 100, 3, 9);
    let proof_a = a.prove(&mut SplitMix64::new(10)).unwrap();
    let mut b = Case::new(Profile::Production, 500, 200, 0, 9);
    let proof_b = b.prove(&mut SplitMix64::new(11)).unwrap();
    let mut spliced = proof_a.clone();
    spliced.range_proof.bit_commitments[3] = proof_b.range_proof.bit_commitments[3].clone();
    spliced.range_proof.bit_proofs[3] = proof_b.range_proof.bit_proofs[3].clone();
    assert_eq!(
        a.verify(&a.tx, &spliced).reason(),
        Some(InvalidReason::NotEnoughBalance)
    );
}

#[test]
fn swapped_proofs_fail_both_ways() {
    let mut a = Case::new(Profile::Tiny, 40, 10, 1, 12);
    let pa = a.prove(&mut SplitMix64::new(13)).unwrap();
    let mut b = Case::new(Profile::Tiny, 40, 10, 1, 12);
    b.tx.nonce = 1;
    let pb = b.prove(&mut SplitMix64::new(14)).unwrap();
    assert!(!a.verify(&a.tx, &pb).is_valid());
    assert!(!b.verify(&b.tx, &pa).is_valid());
}

#[test]
fn proof_bytes_roundtrip() {
    for profile in [Profile::Tiny, Profile::Production] {
        let mut case = Case::new(profile, 50, 7, 2, 15);
        let proof = case.prove(&mut SplitMix64::new(16)).unwrap();
        let bytes = proof.encode(&case.params);
        assert_eq!(TxValidityProof::decode(&bytes, &case.params).unwrap(), proof);
        assert!(TxValidityProof::decode(&bytes[1..], &case.params).is_err());
    }
}

/// Every Fiat–Shamir hash inside one proof uses a distinct (tag, context).
#[test]
fn challenge_contexts_are_distinct() {
    let case = Case::new(Profile::Production, 1, 0, 0, 17);
    let ctx = tx_context(&case.tx.hash());
    let bits = protocol_range_bits(&case.params);
    let mut seen = BTreeSet::new();
    for i in 0..bits {
        assert!(seen.insert((TAG_BIT.to_vec(), bit_context(&ctx, i))));
    }
    assert!(seen.insert((TAG_AGG.to_vec(), ctx.clone())));
    assert_eq!(seen.len(), bits as usize + 1);
    let mut enc = Encoder::new();
    enc.field(TAG_TX).field(&case.tx.hash());
    assert_eq!(enc.finish(), ctx);
}

#[test]
fn simulated_proofs_verify_and_stay_bound() {
    let mut rng = SplitMix64::new(18);
    for seed in 0..20 {
        let mut case = Case::new(Profile::Tiny, 30, 10 + seed % 5, 1, seed);
        case.prove(&mut rng).unwrap();
        let sim = simulate_tx_proof(&case.tx, &case.published(), &case.params, &mut rng).unwrap();
        assert_eq!(case.verify(&case.tx, &sim), ValidityResult::Valid);
        let other = Transaction {
            nonce: 9,
            ..case.tx.clone()
        };
        assert!(!case.verify(&other, &sim).is_valid());
    }
    let mut prod = Case::new(Profile::Production, 30, 10, 1, 1);
    prod.prove(&mut rng).unwrap();
    assert_eq!(
        simulate_tx_proof(&prod.tx, &prod.published(), &prod.params, &mut rng),
        Err(ProofError::SimulationUnsupported)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn completeness_production(balance in any::<u64>(), a in any::<u64>(), f in any::<u64>(), seed in any::<u64>()) {
        let amount = a % (balance / 2 + 1);
        let fee = f % (balance - amount + 1);
        let mut case = Case::new(Profile::Production, balance, amount, fee, seed);
        let proof = case.prove(&mut SplitMix64::new(seed ^ 1)).unwrap();
        prop_assert_eq!(case.verify(&case.tx, &proof), ValidityResult::Valid);
    }

    #[test]
    fn completeness_tiny(balance in 0u64..64, a in any::<u64>(), f in any::<u64>(), seed in any::<u64>()) {
        let amount = a % (balance + 1);
        let fee = f % (balance - amount + 1);
        let mut case = Case::new(Profile::Tiny, balance, amount, fee, seed);
        let proof = case.prove(&mut SplitMix64::new(seed ^ 1)).unwrap();
        prop_assert_eq!(case.verify(&case.tx, &proof), ValidityResult::Valid);
    }
}
