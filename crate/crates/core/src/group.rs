//! Prime-order subgroup of Z_p* with Pedersen commitments and Schnorr
//! signatures.
//!
//! Two fixed parameter sets are baked in:
//!
//! * [`Profile::Production`]: a 256-bit safe prime `p = 2q + 1` with a
//!   255-bit prime `q`. The prime was found once by scanning odd `q`
//!   upward from `SHA-256("ZTC/production-group") mod 2^254`, with bit 254
//!   forced, until both `q` and `2q + 1` passed 64 Miller-Rabin rounds.
//! * [`Profile::Tiny`]: `p = 607`, `q = 101`. Small enough that every
//!   discrete logarithm can be found by exhaustive search, which is what the
//!   brute-force test oracles rely on.
//!
//! In both profiles `G` is the smallest `h >= 2` of order `q` and
//! `H = G^(hash_to_scalar("ZTC/H", encode(G)))`, so nobody knows `log_G(H)`
//! beyond what brute force gives in the tiny group.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::hash::sha256;
use crate::rng::SplitMix64;

const PRODUCTION_P: &str = "821d97d7a9b67b6aeab9112058827798446ab3b07b69a734c6e7ca5ae5a65937";
const PRODUCTION_Q: &str = "410ecbebd4db3db5755c88902c413bcc223559d83db4d39a6373e52d72d32c9b";

pub const TAG_H: &[u8] = b"ZTC/H";
pub const TAG_SIG: &[u8] = b"ZTC/SIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Profile {
    Production,
    Tiny,
}

impl Profile {
    pub fn as_str(&self) -> &'static str {
        match self {
            Profile::Production => "production",
            Profile::Tiny => "tiny",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "production" => Some(Profile::Production),
            "tiny" => Some(Profile::Tiny),
            _ => None,
        }
    }
}

/// Integer modulo `q`, always kept reduced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigUint);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigUint::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    /// The value as `u64` if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        let digits = self.0.to_u64_digits();
        match digits.len() {
            0 => Some(0),
            1 => Some(digits[0]),
            _ => None,
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({:x})", self.0)
    }
}

/// Residue modulo `p`. Subgroup membership is not implied by the type;
/// check it with [`GroupParams::is_member`] on untrusted input.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(BigUint);

impl Element {
    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({:x})", self.0)
    }
}

/// Pedersen commitment `G^v * H^r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Commitment(pub Element);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Keypair {
    sk: Scalar,
    pk: Element,
}

impl Keypair {
    pub fn generate(params: &GroupParams, rng: &mut SplitMix64) -> Self {
        let sk = params.random_nonzero_scalar(rng);
        Self::from_secret(params, sk).expect("non-zero secret")
    }

    /// `None` for the zero secret, whose public key would be the identity.
    pub fn from_secret(params: &GroupParams, sk: Scalar) -> Option<Self> {
        if sk.is_zero() {
            return None;
        }
        let pk = params.exp_g(&sk);
        Some(Self { sk, pk })
    }

    pub fn secret(&self) -> &Scalar {
        &self.sk
    }

    pub fn public(&self) -> &Element {
        &self.pk
    }
}

/// Schnorr signature `(R, s)` with `G^s = R * pk^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub r: Element,
    pub s: Scalar,
}

impl Signature {
    /// The all-zero signature. Never verifies, since 0 is not a group
    /// element.
    pub fn zeroed() -> Self {
        Signature {
            r: Element(BigUint::zero()),
            s: Scalar::zero(),
        }
    }
}

/// Precomputed `base^(d * 256^i)` for every window `i` and digit `d`.
#[derive(Clone)]
struct FixedBase {
    windows: Arc<Vec<Vec<BigUint>>>,
}

impl FixedBase {
    fn new(base: &BigUint, p: &BigUint, exponent_bits: u64) -> Self {
        let n_windows = exponent_bits.div_ceil(8) as usize;
        let mut windows = Vec::with_capacity(n_windows);
        let mut step = base.clone();
        for _ in 0..n_windows {
            let mut row = Vec::with_capacity(256);
            let mut acc = BigUint::one();
            for _ in 0..256 {
                row.push(acc.clone());
                acc = (&acc * &step) % p;
            }
            step = acc;
            windows.push(row);
        }
        FixedBase {
            windows: Arc::new(windows),
        }
    }

    fn exp(&self, e: &BigUint, p: &BigUint) -> BigUint {
        let mut acc = BigUint::one();
        for (row, digit) in self.windows.iter().zip(e.to_bytes_le()) {
            if digit != 0 {
                acc = (&acc * &row[usize::from(digit)]) % p;
            }
        }
        acc
    }
}

/// Jacobi symbol `(a / n)` for odd `n`.
fn jacobi(a: &BigUint, n: &BigUint) -> i8 {
    let mut a = a % n;
    let mut n = n.clone();
    let mut t = 1i8;
    let low = |x: &BigUint, m: u32| (x % m).to_u32_digits().first().copied().unwrap_or(0);
    while !a.is_zero() {
        let zeros = a.trailing_zeros().unwrap_or(0);
        a >>= zeros;
        if zeros % 2 == 1 && matches!(low(&n, 8), 3 | 5) {
            t = -t;
        }
        core::mem::swap(&mut a, &mut n);
        if low(&a, 4) == 3 && low(&n, 4) == 3 {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

#[derive(Clone)]
pub struct GroupParams {
    profile: Profile,
    p: BigUint,
    q: BigUint,
    g: Element,
    h: Element,
    element_len: usize,
    scalar_len: usize,
    /// `p = 2q + 1`, so the subgroup is the quadratic residues.
    safe_prime: bool,
    g_table: FixedBase,
    h_table: FixedBase,
}

impl PartialEq for GroupParams {
    fn eq(&self, other: &Self) -> bool {
        (self.profile, &self.p, &self.q, &self.g, &self.h)
            == (other.profile, &other.p, &other.q, &other.g, &other.h)
    }
}

impl Eq for GroupParams {}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("profile", &self.profile)
            .field("p", &self.p)
            .field("q", &self.q)
            .field("g", &self.g)
            .field("h", &self.h)
            .finish()
    }
}

/// Builds the fixed parameter set for `profile`.
pub fn group_setup(profile: Profile) -> GroupParams {
    GroupParams::new(profile)
}

impl GroupParams {
    pub fn new(profile: Profile) -> Self {
        let (p, q) = match profile {
            Profile::Production => (
                BigUint::parse_bytes(PRODUCTION_P.as_bytes(), 16).expect("valid hex"),
                BigUint::parse_bytes(PRODUCTION_Q.as_bytes(), 16).expect("valid hex"),
            ),
            Profile::Tiny => (BigUint::from(607u32), BigUint::from(101u32)),
        };
        let element_len = p.bits().div_ceil(8) as usize;
        let scalar_len = q.bits().div_ceil(8) as usize;

        let one = BigUint::one();
        let mut candidate = BigUint::from(2u32);
        let g = loop {
            if candidate.modpow(&q, &p) == one {
                break candidate;
            }
            candidate += 1u32;
        };

        let safe_prime = p == (&q << 1u32) + 1u32;
        let g_table = FixedBase::new(&g, &p, q.bits());
        let mut params = GroupParams {
            profile,
            p,
            q,
            g: Element(g),
            h: Element(BigUint::one()),
            element_len,
            scalar_len,
            safe_prime,
            h_table: g_table.clone(),
            g_table,
        };
        let h_exp = params.hash_to_scalar(TAG_H, &params.encode_element(&params.g));
        assert!(!h_exp.is_zero(), "degenerate second generator");
        params.h = params.exp(&params.g, &h_exp);
        params.h_table = FixedBase::new(&params.h.0, &params.p, params.q.bits());
        params
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn order(&self) -> &BigUint {
        &self.q
    }

    pub fn g(&self) -> &Element {
        &self.g
    }

    pub fn h(&self) -> &Element {
        &self.h
    }

    pub fn element_len(&self) -> usize {
        self.element_len
    }

    pub fn scalar_len(&self) -> usize {
        self.scalar_len
    }

    // ---- scalars ----

    pub fn scalar(&self, v: u64) -> Scalar {
        Scalar(BigUint::from(v) % &self.q)
    }

    pub fn scalar_u128(&self, v: u128) -> Scalar {
        Scalar(BigUint::from(v) % &self.q)
    }

    pub fn scalar_from_biguint(&self, v: &BigUint) -> Scalar {
        Scalar(v % &self.q)
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.q)
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &self.q - &b.0) % &self.q)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.q)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.sub(&Scalar::zero(), a)
    }

    /// Multiplicative inverse mod `q`; `None` for zero.
    pub fn invert(&self, a: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        let exp = &self.q - 2u32;
        Some(Scalar(a.0.modpow(&exp, &self.q)))
    }

    /// Uniform scalar from wide reduction of `scalar_len + 16` random bytes.
    pub fn random_scalar(&self, rng: &mut SplitMix64) -> Scalar {
        let mut bytes = vec![0u8; self.scalar_len + 16];
        rng.fill_bytes(&mut bytes);
        Scalar(BigUint::from_bytes_be(&bytes) % &self.q)
    }

    pub fn random_nonzero_scalar(&self, rng: &mut SplitMix64) -> Scalar {
        loop {
            let s = self.random_scalar(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// `SHA-256(tag || 0x00 || payload)` as a big-endian integer mod `q`.
    pub fn hash_to_scalar(&self, tag: &[u8], payload: &[u8]) -> Scalar {
        debug_assert!(!tag.is_empty(), "domain tag must be non-empty");
        let digest = sha256(&[tag, &[0u8], payload]);
        Scalar(BigUint::from_bytes_be(&digest) % &self.q)
    }

    // ---- elements ----

    pub fn identity(&self) -> Element {
        Element(BigUint::one())
    }

    pub fn element_from_u64(&self, v: u64) -> Element {
        Element(BigUint::from(v) % &self.p)
    }

    pub fn exp(&self, base: &Element, e: &Scalar) -> Element {
        Element(base.0.modpow(&e.0, &self.p))
    }

    pub fn exp_g(&self, e: &Scalar) -> Element {
        Element(self.g_table.exp(&e.0, &self.p))
    }

    pub fn exp_h(&self, e: &Scalar) -> Element {
        Element(self.h_table.exp(&e.0, &self.p))
    }

    /// `base^k` for an exponent that is not reduced mod `q`.
    pub fn exp_big(&self, base: &Element, k: &BigUint) -> Element {
        Element(base.0.modpow(k, &self.p))
    }

    pub fn op(&self, a: &Element, b: &Element) -> Element {
        Element((&a.0 * &b.0) % &self.p)
    }

    /// Inverse in Z_p*. Zero has none; it maps to zero.
    pub fn inv(&self, a: &Element) -> Element {
        let exp = &self.p - 2u32;
        Element(a.0.modpow(&exp, &self.p))
    }

    /// `0 < e < p` and `e^q = 1`. For a safe prime the second test is the
    /// equivalent Jacobi symbol check.
    pub fn is_member(&self, e: &Element) -> bool {
        if e.0.is_zero() || e.0 >= self.p {
            return false;
        }
        if self.safe_prime {
            jacobi(&e.0, &self.p) == 1
        } else {
            e.0.modpow(&self.q, &self.p).is_one()
        }
    }

    // ---- encodings ----

    pub fn encode_element(&self, e: &Element) -> Vec<u8> {
        fixed_width(&e.0, self.element_len)
    }

    pub fn encode_scalar(&self, s: &Scalar) -> Vec<u8> {
        fixed_width(&s.0, self.scalar_len)
    }

    pub fn decode_element(&self, bytes: &[u8]) -> Result<Element, DecodeError> {
        if bytes.len() != self.element_len {
            return Err(DecodeError::BadLength {
                expected: self.element_len,
                found: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if v >= self.p {
            return Err(DecodeError::NonCanonical);
        }
        Ok(Element(v))
    }

    pub fn decode_scalar(&self, bytes: &[u8]) -> Result<Scalar, DecodeError> {
        if bytes.len() != self.scalar_len {
            return Err(DecodeError::BadLength {
                expected: self.scalar_len,
                found: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if v >= self.q {
            return Err(DecodeError::NonCanonical);
        }
        Ok(Scalar(v))
    }

    // ---- commitments ----

    pub fn commit(&self, value: &Scalar, blinding: &Scalar) -> Commitment {
        Commitment(self.op(&self.exp_g(value), &self.exp_h(blinding)))
    }

    /// `c * G^(-amount)`: debits a public amount from a committed value
    /// without touching the blinding.
    pub fn commit_sub_public(&self, c: &Commitment, amount: &Scalar) -> Commitment {
        Commitment(self.op(&c.0, &self.exp_g(&self.neg(amount))))
    }

    /// `a * b`, which commits to the sum of values and blindings.
    pub fn commit_add(&self, a: &Commitment, b: &Commitment) -> Commitment {
        Commitment(self.op(&a.0, &b.0))
    }

    // ---- signatures ----

    fn signature_challenge(&self, r: &Element, pk: &Element, message: &[u8]) -> Scalar {
        let mut payload = self.encode_element(r);
        payload.extend_from_slice(&self.encode_element(pk));
        payload.extend_from_slice(message);
        self.hash_to_scalar(TAG_SIG, &payload)
    }

    pub fn sign(&self, keys: &Keypair, message: &[u8], rng: &mut SplitMix64) -> Signature {
        let k = self.random_nonzero_scalar(rng);
        let r = self.exp_g(&k);
        let e = self.signature_challenge(&r, &keys.pk, message);
        let s = self.add(&k, &self.mul(&e, &keys.sk));
        Signature { r, s }
    }

    /// False on any malformed input; never panics.
    pub fn verify(&self, pk: &Element, message: &[u8], sig: &Signature) -> bool {
        if !self.is_member(pk) || pk.0.is_one() || !self.is_member(&sig.r) || sig.s.0 >= self.q {
            return false;
        }
        let e = self.signature_challenge(&sig.r, pk, message);
        self.exp_g(&sig.s) == self.op(&sig.r, &self.exp(pk, &e))
    }

    /// `field(R) || field(s)` in the canonical codec.
    pub fn encode_signature(&self, sig: &Signature) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.field(&self.encode_element(&sig.r))
            .field(&self.encode_scalar(&sig.s));
        enc.finish()
    }

    pub fn decode_signature(&self, bytes: &[u8]) -> Result<Signature, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let r = self.decode_element(dec.field()?)?;
        let s = self.decode_scalar(dec.field()?)?;
        dec.finish()?;
        Ok(Signature { r, s })
    }
}

fn fixed_width(v: &BigUint, len: usize) -> Vec<u8> {
    let bytes = v.to_bytes_be();
    let bytes: &[u8] = if v.is_zero() { &[] } else { &bytes };
    assert!(bytes.len() <= len, "value wider than encoding");
    let mut out = vec![0u8; len - bytes.len()];
    out.extend_from_slice(bytes);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn production() -> &'static GroupParams {
        static P: OnceLock<GroupParams> = OnceLock::new();
        P.get_or_init(|| GroupParams::new(Profile::Production))
    }

    fn tiny() -> GroupParams {
        GroupParams::new(Profile::Tiny)
    }

    /// Brute-force log base `base` in the tiny group.
    fn dlog(params: &GroupParams, base: &Element, target: &Element) -> Option<u64> {
        (0..101u64).find(|&x| params.exp(base, &params.scalar(x)) == *target)
    }

    #[test]
    fn tiny_parameters() {
        let t = tiny();
        assert_eq!(t.modulus(), &BigUint::from(607u32));
        assert_eq!(t.order(), &BigUint::from(101u32));
        assert_eq!((607u32 - 1) % 101, 0);
        // smallest element of order 101, by exhaustive search over Z_607
        let smallest = (2u64..607)
            .find(|&h| {
                BigUint::from(h)
                    .modpow(&BigUint::from(101u32), &BigUint::from(607u32))
                    .is_one()
            })
            .unwrap();
        assert_eq!(smallest, 7);
        assert_eq!(t.g(), &t.element_from_u64(7));
        assert_eq!(t.h(), &t.element_from_u64(288));
        assert!(t.is_member(t.g()) && t.is_member(t.h()));
        assert_ne!(t.h(), &t.identity());
        assert_eq!((t.element_len(), t.scalar_len()), (2, 1));
    }

    #[test]
    fn fast_paths_match_plain_modpow() {
        for params in [production(), &GroupParams::new(Profile::Tiny)] {
            let mut rng = SplitMix64::new(77);
            for _ in 0..200 {
                let e = params.random_scalar(&mut rng);
                assert_eq!(params.exp_g(&e).0, params.g().0.modpow(&e.0, params.modulus()));
                assert_eq!(params.exp_h(&e).0, params.h().0.modpow(&e.0, params.modulus()));
                let mut bytes = vec![0u8; params.element_len()];
                rng.fill_bytes(&mut bytes);
                let x = BigUint::from_bytes_be(&bytes) % params.modulus();
                let by_order = !x.is_zero() && x.modpow(params.order(), params.modulus()).is_one();
                assert_eq!(params.is_member(&Element(x)), by_order);
            }
        }
    }

    #[test]
    fn production_parameters() {
        let p = production();
        assert!(p.order().bits() >= 251);
        assert_eq!(p.modulus(), &(p.order() * 2u32 + 1u32));
        assert_eq!(p.g(), &p.element_from_u64(2));
        assert!(p.is_member(p.g()) && p.is_member(p.h()));
        assert_ne!(p.h(), &p.identity());
        assert_eq!((p.element_len(), p.scalar_len()), (32, 32));
        assert_eq!(&GroupParams::new(Profile::Production), p);
    }

    #[test]
    fn hash_to_scalar_is_domain_separated() {
        let p = production();
        let mut rng = SplitMix64::new(11);
        for _ in 0..100 {
            let mut m = [0u8; 24];
            rng.fill_bytes(&mut m);
            let a = p.hash_to_scalar(b"A", &m);
            assert_eq!(a, p.hash_to_scalar(b"A", &m));
            assert_ne!(a, p.hash_to_scalar(b"B", &m));
            assert!(a.as_biguint() < p.order());
        }
    }

    #[test]
    fn hash_to_scalar_known_value() {
        // SHA-256("A" || 0x00 || "") mod 101, computed independently
        let t = tiny();
        let digest = sha256(&[b"A", &[0]]);
        let expect = BigUint::from_bytes_be(&digest) % 101u32;
        assert_eq!(t.hash_to_scalar(b"A", b"").as_biguint(), &expect);
    }

    #[test]
    fn commitment_identities() {
        for p in [production().clone(), tiny()] {
            assert_eq!(p.commit(&p.scalar(0), &p.scalar(0)).0, p.identity());
            let lhs = p.commit_add(
                &p.commit(&p.scalar(3), &p.scalar(5)),
                &p.commit(&p.scalar(4), &p.scalar(6)),
            );
            assert_eq!(lhs, p.commit(&p.scalar(7), &p.scalar(11)));
            let r = p.scalar(77);
            let c = p.commit(&p.scalar(10), &r);
            assert_eq!(p.commit_sub_public(&c, &p.scalar(10)), p.commit(&p.scalar(0), &r));
            assert_eq!(p.commit_sub_public(&c, &p.scalar(0)), c);
        }
    }

    #[test]
    fn tiny_brute_force_recovers_values() {
        let t = tiny();
        for v in 0..101u64 {
            let c = t.commit(&t.scalar(v), &Scalar::zero());
            assert_eq!(dlog(&t, t.g(), &c.0), Some(v));
        }
    }

    #[test]
    fn tiny_debit_checked_by_brute_force_opening() {
        let t = tiny();
        let r = t.scalar(13);
        let c = t.commit(&t.scalar(40), &r);
        let d = t.commit_sub_public(&c, &t.scalar(15));
        // strip the known blinding, then search the value
        let stripped = t.op(&d.0, &t.inv(&t.exp_h(&r)));
        assert_eq!(dlog(&t, t.g(), &stripped), Some(25));
    }

    /// Two openings collide exactly when v + x*r agree mod q, x = log_G(H).
    #[test]
    fn tiny_binding_collision_structure() {
        let t = tiny();
        let x = dlog(&t, t.g(), t.h()).unwrap();
        assert!(x > 0);
        let mut seen = std::collections::HashMap::new();
        for v in 0..101u64 {
            for r in 0..101u64 {
                let c = t.commit(&t.scalar(v), &t.scalar(r));
                seen.entry(c).or_insert_with(Vec::new).push((v, r));
            }
        }
        // every element of the subgroup is hit exactly q times
        assert_eq!(seen.len(), 101);
        for openings in seen.values() {
            assert_eq!(openings.len(), 101);
            let key = |&(v, r): &(u64, u64)| (v + x * r) % 101;
            let k0 = key(&openings[0]);
            assert!(openings.iter().all(|o| key(o) == k0));
        }
    }

    #[test]
    fn schnorr_roundtrip_and_rejections() {
        let t = tiny();
        let mut rng = SplitMix64::new(5);
        let keys = Keypair::generate(&t, &mut rng);
        let msg = b"transfer 100";
        let sig = t.sign(&keys, msg, &mut rng);
        assert!(t.verify(keys.public(), msg, &sig));

        let mut flipped = msg.to_vec();
        flipped[0] ^= 1;
        assert!(!t.verify(keys.public(), &flipped, &sig));

        let other = t.exp_g(&t.add(keys.secret(), &t.scalar(1)));
        assert!(!t.verify(&other, msg, &sig));
        assert!(!t.verify(keys.public(), msg, &Signature::zeroed()));
        assert!(!t.verify(&t.identity(), msg, &sig));
    }

    #[test]
    fn schnorr_completeness_thousand_roundtrips() {
        let p = production();
        let mut rng = SplitMix64::new(99);
        for i in 0..1000u32 {
            let keys = Keypair::generate(p, &mut rng);
            let msg = i.to_be_bytes();
            let sig = p.sign(&keys, &msg, &mut rng);
            assert!(p.verify(keys.public(), &msg, &sig));
        }
    }

    #[test]
    fn encodings_are_fixed_width_and_strict() {
        let t = tiny();
        assert_eq!(t.encode_element(&t.element_from_u64(7)), vec![0, 7]);
        assert_eq!(t.encode_scalar(&Scalar::zero()), vec![0]);
        assert_eq!(t.decode_element(&[2, 95]), Err(DecodeError::NonCanonical)); // 607
        assert_eq!(t.decode_scalar(&[101]), Err(DecodeError::NonCanonical));
        assert!(t.decode_element(&[7]).is_err());
        let sig = Signature {
            r: t.element_from_u64(9),
            s: t.scalar(4),
        };
        assert_eq!(t.decode_signature(&t.encode_signature(&sig)).unwrap(), sig);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn homomorphism(seed in any::<u64>(), tiny_profile in any::<bool>()) {
            let params = if tiny_profile { tiny() } else { production().clone() };
            let mut rng = SplitMix64::new(seed);
            let (a, b, r, s) = (
                params.random_scalar(&mut rng),
                params.random_scalar(&mut rng),
                params.random_scalar(&mut rng),
                params.random_scalar(&mut rng),
            );
            let lhs = params.commit_add(&params.commit(&a, &r), &params.commit(&b, &s));
            let rhs = params.commit(&params.add(&a, &b), &params.add(&r, &s));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
