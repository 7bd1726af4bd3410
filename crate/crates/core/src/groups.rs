//! Asymmetric (type-3) bilinear group contract, instantiated on BLS12-381.
//!
//! `G1Element` lives in the small source group G, `G2Element` in the large
//! source group Ĝ and `GtElement` in the target group. There is no conversion
//! between the two source groups. Every element type is only reachable from
//! other subgroup members or from a decoder that enforces membership.
//!
//! Group laws are written multiplicatively (`mul`, `exp`, `inverse`) even
//! though the backend is additive for the curve groups.

use alloc::vec::Vec;
use core::fmt;

use ark_bls12_381::{Bls12_381, Fq, Fq12, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, Group, VariableBaseMSM};
use ark_ff::{BigInteger, Field, One, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use rand_core::{CryptoRng, RngCore};
use zeroize::Zeroize;

/// Encoded size of a G1 element (compressed).
pub const G1_BYTES: usize = 48;
/// Encoded size of a G2 element (compressed).
pub const G2_BYTES: usize = 96;
/// Encoded size of a GT element (twelve big-endian base-field coefficients).
pub const GT_BYTES: usize = 576;
/// Encoded size of a scalar.
pub const SCALAR_BYTES: usize = 32;

const FQ_BYTES: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("multi-exponentiation length mismatch: {bases} bases, {exps} exponents")]
    LengthMismatch { bases: usize, exps: usize },
    #[error("malformed {0} encoding")]
    Malformed(&'static str),
    #[error("{0} element is not in the prime-order subgroup")]
    NotInSubgroup(&'static str),
}

/// Operation counters used by benchmarks and tests.
///
/// With the `counters` feature the counts are thread-local, so concurrently
/// running tests do not disturb each other. Without it every function is a
/// no-op and reads return zero.
pub mod counters {
    #[cfg(feature = "counters")]
    use std::cell::Cell;

    #[cfg(feature = "counters")]
    std::thread_local! {
        static PAIRINGS: Cell<u64> = const { Cell::new(0) };
        static MEMBERSHIP: Cell<u64> = const { Cell::new(0) };
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
    pub struct Snapshot {
        pub pairings: u64,
        pub membership_checks: u64,
    }

    impl Snapshot {
        /// Counts accumulated since `earlier` was taken.
        pub fn since(&self, earlier: &Snapshot) -> Snapshot {
            Snapshot {
                pairings: self.pairings - earlier.pairings,
                membership_checks: self.membership_checks - earlier.membership_checks,
            }
        }
    }

    /// Whether the crate was built with live counters.
    pub const fn enabled() -> bool {
        cfg!(feature = "counters")
    }

    #[inline]
    pub fn snapshot() -> Snapshot {
        Snapshot {
            pairings: pairings(),
            membership_checks: membership_checks(),
        }
    }

    #[inline]
    pub fn pairings() -> u64 {
        #[cfg(feature = "counters")]
        {
            PAIRINGS.with(|c| c.get())
        }
        #[cfg(not(feature = "counters"))]
        {
            0
        }
    }

    #[inline]
    pub fn membership_checks() -> u64 {
        #[cfg(feature = "counters")]
        {
            MEMBERSHIP.with(|c| c.get())
        }
        #[cfg(not(feature = "counters"))]
        {
            0
        }
    }

    pub fn reset() {
        #[cfg(feature = "counters")]
        {
            PAIRINGS.with(|c| c.set(0));
            MEMBERSHIP.with(|c| c.set(0));
        }
    }

    #[inline(always)]
    pub(crate) fn add_pairings(_n: u64) {
        #[cfg(feature = "counters")]
        PAIRINGS.with(|c| c.set(c.get() + _n));
    }

    #[inline(always)]
    pub(crate) fn add_membership(_n: u64) {
        #[cfg(feature = "counters")]
        MEMBERSHIP.with(|c| c.set(c.get() + _n));
    }
}

/// An exponent modulo the group order p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Zeroize)]
pub struct Scalar(pub(crate) Fr);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Fr::zero())
    }

    pub fn one() -> Self {
        Scalar(Fr::one())
    }

    /// Uniform sample from `[0, p)`.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Scalar(Fr::rand(rng))
    }

    /// Uniform sample from `[1, p)`.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = Fr::rand(rng);
            if !s.is_zero() {
                return Scalar(s);
            }
        }
    }

    /// Uniform sample of `bits` bits (at most 128), used for small-exponent tests.
    pub fn random_bits<R: RngCore + CryptoRng>(rng: &mut R, bits: u32) -> Self {
        assert!(bits <= 128, "small exponents are limited to 128 bits");
        let mut buf = [0u8; 16];
        rng.fill_bytes(&mut buf);
        let raw = u128::from_le_bytes(buf);
        let masked = if bits == 128 { raw } else { raw & ((1u128 << bits) - 1) };
        Scalar(Fr::from(masked))
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(Fr::from(v))
    }

    /// Reduces an arbitrary-length big-endian integer modulo p.
    pub fn from_be_bytes_mod_order(bytes: &[u8]) -> Self {
        Scalar(Fr::from_be_bytes_mod_order(bytes))
    }

    /// Canonical decoding; rejects values `>= p`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() != SCALAR_BYTES {
            return Err(GroupError::Malformed("scalar"));
        }
        let s = Fr::from_be_bytes_mod_order(bytes);
        if s.into_bigint().to_bytes_be() != bytes {
            return Err(GroupError::Malformed("scalar"));
        }
        Ok(Scalar(s))
    }

    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        let mut out = [0u8; SCALAR_BYTES];
        out.copy_from_slice(&self.0.into_bigint().to_bytes_be());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 + other.0)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 - other.0)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 * other.0)
    }

    pub fn neg(&self) -> Scalar {
        Scalar(-self.0)
    }

    pub fn invert(&self) -> Option<Scalar> {
        self.0.inverse().map(Scalar)
    }

    /// The group order p, big-endian.
    pub fn modulus_bytes() -> [u8; SCALAR_BYTES] {
        let mut out = [0u8; SCALAR_BYTES];
        out.copy_from_slice(&Fr::MODULUS.to_bytes_be());
        out
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar(")?;
        write_hex(f, &self.to_bytes())?;
        write!(f, ")")
    }
}

fn write_hex(f: &mut fmt::Formatter<'_>, bytes: &[u8]) -> fmt::Result {
    for b in bytes {
        write!(f, "{b:02x}")?;
    }
    Ok(())
}

/// Common surface of G1, G2 and GT.
pub trait GroupElement: Sized + Clone + PartialEq + Eq + fmt::Debug {
    const NAME: &'static str;
    const ENCODED_LEN: usize;

    fn identity() -> Self;
    fn is_identity(&self) -> bool;
    /// Group law.
    fn mul(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn exp(&self, s: &Scalar) -> Self;
    /// Prime-order subgroup membership; counted.
    fn is_member(&self) -> bool;
    fn to_bytes(&self) -> Vec<u8>;
    /// Decodes a canonical encoding and enforces subgroup membership.
    fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError>;

    /// `∏ bases[i]^{exps[i]}`; the empty product is the identity.
    fn multi_exp(bases: &[Self], exps: &[Scalar]) -> Result<Self, GroupError> {
        check_lengths(bases, exps)?;
        Ok(bases
            .iter()
            .zip(exps)
            .fold(Self::identity(), |acc, (b, e)| acc.mul(&b.exp(e))))
    }
}

fn check_lengths<T>(bases: &[T], exps: &[Scalar]) -> Result<(), GroupError> {
    if bases.len() != exps.len() {
        return Err(GroupError::LengthMismatch {
            bases: bases.len(),
            exps: exps.len(),
        });
    }
    Ok(())
}

macro_rules! curve_element {
    ($name:ident, $proj:ty, $affine:ty, $len:expr, $label:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, Zeroize)]
        pub struct $name(pub(crate) $proj);

        impl $name {
            /// The fixed standard generator of the backend curve.
            pub fn generator() -> Self {
                $name(<$proj>::generator())
            }

            pub(crate) fn affine(&self) -> $affine {
                self.0.into_affine()
            }
        }

        impl GroupElement for $name {
            const NAME: &'static str = $label;
            const ENCODED_LEN: usize = $len;

            fn identity() -> Self {
                $name(<$proj>::zero())
            }

            fn is_identity(&self) -> bool {
                self.0.is_zero()
            }

            fn mul(&self, other: &Self) -> Self {
                $name(self.0 + other.0)
            }

            fn inverse(&self) -> Self {
                $name(-self.0)
            }

            fn exp(&self, s: &Scalar) -> Self {
                $name(self.0 * s.0)
            }

            fn is_member(&self) -> bool {
                counters::add_membership(1);
                let p = self.affine();
                p.is_on_curve() && p.is_in_correct_subgroup_assuming_on_curve()
            }

            fn to_bytes(&self) -> Vec<u8> {
                let mut out = Vec::with_capacity($len);
                self.affine()
                    .serialize_compressed(&mut out)
                    .expect("writing to a Vec cannot fail");
                out
            }

            fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
                if bytes.len() != $len {
                    return Err(GroupError::Malformed($label));
                }
                let p = <$affine>::deserialize_with_mode(bytes, Compress::Yes, Validate::No)
                    .map_err(|_| GroupError::Malformed($label))?;
                let e = $name(p.into_group());
                // Reject alternative encodings of the same point.
                if e.to_bytes() != bytes {
                    return Err(GroupError::Malformed($label));
                }
                if !e.is_member() {
                    return Err(GroupError::NotInSubgroup($label));
                }
                Ok(e)
            }

            fn multi_exp(bases: &[Self], exps: &[Scalar]) -> Result<Self, GroupError> {
                check_lengths(bases, exps)?;
                if bases.is_empty() {
                    return Ok(Self::identity());
                }
                let affine = <$proj>::normalize_batch(&bases.iter().map(|b| b.0).collect::<Vec<_>>());
                let scalars: Vec<Fr> = exps.iter().map(|s| s.0).collect();
                let r = <$proj as VariableBaseMSM>::msm(&affine, &scalars)
                    .expect("lengths checked above");
                Ok($name(r))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(", stringify!($name))?;
                write_hex(f, &self.to_bytes())?;
                write!(f, ")")
            }
        }
    };
}

curve_element!(G1Element, G1Projective, G1Affine, G1_BYTES, "G1");
curve_element!(G2Element, G2Projective, G2Affine, G2_BYTES, "G2");

#[cfg(any(test, feature = "hazmat"))]
impl G1Element {
    /// Encodes an arbitrary curve point, skipping all checks. Test-only
    /// helper for producing off-subgroup encodings.
    #[doc(hidden)]
    pub fn encode_unchecked_point_from_x(x_seed: u64) -> Option<Vec<u8>> {
        let x = Fq::from(x_seed);
        let p = G1Affine::get_point_from_x_unchecked(x, true)?;
        if p.is_in_correct_subgroup_assuming_on_curve() {
            return None;
        }
        let mut out = Vec::new();
        p.serialize_compressed(&mut out).ok()?;
        Some(out)
    }
}

/// Element of the target group, written multiplicatively.
#[derive(Clone, Copy, PartialEq, Eq, Zeroize)]
pub struct GtElement(pub(crate) PairingOutput<Bls12_381>);

impl GroupElement for GtElement {
    const NAME: &'static str = "GT";
    const ENCODED_LEN: usize = GT_BYTES;

    fn identity() -> Self {
        GtElement(PairingOutput::zero())
    }

    fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    fn mul(&self, other: &Self) -> Self {
        GtElement(self.0 + other.0)
    }

    fn inverse(&self) -> Self {
        GtElement(-self.0)
    }

    fn exp(&self, s: &Scalar) -> Self {
        GtElement(self.0 * s.0)
    }

    fn is_member(&self) -> bool {
        counters::add_membership(1);
        let x: Fq12 = self.0 .0;
        !x.is_zero() && x.pow(Fr::MODULUS) == Fq12::one()
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(GT_BYTES);
        for c in self.0 .0.to_base_prime_field_elements() {
            out.extend_from_slice(&c.into_bigint().to_bytes_be());
        }
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() != GT_BYTES {
            return Err(GroupError::Malformed("GT"));
        }
        let mut coeffs = Vec::with_capacity(12);
        for chunk in bytes.chunks_exact(FQ_BYTES) {
            let c = Fq::from_be_bytes_mod_order(chunk);
            if c.into_bigint().to_bytes_be() != chunk {
                return Err(GroupError::Malformed("GT"));
            }
            coeffs.push(c);
        }
        let x = Fq12::from_base_prime_field_elems(&coeffs).ok_or(GroupError::Malformed("GT"))?;
        let e = GtElement(PairingOutput(x));
        if !e.is_member() {
            return Err(GroupError::NotInSubgroup("GT"));
        }
        Ok(e)
    }
}

impl fmt::Debug for GtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GtElement(")?;
        write_hex(f, &self.to_bytes()[..16])?;
        write!(f, "..)")
    }
}

/// `e(a, b)`; counts one pairing.
pub fn pairing(a: &G1Element, b: &G2Element) -> GtElement {
    counters::add_pairings(1);
    GtElement(Bls12_381::pairing(a.affine(), b.affine()))
}

/// `∏ e(a_i, b_i)` with a shared final exponentiation; counts one pairing per
/// pair.
pub fn multi_pairing(pairs: &[(G1Element, G2Element)]) -> GtElement {
    counters::add_pairings(pairs.len() as u64);
    let lhs = G1Projective::normalize_batch(&pairs.iter().map(|(a, _)| a.0).collect::<Vec<_>>());
    let rhs = G2Projective::normalize_batch(&pairs.iter().map(|(_, b)| b.0).collect::<Vec<_>>());
    GtElement(Bls12_381::multi_pairing(lhs, rhs))
}

/// Checks `e(a1, b1) = e(a2, b2)` as a two-pairing product. Counts two.
pub fn pairings_equal(a1: &G1Element, b1: &G2Element, a2: &G1Element, b2: &G2Element) -> bool {
    multi_pairing(&[(*a1, *b1), (a2.inverse(), *b2)]).is_identity()
}

/// The bilinear group every other object lives in: generators of both
/// source groups and the precomputed `e(g, ĝ)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GroupContext {
    g: G1Element,
    g_hat: G2Element,
    gt: GtElement,
}

impl GroupContext {
    /// Context over the backend's standard generators.
    pub fn standard() -> Self {
        Self::new(G1Element::generator(), G2Element::generator())
            .expect("standard generators are non-trivial")
    }

    /// Samples uniformly random generators of both source groups.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let g = G1Element::generator().exp(&Scalar::random_nonzero(rng));
        let g_hat = G2Element::generator().exp(&Scalar::random_nonzero(rng));
        Self::new(g, g_hat).expect("non-zero multiples of generators are generators")
    }

    /// Builds a context from explicit generators; both must be non-identity.
    pub fn new(g: G1Element, g_hat: G2Element) -> Option<Self> {
        if g.is_identity() || g_hat.is_identity() {
            return None;
        }
        let gt = pairing(&g, &g_hat);
        Some(GroupContext { g, g_hat, gt })
    }

    pub fn g(&self) -> &G1Element {
        &self.g
    }

    pub fn g_hat(&self) -> &G2Element {
        &self.g_hat
    }

    /// `e(g, ĝ)`.
    pub fn gt(&self) -> &GtElement {
        &self.gt
    }
}
