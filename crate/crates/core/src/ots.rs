//! Deterministic one-time signature `σ = g^{1/(x + H(m))}` with verification
//! key `X = ĝ^x`.
//!
//! Signatures are unique per `(vk, m)`, so any accepted signature on a signed
//! message is the signature that was issued: existential unforgeability
//! therefore already gives strong unforgeability.

use rand_core::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::groups::{pairing, G1Element, G2Element, GroupContext, GroupElement, Scalar};
use crate::hashes::SUITE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OtsError {
    /// `x + H(m) ≡ 0 (mod p)`. Happens with probability about 1/p; the caller
    /// should generate a fresh key.
    #[error("signing key cannot sign this message")]
    Unsignable,
}

#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct OtsSigningKey {
    x: Scalar,
}

impl core::fmt::Debug for OtsSigningKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("OtsSigningKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtsVerificationKey(pub(crate) G2Element);

impl OtsVerificationKey {
    pub fn element(&self) -> &G2Element {
        &self.0
    }

    /// Decodes the key; the identity is rejected.
    pub fn from_element(e: G2Element) -> Option<Self> {
        (!e.is_identity()).then_some(OtsVerificationKey(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtsSignature(pub(crate) G1Element);

impl OtsSignature {
    pub fn element(&self) -> &G1Element {
        &self.0
    }

    pub fn from_element(e: G1Element) -> Self {
        OtsSignature(e)
    }
}

pub fn genkey<R: RngCore + CryptoRng>(
    ctx: &GroupContext,
    rng: &mut R,
) -> (OtsSigningKey, OtsVerificationKey) {
    let x = Scalar::random_nonzero(rng);
    let vk = OtsVerificationKey(ctx.g_hat().exp(&x));
    (OtsSigningKey { x }, vk)
}

impl OtsSigningKey {
    #[cfg(any(test, feature = "hazmat"))]
    #[doc(hidden)]
    pub fn secret(&self) -> Scalar {
        self.x
    }
}

pub fn sign(ctx: &GroupContext, sk: &OtsSigningKey, msg: &[u8]) -> Result<OtsSignature, OtsError> {
    let h = SUITE.h_ots(msg);
    let inv = sk.x.add(&h).invert().ok_or(OtsError::Unsignable)?;
    Ok(OtsSignature(ctx.g().exp(&inv)))
}

/// Checks `e(σ, X · ĝ^h) = e(g, ĝ)` using one pairing against the
/// precomputed right-hand side.
pub fn verify(ctx: &GroupContext, vk: &OtsVerificationKey, sig: &OtsSignature, msg: &[u8]) -> bool {
    if vk.0.is_identity() || sig.0.is_identity() {
        return false;
    }
    let h = SUITE.h_ots(msg);
    let rhs = vk.0.mul(&ctx.g_hat().exp(&h));
    pairing(&sig.0, &rhs) == *ctx.gt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::counters;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (GroupContext, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        (GroupContext::random(&mut rng), rng)
    }

    #[test]
    fn verification_key_is_recomputable() {
        let (ctx, mut rng) = setup();
        let (sk, vk) = genkey(&ctx, &mut rng);
        assert!(!sk.x.is_zero());
        assert_eq!(vk.0, ctx.g_hat().exp(&sk.x));
        let (_, vk2) = genkey(&ctx, &mut rng);
        assert_ne!(vk, vk2);
    }

    #[test]
    fn correctness_and_determinism() {
        let (ctx, mut rng) = setup();
        for n in 0..100u32 {
            let (sk, vk) = genkey(&ctx, &mut rng);
            let msg = n.to_le_bytes();
            let sig = sign(&ctx, &sk, &msg).unwrap();
            assert!(verify(&ctx, &vk, &sig, &msg));
            assert_eq!(sig, sign(&ctx, &sk, &msg).unwrap());
        }
    }

    #[test]
    fn rejects_modified_message_and_signature() {
        let (ctx, mut rng) = setup();
        let (sk, vk) = genkey(&ctx, &mut rng);
        let msg = b"header bytes".to_vec();
        let sig = sign(&ctx, &sk, &msg).unwrap();
        let mut flipped = msg.clone();
        flipped[0] ^= 1;
        assert!(!verify(&ctx, &vk, &sig, &flipped));
        for k in 1..=16u64 {
            let bumped = OtsSignature(sig.0.mul(&ctx.g().exp(&Scalar::from_u64(k))));
            assert!(!verify(&ctx, &vk, &bumped, &msg));
        }
        let (_, other_vk) = genkey(&ctx, &mut rng);
        assert!(!verify(&ctx, &other_vk, &sig, &msg));
    }

    #[test]
    fn unsignable_key_detected() {
        let (ctx, _) = setup();
        let msg = b"m";
        let x = SUITE.h_ots(msg).neg();
        let sk = OtsSigningKey { x };
        assert_eq!(sign(&ctx, &sk, msg), Err(OtsError::Unsignable));
    }

    #[test]
    fn verify_uses_one_pairing() {
        let (ctx, mut rng) = setup();
        let (sk, vk) = genkey(&ctx, &mut rng);
        let sig = sign(&ctx, &sk, b"x").unwrap();
        let before = counters::snapshot();
        assert!(verify(&ctx, &vk, &sig, b"x"));
        assert_eq!(counters::snapshot().since(&before).pairings, 1);
    }
}
