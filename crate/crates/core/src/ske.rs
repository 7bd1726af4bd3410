//! One-time pad over λ-bit messages.
//!
//! Only ever used to wrap a single λ-bit session key under a fresh λ-bit key,
//! which is exactly the one-message setting where a pad is perfectly secure.

use rand_core::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::hashes::LAMBDA_BYTES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("expected a {expected}-byte block, got {actual} bytes")]
pub struct LengthError {
    pub expected: usize,
    pub actual: usize,
}

#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct SymmetricKey([u8; LAMBDA_BYTES]);

impl SymmetricKey {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k = [0u8; LAMBDA_BYTES];
        rng.fill_bytes(&mut k);
        SymmetricKey(k)
    }

    pub fn from_bytes(bytes: [u8; LAMBDA_BYTES]) -> Self {
        SymmetricKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; LAMBDA_BYTES] {
        &self.0
    }
}

impl core::fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

fn xor(k: &SymmetricKey, data: &[u8]) -> Result<[u8; LAMBDA_BYTES], LengthError> {
    if data.len() != LAMBDA_BYTES {
        return Err(LengthError {
            expected: LAMBDA_BYTES,
            actual: data.len(),
        });
    }
    let mut out = [0u8; LAMBDA_BYTES];
    for (o, (a, b)) in out.iter_mut().zip(k.0.iter().zip(data)) {
        *o = a ^ b;
    }
    Ok(out)
}

pub fn encrypt(k: &SymmetricKey, m: &[u8]) -> Result<[u8; LAMBDA_BYTES], LengthError> {
    xor(k, m)
}

pub fn decrypt(k: &SymmetricKey, c: &[u8]) -> Result<[u8; LAMBDA_BYTES], LengthError> {
    xor(k, c)
}
