//! The two scheme hashes, both built on SHAKE256 with distinct domain tags.
//!
//! `h1` maps a Ĝ element plus an auxiliary label into Z_p, `h2` maps a GT
//! element to a λ-bit session key. Inputs are length-prefixed so that no two
//! distinct `(element, aux)` pairs share a preimage.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::groups::{G2Element, GroupElement, GtElement, Scalar};

/// Security parameter λ in bits.
pub const LAMBDA_BITS: usize = 256;
/// λ in bytes.
pub const LAMBDA_BYTES: usize = LAMBDA_BITS / 8;

/// Bytes squeezed before reducing into Z_p: 255-bit order + 257 bits of slack.
const WIDE_BYTES: usize = 64;

/// Hash parameters shared by every party. Fixed; carried in the public
/// parameters for documentation and so callers never build their own tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashSuite {
    pub lambda_bits: usize,
    pub tag_h1: &'static [u8],
    pub tag_h2: &'static [u8],
    pub tag_ots: &'static [u8],
}

pub const SUITE: HashSuite = HashSuite {
    lambda_bits: LAMBDA_BITS,
    tag_h1: b"DBE-v1/H1:G2xAU->Zp",
    tag_h2: b"DBE-v1/H2:GT->key",
    tag_ots: b"DBE-v1/OTS:msg->Zp",
};

impl Default for HashSuite {
    fn default() -> Self {
        SUITE
    }
}

fn absorb_prefixed(xof: &mut Shake256, data: &[u8]) {
    xof.update(&(data.len() as u64).to_be_bytes());
    xof.update(data);
}

/// The exact preimage bytes fed to the XOF by `h1`, excluding the tag.
pub fn h1_preimage(element: &G2Element, aux: &[u8]) -> alloc::vec::Vec<u8> {
    let enc = element.to_bytes();
    let mut out = alloc::vec::Vec::with_capacity(16 + enc.len() + aux.len());
    out.extend_from_slice(&(enc.len() as u64).to_be_bytes());
    out.extend_from_slice(&enc);
    out.extend_from_slice(&(aux.len() as u64).to_be_bytes());
    out.extend_from_slice(aux);
    out
}

impl HashSuite {
    /// `H₁(element ∥ aux) ∈ Z_p`.
    pub fn h1(&self, element: &G2Element, aux: &[u8]) -> Scalar {
        let mut xof = Shake256::default();
        absorb_prefixed(&mut xof, self.tag_h1);
        xof.update(&h1_preimage(element, aux));
        squeeze_scalar(xof)
    }

    /// `H₂(k) ∈ {0,1}^λ`.
    pub fn h2(&self, k: &GtElement) -> [u8; LAMBDA_BYTES] {
        let mut xof = Shake256::default();
        absorb_prefixed(&mut xof, self.tag_h2);
        xof.update(&k.to_bytes());
        let mut out = [0u8; LAMBDA_BYTES];
        xof.finalize_xof().read(&mut out);
        out
    }

    /// Message hash used by the one-time signature.
    pub fn h_ots(&self, msg: &[u8]) -> Scalar {
        let mut xof = Shake256::default();
        absorb_prefixed(&mut xof, self.tag_ots);
        absorb_prefixed(&mut xof, msg);
        squeeze_scalar(xof)
    }
}

fn squeeze_scalar(xof: Shake256) -> Scalar {
    let mut wide = [0u8; WIDE_BYTES];
    xof.finalize_xof().read(&mut wide);
    Scalar::from_be_bytes_mod_order(&wide)
}
