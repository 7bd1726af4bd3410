//! Canonical byte formats.
//!
//! Every persistent object is wrapped in an envelope:
//!
//! ```text
//! "DBE1" | kind (1 byte) | version (1 byte, 0x01) | body
//! ```
//!
//! Integers are big-endian `u32`. Group elements use the compressed
//! encodings of [`crate::groups`] and are subgroup-checked on decode. Index
//! maps are a `u32` count followed by `(u32 index, element)` pairs in
//! strictly ascending index order, and decoding enforces the exact index set
//! each object requires.
//!
//! The signed message of an adaptive header ([`encode_cm`]) has no envelope:
//!
//! ```text
//! CH₀ (Ĉ₁ ∥ C₂) | CH₁ (Ĉ₁ ∥ C₂) | CT₀ (32) | CT₁ (32) | u32 n | ⌈n/8⌉ bitmap bytes
//! ```
//!
//! with bit `k` of `z` stored at bit `k % 8` of byte `k / 8` and all padding
//! bits zero.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ad::{CiphertextHeaderAD, CiphertextMessage, UserPublicKeyAD, UserSecretKeyAD};
use crate::error::Error;
use crate::groups::{G1Element, G2Element, GroupContext, GroupElement, GroupError, GtElement};
use crate::hashes::LAMBDA_BYTES;
use crate::ots::{OtsSignature, OtsVerificationKey};
use crate::ss::{self, CiphertextHeaderSS, PublicParams, UserPublicKeySS, UserSecretKeySS};

pub const MAGIC: [u8; 4] = *b"DBE1";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Kind {
    PublicParams = 0x01,
    UserPublicKeySS = 0x02,
    UserSecretKeySS = 0x03,
    HeaderSS = 0x04,
    UserPublicKeyAD = 0x05,
    UserSecretKeyAD = 0x06,
    HeaderAD = 0x07,
    OtsVerificationKey = 0x08,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::PublicParams,
        Kind::UserPublicKeySS,
        Kind::UserSecretKeySS,
        Kind::HeaderSS,
        Kind::UserPublicKeyAD,
        Kind::UserSecretKeyAD,
        Kind::HeaderAD,
        Kind::OtsVerificationKey,
    ];

    pub fn from_byte(b: u8) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| *k as u8 == b)
    }

    pub fn is_secret(self) -> bool {
        matches!(self, Kind::UserSecretKeySS | Kind::UserSecretKeyAD)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::PublicParams => "public parameters",
            Kind::UserPublicKeySS => "semi-static public key",
            Kind::UserSecretKeySS => "semi-static secret key",
            Kind::HeaderSS => "semi-static header",
            Kind::UserPublicKeyAD => "adaptive public key",
            Kind::UserSecretKeyAD => "adaptive secret key",
            Kind::HeaderAD => "adaptive header",
            Kind::OtsVerificationKey => "one-time verification key",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("input truncated")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unknown object kind 0x{0:02x}")]
    UnknownKind(u8),
    #[error("unsupported format version 0x{0:02x}")]
    UnsupportedVersion(u8),
    #[error("expected {expected:?}, found {found:?}")]
    WrongKind { expected: Kind, found: Kind },
    #[error("trailing bytes after object")]
    TrailingBytes,
    #[error("index set violation in {0}")]
    IndexSet(&'static str),
    #[error("malformed {0} element")]
    MalformedElement(&'static str),
    #[error("{0} element outside the prime-order subgroup")]
    NotInSubgroup(&'static str),
    #[error("invalid value: {0}")]
    InvalidValue(&'static str),
}

impl From<GroupError> for CodecError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::NotInSubgroup(g) => CodecError::NotInSubgroup(g),
            GroupError::Malformed(g) => CodecError::MalformedElement(g),
            GroupError::LengthMismatch { .. } => CodecError::InvalidValue("element count"),
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("indices and counts fit in u32");
        self.0.extend_from_slice(&v.to_be_bytes());
    }

    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }

    fn element<E: GroupElement>(&mut self, e: &E) {
        self.0.extend_from_slice(&e.to_bytes());
    }

    fn map<E: GroupElement>(&mut self, m: &BTreeMap<usize, E>) {
        self.u32(m.len());
        for (k, e) in m {
            self.u32(*k);
            self.element(e);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N)?);
        Ok(out)
    }

    fn element<E: GroupElement>(&mut self) -> Result<E, CodecError> {
        let b = self.take(E::ENCODED_LEN)?;
        Ok(E::from_bytes(b)?)
    }

    /// Reads an index map with strictly ascending indices.
    fn map<E: GroupElement>(&mut self, what: &'static str) -> Result<BTreeMap<usize, E>, CodecError> {
        let n = self.u32()?;
        if n.saturating_mul(4 + E::ENCODED_LEN) > self.buf.len() {
            return Err(CodecError::Truncated);
        }
        let mut out = BTreeMap::new();
        let mut prev = 0usize;
        for _ in 0..n {
            let k = self.u32()?;
            if k <= prev {
                return Err(CodecError::IndexSet(what));
            }
            prev = k;
            out.insert(k, self.element::<E>()?);
        }
        Ok(out)
    }

    fn finish(self) -> Result<(), CodecError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes)
        }
    }
}

/// Objects with a canonical enveloped encoding.
pub trait Canonical: Sized {
    const KIND: Kind;

    #[doc(hidden)]
    fn write_body(&self, w: &mut Vec<u8>);
    #[doc(hidden)]
    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError>;

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(Self::KIND as u8);
        out.push(VERSION);
        self.write_body(&mut out);
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self, CodecError> {
        let kind = peek_kind(bytes)?;
        if kind != Self::KIND {
            return Err(CodecError::WrongKind {
                expected: Self::KIND,
                found: kind,
            });
        }
        let body = &bytes[HEADER_LEN..];
        let (v, used) = Self::read_body(body)?;
        if used != body.len() {
            return Err(CodecError::TrailingBytes);
        }
        Ok(v)
    }
}

/// Validates the envelope header and returns the object kind.
pub fn peek_kind(bytes: &[u8]) -> Result<Kind, CodecError> {
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let kind = Kind::from_byte(bytes[4]).ok_or(CodecError::UnknownKind(bytes[4]))?;
    if bytes[5] != VERSION {
        return Err(CodecError::UnsupportedVersion(bytes[5]));
    }
    Ok(kind)
}

/// Runs `f` over a body reader, reporting how many bytes it consumed.
fn read_with<T>(
    body: &[u8],
    f: impl FnOnce(&mut Reader<'_>) -> Result<T, CodecError>,
) -> Result<(T, usize), CodecError> {
    let mut r = Reader { buf: body };
    let v = f(&mut r)?;
    Ok((v, body.len() - r.buf.len()))
}

fn write_with(out: &mut Vec<u8>, f: impl FnOnce(&mut Writer)) {
    let mut w = Writer(core::mem::take(out));
    f(&mut w);
    *out = w.0;
}

fn write_upk_ss(w: &mut Writer, k: &UserPublicKeySS) {
    w.u32(k.index());
    w.u32(k.capacity());
    w.element(k.v());
    w.element(k.v_hat());
    w.map(k.vk());
}

fn read_upk_ss(r: &mut Reader<'_>) -> Result<UserPublicKeySS, CodecError> {
    let index = r.u32()?;
    let capacity = r.u32()?;
    if capacity == 0 || capacity > ss::MAX_CAPACITY {
        return Err(CodecError::InvalidValue("capacity"));
    }
    let v = r.element()?;
    let v_hat = r.element()?;
    let vk = r.map("public key cross terms")?;
    UserPublicKeySS::from_parts(index, capacity, v, v_hat, vk).map_err(|e| match e {
        Error::IndexOutOfRange { .. } => CodecError::InvalidValue("user index"),
        _ => CodecError::IndexSet("public key cross terms"),
    })
}

fn write_usk_ss(w: &mut Writer, k: &UserSecretKeySS) {
    w.u32(k.index());
    w.element(k.element());
}

fn read_usk_ss(r: &mut Reader<'_>) -> Result<UserSecretKeySS, CodecError> {
    let index = r.u32()?;
    if index == 0 {
        return Err(CodecError::InvalidValue("user index"));
    }
    Ok(UserSecretKeySS::from_parts(index, r.element()?))
}

fn write_ch_ss(w: &mut Writer, h: &CiphertextHeaderSS) {
    w.element(&h.c1);
    w.element(&h.c2);
}

fn read_ch_ss(r: &mut Reader<'_>) -> Result<CiphertextHeaderSS, CodecError> {
    Ok(CiphertextHeaderSS {
        c1: r.element()?,
        c2: r.element()?,
    })
}

fn write_cm(w: &mut Writer, cm: &CiphertextMessage) {
    write_ch_ss(w, &cm.ch0);
    write_ch_ss(w, &cm.ch1);
    w.bytes(&cm.ct0);
    w.bytes(&cm.ct1);
    w.u32(cm.z.len());
    let mut bitmap = alloc::vec![0u8; cm.z.len().div_ceil(8)];
    for (k, &bit) in cm.z.iter().enumerate() {
        if bit {
            bitmap[k / 8] |= 1 << (k % 8);
        }
    }
    w.bytes(&bitmap);
}

fn read_cm(r: &mut Reader<'_>) -> Result<CiphertextMessage, CodecError> {
    let ch0 = read_ch_ss(r)?;
    let ch1 = read_ch_ss(r)?;
    let ct0 = r.array::<LAMBDA_BYTES>()?;
    let ct1 = r.array::<LAMBDA_BYTES>()?;
    let n = r.u32()?;
    if n == 0 || n > ss::MAX_CAPACITY {
        return Err(CodecError::InvalidValue("recipient bitmap length"));
    }
    let bitmap = r.take(n.div_ceil(8))?;
    let z: Vec<bool> = (0..n).map(|k| bitmap[k / 8] >> (k % 8) & 1 == 1).collect();
    if n % 8 != 0 && bitmap[n / 8] >> (n % 8) != 0 {
        return Err(CodecError::InvalidValue("nonzero bitmap padding"));
    }
    Ok(CiphertextMessage { ch0, ch1, ct0, ct1, z })
}

/// Canonical signing input for an adaptive header.
pub fn encode_cm(cm: &CiphertextMessage) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    write_cm(&mut w, cm);
    w.0
}

pub fn decode_cm(bytes: &[u8]) -> Result<CiphertextMessage, CodecError> {
    let mut r = Reader { buf: bytes };
    let cm = read_cm(&mut r)?;
    r.finish()?;
    Ok(cm)
}

fn read_vk(r: &mut Reader<'_>) -> Result<OtsVerificationKey, CodecError> {
    OtsVerificationKey::from_element(r.element()?)
        .ok_or(CodecError::InvalidValue("identity verification key"))
}

impl Canonical for PublicParams {
    const KIND: Kind = Kind::PublicParams;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| {
            w.u32(self.capacity());
            w.element(self.ctx().g());
            w.element(self.ctx().g_hat());
            w.map(&self.a_map());
            w.map(&self.a_hat_map());
            w.element(self.b());
            w.map(&self.b_k_map());
            w.element(self.omega());
        })
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, |r| {
            let capacity = r.u32()?;
            if capacity == 0 || capacity > ss::MAX_CAPACITY {
                return Err(CodecError::InvalidValue("capacity"));
            }
            let g: G1Element = r.element()?;
            let g_hat: G2Element = r.element()?;
            let a = r.map::<G1Element>("A")?;
            if !a.keys().copied().eq(ss::a_indices(capacity)) {
                return Err(CodecError::IndexSet("A"));
            }
            let a_hat = r.map::<G2Element>("Â")?;
            if !a_hat.keys().copied().eq(1..=capacity + 1) {
                return Err(CodecError::IndexSet("Â"));
            }
            let b = r.element()?;
            let b_k = r.map::<G1Element>("B_k")?;
            if !b_k.keys().copied().eq(2..=capacity + 1) {
                return Err(CodecError::IndexSet("B_k"));
            }
            let omega: GtElement = r.element()?;
            let ctx = GroupContext::new(g, g_hat).ok_or(CodecError::InvalidValue("identity generator"))?;
            PublicParams::from_parts(capacity, ctx, &a, &a_hat, b, &b_k, omega)
                .map_err(|_| CodecError::IndexSet("public parameters"))
        })
    }
}

impl Canonical for UserPublicKeySS {
    const KIND: Kind = Kind::UserPublicKeySS;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| write_upk_ss(w, self))
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, read_upk_ss)
    }
}

impl Canonical for UserSecretKeySS {
    const KIND: Kind = Kind::UserSecretKeySS;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| write_usk_ss(w, self))
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, read_usk_ss)
    }
}

impl Canonical for CiphertextHeaderSS {
    const KIND: Kind = Kind::HeaderSS;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| write_ch_ss(w, self))
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, read_ch_ss)
    }
}

impl Canonical for UserPublicKeyAD {
    const KIND: Kind = Kind::UserPublicKeyAD;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| {
            w.u32(self.index());
            write_upk_ss(w, self.even());
            write_upk_ss(w, self.odd());
        })
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, |r| {
            let index = r.u32()?;
            let even = read_upk_ss(r)?;
            let odd = read_upk_ss(r)?;
            UserPublicKeyAD::from_parts(index, even, odd).map_err(|_| CodecError::IndexSet("slot pair"))
        })
    }
}

impl Canonical for UserSecretKeyAD {
    const KIND: Kind = Kind::UserSecretKeyAD;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| {
            w.u32(self.index());
            w.u8(self.branch_bit());
            write_usk_ss(w, self.kept());
        })
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, |r| {
            let index = r.u32()?;
            let u = r.u8()?;
            if u > 1 {
                return Err(CodecError::InvalidValue("branch bit"));
            }
            let kept = read_usk_ss(r)?;
            UserSecretKeyAD::from_parts(index, u, kept).map_err(|_| CodecError::IndexSet("kept slot"))
        })
    }
}

impl Canonical for CiphertextHeaderAD {
    const KIND: Kind = Kind::HeaderAD;

    fn write_body(&self, out: &mut Vec<u8>) {
        write_with(out, |w| {
            write_cm(w, &self.cm);
            w.element(self.sigma.element());
            w.element(self.vk.element());
        })
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, |r| {
            let cm = read_cm(r)?;
            let sigma = OtsSignature::from_element(r.element()?);
            let vk = read_vk(r)?;
            Ok(CiphertextHeaderAD { cm, sigma, vk })
        })
    }
}

impl Canonical for OtsVerificationKey {
    const KIND: Kind = Kind::OtsVerificationKey;

    fn write_body(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.element().to_bytes());
    }

    fn read_body(body: &[u8]) -> Result<(Self, usize), CodecError> {
        read_with(body, read_vk)
    }
}
