//! A common interface over the two KEMs, used by the game harness and by
//! tooling that treats the schemes uniformly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use crate::ad::{self, CiphertextHeaderAD, UserPublicKeyAD, UserSecretKeyAD};
use crate::codec::{encode_cm, Canonical};
use crate::error::Error;
use crate::groups::GroupElement;
use crate::ots::{OtsSignature, OtsVerificationKey};
use crate::ss::{self, CiphertextHeaderSS, PublicParams, SessionKey, UserPublicKeySS, UserSecretKeySS};

pub trait BroadcastKem {
    type SecretKey: Clone;
    type PublicKey: Clone;
    type Header: Clone + PartialEq;

    const NAME: &'static str;
    /// Names of the header fields [`BroadcastKem::tamper_header`] can mutate.
    const TAMPER_FIELDS: &'static [&'static str];

    fn setup<R: RngCore + CryptoRng>(capacity: usize, rng: &mut R) -> Result<PublicParams, Error>;
    /// Number of users the parameters support.
    fn capacity(pp: &PublicParams) -> usize;
    fn genkey<R: RngCore + CryptoRng>(
        i: usize,
        pp: &PublicParams,
        rng: &mut R,
    ) -> Result<(Self::SecretKey, Self::PublicKey), Error>;
    fn is_valid<R: RngCore + CryptoRng>(
        j: usize,
        pk: &Self::PublicKey,
        pp: &PublicParams,
        rng: &mut R,
    ) -> bool;
    fn encaps<R: RngCore + CryptoRng>(
        set: &BTreeSet<usize>,
        pks: &BTreeMap<usize, Self::PublicKey>,
        pp: &PublicParams,
        au: &[u8],
        rng: &mut R,
    ) -> Result<(Self::Header, SessionKey), Error>;
    #[allow(clippy::too_many_arguments)]
    fn decaps<R: RngCore + CryptoRng>(
        set: &BTreeSet<usize>,
        header: &Self::Header,
        i: usize,
        sk: &Self::SecretKey,
        pks: &BTreeMap<usize, Self::PublicKey>,
        pp: &PublicParams,
        au: &[u8],
        rng: &mut R,
    ) -> Result<SessionKey, Error>;

    fn header_bytes(h: &Self::Header) -> Vec<u8>;
    fn public_key_bytes(pk: &Self::PublicKey) -> Vec<u8>;
    fn secret_key_bytes(sk: &Self::SecretKey) -> Vec<u8>;

    /// Deterministic single-field mutation of a header.
    fn tamper_header(h: &Self::Header, field: usize, pp: &PublicParams) -> Self::Header;
    /// A public key whose group relations no longer hold.
    fn tamper_public_key(pk: &Self::PublicKey, pp: &PublicParams) -> Self::PublicKey;
}

/// Scales the lowest-indexed cross term by `g`.
pub fn tamper_ss_public_key(pk: &UserPublicKeySS, pp: &PublicParams) -> UserPublicKeySS {
    let mut vk = pk.vk().clone();
    match vk.values_mut().next() {
        Some(first) => *first = first.mul(pp.ctx().g()),
        // L = 1 carries no cross terms; break V instead.
        None => {
            let v = pk.v().mul(pp.ctx().g());
            return UserPublicKeySS::from_parts(pk.index(), pk.capacity(), v, *pk.v_hat(), vk)
                .expect("index set unchanged");
        }
    }
    UserPublicKeySS::from_parts(pk.index(), pk.capacity(), *pk.v(), *pk.v_hat(), vk)
        .expect("index set unchanged")
}

pub struct SemiStatic;

impl BroadcastKem for SemiStatic {
    type SecretKey = UserSecretKeySS;
    type PublicKey = UserPublicKeySS;
    type Header = CiphertextHeaderSS;

    const NAME: &'static str = "SS";
    const TAMPER_FIELDS: &'static [&'static str] = &["c1", "c2"];

    fn setup<R: RngCore + CryptoRng>(capacity: usize, rng: &mut R) -> Result<PublicParams, Error> {
        ss::setup(capacity, rng)
    }

    fn capacity(pp: &PublicParams) -> usize {
        pp.capacity()
    }

    fn genkey<R: RngCore + CryptoRng>(
        i: usize,
        pp: &PublicParams,
        rng: &mut R,
    ) -> Result<(Self::SecretKey, Self::PublicKey), Error> {
        ss::genkey(i, pp, rng)
    }

    fn is_valid<R: RngCore + CryptoRng>(j: usize, pk: &Self::PublicKey, pp: &PublicParams, rng: &mut R) -> bool {
        ss::is_valid(j, pk, pp, rng)
    }

    fn encaps<R: RngCore + CryptoRng>(
        set: &BTreeSet<usize>,
        pks: &BTreeMap<usize, Self::PublicKey>,
        pp: &PublicParams,
        au: &[u8],
        rng: &mut R,
    ) -> Result<(Self::Header, SessionKey), Error> {
        ss::encaps(set, pks, pp, au, rng)
    }

    fn decaps<R: RngCore + CryptoRng>(
        set: &BTreeSet<usize>,
        header: &Self::Header,
        i: usize,
        sk: &Self::SecretKey,
        pks: &BTreeMap<usize, Self::PublicKey>,
        pp: &PublicParams,
        au: &[u8],
        rng: &mut R,
    ) -> Result<SessionKey, Error> {
        ss::decaps(set, header, i, sk, pks, pp, au, rng)
    }

    fn header_bytes(h: &Self::Header) -> Vec<u8> {
        h.encode()
    }

    fn public_key_bytes(pk: &Self::PublicKey) -> Vec<u8> {
        pk.encode()
    }

    fn secret_key_bytes(sk: &Self::SecretKey) -> Vec<u8> {
        sk.encode()
    }

    fn tamper_header(h: &Self::Header, field: usize, pp: &PublicParams) -> Self::Header {
        let mut out = *h;
        match field {
            0 => out.c1 = out.c1.mul(pp.ctx().g_hat()),
            1 => out.c2 = out.c2.mul(pp.ctx().g()),
            _ => panic!("no header field {field}"),
        }
        out
    }

    fn tamper_public_key(pk: &Self::PublicKey, pp: &PublicParams) -> Self::PublicKey {
        tamper_ss_public_key(pk, pp)
    }
}

pub struct Adaptive;

impl BroadcastKem for Adaptive {
    type SecretKey = UserSecretKeyAD;
    type PublicKey = UserPublicKeyAD;
    type Header = CiphertextHeaderAD;

    const NAME: &'static str = "AD";
    const TAMPER_FIELDS: &'static [&'static str] = &["ch0", "ch1", "ct0", "ct1", "z", "sigma", "vk"];

    fn setup<R: RngCore + CryptoRng>(capacity: usize, rng: &mut R) -> Result<PublicParams, Error> {
        ad::setup(capacity, rng)
    }

    fn capacity(pp: &PublicParams) -> usize {
        ad::capacity(pp)
    }

    fn genkey<R: RngCore + CryptoRng>(
        i: usize,
        pp: &PublicParams,
        rng: &mut R,
    ) -> Result<(Self::SecretKey, Self::PublicKey), Error> {
        ad::genkey(i, pp, rng)
    }

    fn is_valid<R: RngCore + CryptoRng>(j: usize, pk: &Self::PublicKey, pp: &PublicParams, rng: &mut R) -> bool {
        ad::is_valid(j, pk, pp, rng)
    }

    fn encaps<R: RngCore + CryptoRng>(
        set: &BTreeSet<usize>,
        pks: &BTreeMap<usize, Self::PublicKey>,
        pp: &PublicParams,
        au: &[u8],
        rng: &mut R,
    ) -> Result<(Self::Header, SessionKey), Error> {
        ad::encaps(set, pks, pp, au, rng)
    }

    fn decaps<R: RngCore + CryptoRng>(
        set: &BTreeSet<usize>,
        header: &Self::Header,
        i: usize,
        sk: &Self::SecretKey,
        pks: &BTreeMap<usize, Self::PublicKey>,
        pp: &PublicParams,
        au: &[u8],
        rng: &mut R,
    ) -> Result<SessionKey, Error> {
        ad::decaps(set, header, i, sk, pks, pp, au, rng)
    }

    fn header_bytes(h: &Self::Header) -> Vec<u8> {
        h.encode()
    }

    fn public_key_bytes(pk: &Self::PublicKey) -> Vec<u8> {
        pk.encode()
    }

    fn secret_key_bytes(sk: &Self::SecretKey) -> Vec<u8> {
        sk.encode()
    }

    fn tamper_header(h: &Self::Header, field: usize, pp: &PublicParams) -> Self::Header {
        let g = pp.ctx().g();
        let mut out = h.clone();
        match field {
            0 => out.cm.ch0.c2 = out.cm.ch0.c2.mul(g),
            1 => out.cm.ch1.c2 = out.cm.ch1.c2.mul(g),
            2 => out.cm.ct0[0] ^= 1,
            3 => out.cm.ct1[0] ^= 1,
            4 => out.cm.z[0] = !out.cm.z[0],
            5 => out.sigma = OtsSignature::from_element(out.sigma.element().mul(g)),
            6 => {
                out.vk = OtsVerificationKey::from_element(out.vk.element().mul(pp.ctx().g_hat()))
                    .expect("ĝ·X is not the identity for honest X")
            }
            _ => panic!("no header field {field}"),
        }
        debug_assert!(field == 5 || field == 6 || encode_cm(&out.cm) != encode_cm(&h.cm));
        out
    }

    fn tamper_public_key(pk: &Self::PublicKey, pp: &PublicParams) -> Self::PublicKey {
        UserPublicKeyAD::from_parts(pk.index(), tamper_ss_public_key(pk.even(), pp), pk.odd().clone())
            .expect("slot indices unchanged")
    }
}
