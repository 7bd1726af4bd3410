//! Adaptive CCA-secure distributed broadcast KEM.
//!
//! Built on [`crate::ss`] with capacity `2L`: user `i` owns slots `2i` and
//! `2i-1`, publishes both public keys and keeps a single secret, for slot
//! `2i - u_i`. Encapsulation picks a random bit `z_j` per recipient, encrypts
//! to slots `S₀ = {2j - z_j}` and `S₁ = {2j - (1 - z_j)}` under the label
//! `VK` of a fresh one-time signature key, wraps a random session key under
//! both sub-keys with a one-time pad and signs the canonical encoding of
//! `CM = (CH₀, CH₁, CT₀, CT₁, z)`.
//!
//! The `au` argument of [`encaps`] and [`decaps`] is accepted for interface
//! parity with the semi-static scheme and is **not used**: only `VK` is
//! passed down as the label.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::codec;
use crate::error::Error;
use crate::groups::GroupElement;
use crate::ots::{self, OtsSignature, OtsVerificationKey};
use crate::ske::{self, SymmetricKey};
use crate::ss::{
    self, CiphertextHeaderSS, PublicKeyLookup, PublicParams, SessionKey, UserPublicKeySS,
    UserSecretKeySS,
};
use crate::hashes::LAMBDA_BYTES;

#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct UserSecretKeyAD {
    index: usize,
    u: u8,
    kept: UserSecretKeySS,
}

impl core::fmt::Debug for UserSecretKeyAD {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "UserSecretKeyAD {{ index: {}, .. }}", self.index)
    }
}

impl UserSecretKeyAD {
    /// The kept slot must be `2i - u`.
    pub fn from_parts(index: usize, u: u8, kept: UserSecretKeySS) -> Result<Self, Error> {
        if u > 1 || index == 0 {
            return Err(Error::MalformedPublicKey(index));
        }
        let slot = 2 * index - u as usize;
        if kept.index() != slot {
            return Err(Error::KeyIndexMismatch {
                expected: slot,
                found: kept.index(),
            });
        }
        Ok(UserSecretKeyAD { index, u, kept })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The kept-branch bit `u_i`.
    pub fn branch_bit(&self) -> u8 {
        self.u
    }

    /// Semi-static slot whose secret is kept.
    pub fn slot(&self) -> usize {
        2 * self.index - self.u as usize
    }

    pub fn kept(&self) -> &UserSecretKeySS {
        &self.kept
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserPublicKeyAD {
    index: usize,
    even: UserPublicKeySS,
    odd: UserPublicKeySS,
}

impl UserPublicKeyAD {
    /// `even` must sit at slot `2i` and `odd` at `2i - 1`.
    pub fn from_parts(index: usize, even: UserPublicKeySS, odd: UserPublicKeySS) -> Result<Self, Error> {
        if index == 0 {
            return Err(Error::IndexOutOfRange { index, capacity: even.capacity() / 2 });
        }
        if even.index() != 2 * index {
            return Err(Error::KeyIndexMismatch { expected: 2 * index, found: even.index() });
        }
        if odd.index() != 2 * index - 1 {
            return Err(Error::KeyIndexMismatch { expected: 2 * index - 1, found: odd.index() });
        }
        if even.capacity() != odd.capacity() {
            return Err(Error::CapacityMismatch { expected: even.capacity(), found: odd.capacity() });
        }
        Ok(UserPublicKeyAD { index, even, odd })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Public key of slot `2i`.
    pub fn even(&self) -> &UserPublicKeySS {
        &self.even
    }

    /// Public key of slot `2i - 1`.
    pub fn odd(&self) -> &UserPublicKeySS {
        &self.odd
    }

    pub fn slot(&self, k: usize) -> Option<&UserPublicKeySS> {
        if k == 2 * self.index {
            Some(&self.even)
        } else if k + 1 == 2 * self.index {
            Some(&self.odd)
        } else {
            None
        }
    }
}

/// The signed part of an adaptive header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextMessage {
    pub ch0: CiphertextHeaderSS,
    pub ch1: CiphertextHeaderSS,
    pub ct0: [u8; LAMBDA_BYTES],
    pub ct1: [u8; LAMBDA_BYTES],
    /// One bit per recipient, in ascending recipient order.
    pub z: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextHeaderAD {
    pub cm: CiphertextMessage,
    pub sigma: OtsSignature,
    pub vk: OtsVerificationKey,
}

/// Resolves user indices to adaptive public keys.
pub trait AdPublicKeyLookup {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeyAD>;
}

impl AdPublicKeyLookup for BTreeMap<usize, UserPublicKeyAD> {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeyAD> {
        self.get(&j)
    }
}

impl AdPublicKeyLookup for [UserPublicKeyAD] {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeyAD> {
        self.iter().find(|k| k.index == j)
    }
}

impl AdPublicKeyLookup for Vec<UserPublicKeyAD> {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeyAD> {
        self.as_slice().public_key(j)
    }
}

/// Presents adaptive keys as semi-static keys indexed by slot.
struct SlotView<'a, K: ?Sized>(&'a K);

impl<K: AdPublicKeyLookup + ?Sized> PublicKeyLookup for SlotView<'_, K> {
    fn public_key(&self, k: usize) -> Option<&UserPublicKeySS> {
        self.0.public_key(k.div_ceil(2)).and_then(|upk| upk.slot(k))
    }
}

/// Number of users supported by adaptive parameters.
pub fn capacity(pp: &PublicParams) -> usize {
    pp.capacity() / 2
}

pub fn setup<R: RngCore + CryptoRng>(capacity: usize, rng: &mut R) -> Result<PublicParams, Error> {
    if capacity == 0 {
        return Err(Error::ZeroCapacity);
    }
    if capacity > ss::MAX_CAPACITY / 2 {
        return Err(Error::CapacityTooLarge(capacity));
    }
    ss::setup(2 * capacity, rng)
}

fn check_index(i: usize, pp: &PublicParams) -> Result<(), Error> {
    let l = capacity(pp);
    if i == 0 || i > l {
        return Err(Error::IndexOutOfRange { index: i, capacity: l });
    }
    Ok(())
}

pub fn genkey<R: RngCore + CryptoRng>(
    i: usize,
    pp: &PublicParams,
    rng: &mut R,
) -> Result<(UserSecretKeyAD, UserPublicKeyAD), Error> {
    let mut bit = [0u8; 1];
    rng.fill_bytes(&mut bit);
    genkey_inner(i, pp, bit[0] & 1, rng)
}

/// Key generation with a forced kept-branch bit; for exercising both branches
/// in tests.
#[cfg(feature = "hazmat")]
pub fn genkey_with_bit<R: RngCore + CryptoRng>(
    i: usize,
    pp: &PublicParams,
    u: u8,
    rng: &mut R,
) -> Result<(UserSecretKeyAD, UserPublicKeyAD), Error> {
    assert!(u <= 1, "branch bit must be 0 or 1");
    genkey_inner(i, pp, u, rng)
}

fn genkey_inner<R: RngCore + CryptoRng>(
    i: usize,
    pp: &PublicParams,
    u: u8,
    rng: &mut R,
) -> Result<(UserSecretKeyAD, UserPublicKeyAD), Error> {
    check_index(i, pp)?;
    let (sk_even, pk_even) = ss::genkey(2 * i, pp, rng)?;
    let (sk_odd, pk_odd) = ss::genkey(2 * i - 1, pp, rng)?;
    // The discarded secret is zeroized when dropped here.
    let kept = if u == 0 { sk_even } else { sk_odd };
    Ok((
        UserSecretKeyAD { index: i, u, kept },
        UserPublicKeyAD {
            index: i,
            even: pk_even,
            odd: pk_odd,
        },
    ))
}

/// Accepts iff both slot keys pass the batched semi-static check.
pub fn is_valid<R: RngCore + CryptoRng>(
    j: usize,
    upk: &UserPublicKeyAD,
    pp: &PublicParams,
    rng: &mut R,
) -> bool {
    j >= 1
        && upk.index == j
        && ss::is_valid(2 * j, &upk.even, pp, rng)
        && ss::is_valid(2 * j - 1, &upk.odd, pp, rng)
}

/// Slot sets `(S₀, S₁)` for recipient set `set` and bits `z`.
pub fn slot_sets(set: &BTreeSet<usize>, z: &[bool]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    set.iter()
        .zip(z)
        .map(|(&j, &zj)| {
            let zj = zj as usize;
            (2 * j - zj, 2 * j - (1 - zj))
        })
        .unzip()
}

fn check_set(set: &BTreeSet<usize>, pp: &PublicParams) -> Result<(), Error> {
    let l = capacity(pp);
    match (set.first(), set.last()) {
        (None, _) | (_, None) => Err(Error::EmptyRecipientSet),
        (Some(&0), _) => Err(Error::IndexOutOfRange { index: 0, capacity: l }),
        (_, Some(&hi)) if hi > l => Err(Error::IndexOutOfRange { index: hi, capacity: l }),
        _ => Ok(()),
    }
}

fn session_key_as_pad(k: &SessionKey) -> SymmetricKey {
    SymmetricKey::from_bytes(*k.as_bytes())
}

pub fn encaps<R: RngCore + CryptoRng, K: AdPublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    upks: &K,
    pp: &PublicParams,
    _au: &[u8],
    rng: &mut R,
) -> Result<(CiphertextHeaderAD, SessionKey), Error> {
    check_set(set, pp)?;
    for &j in set {
        let k = upks.public_key(j).ok_or(Error::MissingPublicKey(j))?;
        if k.index != j {
            return Err(Error::KeyIndexMismatch { expected: j, found: k.index });
        }
    }
    let view = SlotView(upks);
    loop {
        let (sk, vk) = ots::genkey(pp.ctx(), rng);
        let label = vk.element().to_bytes();

        let z: Vec<bool> = set
            .iter()
            .map(|_| {
                let mut b = [0u8; 1];
                rng.fill_bytes(&mut b);
                b[0] & 1 == 1
            })
            .collect();
        let (s0, s1) = slot_sets(set, &z);

        let (ch0, ck0) = ss::encaps(&s0, &view, pp, &label, rng)?;
        let (ch1, ck1) = ss::encaps(&s1, &view, pp, &label, rng)?;

        let ck = SessionKey::random(rng);
        let ct0 = ske::encrypt(&session_key_as_pad(&ck0), ck.as_bytes()).expect("λ-bit block");
        let ct1 = ske::encrypt(&session_key_as_pad(&ck1), ck.as_bytes()).expect("λ-bit block");

        let cm = CiphertextMessage { ch0, ch1, ct0, ct1, z };
        match ots::sign(pp.ctx(), &sk, &codec::encode_cm(&cm)) {
            Ok(sigma) => return Ok((CiphertextHeaderAD { cm, sigma, vk }, ck)),
            // x + H(CM) ≡ 0: start over with a fresh signing key.
            Err(ots::OtsError::Unsignable) => continue,
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn decaps<R: RngCore + CryptoRng, K: AdPublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    header: &CiphertextHeaderAD,
    i: usize,
    usk: &UserSecretKeyAD,
    upks: &K,
    pp: &PublicParams,
    _au: &[u8],
    rng: &mut R,
) -> Result<SessionKey, Error> {
    if !set.contains(&i) {
        return Err(Error::NotRecipient(i));
    }
    check_set(set, pp)?;
    if usk.index != i {
        return Err(Error::KeyIndexMismatch { expected: i, found: usk.index });
    }
    let cm = &header.cm;
    if cm.z.len() != set.len() {
        return Err(Error::MalformedHeader);
    }
    if !ots::verify(pp.ctx(), &header.vk, &header.sigma, &codec::encode_cm(cm)) {
        return Err(Error::InvalidSignature);
    }
    let pos = set.iter().position(|&j| j == i).expect("membership checked");
    let (s0, s1) = slot_sets(set, &cm.z);
    let (slots, ch, ct) = if cm.z[pos] as u8 == usk.u {
        (s0, &cm.ch0, &cm.ct0)
    } else {
        (s1, &cm.ch1, &cm.ct1)
    };
    let label = header.vk.element().to_bytes();
    let ck_ss = ss::decaps(&slots, ch, usk.slot(), &usk.kept, &SlotView(upks), pp, &label, rng)?;
    let ck = ske::decrypt(&session_key_as_pad(&ck_ss), ct).expect("λ-bit block");
    Ok(SessionKey::from_bytes(ck))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Scalar;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    type Users = (BTreeMap<usize, UserSecretKeyAD>, BTreeMap<usize, UserPublicKeyAD>);

    fn users(pp: &PublicParams, rng: &mut ChaCha20Rng) -> Users {
        let mut sks = BTreeMap::new();
        let mut pks = BTreeMap::new();
        for i in 1..=capacity(pp) {
            let (sk, pk) = genkey(i, pp, rng).unwrap();
            sks.insert(i, sk);
            pks.insert(i, pk);
        }
        (sks, pks)
    }

    #[test]
    fn setup_doubles_capacity() {
        let mut rng = rng(1);
        let pp = setup(2, &mut rng).unwrap();
        assert_eq!(pp.capacity(), 4);
        assert_eq!(pp.a_len(), 9);
        assert!(pp.a(6).is_none());
        pp.self_check().unwrap();
        assert_eq!(setup(0, &mut rng), Err(Error::ZeroCapacity));
    }

    #[test]
    fn genkey_slots() {
        let mut rng = rng(2);
        let pp = setup(2, &mut rng).unwrap();
        let (sk, pk) = genkey(1, &pp, &mut rng).unwrap();
        assert_eq!(pk.even().index(), 2);
        assert_eq!(pk.odd().index(), 1);
        assert!(sk.slot() == 2 || sk.slot() == 1);
        assert_eq!(sk.slot(), 2 - sk.branch_bit() as usize);
        assert_eq!(sk.kept().index(), sk.slot());
        assert!(is_valid(1, &pk, &pp, &mut rng));
        assert!(genkey(3, &pp, &mut rng).is_err());
    }

    #[test]
    fn tampered_and_swapped_keys_rejected() {
        let mut rng = rng(3);
        let pp = setup(2, &mut rng).unwrap();
        let (_, pk) = genkey(2, &pp, &mut rng).unwrap();
        let even = pk.even();
        let mut vk = even.vk().clone();
        let first = *vk.keys().next().unwrap();
        let e = vk.get_mut(&first).unwrap();
        *e = e.mul(pp.ctx().g());
        let bad_even = UserPublicKeySS::from_parts(4, 4, *even.v(), *even.v_hat(), vk).unwrap();
        let bad = UserPublicKeyAD::from_parts(2, bad_even, pk.odd().clone()).unwrap();
        assert!(!is_valid(2, &bad, &pp, &mut rng));

        // Even key presented as odd: structural rejection.
        assert!(UserPublicKeyAD::from_parts(2, pk.odd().clone(), pk.even().clone()).is_err());
        let swapped = UserPublicKeyAD {
            index: 2,
            even: pk.odd().clone(),
            odd: pk.even().clone(),
        };
        assert!(!is_valid(2, &swapped, &pp, &mut rng));
    }

    #[test]
    fn slot_sets_partition() {
        let s = set(&[1, 3, 4]);
        let z = [true, false, true];
        let (s0, s1) = slot_sets(&s, &z);
        assert_eq!(s0, set(&[1, 6, 7]));
        assert_eq!(s1, set(&[2, 5, 8]));
        assert!(s0.is_disjoint(&s1));
        let union: BTreeSet<_> = s0.union(&s1).copied().collect();
        assert_eq!(union, set(&[1, 2, 5, 6, 7, 8]));
        for k in union {
            assert!(s.contains(&k.div_ceil(2)));
        }
    }

    #[test]
    fn round_trip_both_branches() {
        let mut rng = rng(4);
        let pp = setup(2, &mut rng).unwrap();
        for u in 0..=1u8 {
            let mut sks = BTreeMap::new();
            let mut pks = BTreeMap::new();
            for i in 1..=2 {
                let (sk, pk) = genkey_with_bit(i, &pp, u, &mut rng).unwrap();
                sks.insert(i, sk);
                pks.insert(i, pk);
            }
            let s = set(&[1, 2]);
            for _ in 0..4 {
                let (ch, ck) = encaps(&s, &pks, &pp, b"", &mut rng).unwrap();
                for i in [1, 2] {
                    assert_eq!(decaps(&s, &ch, i, &sks[&i], &pks, &pp, b"", &mut rng).unwrap(), ck);
                }
            }
        }
    }

    #[test]
    fn sub_ciphertexts_differ() {
        let mut rng = rng(5);
        let pp = setup(2, &mut rng).unwrap();
        let (_, pks) = users(&pp, &mut rng);
        let (ch, _) = encaps(&set(&[1, 2]), &pks, &pp, b"", &mut rng).unwrap();
        assert_ne!(ch.cm.ct0, ch.cm.ct1);
        assert_eq!(ch.cm.z.len(), 2);
    }

    #[test]
    fn header_rejections() {
        let mut rng = rng(6);
        let pp = setup(3, &mut rng).unwrap();
        let (sks, pks) = users(&pp, &mut rng);
        let s = set(&[1, 3]);
        let (ch, _) = encaps(&s, &pks, &pp, b"", &mut rng).unwrap();
        let dec = |h: &CiphertextHeaderAD, rng: &mut ChaCha20Rng| {
            decaps(&s, h, 1, &sks[&1], &pks, &pp, b"", rng)
        };

        assert_eq!(
            decaps(&s, &ch, 2, &sks[&2], &pks, &pp, b"", &mut rng),
            Err(Error::NotRecipient(2))
        );

        let mut bad = ch.clone();
        bad.cm.ct0[0] ^= 1;
        assert_eq!(dec(&bad, &mut rng), Err(Error::InvalidSignature));

        let mut bad = ch.clone();
        bad.cm.z.push(false);
        assert_eq!(dec(&bad, &mut rng), Err(Error::MalformedHeader));

        // Sub-header from another encapsulation, re-signed by an attacker
        // under their own key: the semi-static label check fails.
        let (other, _) = encaps(&s, &pks, &pp, b"", &mut rng).unwrap();
        let mut spliced = ch.clone();
        spliced.cm.ch0 = other.cm.ch0;
        spliced.cm.ch1 = other.cm.ch1;
        let (sk2, vk2) = ots::genkey(pp.ctx(), &mut rng);
        spliced.vk = vk2;
        spliced.sigma = ots::sign(pp.ctx(), &sk2, &codec::encode_cm(&spliced.cm)).unwrap();
        assert_eq!(dec(&spliced, &mut rng), Err(Error::InvalidHeader));
    }

    #[test]
    fn au_is_ignored() {
        let mut rng = rng(7);
        let pp = setup(2, &mut rng).unwrap();
        let (sks, pks) = users(&pp, &mut rng);
        let s = set(&[2]);
        let (ch, ck) = encaps(&s, &pks, &pp, b"one", &mut rng).unwrap();
        assert_eq!(decaps(&s, &ch, 2, &sks[&2], &pks, &pp, b"two", &mut rng).unwrap(), ck);
    }

    #[test]
    fn label_binding() {
        // A sub-header produced under VK does not decapsulate under VK'.
        let mut rng = rng(8);
        let pp = setup(2, &mut rng).unwrap();
        let (sks, pks) = users(&pp, &mut rng);
        let s = set(&[1]);
        let (ch, _) = encaps(&s, &pks, &pp, b"", &mut rng).unwrap();
        let sk = &sks[&1];
        let (slots0, slots1) = slot_sets(&s, &ch.cm.z);
        let (slots, sub) = if ch.cm.z[0] as u8 == sk.branch_bit() {
            (slots0, ch.cm.ch0)
        } else {
            (slots1, ch.cm.ch1)
        };
        let view = SlotView(&pks);
        let label = ch.vk.element().to_bytes();
        assert!(ss::decaps(&slots, &sub, sk.slot(), sk.kept(), &view, &pp, &label, &mut rng).is_ok());
        let other = pp.ctx().g_hat().exp(&Scalar::random(&mut rng)).to_bytes();
        assert_eq!(
            ss::decaps(&slots, &sub, sk.slot(), sk.kept(), &view, &pp, &other, &mut rng),
            Err(Error::InvalidHeader)
        );
    }
}
