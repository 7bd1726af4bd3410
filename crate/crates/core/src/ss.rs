//! Semi-static CCA-secure distributed broadcast KEM.
//!
//! Public parameters hold the power sequence `A_k = g^{α^k}` for
//! `k ∈ [1, 2L+2] \ {L+2}`, `Â_k = ĝ^{α^k}` for `k ∈ [1, L+1]`, `B = g^β`,
//! `B_k = A_k^β` for `k ∈ [2, L+1]`, and `Ω = e(A_{L+2}, ĝ)`. Users pick their
//! own `γ_i` and publish `V = g^γ`, `V̂ = ĝ^γ` and the cross terms
//! `V_k = A_k^γ`; the secret key is the single element `K = A_{L+2-i}^γ`.
//!
//! A header is `(Ĉ₁, C₂) = (ĝ^t, X^t)` with
//! `X = A_{L+1}^ω · B · ∏_{j∈S} A_j V_j` and `ω = H₁(Ĉ₁ ∥ au)`; the session
//! key is `H₂(Ω^t)`. Decapsulation first checks `e(C₂, ĝ) = e(X, Ĉ₁)`, which
//! binds the header to `au` through ω.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::error::Error;
use crate::groups::{
    multi_pairing, pairing, pairings_equal, G1Element, G2Element, GroupContext, GroupElement,
    GtElement, Scalar,
};
use crate::hashes::{HashSuite, LAMBDA_BYTES, SUITE};

/// Bit length of the random exponents in the batched key check.
pub const BATCH_EXPONENT_BITS: u32 = 80;

/// Largest supported capacity; keeps every index inside a `u32`.
pub const MAX_CAPACITY: usize = 1 << 16;

/// λ-bit session key.
#[derive(Clone, PartialEq, Eq, Hash, Zeroize, ZeroizeOnDrop)]
pub struct SessionKey([u8; LAMBDA_BYTES]);

impl SessionKey {
    pub fn from_bytes(bytes: [u8; LAMBDA_BYTES]) -> Self {
        SessionKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; LAMBDA_BYTES] {
        &self.0
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k = [0u8; LAMBDA_BYTES];
        rng.fill_bytes(&mut k);
        SessionKey(k)
    }
}

impl core::fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "SessionKey(")?;
        for b in &self.0[..4] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams {
    capacity: usize,
    ctx: GroupContext,
    /// `A_1 ..= A_{L+1}`
    a_low: Vec<G1Element>,
    /// `A_{L+3} ..= A_{2L+2}`
    a_high: Vec<G1Element>,
    /// `Â_1 ..= Â_{L+1}`
    a_hat: Vec<G2Element>,
    b: G1Element,
    /// `B_2 ..= B_{L+1}`
    b_k: Vec<G1Element>,
    omega: GtElement,
    suite: HashSuite,
}

/// Index set of `{A_k}`: `[1, 2L+2] \ {L+2}`.
pub fn a_indices(capacity: usize) -> impl Iterator<Item = usize> {
    (1..=2 * capacity + 2).filter(move |&k| k != capacity + 2)
}

/// Cross-term indices carried by user `i`'s public key: `[2, L+1] \ {L+2-i}`.
pub fn vk_indices(i: usize, capacity: usize) -> impl Iterator<Item = usize> {
    (2..=capacity + 1).filter(move |&k| k + i != capacity + 2)
}

fn check_capacity(capacity: usize) -> Result<(), Error> {
    if capacity == 0 {
        return Err(Error::ZeroCapacity);
    }
    if capacity > MAX_CAPACITY {
        return Err(Error::CapacityTooLarge(capacity));
    }
    Ok(())
}

fn check_index(index: usize, capacity: usize) -> Result<(), Error> {
    if index == 0 || index > capacity {
        return Err(Error::IndexOutOfRange { index, capacity });
    }
    Ok(())
}

impl PublicParams {
    /// Reassembles parameters from their parts, enforcing the index sets.
    /// Group relations are not checked here; see [`PublicParams::self_check`].
    pub fn from_parts(
        capacity: usize,
        ctx: GroupContext,
        a: &BTreeMap<usize, G1Element>,
        a_hat: &BTreeMap<usize, G2Element>,
        b: G1Element,
        b_k: &BTreeMap<usize, G1Element>,
        omega: GtElement,
    ) -> Result<Self, Error> {
        check_capacity(capacity)?;
        let l = capacity;
        if !a.keys().copied().eq(a_indices(l))
            || !a_hat.keys().copied().eq(1..=l + 1)
            || !b_k.keys().copied().eq(2..=l + 1)
        {
            return Err(Error::MalformedPublicKey(0));
        }
        Ok(PublicParams {
            capacity,
            ctx,
            a_low: (1..=l + 1).map(|k| a[&k]).collect(),
            a_high: (l + 3..=2 * l + 2).map(|k| a[&k]).collect(),
            a_hat: a_hat.values().copied().collect(),
            b,
            b_k: b_k.values().copied().collect(),
            omega,
            suite: SUITE,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn suite(&self) -> &HashSuite {
        &self.suite
    }

    /// `A_k`; `None` for `k = L+2` and out-of-range indices.
    pub fn a(&self, k: usize) -> Option<&G1Element> {
        let l = self.capacity;
        match k {
            0 => None,
            k if k <= l + 1 => self.a_low.get(k - 1),
            k if k == l + 2 => None,
            k => self.a_high.get(k - l - 3),
        }
    }

    pub fn a_hat(&self, k: usize) -> Option<&G2Element> {
        k.checked_sub(1).and_then(|n| self.a_hat.get(n))
    }

    pub fn b(&self) -> &G1Element {
        &self.b
    }

    pub fn b_k(&self, k: usize) -> Option<&G1Element> {
        k.checked_sub(2).and_then(|n| self.b_k.get(n))
    }

    pub fn omega(&self) -> &GtElement {
        &self.omega
    }

    /// Number of `A_k` entries (always `2L + 1`).
    pub fn a_len(&self) -> usize {
        self.a_low.len() + self.a_high.len()
    }

    pub fn a_map(&self) -> BTreeMap<usize, G1Element> {
        a_indices(self.capacity)
            .zip(self.a_low.iter().chain(&self.a_high))
            .map(|(k, e)| (k, *e))
            .collect()
    }

    pub fn a_hat_map(&self) -> BTreeMap<usize, G2Element> {
        (1..).zip(self.a_hat.iter().copied()).collect()
    }

    pub fn b_k_map(&self) -> BTreeMap<usize, G1Element> {
        (2..).zip(self.b_k.iter().copied()).collect()
    }

    /// Verifies the algebraic structure of the parameters with pairings:
    /// `Ω = e(A_{L+1}, Â_1)`, the power chain `e(A_k, ĝ) = e(A_{k-1}, Â_1)`
    /// (bridged across the missing `A_{L+2}` by `e(A_{L+3}, ĝ) = e(A_{L+1}, Â_2)`),
    /// `e(g, Â_k) = e(A_k, ĝ)`, and `e(B_k, ĝ) = e(B, Â_k)`.
    pub fn self_check(&self) -> Result<(), ParamsCheckError> {
        let l = self.capacity;
        let g = self.ctx.g();
        let gh = self.ctx.g_hat();
        let a = |k| self.a(k).expect("index in range");
        let ah = |k| self.a_hat(k).expect("index in range");
        if pairing(a(l + 1), ah(1)) != self.omega {
            return Err(ParamsCheckError::Omega);
        }
        for k in a_indices(l).skip(1) {
            let ok = if k == l + 3 {
                pairings_equal(a(k), gh, a(l + 1), ah(2))
            } else {
                pairings_equal(a(k), gh, a(k - 1), ah(1))
            };
            if !ok {
                return Err(ParamsCheckError::Chain(k));
            }
        }
        for k in 1..=l + 1 {
            if !pairings_equal(g, ah(k), a(k), gh) {
                return Err(ParamsCheckError::HatChain(k));
            }
        }
        for k in 2..=l + 1 {
            let bk = self.b_k(k).expect("index in range");
            if !pairings_equal(bk, gh, &self.b, ah(k)) {
                return Err(ParamsCheckError::Blinded(k));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ParamsCheckError {
    #[error("Ω does not equal e(A_(L+1), Â_1)")]
    Omega,
    #[error("power chain broken at A_{0}")]
    Chain(usize),
    #[error("Â_{0} inconsistent with A_{0}")]
    HatChain(usize),
    #[error("B_{0} inconsistent with B and Â_{0}")]
    Blinded(usize),
}

#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct UserSecretKeySS {
    index: usize,
    k: G1Element,
}

impl core::fmt::Debug for UserSecretKeySS {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "UserSecretKeySS {{ index: {}, .. }}", self.index)
    }
}

impl UserSecretKeySS {
    pub fn from_parts(index: usize, k: G1Element) -> Self {
        UserSecretKeySS { index, k }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn element(&self) -> &G1Element {
        &self.k
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserPublicKeySS {
    index: usize,
    capacity: usize,
    v: G1Element,
    v_hat: G2Element,
    vk: BTreeMap<usize, G1Element>,
}

impl UserPublicKeySS {
    /// Builds a key from parts, enforcing that the cross terms cover exactly
    /// `[2, L+1] \ {L+2-i}`. Group relations are left to [`is_valid`].
    pub fn from_parts(
        index: usize,
        capacity: usize,
        v: G1Element,
        v_hat: G2Element,
        vk: BTreeMap<usize, G1Element>,
    ) -> Result<Self, Error> {
        check_capacity(capacity)?;
        check_index(index, capacity)?;
        if !vk.keys().copied().eq(vk_indices(index, capacity)) {
            return Err(Error::MalformedPublicKey(index));
        }
        Ok(UserPublicKeySS {
            index,
            capacity,
            v,
            v_hat,
            vk,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn v(&self) -> &G1Element {
        &self.v
    }

    pub fn v_hat(&self) -> &G2Element {
        &self.v_hat
    }

    pub fn vk(&self) -> &BTreeMap<usize, G1Element> {
        &self.vk
    }

    /// Number of G1 elements (`V` plus the `L-1` cross terms).
    pub fn g1_count(&self) -> usize {
        1 + self.vk.len()
    }

    /// Number of G2 elements.
    pub fn g2_count(&self) -> usize {
        1
    }
}

/// Semi-static header: one Ĝ element and one G element, independent of |S|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CiphertextHeaderSS {
    pub c1: G2Element,
    pub c2: G1Element,
}

impl CiphertextHeaderSS {
    pub const ELEMENT_COUNT: usize = 2;
}

/// Resolves recipient indices to public keys.
pub trait PublicKeyLookup {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeySS>;
}

impl PublicKeyLookup for BTreeMap<usize, UserPublicKeySS> {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeySS> {
        self.get(&j)
    }
}

impl PublicKeyLookup for [UserPublicKeySS] {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeySS> {
        self.iter().find(|k| k.index == j)
    }
}

impl PublicKeyLookup for Vec<UserPublicKeySS> {
    fn public_key(&self, j: usize) -> Option<&UserPublicKeySS> {
        self.as_slice().public_key(j)
    }
}

pub fn setup<R: RngCore + CryptoRng>(capacity: usize, rng: &mut R) -> Result<PublicParams, Error> {
    check_capacity(capacity)?;
    let l = capacity;
    let ctx = GroupContext::random(rng);
    let g = *ctx.g();
    let g_hat = *ctx.g_hat();

    let mut alpha = Scalar::random_nonzero(rng);
    let mut beta = Scalar::random_nonzero(rng);

    let mut power = Scalar::one();
    let mut powers = Vec::with_capacity(2 * l + 2);
    for _ in 0..2 * l + 2 {
        power = power.mul(&alpha);
        powers.push(power);
    }

    let mut a_low = Vec::with_capacity(l + 1);
    let mut a_high = Vec::with_capacity(l);
    let mut a_hat = Vec::with_capacity(l + 1);
    let mut a_missing = G1Element::identity();
    for (n, p) in powers.iter().enumerate() {
        let k = n + 1;
        if k <= l + 1 {
            a_low.push(g.exp(p));
            a_hat.push(g_hat.exp(p));
        } else if k == l + 2 {
            a_missing = g.exp(p);
        } else {
            a_high.push(g.exp(p));
        }
    }
    let b = g.exp(&beta);
    let b_k = a_low[1..].iter().map(|a| a.exp(&beta)).collect();
    let omega = pairing(&a_missing, &g_hat);

    alpha.zeroize();
    beta.zeroize();
    power.zeroize();
    powers.zeroize();
    a_missing.zeroize();

    Ok(PublicParams {
        capacity,
        ctx,
        a_low,
        a_high,
        a_hat,
        b,
        b_k,
        omega,
        suite: SUITE,
    })
}

pub fn genkey<R: RngCore + CryptoRng>(
    i: usize,
    pp: &PublicParams,
    rng: &mut R,
) -> Result<(UserSecretKeySS, UserPublicKeySS), Error> {
    let l = pp.capacity;
    check_index(i, l)?;
    let mut gamma = Scalar::random_nonzero(rng);
    let k = pp.a(l + 2 - i).expect("L+2-i lies in [2, L+1]").exp(&gamma);
    let v = pp.ctx.g().exp(&gamma);
    let v_hat = pp.ctx.g_hat().exp(&gamma);
    let vk = vk_indices(i, l)
        .map(|k| (k, pp.a(k).expect("k in [2, L+1]").exp(&gamma)))
        .collect();
    gamma.zeroize();
    Ok((
        UserSecretKeySS { index: i, k },
        UserPublicKeySS {
            index: i,
            capacity: l,
            v,
            v_hat,
            vk,
        },
    ))
}

/// Index set and subgroup membership of every element.
fn structurally_valid(j: usize, upk: &UserPublicKeySS, pp: &PublicParams) -> bool {
    let l = pp.capacity;
    j >= 1
        && j <= l
        && upk.index == j
        && upk.capacity == l
        && upk.vk.keys().copied().eq(vk_indices(j, l))
        && upk.v.is_member()
        && upk.v_hat.is_member()
        && upk.vk.values().all(|e| e.is_member())
}

/// Batched public-key check with random `ℓ_b`-bit exponents:
/// `e(V^{δ₀} ∏ V_k^{δ_k}, ĝ) = e(g^{δ₀} ∏ A_k^{δ_k}, V̂)`. Two pairings.
pub fn is_valid<R: RngCore + CryptoRng>(
    j: usize,
    upk: &UserPublicKeySS,
    pp: &PublicParams,
    rng: &mut R,
) -> bool {
    if !structurally_valid(j, upk, pp) {
        return false;
    }
    let n = upk.vk.len() + 1;
    let deltas: Vec<Scalar> = (0..n)
        .map(|_| Scalar::random_bits(rng, BATCH_EXPONENT_BITS))
        .collect();
    let mut user_side = Vec::with_capacity(n);
    let mut param_side = Vec::with_capacity(n);
    user_side.push(upk.v);
    param_side.push(*pp.ctx.g());
    for (k, vk) in &upk.vk {
        user_side.push(*vk);
        param_side.push(*pp.a(*k).expect("structural check passed"));
    }
    let lhs = G1Element::multi_exp(&user_side, &deltas).expect("equal lengths");
    let rhs = G1Element::multi_exp(&param_side, &deltas).expect("equal lengths");
    pairings_equal(&lhs, pp.ctx.g_hat(), &rhs, &upk.v_hat)
}

/// Element-by-element public-key check: `e(V, ĝ) = e(g, V̂)` and
/// `e(V_k, ĝ) = e(A_k, V̂)` for every k. Deterministic; `2L` pairings.
pub fn is_valid_naive(j: usize, upk: &UserPublicKeySS, pp: &PublicParams) -> bool {
    if !structurally_valid(j, upk, pp) {
        return false;
    }
    let gh = pp.ctx.g_hat();
    if pairing(&upk.v, gh) != pairing(pp.ctx.g(), &upk.v_hat) {
        return false;
    }
    upk.vk.iter().all(|(k, vk)| {
        pairing(vk, gh) == pairing(pp.a(*k).expect("structural check passed"), &upk.v_hat)
    })
}

fn check_set(set: &BTreeSet<usize>, capacity: usize) -> Result<(), Error> {
    match (set.first(), set.last()) {
        (None, _) | (_, None) => Err(Error::EmptyRecipientSet),
        (Some(&lo), _) if lo == 0 => Err(Error::IndexOutOfRange { index: lo, capacity }),
        (_, Some(&hi)) if hi > capacity => Err(Error::IndexOutOfRange { index: hi, capacity }),
        _ => Ok(()),
    }
}

fn collect_keys<'a, K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    upks: &'a K,
    capacity: usize,
) -> Result<Vec<&'a UserPublicKeySS>, Error> {
    set.iter()
        .map(|&j| {
            let k = upks.public_key(j).ok_or(Error::MissingPublicKey(j))?;
            if k.index != j {
                return Err(Error::KeyIndexMismatch {
                    expected: j,
                    found: k.index,
                });
            }
            if k.capacity != capacity {
                return Err(Error::CapacityMismatch {
                    expected: capacity,
                    found: k.capacity,
                });
            }
            Ok(k)
        })
        .collect()
}

/// `X = A_{L+1}^ω · B · ∏_{j∈S} A_j V_j`.
fn header_base(pp: &PublicParams, keys: &[&UserPublicKeySS], omega: &Scalar) -> G1Element {
    let l = pp.capacity;
    let mut acc = pp.a(l + 1).expect("A_(L+1) present").exp(omega).mul(&pp.b);
    for key in keys {
        let a_j = pp.a(key.index).expect("recipient index in [1, L]");
        acc = acc.mul(a_j).mul(&key.v);
    }
    acc
}

pub fn encaps<R: RngCore + CryptoRng, K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    upks: &K,
    pp: &PublicParams,
    au: &[u8],
    rng: &mut R,
) -> Result<(CiphertextHeaderSS, SessionKey), Error> {
    let mut t = Scalar::random_nonzero(rng);
    let out = encaps_with_exponent_inner(set, upks, pp, au, &t);
    t.zeroize();
    out
}

fn encaps_with_exponent_inner<K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    upks: &K,
    pp: &PublicParams,
    au: &[u8],
    t: &Scalar,
) -> Result<(CiphertextHeaderSS, SessionKey), Error> {
    check_set(set, pp.capacity)?;
    let keys = collect_keys(set, upks, pp.capacity)?;
    let c1 = pp.ctx.g_hat().exp(t);
    let omega = pp.suite.h1(&c1, au);
    let c2 = header_base(pp, &keys, &omega).exp(t);
    let ck = SessionKey(pp.suite.h2(&pp.omega.exp(t)));
    Ok((CiphertextHeaderSS { c1, c2 }, ck))
}

/// Encapsulation with caller-chosen `t`. Exposes the header randomness;
/// only for algebraic tests.
#[cfg(feature = "hazmat")]
pub fn encaps_with_exponent<K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    upks: &K,
    pp: &PublicParams,
    au: &[u8],
    t: &Scalar,
) -> Result<(CiphertextHeaderSS, SessionKey), Error> {
    encaps_with_exponent_inner(set, upks, pp, au, t)
}

/// Decryption components `D₁, D̂₂, D₃, D₄` for a given re-randomizer `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecapsComponents {
    pub d1: G1Element,
    pub d2_hat: G2Element,
    pub d3: G1Element,
    pub d4: G1Element,
}

impl DecapsComponents {
    /// `e(C₂, D̂₂) · e(D₁·D₃·D₄, Ĉ₁)^{-1}`; two pairings.
    pub fn combine(&self, header: &CiphertextHeaderSS) -> GtElement {
        let d = self.d1.mul(&self.d3).mul(&self.d4);
        multi_pairing(&[(header.c2, self.d2_hat), (d.inverse(), header.c1)])
    }
}

/// Runs the ⊥ checks of decapsulation and builds the decryption components.
#[allow(clippy::too_many_arguments)]
fn decaps_components_inner<K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    header: &CiphertextHeaderSS,
    i: usize,
    usk: &UserSecretKeySS,
    upks: &K,
    pp: &PublicParams,
    au: &[u8],
    r: &Scalar,
) -> Result<DecapsComponents, Error> {
    let l = pp.capacity;
    if !set.contains(&i) {
        return Err(Error::NotRecipient(i));
    }
    check_set(set, l)?;
    if usk.index != i {
        return Err(Error::KeyIndexMismatch {
            expected: i,
            found: usk.index,
        });
    }
    let keys = collect_keys(set, upks, l)?;

    let omega = pp.suite.h1(&header.c1, au);
    let base = header_base(pp, &keys, &omega);
    if !pairings_equal(&header.c2, pp.ctx.g_hat(), &base, &header.c1) {
        return Err(Error::InvalidHeader);
    }

    let mirror = l + 2 - i;
    debug_assert!((2..=l + 1).contains(&mirror));
    debug_assert!((l + 3..=2 * l + 2).contains(&(2 * l + 3 - i)));

    let d1 = usk.k.mul(&base.exp(r));
    let d2_hat = pp.a_hat(mirror).expect("mirror in [2, L+1]").mul(&pp.ctx.g_hat().exp(r));
    let d3 = pp
        .a(2 * l + 3 - i)
        .expect("2L+3-i in [L+3, 2L+2]")
        .exp(&omega)
        .mul(pp.b_k(mirror).expect("mirror in [2, L+1]"));
    let mut d4 = G1Element::identity();
    for key in keys.iter().filter(|k| k.index != i) {
        let j = key.index;
        debug_assert_ne!(mirror + j, l + 2);
        let a = pp.a(mirror + j).expect("L+2-i+j avoids L+2 for j != i");
        let vj = key.vk.get(&mirror).ok_or(Error::MalformedPublicKey(j))?;
        d4 = d4.mul(a).mul(vj);
    }
    Ok(DecapsComponents {
        d1,
        d2_hat,
        d3,
        d4,
    })
}

/// Decryption components with caller-chosen `r`; only for algebraic tests.
#[cfg(feature = "hazmat")]
#[allow(clippy::too_many_arguments)]
pub fn decaps_components<K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    header: &CiphertextHeaderSS,
    i: usize,
    usk: &UserSecretKeySS,
    upks: &K,
    pp: &PublicParams,
    au: &[u8],
    r: &Scalar,
) -> Result<DecapsComponents, Error> {
    decaps_components_inner(set, header, i, usk, upks, pp, au, r)
}

/// Decapsulates `header` as user `i`. Exactly four pairings on success:
/// two for the validity check and two for the key.
#[allow(clippy::too_many_arguments)]
pub fn decaps<R: RngCore + CryptoRng, K: PublicKeyLookup + ?Sized>(
    set: &BTreeSet<usize>,
    header: &CiphertextHeaderSS,
    i: usize,
    usk: &UserSecretKeySS,
    upks: &K,
    pp: &PublicParams,
    au: &[u8],
    rng: &mut R,
) -> Result<SessionKey, Error> {
    let mut r = Scalar::random(rng);
    let comps = decaps_components_inner(set, header, i, usk, upks, pp, au, &r);
    r.zeroize();
    let comps = comps?;
    Ok(SessionKey(pp.suite.h2(&comps.combine(header))))
}
