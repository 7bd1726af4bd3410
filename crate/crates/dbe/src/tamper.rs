//! Deterministic mutation matrix plus scripted game runs.
//!
//! Header and key cases use the directory's parameters with throwaway keys;
//! stored keys are re-validated from disk; game scripts run on their own
//! small parameter sets.

use std::collections::{BTreeMap, BTreeSet};

use dbe_core::ad::{self, UserPublicKeyAD};
use dbe_core::game::{self, Clause, GameError, Guess, HeaderSource, Query, ScriptedAdversary, Transcript};
use dbe_core::groups::GroupElement;
use dbe_core::ots;
use dbe_core::scheme::{tamper_ss_public_key, Adaptive, BroadcastKem, SemiStatic};
use dbe_core::ss::{self, PublicParams, UserPublicKeySS};
use rand_core::{CryptoRng, RngCore};

use crate::keydir::{DirError, KeyDirectory};

/// Batch-check trials for the scaled cross-term case.
pub const KEY_TRIALS: usize = 100;
const GAME_USERS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CaseResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CaseResult { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}  ({})", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn run_suite<R: RngCore + CryptoRng>(dir: &KeyDirectory, rng: &mut R) -> Result<Vec<CaseResult>, DirError> {
    let mut out = Vec::new();
    stored_keys(dir, rng, &mut out)?;
    key_cases(dir.params(), rng, &mut out)?;
    ss_header_cases(dir.params(), rng, &mut out)?;
    ad_header_cases(dir.params(), dir.capacity(), rng, &mut out)?;
    ots_cases(dir.params(), rng, &mut out);
    game_cases(rng, &mut out);
    Ok(out)
}

fn stored_keys<R: RngCore + CryptoRng>(dir: &KeyDirectory, rng: &mut R, out: &mut Vec<CaseResult>) -> Result<(), DirError> {
    for i in dir.users()? {
        let name = format!("stored-key/{i}");
        out.push(match dir.public_key(i) {
            Ok(upk) if ad::is_valid(i, &upk, dir.params(), rng) => CaseResult::new(name, true, "valid"),
            Ok(_) => CaseResult::new(name, false, "fails validation"),
            Err(e) => CaseResult::new(name, false, e.to_string()),
        });
    }
    Ok(())
}

fn key_cases<R: RngCore + CryptoRng>(pp: &PublicParams, rng: &mut R, out: &mut Vec<CaseResult>) -> Result<(), DirError> {
    let (_, upk) = ss::genkey(1, pp, rng)?;
    let cross: Vec<usize> = upk.vk().keys().copied().collect();
    let mut accepted = 0;
    for trial in 0..KEY_TRIALS {
        let k = cross[trial % cross.len()];
        let mut vk = upk.vk().clone();
        let scaled = vk[&k].mul(pp.ctx().g());
        vk.insert(k, scaled);
        let bad = UserPublicKeySS::from_parts(1, upk.capacity(), *upk.v(), *upk.v_hat(), vk).expect("same index set");
        if ss::is_valid(1, &bad, pp, rng) {
            accepted += 1;
        }
    }
    out.push(CaseResult::new(
        "key/vk-element-scaled",
        accepted == 0,
        format!("batch rejected {}/{KEY_TRIALS}", KEY_TRIALS - accepted),
    ));

    let bad = tamper_ss_public_key(&upk, pp);
    out.push(CaseResult::new(
        "key/vk-element-scaled-naive",
        !ss::is_valid_naive(1, &bad, pp),
        "pairing-per-term check",
    ));

    let (_, ad_upk) = ad::genkey(1, pp, rng)?;
    let odd = UserPublicKeyAD::from_parts(1, ad_upk.even().clone(), tamper_ss_public_key(ad_upk.odd(), pp))
        .expect("slot indices unchanged");
    out.push(CaseResult::new("key/ad-odd-slot-scaled", !ad::is_valid(1, &odd, pp, rng), "adaptive check"));
    out.push(CaseResult::new(
        "key/wrong-index",
        ad::capacity(pp) < 2 || !ad::is_valid(2, &ad_upk, pp, rng),
        "key for user 1 checked as user 2",
    ));
    Ok(())
}

fn ss_header_cases<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    rng: &mut R,
    out: &mut Vec<CaseResult>,
) -> Result<(), DirError> {
    let set: BTreeSet<usize> = [1, 2].into();
    let mut sks = BTreeMap::new();
    let mut pks = BTreeMap::new();
    for &j in &set {
        let (sk, pk) = ss::genkey(j, pp, rng)?;
        sks.insert(j, sk);
        pks.insert(j, pk);
    }
    let au = b"tamper-suite";
    let (h, k) = ss::encaps(&set, &pks, pp, au, rng)?;
    let (h2, _) = ss::encaps(&set, &pks, pp, au, rng)?;
    let baseline = ss::decaps(&set, &h, 1, &sks[&1], &pks, pp, au, rng).ok() == Some(k);

    let mut scaled = h;
    scaled.c2 = scaled.c2.mul(pp.ctx().g());
    let mut swapped = h;
    swapped.c1 = h2.c1;
    let cases = [
        ("ss-header/c2-scaled", scaled, &au[..]),
        ("ss-header/c1-swapped", swapped, &au[..]),
        ("ss-header/au-mismatch", h, &b"other"[..]),
    ];
    for (name, header, au) in cases {
        let rejected = set
            .iter()
            .map(|&i| ss::decaps(&set, &header, i, &sks[&i], &pks, pp, au, rng))
            .all(|r| r.is_err_and(|e| e.is_rejection()));
        out.push(CaseResult::new(name, baseline && rejected, rejection_detail(baseline, rejected)));
    }
    Ok(())
}

fn ad_header_cases<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    users: usize,
    rng: &mut R,
    out: &mut Vec<CaseResult>,
) -> Result<(), DirError> {
    let set: BTreeSet<usize> = (1..=users.min(3)).collect();
    let mut sks = BTreeMap::new();
    let mut pks = BTreeMap::new();
    for &j in &set {
        let (sk, pk) = ad::genkey(j, pp, rng)?;
        sks.insert(j, sk);
        pks.insert(j, pk);
    }
    let (h, k) = ad::encaps(&set, &pks, pp, b"", rng)?;
    let baseline = set
        .iter()
        .all(|&i| ad::decaps(&set, &h, i, &sks[&i], &pks, pp, b"", rng).ok().as_ref() == Some(&k));
    for (field, name) in Adaptive::TAMPER_FIELDS.iter().enumerate() {
        let bad = Adaptive::tamper_header(&h, field, pp);
        let rejected = set
            .iter()
            .map(|&i| ad::decaps(&set, &bad, i, &sks[&i], &pks, pp, b"", rng))
            .all(|r| r.is_err_and(|e| e.is_rejection()));
        out.push(CaseResult::new(format!("ad-header/{name}"), baseline && rejected, rejection_detail(baseline, rejected)));
    }
    Ok(())
}

fn rejection_detail(baseline: bool, rejected: bool) -> &'static str {
    match (baseline, rejected) {
        (false, _) => "untampered header did not decapsulate",
        (true, true) => "rejected by every recipient",
        (true, false) => "accepted by a recipient",
    }
}

fn ots_cases<R: RngCore + CryptoRng>(pp: &PublicParams, rng: &mut R, out: &mut Vec<CaseResult>) {
    let ctx = pp.ctx();
    let (sk, vk) = ots::genkey(ctx, rng);
    let msg = b"one-time message".to_vec();
    let Ok(sig) = ots::sign(ctx, &sk, &msg) else {
        out.push(CaseResult::new("ots/sign", false, "signing failed"));
        return;
    };
    let baseline = ots::verify(ctx, &vk, &sig, &msg);
    let scaled = ots::OtsSignature::from_element(sig.element().mul(ctx.g()));
    let mut flipped = msg.clone();
    flipped[0] ^= 1;
    out.push(CaseResult::new(
        "ots/sigma-scaled",
        baseline && !ots::verify(ctx, &vk, &scaled, &msg),
        rejection_detail(baseline, true),
    ));
    out.push(CaseResult::new(
        "ots/message-bit-flipped",
        baseline && !ots::verify(ctx, &vk, &sig, &flipped),
        rejection_detail(baseline, true),
    ));
}

/// The scripts behind the `game/` cases, with the clause each must trip or
/// `None` for a run that completes with the real key recovered.
pub fn game_scripts() -> Vec<(&'static str, game::GameKind, ScriptedAdversary, Option<Clause>)> {
    use dbe_core::game::GameKind::*;
    let kg = |adv: ScriptedAdversary, ids: &[usize]| ids.iter().fold(adv, |a, &i| a.phase1(Query::KeyGen(i)));
    vec![
        (
            "game/ss-cca-honest",
            SemiStatic,
            ScriptedAdversary::new(&[1, 2])
                .with_initial_set(&[1, 2, 3])
                .phase1(Query::decrypt_fresh(&[1, 3], 3))
                .phase2(Query::decrypt(&[1, 2], 2, HeaderSource::ChallengeMutated(1)))
                .guess(Guess::RealKeyProbe { user: 1 }),
            None,
        ),
        (
            "game/ss-cca-challenge-replay",
            SemiStatic,
            ScriptedAdversary::new(&[1]).with_initial_set(&[1, 2]).phase2(Query::decrypt(&[1], 1, HeaderSource::Challenge)),
            Some(Clause::HeaderNotChallenge),
        ),
        (
            "game/ad-cca-honest",
            Adaptive,
            kg(ScriptedAdversary::new(&[1, 2]), &[1, 2, 3])
                .phase1(Query::Corrupt(3))
                .phase1(Query::decrypt_fresh(&[1, 2], 2))
                .phase2(Query::decrypt(&[1, 2], 1, HeaderSource::ChallengeMutated(5)))
                .guess(Guess::RealKeyProbe { user: 2 }),
            None,
        ),
        (
            "game/ad-cca-corrupt-after-decrypt",
            Adaptive,
            kg(ScriptedAdversary::new(&[1]), &[1, 2]).phase1(Query::decrypt_fresh(&[2], 2)).phase1(Query::Corrupt(2)),
            Some(Clause::CorruptAdaptive),
        ),
        (
            "game/ad-cca-challenge-includes-corrupted",
            Adaptive,
            kg(ScriptedAdversary::new(&[1, 2]), &[1, 2]).phase1(Query::Corrupt(2)),
            Some(Clause::ChallengeSetAdaptive),
        ),
        (
            "game/aa-cca-honest",
            ActiveAdaptive,
            kg(ScriptedAdversary::new(&[1, 2]), &[1, 2, 3])
                .phase1(Query::MaliciousRegister { index: 4, tampered: true })
                .phase1(Query::decrypt_fresh(&[3], 3))
                .phase1(Query::Corrupt(3))
                .guess(Guess::RealKeyProbe { user: 1 }),
            None,
        ),
        (
            "game/aa-cca-challenge-meets-mq",
            ActiveAdaptive,
            kg(ScriptedAdversary::new(&[1, 4]), &[1]).phase1(Query::MaliciousRegister { index: 4, tampered: false }),
            Some(Clause::ChallengeSetActive),
        ),
    ]
}

pub fn run_script<R: RngCore + CryptoRng>(
    kind: game::GameKind,
    adv: &ScriptedAdversary,
    rng: &mut R,
) -> Result<Transcript, GameError> {
    match kind {
        game::GameKind::SemiStatic => game::run_ss_cca_game::<SemiStatic, _>(adv, GAME_USERS, rng),
        game::GameKind::Adaptive => game::run_ad_cca_game::<Adaptive, _>(adv, GAME_USERS, rng),
        _ => game::run_aa_cca_game::<Adaptive, _>(adv, GAME_USERS, rng),
    }
}

fn game_cases<R: RngCore + CryptoRng>(rng: &mut R, out: &mut Vec<CaseResult>) {
    for (name, kind, adv, want) in game_scripts() {
        let result = run_script(kind, &adv, rng);
        let (passed, detail) = match (&result, want) {
            (Ok(t), None) => (
                t.phase == game::Phase::Done && t.real_key_recovered() == Some(true),
                format!("completed, mu={} mu'={}", t.mu.unwrap_or(9), t.mu_prime.unwrap_or(9)),
            ),
            (Err(e), Some(clause)) => (e.clause() == Some(clause), e.to_string()),
            (Ok(_), Some(clause)) => (false, format!("completed; expected violation of {clause}")),
            (Err(e), None) => (false, e.to_string()),
        };
        out.push(CaseResult::new(name, passed, detail));
    }
}
