//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use dbe::bench::median_ms;
use dbe::cli::{seeded_rng, stream};
use dbe::keydir::KeyDirectory;
use dbe::tamper;
use dbe_core::ad;
use dbe_core::codec::{Canonical, HEADER_LEN};
use dbe_core::game::{
    run_aa_cca_game, run_ad_cca_game, run_ss_cca_game, Clause, GameError, GameKind, Guess, HeaderSource,
    OtsSufGame, Phase, Query, ScriptedAdversary, Transcript,
};
use dbe_core::groups::{counters, pairing, G1Element, G2Element, GroupElement, Scalar};
use dbe_core::scheme::{tamper_ss_public_key, Adaptive, BroadcastKem, SemiStatic};
use dbe_core::ss::{self, a_indices, vk_indices, CiphertextHeaderSS, PublicParams, UserPublicKeySS};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;
type Tree = Vec<(String, Vec<u8>)>;
type Criterion = fn() -> Outcome;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nonempty_subsets(l: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (1u32..1 << l).map(move |mask| (1..=l).filter(|i| mask >> (i - 1) & 1 == 1).collect())
}

fn ss_users(pp: &PublicParams, rng: &mut ChaCha20Rng) -> (Vec<ss::UserSecretKeySS>, BTreeMap<usize, UserPublicKeySS>) {
    let mut sks = Vec::new();
    let mut pks = BTreeMap::new();
    for j in 1..=pp.capacity() {
        let (sk, pk) = ss::genkey(j, pp, rng).unwrap();
        sks.push(sk);
        pks.insert(j, pk);
    }
    (sks, pks)
}

fn c1_exhaustive_ss() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(101);
    let mut checks = 0;
    for l in 1..=5 {
        let pp = ss::setup(l, &mut rng).map_err(|e| e.to_string())?;
        let (sks, pks) = ss_users(&pp, &mut rng);
        for set in nonempty_subsets(l) {
            let (header, key) = ss::encaps(&set, &pks, &pp, b"acceptance", &mut rng).map_err(|e| e.to_string())?;
            for &i in &set {
                let got = ss::decaps(&set, &header, i, &sks[i - 1], &pks, &pp, b"acceptance", &mut rng)
                    .map_err(|e| format!("L={l} S={set:?} i={i}: {e}"))?;
                ensure(got == key, || format!("L={l} S={set:?} i={i}: key mismatch"))?;
                checks += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("{checks} decapsulations took {secs:.1} s (limit 60 s)"))?;
    Ok(format!("{checks} decapsulations, 0 failures, {secs:.2} s"))
}

fn c2_exhaustive_ad() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(102);
    let mut checks = 0;
    let mut branches_seen = BTreeSet::new();
    for l in 1..=4 {
        let pp = ad::setup(l, &mut rng).map_err(|e| e.to_string())?;
        // Every assignment of kept branch bits across the L users.
        for pattern in 0u32..1 << l {
            let mut sks = BTreeMap::new();
            let mut pks = BTreeMap::new();
            for i in 1..=l {
                let u = (pattern >> (i - 1) & 1) as u8;
                let (sk, pk) = ad::genkey_with_bit(i, &pp, u, &mut rng).map_err(|e| e.to_string())?;
                ensure(sk.branch_bit() == u, || format!("user {i} kept wrong branch"))?;
                branches_seen.insert((l, i, u));
                sks.insert(i, sk);
                pks.insert(i, pk);
            }
            for set in nonempty_subsets(l) {
                let (header, key) = ad::encaps(&set, &pks, &pp, b"", &mut rng).map_err(|e| e.to_string())?;
                for &i in &set {
                    let got = ad::decaps(&set, &header, i, &sks[&i], &pks, &pp, b"", &mut rng)
                        .map_err(|e| format!("L={l} pattern={pattern:b} S={set:?} i={i}: {e}"))?;
                    ensure(got == key, || format!("L={l} pattern={pattern:b} S={set:?} i={i}: key mismatch"))?;
                    checks += 1;
                }
            }
        }
    }
    let expected_branches: usize = (1..=4).map(|l| 2 * l).sum();
    ensure(branches_seen.len() == expected_branches, || "not every user branch was exercised".into())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("{checks} decapsulations took {secs:.1} s (limit 120 s)"))?;
    Ok(format!("{checks} decapsulations over all branch patterns, 0 failures, {secs:.2} s"))
}

fn c3_algebra() -> Outcome {
    let mut rng = rng(103);
    let params: Vec<_> = (1..=6).map(|l| ss::setup(l, &mut rng).unwrap()).collect();
    let users: Vec<_> = params.iter().map(|pp| ss_users(pp, &mut rng)).collect();
    for n in 0..100 {
        let which = n % params.len();
        let (pp, (sks, pks)) = (&params[which], &users[which]);
        let l = pp.capacity();
        let mut set = BTreeSet::new();
        while set.is_empty() {
            set = (1..=l).filter(|_| rng.next_u32() & 1 == 1).collect();
        }
        let members: Vec<usize> = set.iter().copied().collect();
        let i = members[rng.next_u32() as usize % members.len()];
        let mut au = vec![0u8; (rng.next_u32() % 16) as usize];
        rng.fill_bytes(&mut au);
        let t = Scalar::random(&mut rng);
        let r = Scalar::random(&mut rng);
        let (header, _) = ss::encaps_with_exponent(&set, pks, pp, &au, &t).map_err(|e| e.to_string())?;
        let comps = ss::decaps_components(&set, &header, i, &sks[i - 1], pks, pp, &au, &r).map_err(|e| e.to_string())?;
        ensure(comps.combine(&header) == pp.omega().exp(&t), || {
            format!("instance {n}: L={l} S={set:?} i={i}: combination differs from Ω^t")
        })?;
    }
    Ok("100 instances, 0 failures".into())
}

fn c4_sizes() -> Outcome {
    let mut rng = rng(104);
    for l in 1..=6 {
        let pp = ss::setup(l, &mut rng).unwrap();
        ensure(CiphertextHeaderSS::ELEMENT_COUNT == 2, || "header is not two elements".into())?;
        let a: Vec<usize> = pp.a_map().keys().copied().collect();
        ensure(a == a_indices(l).collect::<Vec<_>>() && a.len() == 2 * l + 1, || format!("L={l}: A indices {a:?}"))?;
        ensure(pp.a(l + 2).is_none() && !a.contains(&(l + 2)), || format!("L={l}: A_(L+2) published"))?;
        let ah: Vec<usize> = pp.a_hat_map().keys().copied().collect();
        ensure(ah == (1..=l + 1).collect::<Vec<_>>(), || format!("L={l}: Â indices {ah:?}"))?;
        let bk: Vec<usize> = pp.b_k_map().keys().copied().collect();
        ensure(bk == (2..=l + 1).collect::<Vec<_>>(), || format!("L={l}: B_k indices {bk:?}"))?;

        let (sks, pks) = ss_users(&pp, &mut rng);
        for (j, pk) in &pks {
            ensure(pk.g1_count() == (l - 1) + 1 && pk.g2_count() == 1, || {
                format!("L={l} user {j}: {} G + {} Ĝ elements", pk.g1_count(), pk.g2_count())
            })?;
            ensure(pk.vk().keys().copied().eq(vk_indices(*j, l)), || format!("L={l} user {j}: cross-term indices"))?;
        }
        for sk in &sks {
            // Envelope, u32 index, one G element.
            ensure(sk.encode().len() == HEADER_LEN + 4 + G1Element::ENCODED_LEN, || {
                format!("L={l}: secret key is {} bytes", sk.encode().len())
            })?;
        }
        let mut lens = BTreeSet::new();
        for size in 1..=l {
            let set: BTreeSet<usize> = (1..=size).collect();
            let (header, _) = ss::encaps(&set, &pks, &pp, b"", &mut rng).unwrap();
            lens.insert(SemiStatic::header_bytes(&header).len());
        }
        let want = HEADER_LEN + G2Element::ENCODED_LEN + G1Element::ENCODED_LEN;
        ensure(lens == BTreeSet::from([want]), || format!("L={l}: header lengths {lens:?}, want {want}"))?;
    }
    Ok(format!(
        "header 2 elements / {} bytes for every |S|, key 1 element, PP index sets exact, L=1..6",
        HEADER_LEN + G2Element::ENCODED_LEN + G1Element::ENCODED_LEN
    ))
}

fn pairings_during(f: impl FnOnce() -> bool) -> (bool, u64) {
    let before = counters::snapshot();
    let ok = f();
    (ok, counters::snapshot().since(&before).pairings)
}

fn c5_pairing_counts() -> Outcome {
    let mut rng = rng(105);
    for l in [1, 2, 3, 8, 32, 128] {
        let pp = ss::setup(l, &mut rng).unwrap();
        for j in [1, l.div_ceil(2), l] {
            let (_, pk) = ss::genkey(j, &pp, &mut rng).unwrap();
            let (ok, batch) = pairings_during(|| ss::is_valid(j, &pk, &pp, &mut rng));
            ensure(ok && batch == 2, || format!("L={l} j={j}: batch used {batch} pairings (ok={ok})"))?;
            let (ok, naive) = pairings_during(|| ss::is_valid_naive(j, &pk, &pp));
            ensure(ok && naive == 2 * l as u64, || format!("L={l} j={j}: naive used {naive} pairings (ok={ok})"))?;
        }
    }
    let l = 128;
    let pp = ss::setup(l, &mut rng).unwrap();
    let (_, pk) = ss::genkey(l / 2, &pp, &mut rng).unwrap();
    let reps = 7;
    let batch = median_ms(reps, || assert!(ss::is_valid(l / 2, &pk, &pp, &mut rng)));
    let naive = median_ms(reps, || assert!(ss::is_valid_naive(l / 2, &pk, &pp)));
    let speedup = naive / batch;
    ensure(speedup >= 5.0, || format!("L=128 speedup {speedup:.2}x < 5x (batch {batch:.2} ms, naive {naive:.2} ms)"))?;
    Ok(format!(
        "2 and 2L pairings exact for L up to 128; L=128 batch {batch:.2} ms vs naive {naive:.2} ms = {speedup:.1}x"
    ))
}

fn c6_tamper_suite() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let seed = [6u8; 32];
    let dir = KeyDirectory::create(tmp.path(), 4, false, &mut seeded_rng(&seed, stream::SETUP)).map_err(|e| e.to_string())?;
    for i in 1..=4 {
        dir.add_user(i, &mut seeded_rng(&seed, stream::KEYGEN | i as u64)).map_err(|e| e.to_string())?;
    }
    let results = tamper::run_suite(&dir, &mut seeded_rng(&seed, stream::TAMPER)).map_err(|e| e.to_string())?;
    let required = [
        "ss-header/c2-scaled",
        "ss-header/c1-swapped",
        "ss-header/au-mismatch",
        "key/vk-element-scaled",
        "ots/sigma-scaled",
        "ots/message-bit-flipped",
    ];
    for name in required {
        ensure(results.iter().any(|r| r.name == name), || format!("case {name} missing"))?;
    }
    let ad_cases = results.iter().filter(|r| r.name.starts_with("ad-header/")).count();
    ensure(ad_cases == 7, || format!("{ad_cases} AD header cases, want 7"))?;
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.line()).collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{}/{} cases behaved as expected", results.len(), results.len()))
}

/// Key mutations for the oracle comparison. Each returns the key offered for
/// index `j`, which may differ from the key's own index.
fn mutate(kind: u32, j: usize, pk: &UserPublicKeySS, other: &UserPublicKeySS, pp: &PublicParams, rng: &mut ChaCha20Rng) -> UserPublicKeySS {
    let g = pp.ctx().g();
    let r = Scalar::random_nonzero(rng);
    let l = pp.capacity();
    let rebuild = |v: G1Element, v_hat: G2Element, vk: BTreeMap<usize, G1Element>| {
        UserPublicKeySS::from_parts(j, l, v, v_hat, vk).expect("index set unchanged")
    };
    match kind {
        0 => tamper_ss_public_key(pk, pp),
        1 => {
            let mut vk = pk.vk().clone();
            if let Some(k) = vk.keys().copied().nth(rng.next_u32() as usize % vk.len().max(1)) {
                vk.insert(k, vk[&k].mul(&g.exp(&r)));
                rebuild(*pk.v(), *pk.v_hat(), vk)
            } else {
                rebuild(pk.v().mul(&g.exp(&r)), *pk.v_hat(), vk)
            }
        }
        2 => rebuild(pk.v().mul(&g.exp(&r)), *pk.v_hat(), pk.vk().clone()),
        3 => rebuild(*pk.v(), pk.v_hat().mul(&pp.ctx().g_hat().exp(&r)), pk.vk().clone()),
        // Every element raised to the same power.
        4 => rebuild(
            pk.v().exp(&r),
            pk.v_hat().exp(&r),
            pk.vk().iter().map(|(k, e)| (*k, e.exp(&r))).collect(),
        ),
        // Another user's valid key relabelled, where the index sets line up.
        _ => {
            if other.vk().keys().eq(pk.vk().keys()) {
                rebuild(*other.v(), *other.v_hat(), other.vk().clone())
            } else {
                tamper_ss_public_key(pk, pp)
            }
        }
    }
}

fn c7_oracle_equivalence() -> Outcome {
    let mut rng = rng(107);
    let params: Vec<_> = (1..=8).map(|l| ss::setup(l, &mut rng).unwrap()).collect();
    let (mut honest, mut tampered, mut rejected) = (0, 0, 0);
    for n in 0..200 {
        let pp = &params[n % params.len()];
        let l = pp.capacity();
        let j = 1 + rng.next_u32() as usize % l;
        let (_, pk) = ss::genkey(j, pp, &mut rng).unwrap();
        let (_, other) = ss::genkey(j, pp, &mut rng).unwrap();
        let offered = if n % 2 == 0 {
            honest += 1;
            pk
        } else {
            tampered += 1;
            mutate(rng.next_u32() % 6, j, &pk, &other, pp, &mut rng)
        };
        let batch = ss::is_valid(j, &offered, pp, &mut rng);
        let naive = ss::is_valid_naive(j, &offered, pp);
        ensure(batch == naive, || format!("key {n} (L={l}, j={j}): batch={batch} naive={naive}"))?;
        if n % 2 == 0 {
            ensure(naive, || format!("honest key {n} rejected"))?;
        } else if !naive {
            rejected += 1;
        }
    }
    Ok(format!("{honest} honest + {tampered} mutated keys ({rejected} invalid), 0 disagreements"))
}

fn c8_params_self_check() -> Outcome {
    let mut rng = rng(108);
    let mut pairing_checks = 0;
    for l in 1..=5 {
        let pp = ss::setup(l, &mut rng).unwrap();
        pp.self_check().map_err(|e| format!("L={l}: {e}"))?;
        let g = pp.ctx().g();
        let gh = pp.ctx().g_hat();
        let a = |k: usize| *pp.a(k).unwrap();
        let ah = |k: usize| *pp.a_hat(k).unwrap();
        ensure(*pp.omega() == pairing(&a(l + 1), &ah(1)), || format!("L={l}: Ω ≠ e(A_(L+1), Â_1)"))?;
        pairing_checks += 1;
        for k in 2..=2 * l + 2 {
            let (lhs, rhs) = match (pp.a(k), pp.a(k - 1)) {
                (Some(ak), Some(prev)) => (pairing(ak, gh), pairing(prev, &ah(1))),
                // A_(L+2) is withheld: A_(L+3) is checked two steps back.
                (Some(ak), None) => (pairing(ak, gh), pairing(&a(k - 2), &ah(2))),
                (None, _) => continue,
            };
            ensure(lhs == rhs, || format!("L={l}: chain broken at A_{k}"))?;
            pairing_checks += 1;
        }
        for k in 1..=l + 1 {
            ensure(pairing(g, &ah(k)) == pairing(&a(k), gh), || format!("L={l}: Â_{k} inconsistent"))?;
            pairing_checks += 1;
        }
        for k in 2..=l + 1 {
            ensure(pairing(pp.b_k(k).unwrap(), gh) == pairing(pp.b(), &ah(k)), || format!("L={l}: B_{k} inconsistent"))?;
            pairing_checks += 1;
        }

        // A parameter set with a wrong Ω must be refused.
        let bad = PublicParams::from_parts(
            l,
            *pp.ctx(),
            &pp.a_map(),
            &pp.a_hat_map(),
            *pp.b(),
            &pp.b_k_map(),
            pp.omega().mul(pp.ctx().gt()),
        )
        .map_err(|e| e.to_string())?;
        ensure(bad.self_check().is_err(), || format!("L={l}: corrupted Ω accepted"))?;
    }
    Ok(format!("self_check and {pairing_checks} independent pairing equations hold for L=1..5"))
}

fn keygens(mut adv: ScriptedAdversary, ids: &[usize]) -> ScriptedAdversary {
    for &i in ids {
        adv = adv.phase1(Query::KeyGen(i));
    }
    adv
}

fn violation_table() -> Vec<(GameKind, ScriptedAdversary, Clause)> {
    use GameKind::*;
    let ss = || ScriptedAdversary::new(&[1, 2]).with_initial_set(&[1, 2, 3]);
    let ad = || keygens(ScriptedAdversary::new(&[1]), &[1, 2, 3]);
    let aa = || keygens(ScriptedAdversary::new(&[1]), &[1, 2]);
    let reg = |i| Query::MaliciousRegister { index: i, tampered: false };
    vec![
        (SemiStatic, ScriptedAdversary::new(&[1]).with_initial_set(&[1, 5]), Clause::InitialSetInRange),
        (SemiStatic, ss().phase1(Query::decrypt_fresh(&[1, 4], 1)), Clause::DecryptSetSemiStatic),
        (SemiStatic, ss().phase1(Query::decrypt(&[1, 2], 3, HeaderSource::Fresh { set: [1, 2].into() })), Clause::DecryptorInSet),
        (SemiStatic, ScriptedAdversary::new(&[1, 4]).with_initial_set(&[1, 2]), Clause::ChallengeSetSemiStatic),
        (SemiStatic, ScriptedAdversary::new(&[]).with_initial_set(&[1, 2]), Clause::ChallengeSetNonEmpty),
        (SemiStatic, ss().phase2(Query::decrypt(&[1, 2], 1, HeaderSource::Challenge)), Clause::HeaderNotChallenge),
        (SemiStatic, ss().phase1(Query::decrypt(&[1], 1, HeaderSource::Challenge)), Clause::ChallengeIssued),
        (SemiStatic, ss().phase1(Query::KeyGen(1)), Clause::QueryNotOffered),
        (SemiStatic, ss().phase1(Query::Corrupt(1)), Clause::QueryNotOffered),
        (SemiStatic, ss().guess(Guess::RealKeyProbe { user: 3 }), Clause::ProbeEligible),
        (Adaptive, ad().phase1(Query::KeyGen(5)), Clause::IndexInRange),
        (Adaptive, ad().phase1(Query::KeyGen(2)), Clause::KeyGenFresh),
        (Adaptive, ad().phase1(Query::Corrupt(4)), Clause::CorruptAdaptive),
        (Adaptive, ad().phase1(Query::decrypt_fresh(&[2], 2)).phase1(Query::Corrupt(2)), Clause::CorruptAdaptive),
        (Adaptive, ad().phase1(Query::Corrupt(2)).phase1(Query::decrypt_fresh(&[1, 2], 1)), Clause::DecryptSetAdaptive),
        (Adaptive, ad().phase1(Query::decrypt_fresh(&[1, 3], 2)), Clause::DecryptorInSet),
        (Adaptive, keygens(ScriptedAdversary::new(&[1, 2]), &[1, 2]).phase1(Query::Corrupt(2)), Clause::ChallengeSetAdaptive),
        (Adaptive, ScriptedAdversary::new(&[]), Clause::ChallengeSetNonEmpty),
        (Adaptive, ad().phase2(Query::Corrupt(2)), Clause::QueryNotOffered),
        (Adaptive, ad().phase1(reg(4)), Clause::QueryNotOffered),
        (Adaptive, ad().phase2(Query::decrypt(&[1], 1, HeaderSource::Challenge)), Clause::HeaderNotChallenge),
        (ActiveAdaptive, aa().phase1(reg(3)).phase1(Query::KeyGen(3)), Clause::KeyGenFreshActive),
        (ActiveAdaptive, aa().phase1(reg(2)), Clause::MaliciousFresh),
        (ActiveAdaptive, aa().phase1(reg(5)), Clause::IndexInRange),
        (ActiveAdaptive, aa().phase1(Query::Corrupt(3)), Clause::CorruptActive),
        (ActiveAdaptive, aa().phase1(Query::Corrupt(2)).phase1(Query::Corrupt(2)), Clause::CorruptActive),
        (ActiveAdaptive, aa().phase1(reg(3)).phase1(Query::decrypt_fresh(&[1, 3], 1)), Clause::DecryptSetActive),
        (ActiveAdaptive, keygens(ScriptedAdversary::new(&[1, 3]), &[1]).phase1(reg(3)), Clause::ChallengeSetActive),
        (ActiveAdaptive, aa().phase2(reg(3)), Clause::QueryNotOffered),
        (ActiveAdaptive, aa().phase2(Query::decrypt(&[1], 1, HeaderSource::Challenge)), Clause::HeaderNotChallenge),
    ]
}

fn run_game(kind: GameKind, adv: &ScriptedAdversary, rng: &mut ChaCha20Rng) -> Result<Transcript, GameError> {
    match kind {
        GameKind::SemiStatic => run_ss_cca_game::<SemiStatic, _>(adv, 4, rng),
        GameKind::Adaptive => run_ad_cca_game::<Adaptive, _>(adv, 4, rng),
        _ => run_aa_cca_game::<Adaptive, _>(adv, 4, rng),
    }
}

fn legit_scripts() -> Vec<(GameKind, ScriptedAdversary)> {
    use GameKind::*;
    vec![
        (
            SemiStatic,
            ScriptedAdversary::new(&[1, 2])
                .with_initial_set(&[1, 2, 3])
                .phase1(Query::decrypt_fresh(&[1, 3], 3))
                .phase2(Query::decrypt(&[1, 2], 2, HeaderSource::ChallengeMutated(0)))
                .guess(Guess::RealKeyProbe { user: 1 }),
        ),
        (
            Adaptive,
            keygens(ScriptedAdversary::new(&[1, 2]), &[1, 2, 3, 4])
                .phase1(Query::Corrupt(3))
                .phase1(Query::decrypt_fresh(&[1, 4], 4))
                .phase2(Query::decrypt(&[1, 2], 1, HeaderSource::ChallengeMutated(6)))
                .phase2(Query::decrypt_fresh(&[2], 2))
                .guess(Guess::RealKeyProbe { user: 2 }),
        ),
        (
            ActiveAdaptive,
            keygens(ScriptedAdversary::new(&[1, 2]), &[1, 2, 3])
                .phase1(Query::MaliciousRegister { index: 4, tampered: true })
                .phase1(Query::decrypt_fresh(&[3], 3))
                .phase1(Query::Corrupt(3))
                .phase2(Query::decrypt(&[1], 1, HeaderSource::ChallengeMutated(2)))
                .guess(Guess::RealKeyProbe { user: 1 }),
        ),
    ]
}

fn c9_games() -> Outcome {
    let mut rng = rng(109);
    let table = violation_table();
    for (n, (kind, adv, clause)) in table.iter().enumerate() {
        match run_game(*kind, adv, &mut rng) {
            Err(e) if e.clause() == Some(*clause) && e.to_string().contains(clause.text()) => {}
            Err(e) => return Err(format!("{} row {n}: expected {clause}, got {e}", kind.name())),
            Ok(_) => return Err(format!("{} row {n}: completed; expected {clause}", kind.name())),
        }
    }

    // Strong unforgeability experiment.
    let mut ots_game = OtsSufGame::new(dbe_core::groups::GroupContext::standard(), &mut rng);
    let sig = ots_game.sign(b"m").map_err(|e| e.to_string())?;
    let second = ots_game.sign(b"m2");
    ensure(second.as_ref().err().and_then(GameError::clause) == Some(Clause::OneSignatureQuery), || {
        "second signature query not refused".into()
    })?;
    let replay = ots_game.judge(&sig, b"m");
    ensure(replay.as_ref().err().and_then(GameError::clause) == Some(Clause::ForgeryFresh), || {
        "replayed pair not refused".into()
    })?;
    ensure(ots_game.judge(&sig, b"n") == Ok(false), || "fresh forgery attempt verified".into())?;

    let mut runs = 0;
    let mut mu0_recovered = 0;
    for (kind, adv) in legit_scripts() {
        let mut seen = BTreeSet::new();
        for seed in 0..8 {
            let t = run_game(kind, &adv, &mut ChaCha20Rng::seed_from_u64(900 + seed))
                .map_err(|e| format!("{} legitimate script: {e}", kind.name()))?;
            ensure(t.phase == Phase::Done, || format!("{} run ended in {:?}", kind.name(), t.phase))?;
            ensure(t.real_key_recovered() == Some(true), || format!("{} probe failed", kind.name()))?;
            ensure(t.adversary_won() == Some(true), || format!("{} probe guessed wrong", kind.name()))?;
            let mu = t.mu.ok_or("no challenge bit")?;
            if mu == 0 {
                mu0_recovered += 1;
            }
            seen.insert(mu);
            runs += 1;
        }
        ensure(seen.len() == 2, || format!("{} runs never saw both challenge bits", kind.name()))?;
    }
    for (name, kind, adv, want) in tamper::game_scripts() {
        let res = run_game(kind, &adv, &mut rng);
        let ok = match (&res, want) {
            (Ok(t), None) => t.real_key_recovered() == Some(true),
            (Err(e), Some(c)) => e.clause() == Some(c),
            _ => false,
        };
        ensure(ok, || format!("{name}: {res:?}"))?;
    }
    Ok(format!(
        "{} violations + 3 OTS-SUF checks named correctly, {runs} legitimate runs complete, CK0* recovered in all {mu0_recovered} μ=0 runs",
        table.len()
    ))
}

fn tree(root: &Path) -> Tree {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().display().to_string(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const SEED: &str = "a5a5a5a5000102030405060708090a0b";

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dbe"))
        .args(["--seed", SEED])
        .args(args)
        .env_remove("DBE_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn cli_run(root: &Path) -> Result<(Tree, Vec<u8>), String> {
    let r = root.to_str().unwrap();
    cli(&["setup", "--users", "4", "--out", r])?;
    for i in ["1", "2", "4"] {
        cli(&["keygen", "--dir", r, "--index", i])?;
    }
    let header = root.join("h.dbe");
    cli(&["encaps", "--dir", r, "--set", "1,2,4", "--out", header.to_str().unwrap(), "--key-out", root.join("k.hex").to_str().unwrap()])?;
    let key = cli(&["decaps", "--dir", r, "--index", "4", "--header", header.to_str().unwrap()])?;
    let suite = cli(&["tamper-suite", "--dir", r])?;
    let mut log = key;
    log.extend(suite);
    Ok((tree(root), log))
}

fn lib_run(root: &Path) -> Result<Tree, String> {
    let seed = hex::decode(SEED).unwrap();
    let dir = KeyDirectory::create(root, 4, false, &mut seeded_rng(&seed, stream::SETUP)).map_err(|e| e.to_string())?;
    for i in [1, 2, 4] {
        dir.add_user(i, &mut seeded_rng(&seed, stream::KEYGEN | i as u64)).map_err(|e| e.to_string())?;
    }
    let set: BTreeSet<usize> = [1, 2, 4].into();
    let pks = dir.public_keys(&set).map_err(|e| e.to_string())?;
    let mut rng = seeded_rng(&seed, stream::ENCAPS);
    for (j, pk) in &pks {
        ensure(ad::is_valid(*j, pk, dir.params(), &mut rng), || format!("stored key {j} invalid"))?;
    }
    let (header, key) = ad::encaps(&set, &pks, dir.params(), b"", &mut rng).map_err(|e| e.to_string())?;
    fs::write(root.join("h.dbe"), header.encode()).unwrap();
    fs::write(root.join("h.dbe.set"), "1,2,4\n").unwrap();
    fs::write(root.join("k.hex"), format!("{}\n", hex::encode(key.as_bytes()))).unwrap();
    Ok(tree(root))
}

fn transcript_logs(seed: u64) -> Result<Vec<String>, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    legit_scripts()
        .into_iter()
        .map(|(kind, adv)| run_game(kind, &adv, &mut rng).map(|t| t.to_log()).map_err(|e| e.to_string()))
        .collect()
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (cli_a, log_a) = cli_run(&tmp.path().join("cli-a"))?;
    let (cli_b, log_b) = cli_run(&tmp.path().join("cli-b"))?;
    ensure(cli_a == cli_b, || "CLI directories differ between runs".into())?;
    ensure(log_a == log_b, || "CLI decaps/tamper output differs between runs".into())?;

    let lib_a = lib_run(&tmp.path().join("lib-a"))?;
    let lib_b = lib_run(&tmp.path().join("lib-b"))?;
    ensure(lib_a == lib_b, || "library directories differ between runs".into())?;
    // The CLI only adds the header sidecar format; everything else must match.
    for (name, bytes) in &lib_a {
        let cli_bytes = cli_a.iter().find(|(n, _)| n == name).map(|(_, b)| b);
        ensure(cli_bytes == Some(bytes), || format!("{name} differs between CLI and library"))?;
    }
    ensure(cli_a.len() == lib_a.len(), || "CLI and library trees list different files".into())?;

    let t_a = transcript_logs(1010)?;
    let t_b = transcript_logs(1010)?;
    ensure(t_a == t_b, || "game transcripts differ between runs".into())?;
    ensure(transcript_logs(1011)? != t_a, || "transcripts ignore the seed".into())?;
    Ok(format!(
        "{} files, headers and {} transcripts bit-identical across runs; CLI matches library",
        cli_a.len(),
        t_a.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("exhaustive correctness, semi-static, L=1..5", c1_exhaustive_ss),
        ("exhaustive correctness, adaptive, L=1..4, both branches", c2_exhaustive_ad),
        ("decryption components combine to Ω^t", c3_algebra),
        ("constant-size structures", c4_sizes),
        ("pairing counts and batch speedup", c5_pairing_counts),
        ("tamper suite", c6_tamper_suite),
        ("batch and naive key validation agree", c7_oracle_equivalence),
        ("public parameter self-checks", c8_params_self_check),
        ("game harness conformance", c9_games),
        ("seeded determinism", c10_determinism),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", n + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}: {name} ({detail})", n + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
