//! Bookkeeping for the CCA security experiments, driven by scripted
//! adversaries.
//!
//! Each game is encoded literally: the semi-static game has an initial set
//! and implicit key generation, the adaptive game tracks KQ/CQ/DQ, and the
//! active-adaptive game adds MQ with malicious registration. A query that
//! breaks a side condition aborts the run with [`GameError::Violation`]
//! naming the clause. Nothing here measures advantage; the harness checks
//! oracle restrictions and the scheme's behaviour under adversarial
//! scheduling.
//!
//! The adaptive and active-adaptive games disagree on corruption: the former
//! requires `i ∈ KQ \ (CQ ∪ DQ)`, the latter `i ∈ KQ ∧ i ∉ CQ` and never
//! touches DQ. Both are kept as stated.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use rand_core::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::codec::Canonical;
use crate::error::Error;
use crate::groups::GroupContext;
use crate::ots::{self, OtsSignature, OtsSigningKey, OtsVerificationKey};
use crate::scheme::BroadcastKem;
use crate::ss::{PublicParams, SessionKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    SemiStatic,
    Adaptive,
    ActiveAdaptive,
    OtsStrongUnforgeability,
}

impl GameKind {
    pub fn name(self) -> &'static str {
        match self {
            GameKind::SemiStatic => "SS-CCA",
            GameKind::Adaptive => "AD-CCA",
            GameKind::ActiveAdaptive => "AA-CCA",
            GameKind::OtsStrongUnforgeability => "OTS-SUF",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    #[default]
    Setup,
    Query1,
    Challenged,
    Query2,
    Done,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Query1 => "query1",
            Phase::Challenged => "challenged",
            Phase::Query2 => "query2",
            Phase::Done => "done",
        }
    }
}

/// A side condition of one of the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    InitialSetInRange,
    IndexInRange,
    KeyGenFresh,
    KeyGenFreshActive,
    CorruptAdaptive,
    CorruptActive,
    MaliciousFresh,
    DecryptSetSemiStatic,
    DecryptSetAdaptive,
    DecryptSetActive,
    DecryptorInSet,
    HeaderNotChallenge,
    ChallengeSetSemiStatic,
    ChallengeSetAdaptive,
    ChallengeSetActive,
    /// Encaps has no output for an empty set.
    ChallengeSetNonEmpty,
    QueryNotOffered,
    ChallengeIssued,
    /// The wiring probe needs a challenger-held key for a member of S*.
    ProbeEligible,
    OneSignatureQuery,
    ForgeryFresh,
}

impl Clause {
    pub fn text(self) -> &'static str {
        match self {
            Clause::InitialSetInRange => "S̃ ⊆ [L]",
            Clause::IndexInRange => "i ∈ [L]",
            Clause::KeyGenFresh => "i ∉ KQ",
            Clause::KeyGenFreshActive => "i ∉ KQ ∧ i ∉ MQ",
            Clause::CorruptAdaptive => "i ∈ KQ \\ (CQ ∪ DQ)",
            Clause::CorruptActive => "i ∈ KQ ∧ i ∉ CQ",
            Clause::MaliciousFresh => "i ∉ KQ ∧ i ∉ MQ",
            Clause::DecryptSetSemiStatic => "S ⊆ S̃",
            Clause::DecryptSetAdaptive => "S ⊆ KQ \\ CQ",
            Clause::DecryptSetActive => "S ⊆ KQ \\ (CQ ∪ MQ)",
            Clause::DecryptorInSet => "i ∈ S",
            Clause::HeaderNotChallenge => "CH ≠ CH*",
            Clause::ChallengeSetSemiStatic => "S* ⊆ S̃",
            Clause::ChallengeSetAdaptive => "S* ⊆ KQ \\ CQ",
            Clause::ChallengeSetActive => "S* ⊆ KQ \\ (CQ ∪ MQ)",
            Clause::ChallengeSetNonEmpty => "S* ≠ ∅",
            Clause::QueryNotOffered => "query offered in this game and phase",
            Clause::ChallengeIssued => "CH* issued",
            Clause::ProbeEligible => "probe user ∈ S* \\ CQ",
            Clause::OneSignatureQuery => "at most one signature query",
            Clause::ForgeryFresh => "(σ*, M*) ≠ (σ, M)",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("{game} protocol violation at step {step}: {clause}")]
    Violation { game: GameKind, step: usize, clause: Clause },
    #[error("scheme failure: {0}")]
    Scheme(#[from] Error),
    #[error("malformed script: {0}")]
    Script(&'static str),
}

impl GameError {
    pub fn clause(&self) -> Option<Clause> {
        match self {
            GameError::Violation { clause, .. } => Some(*clause),
            _ => None,
        }
    }
}

/// Query sets and phase. `initial_set` is only present in the semi-static
/// game.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GameState {
    pub kq: BTreeSet<usize>,
    pub cq: BTreeSet<usize>,
    pub dq: BTreeSet<usize>,
    pub mq: BTreeSet<usize>,
    pub initial_set: Option<BTreeSet<usize>>,
    pub phase: Phase,
}

impl GameState {
    fn assert_invariants(&self, kind: GameKind) {
        assert!(self.cq.is_subset(&self.kq), "CQ ⊆ KQ");
        assert!(self.mq.is_disjoint(&self.kq), "MQ ∩ KQ = ∅");
        match kind {
            GameKind::SemiStatic => {
                assert!(self.cq.is_empty() && self.dq.is_empty() && self.mq.is_empty());
                if self.phase != Phase::Setup {
                    assert_eq!(Some(&self.kq), self.initial_set.as_ref(), "KQ = S̃");
                }
            }
            GameKind::Adaptive => assert!(self.mq.is_empty()),
            GameKind::ActiveAdaptive => assert!(self.dq.is_empty()),
            GameKind::OtsStrongUnforgeability => {}
        }
    }

    fn assert_grows_from(&self, before: &GameState) {
        assert!(before.kq.is_subset(&self.kq));
        assert!(before.cq.is_subset(&self.cq));
        assert!(before.dq.is_subset(&self.dq));
        assert!(before.mq.is_subset(&self.mq));
        assert!(before.phase <= self.phase);
    }
}

/// Where a decryption query's header comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeaderSource {
    /// Encapsulated by the adversary to `set` with the public keys it has
    /// seen, under the query's `au`.
    Fresh { set: BTreeSet<usize> },
    Challenge,
    /// CH* with one field mutated; the index names an entry of
    /// [`BroadcastKem::TAMPER_FIELDS`].
    ChallengeMutated(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    KeyGen(usize),
    Corrupt(usize),
    /// The adversary generates a key pair for `index` itself and registers
    /// the public half, optionally broken first.
    MaliciousRegister { index: usize, tampered: bool },
    Decrypt { set: BTreeSet<usize>, index: usize, header: HeaderSource, au: Vec<u8> },
}

impl Query {
    pub fn decrypt(set: &[usize], index: usize, header: HeaderSource) -> Self {
        Query::Decrypt { set: set.iter().copied().collect(), index, header, au: Vec::new() }
    }

    pub fn decrypt_fresh(set: &[usize], index: usize) -> Self {
        let set: BTreeSet<usize> = set.iter().copied().collect();
        Query::Decrypt { set: set.clone(), index, header: HeaderSource::Fresh { set }, au: Vec::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Guess {
    Constant(u8),
    /// Decapsulates CH* with the challenger's key for `user` and answers 0
    /// iff the result equals the key it was handed. This reads a key the
    /// adversary does not hold, so it checks game wiring, not security.
    RealKeyProbe { user: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptedAdversary {
    /// Committed before setup; required by the semi-static game, refused by
    /// the others.
    pub initial_set: Option<BTreeSet<usize>>,
    pub phase1: Vec<Query>,
    pub challenge_set: BTreeSet<usize>,
    pub phase2: Vec<Query>,
    pub guess: Guess,
}

impl ScriptedAdversary {
    pub fn new(challenge_set: &[usize]) -> Self {
        ScriptedAdversary {
            initial_set: None,
            phase1: Vec::new(),
            challenge_set: challenge_set.iter().copied().collect(),
            phase2: Vec::new(),
            guess: Guess::Constant(0),
        }
    }

    pub fn with_initial_set(mut self, set: &[usize]) -> Self {
        self.initial_set = Some(set.iter().copied().collect());
        self
    }

    pub fn phase1(mut self, q: Query) -> Self {
        self.phase1.push(q);
        self
    }

    pub fn phase2(mut self, q: Query) -> Self {
        self.phase2.push(q);
        self
    }

    pub fn guess(mut self, g: Guess) -> Self {
        self.guess = g;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecryptOutcome {
    /// `expected` is set when the adversary built the header itself and so
    /// knows which key should come back.
    Key { key: [u8; 32], expected: Option<bool> },
    Reject(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Init { set: BTreeSet<usize> },
    Setup { capacity: usize, pp_fingerprint: [u8; 16] },
    KeyGen { index: usize, public_key: Vec<u8> },
    Corrupt { index: usize, secret_key: Vec<u8> },
    Malicious { index: usize, tampered: bool, valid: bool, public_key: Vec<u8> },
    Decrypt {
        phase: u8,
        set: BTreeSet<usize>,
        index: usize,
        au: Vec<u8>,
        source: String,
        header: Vec<u8>,
        outcome: DecryptOutcome,
    },
    Challenge { set: BTreeSet<usize>, header: Vec<u8>, key: [u8; 32] },
    Probe { user: usize, real_key_recovered: bool },
    Guess { mu: u8, mu_prime: u8 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub kind: GameKind,
    pub scheme: &'static str,
    pub capacity: usize,
    pub events: Vec<Event>,
    pub phase: Phase,
    pub mu: Option<u8>,
    pub mu_prime: Option<u8>,
}

impl Transcript {
    pub fn adversary_won(&self) -> Option<bool> {
        Some(self.mu? == self.mu_prime?)
    }

    pub fn real_key_recovered(&self) -> Option<bool> {
        self.events.iter().find_map(|e| match e {
            Event::Probe { real_key_recovered, .. } => Some(*real_key_recovered),
            _ => None,
        })
    }

    /// One event per line, stable across runs with the same seed.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "game {} scheme={} L={}", self.kind, self.scheme, self.capacity);
        for e in &self.events {
            let _ = match e {
                Event::Init { set } => writeln!(out, "init set={}", SetFmt(set)),
                Event::Setup { capacity, pp_fingerprint } => {
                    writeln!(out, "setup L={capacity} pp={}", hex::encode(pp_fingerprint))
                }
                Event::KeyGen { index, public_key } => {
                    writeln!(out, "keygen i={index} upk={}", hex::encode(public_key))
                }
                Event::Corrupt { index, secret_key } => {
                    writeln!(out, "corrupt i={index} usk={}", hex::encode(secret_key))
                }
                Event::Malicious { index, tampered, valid, public_key } => writeln!(
                    out,
                    "malicious i={index} tampered={} isvalid={} upk={}",
                    u8::from(*tampered),
                    u8::from(*valid),
                    hex::encode(public_key)
                ),
                Event::Decrypt { phase, set, index, au, source, header, outcome } => {
                    let _ = write!(
                        out,
                        "decrypt phase={phase} i={index} set={} au={} source={source} ch={} -> ",
                        SetFmt(set),
                        hex::encode(au),
                        hex::encode(header)
                    );
                    match outcome {
                        DecryptOutcome::Key { key, expected: Some(m) } => {
                            writeln!(out, "ck={} expected={}", hex::encode(key), u8::from(*m))
                        }
                        DecryptOutcome::Key { key, expected: None } => writeln!(out, "ck={}", hex::encode(key)),
                        DecryptOutcome::Reject(reason) => writeln!(out, "reject ({reason})"),
                    }
                }
                Event::Challenge { set, header, key } => writeln!(
                    out,
                    "challenge set={} ch={} ck={}",
                    SetFmt(set),
                    hex::encode(header),
                    hex::encode(key)
                ),
                Event::Probe { user, real_key_recovered } => {
                    writeln!(out, "probe i={user} real={}", u8::from(*real_key_recovered))
                }
                Event::Guess { mu, mu_prime } => writeln!(out, "guess mu={mu} mu'={mu_prime}"),
            };
        }
        let _ = writeln!(out, "end phase={}", self.phase.name());
        out
    }
}

struct SetFmt<'a>(&'a BTreeSet<usize>);

impl fmt::Display for SetFmt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (n, j) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_char(',')?;
            }
            write!(f, "{j}")?;
        }
        f.write_char('}')
    }
}

fn fingerprint(bytes: &[u8]) -> [u8; 16] {
    let mut xof = Shake256::default();
    xof.update(b"DBE-v1/transcript-fp");
    xof.update(bytes);
    let mut out = [0u8; 16];
    xof.finalize_xof().read(&mut out);
    out
}

struct ChallengeRecord<H> {
    set: BTreeSet<usize>,
    header: H,
    header_bytes: Vec<u8>,
    ck0: SessionKey,
    ck_mu: SessionKey,
    mu: u8,
}

/// One run of an experiment. Drive it with [`Game::run`] or query by query.
pub struct Game<K: BroadcastKem> {
    kind: GameKind,
    pp: PublicParams,
    state: GameState,
    secret_keys: BTreeMap<usize, K::SecretKey>,
    public_keys: BTreeMap<usize, K::PublicKey>,
    malicious: BTreeMap<usize, K::PublicKey>,
    challenge: Option<ChallengeRecord<K::Header>>,
    transcript: Transcript,
    step: usize,
}

impl<K: BroadcastKem> Game<K> {
    /// Runs Init (semi-static only), Setup and, in the semi-static game, the
    /// implicit key generation for S̃.
    pub fn start<R: RngCore + CryptoRng>(
        kind: GameKind,
        initial_set: Option<&BTreeSet<usize>>,
        capacity: usize,
        rng: &mut R,
    ) -> Result<Self, GameError> {
        let mut events = Vec::new();
        match (kind, initial_set) {
            (GameKind::SemiStatic, Some(set)) => {
                if set.iter().any(|&j| j == 0 || j > capacity) {
                    return Err(GameError::Violation { game: kind, step: 0, clause: Clause::InitialSetInRange });
                }
                events.push(Event::Init { set: set.clone() });
            }
            (GameKind::SemiStatic, None) => return Err(GameError::Script("semi-static game needs an initial set")),
            (GameKind::OtsStrongUnforgeability, _) => return Err(GameError::Script("use OtsSufGame")),
            (_, Some(_)) => return Err(GameError::Script("only the semi-static game takes an initial set")),
            (_, None) => {}
        }
        let pp = K::setup(capacity, rng)?;
        events.push(Event::Setup { capacity, pp_fingerprint: fingerprint(&pp.encode()) });
        let mut game = Game {
            kind,
            pp,
            state: GameState { initial_set: initial_set.cloned(), ..GameState::default() },
            secret_keys: BTreeMap::new(),
            public_keys: BTreeMap::new(),
            malicious: BTreeMap::new(),
            challenge: None,
            transcript: Transcript {
                kind,
                scheme: K::NAME,
                capacity,
                events,
                phase: Phase::Setup,
                mu: None,
                mu_prime: None,
            },
            step: 0,
        };
        if let Some(set) = initial_set {
            for &j in set {
                game.generate(j, rng)?;
            }
        }
        game.set_phase(Phase::Query1);
        game.state.assert_invariants(kind);
        Ok(game)
    }

    pub fn run<R: RngCore + CryptoRng>(&mut self, script: &ScriptedAdversary, rng: &mut R) -> Result<(), GameError> {
        for q in &script.phase1 {
            self.query(q, rng)?;
        }
        self.challenge(&script.challenge_set, rng)?;
        for q in &script.phase2 {
            self.query(q, rng)?;
        }
        self.guess(script.guess, rng)
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn params(&self) -> &PublicParams {
        &self.pp
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Challenger-side view, for scan tests.
    pub fn challenger_secret_key_bytes(&self, i: usize) -> Option<Vec<u8>> {
        self.secret_keys.get(&i).map(K::secret_key_bytes)
    }

    pub fn query<R: RngCore + CryptoRng>(&mut self, q: &Query, rng: &mut R) -> Result<(), GameError> {
        self.step += 1;
        let before = self.state.clone();
        match self.state.phase {
            Phase::Query1 => {}
            Phase::Challenged | Phase::Query2 => {
                if !matches!(q, Query::Decrypt { .. }) {
                    return Err(self.violation(Clause::QueryNotOffered));
                }
                self.set_phase(Phase::Query2);
            }
            Phase::Setup | Phase::Done => return Err(self.violation(Clause::QueryNotOffered)),
        }
        match q {
            Query::KeyGen(i) => self.keygen_query(*i, rng)?,
            Query::Corrupt(i) => self.corrupt_query(*i)?,
            Query::MaliciousRegister { index, tampered } => self.malicious_query(*index, *tampered, rng)?,
            Query::Decrypt { set, index, header, au } => self.decrypt_query(set, *index, header, au, rng)?,
        }
        self.state.assert_grows_from(&before);
        self.state.assert_invariants(self.kind);
        Ok(())
    }

    pub fn challenge<R: RngCore + CryptoRng>(&mut self, set: &BTreeSet<usize>, rng: &mut R) -> Result<(), GameError> {
        self.step += 1;
        if self.state.phase != Phase::Query1 {
            return Err(self.violation(Clause::QueryNotOffered));
        }
        let (allowed, clause) = match self.kind {
            GameKind::SemiStatic => (self.initial_set().is_superset(set), Clause::ChallengeSetSemiStatic),
            GameKind::Adaptive => (set.iter().all(|j| self.honest_uncorrupted(*j)), Clause::ChallengeSetAdaptive),
            _ => (
                set.iter().all(|j| self.honest_uncorrupted(*j) && !self.state.mq.contains(j)),
                Clause::ChallengeSetActive,
            ),
        };
        if !allowed {
            return Err(self.violation(clause));
        }
        if set.is_empty() {
            return Err(self.violation(Clause::ChallengeSetNonEmpty));
        }
        let (header, ck0) = K::encaps(set, &self.public_keys, &self.pp, &[], rng)?;
        let ck1 = SessionKey::random(rng);
        let mu = (rng.next_u32() & 1) as u8;
        let ck_mu = if mu == 0 { ck0.clone() } else { ck1 };
        let header_bytes = K::header_bytes(&header);
        self.transcript.events.push(Event::Challenge {
            set: set.clone(),
            header: header_bytes.clone(),
            key: *ck_mu.as_bytes(),
        });
        self.transcript.mu = Some(mu);
        self.challenge = Some(ChallengeRecord { set: set.clone(), header, header_bytes, ck0, ck_mu, mu });
        self.set_phase(Phase::Challenged);
        self.state.assert_invariants(self.kind);
        Ok(())
    }

    pub fn guess<R: RngCore + CryptoRng>(&mut self, guess: Guess, rng: &mut R) -> Result<(), GameError> {
        self.step += 1;
        if !matches!(self.state.phase, Phase::Challenged | Phase::Query2) {
            return Err(self.violation(Clause::QueryNotOffered));
        }
        let ch = self.challenge.as_ref().expect("challenged phase has a challenge");
        let mu_prime = match guess {
            Guess::Constant(b) => b & 1,
            Guess::RealKeyProbe { user } => {
                if !ch.set.contains(&user) || self.state.cq.contains(&user) {
                    return Err(self.violation(Clause::ProbeEligible));
                }
                let sk = &self.secret_keys[&user];
                let k = K::decaps(&ch.set, &ch.header, user, sk, &self.public_keys, &self.pp, &[], rng)?;
                let real_key_recovered = k == ch.ck0;
                self.transcript.events.push(Event::Probe { user, real_key_recovered });
                u8::from(k != ch.ck_mu)
            }
        };
        let mu = ch.mu;
        self.transcript.events.push(Event::Guess { mu, mu_prime });
        self.transcript.mu_prime = Some(mu_prime);
        self.set_phase(Phase::Done);
        Ok(())
    }

    fn violation(&self, clause: Clause) -> GameError {
        GameError::Violation { game: self.kind, step: self.step, clause }
    }

    fn set_phase(&mut self, phase: Phase) {
        self.state.phase = phase;
        self.transcript.phase = phase;
    }

    fn initial_set(&self) -> &BTreeSet<usize> {
        self.state.initial_set.as_ref().expect("semi-static game has S̃")
    }

    fn honest_uncorrupted(&self, j: usize) -> bool {
        self.state.kq.contains(&j) && !self.state.cq.contains(&j)
    }

    fn generate<R: RngCore + CryptoRng>(&mut self, i: usize, rng: &mut R) -> Result<(), GameError> {
        let (sk, pk) = K::genkey(i, &self.pp, rng)?;
        self.transcript.events.push(Event::KeyGen { index: i, public_key: K::public_key_bytes(&pk) });
        self.secret_keys.insert(i, sk);
        self.public_keys.insert(i, pk);
        self.state.kq.insert(i);
        Ok(())
    }

    fn keygen_query<R: RngCore + CryptoRng>(&mut self, i: usize, rng: &mut R) -> Result<(), GameError> {
        let clause = match self.kind {
            GameKind::Adaptive => Clause::KeyGenFresh,
            GameKind::ActiveAdaptive => Clause::KeyGenFreshActive,
            _ => return Err(self.violation(Clause::QueryNotOffered)),
        };
        if i == 0 || i > self.transcript.capacity {
            return Err(self.violation(Clause::IndexInRange));
        }
        if self.state.kq.contains(&i) || self.state.mq.contains(&i) {
            return Err(self.violation(clause));
        }
        self.generate(i, rng)
    }

    fn corrupt_query(&mut self, i: usize) -> Result<(), GameError> {
        let allowed = match self.kind {
            GameKind::Adaptive => self.honest_uncorrupted(i) && !self.state.dq.contains(&i),
            GameKind::ActiveAdaptive => self.honest_uncorrupted(i),
            _ => return Err(self.violation(Clause::QueryNotOffered)),
        };
        if !allowed {
            let clause = if self.kind == GameKind::Adaptive { Clause::CorruptAdaptive } else { Clause::CorruptActive };
            return Err(self.violation(clause));
        }
        self.state.cq.insert(i);
        let secret_key = K::secret_key_bytes(&self.secret_keys[&i]);
        self.transcript.events.push(Event::Corrupt { index: i, secret_key });
        Ok(())
    }

    fn malicious_query<R: RngCore + CryptoRng>(&mut self, i: usize, tampered: bool, rng: &mut R) -> Result<(), GameError> {
        if self.kind != GameKind::ActiveAdaptive {
            return Err(self.violation(Clause::QueryNotOffered));
        }
        if i == 0 || i > self.transcript.capacity {
            return Err(self.violation(Clause::IndexInRange));
        }
        if self.state.kq.contains(&i) || self.state.mq.contains(&i) {
            return Err(self.violation(Clause::MaliciousFresh));
        }
        // The adversary's own key pair; its secret half never reaches the
        // challenger.
        let (_, mut pk) = K::genkey(i, &self.pp, rng)?;
        if tampered {
            pk = K::tamper_public_key(&pk, &self.pp);
        }
        let valid = K::is_valid(i, &pk, &self.pp, rng);
        self.transcript.events.push(Event::Malicious {
            index: i,
            tampered,
            valid,
            public_key: K::public_key_bytes(&pk),
        });
        self.malicious.insert(i, pk);
        self.state.mq.insert(i);
        Ok(())
    }

    fn decrypt_query<R: RngCore + CryptoRng>(
        &mut self,
        set: &BTreeSet<usize>,
        i: usize,
        source: &HeaderSource,
        au: &[u8],
        rng: &mut R,
    ) -> Result<(), GameError> {
        let (allowed, clause) = match self.kind {
            GameKind::SemiStatic => (self.initial_set().is_superset(set), Clause::DecryptSetSemiStatic),
            GameKind::Adaptive => (set.iter().all(|j| self.honest_uncorrupted(*j)), Clause::DecryptSetAdaptive),
            _ => (
                set.iter().all(|j| self.honest_uncorrupted(*j) && !self.state.mq.contains(j)),
                Clause::DecryptSetActive,
            ),
        };
        if !allowed {
            return Err(self.violation(clause));
        }
        if !set.contains(&i) {
            return Err(self.violation(Clause::DecryptorInSet));
        }

        let (header, expected, label) = match source {
            HeaderSource::Fresh { set: fresh } => {
                let mut known = self.public_keys.clone();
                known.extend(self.malicious.iter().map(|(j, pk)| (*j, pk.clone())));
                if !fresh.iter().all(|j| known.contains_key(j)) {
                    return Err(GameError::Script("fresh header needs public keys the adversary has not seen"));
                }
                let (h, k) = K::encaps(fresh, &known, &self.pp, au, rng)?;
                (h, Some(k), alloc::format!("fresh{}", SetFmt(fresh)))
            }
            HeaderSource::Challenge => match &self.challenge {
                Some(ch) => (ch.header.clone(), None, "challenge".to_string()),
                None => return Err(self.violation(Clause::ChallengeIssued)),
            },
            HeaderSource::ChallengeMutated(field) => {
                let Some(ch) = &self.challenge else {
                    return Err(self.violation(Clause::ChallengeIssued));
                };
                let Some(name) = K::TAMPER_FIELDS.get(*field) else {
                    return Err(GameError::Script("no such header field"));
                };
                (K::tamper_header(&ch.header, *field, &self.pp), None, alloc::format!("challenge~{name}"))
            }
        };
        let header_bytes = K::header_bytes(&header);
        if self.state.phase == Phase::Query2 {
            let ch = self.challenge.as_ref().expect("phase 2 has a challenge");
            if header_bytes == ch.header_bytes {
                return Err(self.violation(Clause::HeaderNotChallenge));
            }
        }

        let sk = &self.secret_keys[&i];
        let outcome = match K::decaps(set, &header, i, sk, &self.public_keys, &self.pp, au, rng) {
            Ok(k) => DecryptOutcome::Key { key: *k.as_bytes(), expected: expected.map(|e| e == k) },
            Err(e) if e.is_rejection() => DecryptOutcome::Reject(e.to_string()),
            Err(e) => return Err(e.into()),
        };
        if self.kind == GameKind::Adaptive {
            self.state.dq.insert(i);
        }
        self.transcript.events.push(Event::Decrypt {
            phase: if self.state.phase == Phase::Query1 { 1 } else { 2 },
            set: set.clone(),
            index: i,
            au: au.to_vec(),
            source: label,
            header: header_bytes,
            outcome,
        });
        Ok(())
    }
}

pub fn run_ss_cca_game<K: BroadcastKem, R: RngCore + CryptoRng>(
    adversary: &ScriptedAdversary,
    capacity: usize,
    rng: &mut R,
) -> Result<Transcript, GameError> {
    run_game::<K, R>(GameKind::SemiStatic, adversary, capacity, rng)
}

pub fn run_ad_cca_game<K: BroadcastKem, R: RngCore + CryptoRng>(
    adversary: &ScriptedAdversary,
    capacity: usize,
    rng: &mut R,
) -> Result<Transcript, GameError> {
    run_game::<K, R>(GameKind::Adaptive, adversary, capacity, rng)
}

pub fn run_aa_cca_game<K: BroadcastKem, R: RngCore + CryptoRng>(
    adversary: &ScriptedAdversary,
    capacity: usize,
    rng: &mut R,
) -> Result<Transcript, GameError> {
    run_game::<K, R>(GameKind::ActiveAdaptive, adversary, capacity, rng)
}

fn run_game<K: BroadcastKem, R: RngCore + CryptoRng>(
    kind: GameKind,
    adversary: &ScriptedAdversary,
    capacity: usize,
    rng: &mut R,
) -> Result<Transcript, GameError> {
    let mut game = Game::<K>::start(kind, adversary.initial_set.as_ref(), capacity, rng)?;
    game.run(adversary, rng)?;
    Ok(game.into_transcript())
}

/// Strong unforgeability experiment for the one-time signature.
pub struct OtsSufGame {
    ctx: GroupContext,
    sk: OtsSigningKey,
    vk: OtsVerificationKey,
    signed: Option<(Vec<u8>, OtsSignature)>,
}

impl OtsSufGame {
    pub fn new<R: RngCore + CryptoRng>(ctx: GroupContext, rng: &mut R) -> Self {
        let (sk, vk) = ots::genkey(&ctx, rng);
        OtsSufGame { ctx, sk, vk, signed: None }
    }

    pub fn verification_key(&self) -> &OtsVerificationKey {
        &self.vk
    }

    pub fn sign(&mut self, msg: &[u8]) -> Result<OtsSignature, GameError> {
        if self.signed.is_some() {
            return Err(self.violation(Clause::OneSignatureQuery));
        }
        let sig = ots::sign(&self.ctx, &self.sk, msg).map_err(Error::from)?;
        self.signed = Some((msg.to_vec(), sig));
        Ok(sig)
    }

    /// Whether the forgery verifies. Resubmitting the queried pair is a
    /// violation rather than a loss.
    pub fn judge(&self, sig: &OtsSignature, msg: &[u8]) -> Result<bool, GameError> {
        if let Some((m, s)) = &self.signed {
            if m.as_slice() == msg && s == sig {
                return Err(self.violation(Clause::ForgeryFresh));
            }
        }
        Ok(ots::verify(&self.ctx, &self.vk, sig, msg))
    }

    fn violation(&self, clause: Clause) -> GameError {
        GameError::Violation {
            game: GameKind::OtsStrongUnforgeability,
            step: usize::from(self.signed.is_some()),
            clause,
        }
    }
}
