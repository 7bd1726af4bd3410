//! Timing and pairing-count table.
//!
//! Fresh rows run the semi-static scheme at capacity L in memory. A
//! directory row runs the adaptive scheme on a key directory's parameters
//! and stored keys, with no setup timing.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use dbe_core::groups::counters;
use dbe_core::scheme::{Adaptive, BroadcastKem, SemiStatic};
use dbe_core::ss;
use rand_core::{CryptoRng, RngCore};

use crate::keydir::{DirError, KeyDirectory};

pub const CSV_HEADER: &str =
    "scheme,L,batch_pairings,naive_pairings,setup_ms,keygen_ms,isvalid_ms,isvalid_naive_ms,encaps_ms,decaps_ms,header_bytes";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("directory holds no user with both key files; run keygen first")]
    InsufficientKeys,
    #[error("repetitions must be at least 1")]
    NoReps,
    #[error(transparent)]
    Dir(#[from] DirError),
    #[error(transparent)]
    Scheme(#[from] dbe_core::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub scheme: &'static str,
    pub capacity: usize,
    pub batch_pairings: u64,
    pub naive_pairings: u64,
    pub setup_ms: Option<f64>,
    pub keygen_ms: f64,
    pub isvalid_ms: f64,
    pub isvalid_naive_ms: f64,
    pub encaps_ms: f64,
    pub decaps_ms: f64,
    pub header_bytes: usize,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        let setup = self.setup_ms.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        format!(
            "{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{}",
            self.scheme,
            self.capacity,
            self.batch_pairings,
            self.naive_pairings,
            setup,
            self.keygen_ms,
            self.isvalid_ms,
            self.isvalid_naive_ms,
            self.encaps_ms,
            self.decaps_ms,
            self.header_bytes
        )
    }
}

/// Median wall time in milliseconds over `reps` runs.
pub fn median_ms(reps: usize, mut f: impl FnMut()) -> f64 {
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

fn pairings_during(f: impl FnOnce()) -> u64 {
    let before = counters::snapshot();
    f();
    counters::snapshot().since(&before).pairings
}

pub fn fresh_row<R: RngCore + CryptoRng>(capacity: usize, reps: usize, rng: &mut R) -> Result<BenchRow, BenchError> {
    if reps == 0 {
        return Err(BenchError::NoReps);
    }
    let mut setup_ms = Vec::with_capacity(reps);
    let mut pp = None;
    for _ in 0..reps {
        let t = Instant::now();
        pp = Some(ss::setup(capacity, rng)?);
        setup_ms.push(t.elapsed().as_secs_f64() * 1e3);
    }
    setup_ms.sort_by(f64::total_cmp);
    let pp = pp.expect("reps >= 1");

    let keygen_ms = median_ms(reps, || {
        ss::genkey(1, &pp, rng).expect("index in range");
    });
    let mut sks = BTreeMap::new();
    let mut pks = BTreeMap::new();
    for j in 1..=capacity {
        let (sk, pk) = ss::genkey(j, &pp, rng)?;
        sks.insert(j, sk);
        pks.insert(j, pk);
    }
    let pk1 = &pks[&1];

    let batch_pairings = pairings_during(|| assert!(ss::is_valid(1, pk1, &pp, rng)));
    let naive_pairings = pairings_during(|| assert!(ss::is_valid_naive(1, pk1, &pp)));
    let isvalid_ms = median_ms(reps, || assert!(ss::is_valid(1, pk1, &pp, rng)));
    let isvalid_naive_ms = median_ms(reps, || assert!(ss::is_valid_naive(1, pk1, &pp)));

    let set: BTreeSet<usize> = (1..=capacity).collect();
    let (header, key) = ss::encaps(&set, &pks, &pp, b"", rng)?;
    let encaps_ms = median_ms(reps, || {
        ss::encaps(&set, &pks, &pp, b"", rng).expect("honest encaps");
    });
    let decaps_ms = median_ms(reps, || {
        let k = ss::decaps(&set, &header, 1, &sks[&1], &pks, &pp, b"", rng).expect("honest decaps");
        assert_eq!(k, key);
    });

    Ok(BenchRow {
        scheme: SemiStatic::NAME,
        capacity,
        batch_pairings,
        naive_pairings,
        setup_ms: Some(setup_ms[setup_ms.len() / 2]),
        keygen_ms,
        isvalid_ms,
        isvalid_naive_ms,
        encaps_ms,
        decaps_ms,
        header_bytes: SemiStatic::header_bytes(&header).len(),
    })
}

/// Adaptive-scheme row over a directory's stored users, all of whom form S.
/// The naive column checks both slots with the pairing-per-term validator.
pub fn directory_row<R: RngCore + CryptoRng>(
    dir: &KeyDirectory,
    reps: usize,
    rng: &mut R,
) -> Result<BenchRow, BenchError> {
    if reps == 0 {
        return Err(BenchError::NoReps);
    }
    let users = dir.users()?;
    let decryptor = users
        .iter()
        .copied()
        .find(|&i| dir.secret_key_path(i).is_file())
        .ok_or(BenchError::InsufficientKeys)?;
    let pp = dir.params();
    let set: BTreeSet<usize> = users.iter().copied().collect();
    let pks = dir.public_keys(&set)?;
    let sk = dir.secret_key(decryptor)?;
    let pk = &pks[&decryptor];

    let keygen_ms = median_ms(reps, || {
        Adaptive::genkey(decryptor, pp, rng).expect("index in range");
    });
    let naive = |pk: &dbe_core::ad::UserPublicKeyAD| {
        ss::is_valid_naive(pk.even().index(), pk.even(), pp) && ss::is_valid_naive(pk.odd().index(), pk.odd(), pp)
    };
    let batch_pairings = pairings_during(|| {
        Adaptive::is_valid(decryptor, pk, pp, rng);
    });
    let naive_pairings = pairings_during(|| {
        naive(pk);
    });
    let isvalid_ms = median_ms(reps, || {
        Adaptive::is_valid(decryptor, pk, pp, rng);
    });
    let isvalid_naive_ms = median_ms(reps, || {
        naive(pk);
    });
    let (header, key) = Adaptive::encaps(&set, &pks, pp, b"", rng)?;
    let encaps_ms = median_ms(reps, || {
        Adaptive::encaps(&set, &pks, pp, b"", rng).expect("stored keys encapsulate");
    });
    let decaps_ms = median_ms(reps, || {
        let k = Adaptive::decaps(&set, &header, decryptor, &sk, &pks, pp, b"", rng).expect("honest decaps");
        assert_eq!(k, key);
    });
    Ok(BenchRow {
        scheme: Adaptive::NAME,
        capacity: dir.capacity(),
        batch_pairings,
        naive_pairings,
        setup_ms: None,
        keygen_ms,
        isvalid_ms,
        isvalid_naive_ms,
        encaps_ms,
        decaps_ms,
        header_bytes: Adaptive::header_bytes(&header).len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn fresh_rows_count_pairings() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for l in [1, 3, 8] {
            let row = fresh_row(l, 1, &mut rng).unwrap();
            assert_eq!(row.batch_pairings, 2);
            assert_eq!(row.naive_pairings, 2 * l as u64);
            assert_eq!(row.header_bytes, 6 + 96 + 48);
            assert_eq!(row.csv_line().split(',').count(), CSV_HEADER.split(',').count());
        }
    }

    #[test]
    fn directory_row_needs_keys() {
        let tmp = tempfile::tempdir().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let dir = KeyDirectory::create(tmp.path(), 2, false, &mut rng).unwrap();
        assert!(matches!(directory_row(&dir, 1, &mut rng), Err(BenchError::InsufficientKeys)));
        dir.add_user(1, &mut rng).unwrap();
        dir.add_user(2, &mut rng).unwrap();
        let row = directory_row(&dir, 1, &mut rng).unwrap();
        assert_eq!(row.batch_pairings, 4);
        assert_eq!(row.naive_pairings, 2 * 2 * 4);
        assert!(row.csv_line().contains(",-,"));
    }
}
