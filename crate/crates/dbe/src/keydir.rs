//! On-disk key directory.
//!
//! ```text
//! <root>/pp.dbe                  public parameters
//! <root>/users/<i>.upk.dbe       public keys, validated before write
//! <root>/private/<i>.usk.dbe     secret keys, mode 0600 in a 0700 directory
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dbe_core::ad::{self, UserPublicKeyAD, UserSecretKeyAD};
use dbe_core::codec::{Canonical, CodecError};
use dbe_core::ss::PublicParams;
use dbe_core::Error;
use rand_core::{CryptoRng, RngCore};

pub const PP_FILE: &str = "pp.dbe";
pub const USERS_DIR: &str = "users";
pub const PRIVATE_DIR: &str = "private";

#[derive(Debug, thiserror::Error)]
pub enum DirError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{} already holds a key directory (use --force to replace it)", .0.display())]
    Exists(PathBuf),
    #[error("{} is not an initialized key directory", .0.display())]
    NotInitialized(PathBuf),
    #[error("{}: {source}", path.display())]
    Decode { path: PathBuf, source: CodecError },
    #[error("{}: holds a key for index {found}, expected {expected}", path.display())]
    IndexMismatch { path: PathBuf, expected: usize, found: usize },
    #[error("user {0} already has keys")]
    UserExists(usize),
    #[error("no public key for user {0}")]
    UnknownUser(usize),
    #[error("no secret key for user {0}")]
    NoSecretKey(usize),
    #[error("public key for user {0} fails validation")]
    InvalidPublicKey(usize),
    #[error(transparent)]
    Scheme(#[from] Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DirError + '_ {
    move |source| DirError::Io { path: path.to_path_buf(), source }
}

pub struct KeyDirectory {
    root: PathBuf,
    pp: PublicParams,
}

impl KeyDirectory {
    /// Runs setup for `users` users and writes `pp.dbe`. With `force`, an
    /// existing directory's parameters and keys are replaced; without it the
    /// directory is left untouched.
    pub fn create<R: RngCore + CryptoRng>(
        root: &Path,
        users: usize,
        force: bool,
        rng: &mut R,
    ) -> Result<Self, DirError> {
        let pp_path = root.join(PP_FILE);
        if pp_path.exists() && !force {
            return Err(DirError::Exists(root.to_path_buf()));
        }
        let pp = ad::setup(users, rng)?;
        fs::create_dir_all(root).map_err(io_err(root))?;
        for sub in [USERS_DIR, PRIVATE_DIR] {
            let p = root.join(sub);
            if p.exists() {
                fs::remove_dir_all(&p).map_err(io_err(&p))?;
            }
        }
        let users_dir = root.join(USERS_DIR);
        fs::create_dir(&users_dir).map_err(io_err(&users_dir))?;
        create_private_dir(&root.join(PRIVATE_DIR))?;
        write_atomic(&pp_path, &pp.encode(), false)?;
        Ok(KeyDirectory { root: root.to_path_buf(), pp })
    }

    pub fn open(root: &Path) -> Result<Self, DirError> {
        let pp_path = root.join(PP_FILE);
        if !pp_path.is_file() {
            return Err(DirError::NotInitialized(root.to_path_buf()));
        }
        let pp = read_object::<PublicParams>(&pp_path)?;
        Ok(KeyDirectory { root: root.to_path_buf(), pp })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn params(&self) -> &PublicParams {
        &self.pp
    }

    /// Number of users, L.
    pub fn capacity(&self) -> usize {
        ad::capacity(&self.pp)
    }

    pub fn pp_path(&self) -> PathBuf {
        self.root.join(PP_FILE)
    }

    pub fn public_key_path(&self, i: usize) -> PathBuf {
        self.root.join(USERS_DIR).join(format!("{i}.upk.dbe"))
    }

    pub fn secret_key_path(&self, i: usize) -> PathBuf {
        self.root.join(PRIVATE_DIR).join(format!("{i}.usk.dbe"))
    }

    /// Generates and stores keys for user `i`.
    pub fn add_user<R: RngCore + CryptoRng>(&self, i: usize, rng: &mut R) -> Result<UserPublicKeyAD, DirError> {
        if self.public_key_path(i).exists() || self.secret_key_path(i).exists() {
            return Err(DirError::UserExists(i));
        }
        let (usk, upk) = ad::genkey(i, &self.pp, rng)?;
        self.store_public_key(&upk, rng)?;
        write_atomic(&self.secret_key_path(i), &usk.encode(), true)?;
        Ok(upk)
    }

    /// Writes a public key after it passes validation against `pp`.
    pub fn store_public_key<R: RngCore + CryptoRng>(&self, upk: &UserPublicKeyAD, rng: &mut R) -> Result<(), DirError> {
        let i = upk.index();
        if i == 0 || i > self.capacity() {
            return Err(Error::IndexOutOfRange { index: i, capacity: self.capacity() }.into());
        }
        if !ad::is_valid(i, upk, &self.pp, rng) {
            return Err(DirError::InvalidPublicKey(i));
        }
        write_atomic(&self.public_key_path(i), &upk.encode(), false)
    }

    pub fn public_key(&self, i: usize) -> Result<UserPublicKeyAD, DirError> {
        let path = self.public_key_path(i);
        if !path.is_file() {
            return Err(DirError::UnknownUser(i));
        }
        let upk = read_object::<UserPublicKeyAD>(&path)?;
        if upk.index() != i {
            return Err(DirError::IndexMismatch { path, expected: i, found: upk.index() });
        }
        Ok(upk)
    }

    pub fn secret_key(&self, i: usize) -> Result<UserSecretKeyAD, DirError> {
        let path = self.secret_key_path(i);
        if !path.is_file() {
            return Err(DirError::NoSecretKey(i));
        }
        let usk = read_object::<UserSecretKeyAD>(&path)?;
        if usk.index() != i {
            return Err(DirError::IndexMismatch { path, expected: i, found: usk.index() });
        }
        Ok(usk)
    }

    pub fn public_keys(&self, set: &BTreeSet<usize>) -> Result<BTreeMap<usize, UserPublicKeyAD>, DirError> {
        set.iter().map(|&j| Ok((j, self.public_key(j)?))).collect()
    }

    /// Indices with a public key file, ascending.
    pub fn users(&self) -> Result<Vec<usize>, DirError> {
        let dir = self.root.join(USERS_DIR);
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let name = entry.file_name();
            if let Some(i) = name.to_str().and_then(|n| n.strip_suffix(".upk.dbe")).and_then(|n| n.parse().ok()) {
                out.push(i);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

pub fn read_object<T: Canonical>(path: &Path) -> Result<T, DirError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    T::decode(&bytes).map_err(|source| DirError::Decode { path: path.to_path_buf(), source })
}

/// Writes via a temporary sibling and rename so readers never see a partial
/// file. Secret files are created 0600.
pub fn write_atomic(path: &Path, bytes: &[u8], secret: bool) -> Result<(), DirError> {
    let tmp = path.with_extension("tmp");
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    if secret {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    #[cfg(not(unix))]
    let _ = secret;
    let mut f = opts.open(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn create_private_dir(path: &Path) -> Result<(), DirError> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::DirBuilderExt;
        fs::DirBuilder::new().mode(0o700).create(path).map_err(io_err(path))
    }
    #[cfg(not(unix))]
    fs::create_dir(path).map_err(io_err(path))
}
