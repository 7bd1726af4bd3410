//! Command-line front end. Each command is a thin wrapper over
//! [`KeyDirectory`] and the core scheme functions.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use dbe_core::ad::{self, CiphertextHeaderAD};
use dbe_core::codec::Canonical;
use dbe_core::groups::{G1_BYTES, G2_BYTES, GT_BYTES};
use dbe_core::Error;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRng, OsRng, RngCore};

use crate::bench::{self, BenchError};
use crate::keydir::{read_object, write_atomic, DirError, KeyDirectory};
use crate::tamper;

pub mod exit {
    pub const OK: u8 = 0;
    pub const KEY_INVALID: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const DECODE: u8 = 4;
    pub const DIRECTORY: u8 = 5;
    pub const ARGUMENT: u8 = 6;
    pub const UNKNOWN_USER: u8 = 7;
    pub const USER_EXISTS: u8 = 8;
    pub const INTERNAL: u8 = 9;
    pub const NOT_RECIPIENT: u8 = 10;
    pub const SIGNATURE: u8 = 11;
    pub const HEADER_INVALID: u8 = 12;
    pub const HEADER_MALFORMED: u8 = 13;
    pub const PUBLIC_KEY_INVALID: u8 = 14;
    pub const TAMPER_FAILED: u8 = 15;
}

const EXIT_CODES: &str = "\
Exit codes:
   0  success (verify-key: key valid)
   1  verify-key: key invalid or unreadable
   2  usage error
   3  I/O error
   4  file does not decode (format, kind, subgroup or index-set error)
   5  directory already initialized (without --force) or not initialized
   6  argument out of range (user count, index, recipient set)
   7  no key files for a referenced user
   8  user already has keys
   9  internal failure
  10  index not in recipient set
  11  header signature verification failed
  12  semi-static header validity check failed
  13  header does not match the recipient set
  14  public key fails validation
  15  tamper suite: at least one case failed";

#[derive(Debug, Parser)]
#[command(name = "dbe", version, about = "Distributed broadcast encryption: key directory, encapsulation and checks")]
#[command(after_help = EXIT_CODES)]
pub struct Cli {
    /// Derive all randomness from this seed (hex, up to 32 bytes). Test builds only.
    #[cfg(feature = "test-seed")]
    #[arg(long, global = true, value_name = "HEX")]
    pub seed: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the trusted setup for L users and write pp.dbe.
    Setup {
        #[arg(long, value_name = "L")]
        users: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Replace an existing directory's parameters and drop its keys.
        #[arg(long)]
        force: bool,
    },
    /// Generate and store a key pair for one user.
    Keygen {
        #[arg(long, env = "DBE_DIR")]
        dir: PathBuf,
        #[arg(long)]
        index: usize,
    },
    /// Check a stored public key; prints 1 or 0.
    VerifyKey {
        #[arg(long, env = "DBE_DIR")]
        dir: PathBuf,
        #[arg(long)]
        index: usize,
    },
    /// Encapsulate a session key to a recipient set.
    Encaps {
        #[arg(long, env = "DBE_DIR")]
        dir: PathBuf,
        /// Comma-separated user indices, e.g. "1,3,4".
        #[arg(long)]
        set: String,
        /// Associated label, taken as UTF-8 bytes.
        #[arg(long, default_value = "")]
        au: String,
        /// Header output; the recipient set is written next to it as <OUT>.set.
        #[arg(long)]
        out: PathBuf,
        /// Write the hex session key here instead of standard output.
        #[arg(long)]
        key_out: Option<PathBuf>,
    },
    /// Decapsulate a header and print the hex session key.
    Decaps {
        #[arg(long, env = "DBE_DIR")]
        dir: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        header: PathBuf,
        /// Recipient set; defaults to the contents of <HEADER>.set.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value = "")]
        au: String,
    },
    /// Print a CSV table of pairing counts, timings and header sizes.
    Bench {
        /// Also bench the adaptive scheme on this directory's stored keys.
        #[arg(long, env = "DBE_DIR")]
        dir: Option<PathBuf>,
        #[arg(long, default_value = "8,32,128")]
        sizes: String,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
    /// Run the header, key and signature mutation matrix and the game scripts.
    TamperSuite {
        #[arg(long, env = "DBE_DIR")]
        dir: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn scheme_code(e: &Error) -> u8 {
    match e {
        Error::NotRecipient(_) => exit::NOT_RECIPIENT,
        Error::InvalidSignature => exit::SIGNATURE,
        Error::InvalidHeader => exit::HEADER_INVALID,
        Error::MalformedHeader => exit::HEADER_MALFORMED,
        Error::ZeroCapacity
        | Error::CapacityTooLarge(_)
        | Error::IndexOutOfRange { .. }
        | Error::EmptyRecipientSet => exit::ARGUMENT,
        Error::MissingPublicKey(_) => exit::UNKNOWN_USER,
        Error::MalformedPublicKey(_) | Error::KeyIndexMismatch { .. } | Error::CapacityMismatch { .. } => {
            exit::PUBLIC_KEY_INVALID
        }
        Error::Ots(_) => exit::INTERNAL,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = match &e {
            Error::NotRecipient(i) => format!("index not in recipient set (user {i})"),
            Error::InvalidSignature => "header signature verification failed".to_string(),
            Error::InvalidHeader => "semi-static header validity check failed".to_string(),
            Error::MalformedHeader => "header does not match the recipient set".to_string(),
            other => other.to_string(),
        };
        CliError::new(scheme_code(&e), message)
    }
}

impl From<DirError> for CliError {
    fn from(e: DirError) -> Self {
        let code = match &e {
            DirError::Io { .. } => exit::IO,
            DirError::Exists(_) | DirError::NotInitialized(_) => exit::DIRECTORY,
            DirError::Decode { .. } | DirError::IndexMismatch { .. } => exit::DECODE,
            DirError::UserExists(_) => exit::USER_EXISTS,
            DirError::UnknownUser(_) | DirError::NoSecretKey(_) => exit::UNKNOWN_USER,
            DirError::InvalidPublicKey(_) => exit::PUBLIC_KEY_INVALID,
            DirError::Scheme(inner) => return CliError::from(inner.clone()),
        };
        CliError::new(code, e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Dir(d) => d.into(),
            BenchError::Scheme(s) => s.into(),
            other => CliError::new(exit::ARGUMENT, other.to_string()),
        }
    }
}

/// Either the operating system's generator or a seeded stream.
pub enum CliRng {
    Os(OsRng),
    Seeded(Box<ChaCha20Rng>),
}

impl RngCore for CliRng {
    fn next_u32(&mut self) -> u32 {
        match self {
            CliRng::Os(r) => r.next_u32(),
            CliRng::Seeded(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match self {
            CliRng::Os(r) => r.next_u64(),
            CliRng::Seeded(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        match self {
            CliRng::Os(r) => r.fill_bytes(dest),
            CliRng::Seeded(r) => r.fill_bytes(dest),
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        match self {
            CliRng::Os(r) => r.try_fill_bytes(dest),
            CliRng::Seeded(r) => r.try_fill_bytes(dest),
        }
    }
}

impl CryptoRng for CliRng {}

/// Randomness streams, one per command so that seeded runs of different
/// commands never share output. Keygen streams also carry the user index.
pub mod stream {
    pub const SETUP: u64 = 1;
    pub const KEYGEN: u64 = 2 << 32;
    pub const VERIFY: u64 = 3;
    pub const ENCAPS: u64 = 4;
    pub const DECAPS: u64 = 5;
    pub const BENCH: u64 = 6;
    pub const TAMPER: u64 = 7;
}

/// The generator a seeded command uses: ChaCha20 keyed by the seed
/// (right-padded with zeros to 32 bytes) on the given stream.
pub fn seeded_rng(seed: &[u8], stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..seed.len()].copy_from_slice(seed);
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

pub fn parse_seed(hex_seed: &str) -> Result<Vec<u8>, CliError> {
    let bytes = hex::decode(hex_seed).map_err(|e| CliError::new(exit::USAGE, format!("--seed: {e}")))?;
    if bytes.is_empty() || bytes.len() > 32 {
        return Err(CliError::new(exit::USAGE, "--seed takes 1 to 32 bytes of hex"));
    }
    Ok(bytes)
}

/// Parses "1,3,4" into a recipient set; rejects empty sets and duplicates.
pub fn parse_set(s: &str) -> Result<BTreeSet<usize>, CliError> {
    let mut set = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i: usize = part
            .parse()
            .map_err(|_| CliError::new(exit::ARGUMENT, format!("bad index {part:?} in set")))?;
        if !set.insert(i) {
            return Err(CliError::new(exit::ARGUMENT, format!("index {i} repeated in set")));
        }
    }
    if set.is_empty() {
        return Err(CliError::new(exit::ARGUMENT, "recipient set is empty"));
    }
    Ok(set)
}

pub fn format_set(set: &BTreeSet<usize>) -> String {
    set.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn set_sidecar(header: &Path) -> PathBuf {
    let mut name = header.as_os_str().to_owned();
    name.push(".set");
    PathBuf::from(name)
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, CliError> {
    let sizes: Vec<usize> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| CliError::new(exit::ARGUMENT, format!("bad size {p:?}"))))
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() {
        return Err(CliError::new(exit::ARGUMENT, "no sizes given"));
    }
    Ok(sizes)
}

struct Ctx {
    seed: Option<Vec<u8>>,
}

impl Ctx {
    fn rng(&self, stream: u64) -> CliRng {
        match &self.seed {
            Some(seed) => CliRng::Seeded(Box::new(seeded_rng(seed, stream))),
            None => CliRng::Os(OsRng),
        }
    }
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::new(exit::IO, format!("standard output: {e}"))
}

/// Runs one command, writing its report to `out`. Returns the exit code for
/// outcomes that are not errors (verify-key answering 0, a failing tamper
/// suite).
pub fn run(cli: Cli, out: &mut impl Write) -> Result<u8, CliError> {
    #[cfg(feature = "test-seed")]
    let seed = cli.seed.as_deref().map(parse_seed).transpose()?;
    #[cfg(not(feature = "test-seed"))]
    let seed = None;
    let ctx = Ctx { seed };

    match cli.command {
        Command::Setup { users, out: root, force } => {
            let dir = KeyDirectory::create(&root, users, force, &mut ctx.rng(stream::SETUP))?;
            let pp = dir.params();
            let pp_len = pp.encode().len();
            writeln!(out, "wrote {} ({pp_len} bytes)", dir.pp_path().display()).map_err(out_err)?;
            writeln!(out, "users (L): {}", dir.capacity()).map_err(out_err)?;
            writeln!(out, "semi-static capacity (2L): {}", pp.capacity()).map_err(out_err)?;
            writeln!(out, "group encodings: G1 {G1_BYTES} B, G2 {G2_BYTES} B, GT {GT_BYTES} B").map_err(out_err)?;
            writeln!(
                out,
                "elements: g, A x{} and B, B_k x{} in G1; g-hat, A-hat x{} in G2; Omega in GT",
                pp.a_len(),
                pp.b_k_map().len(),
                pp.a_hat_map().len()
            )
            .map_err(out_err)?;
            Ok(exit::OK)
        }
        Command::Keygen { dir, index } => {
            let dir = KeyDirectory::open(&dir)?;
            dir.add_user(index, &mut ctx.rng(stream::KEYGEN | index as u64))?;
            writeln!(
                out,
                "user {index}: wrote {} and {}",
                dir.public_key_path(index).display(),
                dir.secret_key_path(index).display()
            )
            .map_err(out_err)?;
            Ok(exit::OK)
        }
        Command::VerifyKey { dir, index } => {
            let dir = KeyDirectory::open(&dir)?;
            let verdict = match dir.public_key(index) {
                Ok(upk) => ad::is_valid(index, &upk, dir.params(), &mut ctx.rng(stream::VERIFY)),
                Err(e @ (DirError::Decode { .. } | DirError::IndexMismatch { .. })) => {
                    eprintln!("{e}");
                    false
                }
                Err(e) => return Err(e.into()),
            };
            writeln!(out, "{}", u8::from(verdict)).map_err(out_err)?;
            Ok(if verdict { exit::OK } else { exit::KEY_INVALID })
        }
        Command::Encaps { dir, set, au, out: header_path, key_out } => {
            let dir = KeyDirectory::open(&dir)?;
            let set = parse_set(&set)?;
            let mut rng = ctx.rng(stream::ENCAPS);
            let pks = dir.public_keys(&set)?;
            for (j, pk) in &pks {
                if !ad::is_valid(*j, pk, dir.params(), &mut rng) {
                    return Err(DirError::InvalidPublicKey(*j).into());
                }
            }
            let (header, key) = ad::encaps(&set, &pks, dir.params(), au.as_bytes(), &mut rng)?;
            let bytes = header.encode();
            write_atomic(&header_path, &bytes, false)?;
            write_atomic(&set_sidecar(&header_path), format!("{}\n", format_set(&set)).as_bytes(), false)?;
            let key_hex = hex::encode(key.as_bytes());
            match key_out {
                Some(path) => {
                    write_atomic(&path, format!("{key_hex}\n").as_bytes(), true)?;
                    writeln!(out, "header: {} ({} bytes)", header_path.display(), bytes.len()).map_err(out_err)?;
                }
                None => writeln!(out, "{key_hex}").map_err(out_err)?,
            }
            Ok(exit::OK)
        }
        Command::Decaps { dir, index, header, set, au } => {
            let dir = KeyDirectory::open(&dir)?;
            let set = match set {
                Some(s) => parse_set(&s)?,
                None => {
                    let sidecar = set_sidecar(&header);
                    let text = std::fs::read_to_string(&sidecar).map_err(|e| {
                        CliError::new(exit::ARGUMENT, format!("no recipient set: pass --set or provide {} ({e})", sidecar.display()))
                    })?;
                    parse_set(text.trim())?
                }
            };
            if !set.contains(&index) {
                return Err(Error::NotRecipient(index).into());
            }
            let ch: CiphertextHeaderAD = read_object(&header)?;
            let usk = dir.secret_key(index)?;
            let pks = dir.public_keys(&set)?;
            let key = ad::decaps(&set, &ch, index, &usk, &pks, dir.params(), au.as_bytes(), &mut ctx.rng(stream::DECAPS))?;
            writeln!(out, "{}", hex::encode(key.as_bytes())).map_err(out_err)?;
            Ok(exit::OK)
        }
        Command::Bench { dir, sizes, reps } => {
            let sizes = parse_sizes(&sizes)?;
            let mut rng = ctx.rng(stream::BENCH);
            writeln!(out, "{}", bench::CSV_HEADER).map_err(out_err)?;
            for l in sizes {
                let row = bench::fresh_row(l, reps, &mut rng)?;
                writeln!(out, "{}", row.csv_line()).map_err(out_err)?;
            }
            if let Some(dir) = dir {
                let dir = KeyDirectory::open(&dir)?;
                let row = bench::directory_row(&dir, reps, &mut rng)?;
                writeln!(out, "{}", row.csv_line()).map_err(out_err)?;
            }
            Ok(exit::OK)
        }
        Command::TamperSuite { dir } => {
            let dir = KeyDirectory::open(&dir)?;
            let results = tamper::run_suite(&dir, &mut ctx.rng(stream::TAMPER))?;
            for r in &results {
                writeln!(out, "{}", r.line()).map_err(out_err)?;
            }
            let passed = results.iter().filter(|r| r.passed).count();
            writeln!(out, "passed {passed}/{}", results.len()).map_err(out_err)?;
            Ok(if passed == results.len() { exit::OK } else { exit::TAMPER_FAILED })
        }
    }
}
