//! Key directory, command-line front end, benchmarks and tamper suite for
//! distributed broadcast encryption, built on `dbe-core`.

pub mod bench;
pub mod cli;
pub mod keydir;
pub mod tamper;
