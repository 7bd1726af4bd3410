//! Distributed broadcast encryption over an asymmetric pairing group.
//!
//! Two key-encapsulation schemes are provided. [`ss`] is the semi-static
//! CCA-secure scheme with constant-size headers and a two-pairing batched
//! public-key check. [`ad`] lifts it to adaptive CCA security by giving each
//! user two slots, encrypting to one slot per user in each of two
//! sub-headers, and binding the whole header with a one-time signature.
//!
//! Users generate their own key pairs; only the public parameters need a
//! trusted setup. All canonical byte formats live in [`codec`], and
//! [`game`] drives the security experiments' bookkeeping with scripted
//! adversaries.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ad;
pub mod codec;
pub mod error;
pub mod groups;
pub mod hashes;
pub mod game;
pub mod ots;
pub mod scheme;
pub mod ske;
pub mod ss;

pub use error::Error;
pub use ss::SessionKey;
