//! Elephant random walk on the infinite dihedral group `D∞ = Z2 * Z2`.
//!
//! The walker lives on reduced words over the involutions `a` and `b`. At
//! step `n + 1` it repeats a uniformly remembered past step with probability
//! `p`, or takes its complement otherwise. This crate holds the pure,
//! allocation-light parts of the model:
//!
//! * [`word`]: letters, reduced words, word metric and signed location.
//! * [`walk`]: the elephant sampler and full-word traces.
//! * [`coupled`]: the integer walks `W_n`, `S_n` and the Doob decomposition
//!   `S_n = Ξ_n + q·Z̃_n` tracked along a path.
//! * [`moments`]: exact second moments of the coupled walk.
//! * [`enumerate`]: brute-force enumeration of every letter sequence.
//! * [`quadrature`], [`variance`], [`hypergeometric`]: endpoint-singular
//!   integrals for the limiting variance.
//!
//! The crate is `no_std` and needs only `alloc`. Randomness is injected
//! through [`rand_core::RngCore`].

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod coupled;
pub mod enumerate;
mod error;
pub mod hypergeometric;
pub mod moments;
mod params;
pub mod quadrature;
pub mod special;
pub mod sum;
pub mod variance;
pub mod walk;
pub mod word;

pub use error::{Error, Result};
pub use params::MemoryParams;
