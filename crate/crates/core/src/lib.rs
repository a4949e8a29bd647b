//! Contextuality analysis for ambiguous-language experiments.
//!
//! A Winograd-style schema is compiled into a measurement scenario, judgement
//! data is aggregated into an empirical model, and the model is scored with
//! three measures of contextuality:
//!
//! - the Bell-CHSH violation ([`cbd::chsh_violation`]),
//! - the Contextuality-by-Default `CNT1` measure for cyclic systems ([`cbd::cnt1`]),
//! - the sheaf-theoretic contextual fraction ([`sheaf::contextual_fraction`]),
//!   solved with the dense simplex engine in [`linprog`].
//!
//! [`bootstrap`] estimates the spread of any of these statistics by resampling
//! the per-context response tallies.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the response
//! parser and the command-line tool live in the `wsc` companion crate.

#![no_std]
#![deny(unused_must_use, rust_2018_idioms)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bootstrap;
pub mod cbd;
pub mod empirical;
pub mod ingest;
pub mod linprog;
pub mod scenario;
pub mod schema;
pub mod sheaf;

#[cfg(test)]
pub(crate) mod testutil;

pub use empirical::{Distribution, EmpiricalModel};
pub use scenario::{Context, MeasurementScenario, Observable};

/// Tolerance used when checking that a distribution sums to one.
pub const NORMALISATION_TOL: f64 = 1e-9;

/// Default tolerance for the signalling check.
pub const DEFAULT_SIGNALLING_TOL: f64 = 1e-9;
