//! Moment-method bounds on the p-satisfiability threshold of regular random
//! k-SAT formulas.
//!
//! Every literal of a regular formula appears in exactly `r` clauses, so the
//! clause density is `alpha = 2r/k`. An assignment is *p-satisfying* when it
//! satisfies a `c(p) = 1 - 2^-k + p 2^-k` fraction of the clauses.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: problem parameters and scalar helpers.
//! - [`genfunc`]: exact generating functions and exact finite-`n` moments.
//! - [`asymptotics`]: Hayman / multivariate saddle-point machinery and the
//!   second-moment growth-rate surface.
//! - [`bounds`]: the first-moment upper bound, the dominance scan and the
//!   search for the critical literal degree.
//! - [`formula`]: configuration-model formula generation and DIMACS I/O.
//! - [`maxsat`]: exhaustive and local-search max-sat plus p-sat experiments.

pub mod asymptotics;
pub mod bounds;
pub mod error;
pub mod formula;
pub mod genfunc;
pub mod maxsat;
pub mod params;

pub use error::{Error, Result};
pub use params::{binary_entropy, c_of_p, Params};
