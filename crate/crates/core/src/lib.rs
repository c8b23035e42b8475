//! Exact finite-truncation models of p-typical Witt vectors, perfectoid
//! towers, almost Cohen-Macaulay diagnostics, partial algebra modifications
//! and direct-summand criteria.
//!
//! Every infinite ring is replaced by a finite model fixed by three numbers:
//! the p-adic precision `N`, the level `n` of fractional exponents
//! (denominators `p^n`) and a degree cap `D`. All verdicts are exact inside
//! that model and are reported together with the truncation they refer to.

pub mod almost;
pub mod cli;
pub mod error;
pub mod exactalg;
pub mod modifications;
pub mod splitting;
pub mod towers;
pub mod witt;

pub use error::{Error, Result};
