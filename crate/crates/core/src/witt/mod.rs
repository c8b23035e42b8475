//! p-typical Witt vectors of finite length.

mod identities;
mod intpoly;
mod polys;
mod ring;
mod vector;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use identities::{sample_identities, unit_order, IdentityReport};
pub use intpoly::{IntPoly, Key};
pub use polys::{derive_witt_polynomials, ghost_poly, PolyKind};
pub use ring::{Coefficient, RingElem};
pub use vector::{teichmuller, WittVector};

pub const DEFAULT_LENGTH_CAP: usize = 4;

static LENGTH_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_LENGTH_CAP);

/// Largest index `n` accepted by ring operations.
pub fn length_cap() -> usize {
    LENGTH_CAP.load(Ordering::Relaxed)
}

pub fn set_length_cap(cap: usize) {
    LENGTH_CAP.store(cap, Ordering::Relaxed);
}
