//! Virtual quantum subsystems on finite-dimensional state spaces.
//!
//! Given a set of operationally available observables, this crate builds the
//! `*`-algebra they generate, finds its block structure
//! `(+)_J 1_{n_J} (x) M_{d_J}` and the virtual tensor factors it exhibits,
//! measures entanglement relative to any tensor product structure, and checks
//! holonomic controllability of degenerate eigenspaces.
//!
//! - [`numerics`]: dense complex kernel and tolerance policy
//! - [`algebra`]: closure, commutant, center, structure decomposition, bipartition test
//! - [`tps`]: tensor product structures, relative entanglement, entangling power
//! - [`parity`]: syndrome sectors of commuting parity operators
//! - [`bosonic`]: truncated Fock space and rotated mode families
//! - [`holonomy`]: connections and loop holonomies of iso-degenerate families

pub mod algebra;
pub mod bosonic;
pub mod error;
pub mod holonomy;
pub mod io;
pub mod numerics;
pub mod ops;
pub mod parity;
pub mod random;
pub mod tps;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, Tolerance, C64};
