//! Uniform stoquastic local Hamiltonians, their SetCSP equivalents, and
//! the walk-based verification machinery built on top of them.
//!
//! The crate is organized around the life of an instance:
//!
//! - [`instance`]: the data model, validation, and the SetCSP
//!   conversions; [`format`] reads and writes the JSON file formats.
//! - [`decompose`]: groundspace projectors of matrix-form terms, their
//!   non-negative decompositions, and the uniformity certificate.
//! - [`graph`]: the implicit graph on basis strings, neighbor
//!   enumeration, the random walk, and bounded-radius search for bad
//!   strings.
//! - [`expansion`]: subset-state energies, projector action on supports,
//!   the greedy frustrated-layer construction, light cones, and explicit
//!   path reconstruction.
//! - [`verify`]: the NP, negligible-completeness, pinned, commuting, and
//!   Monte Carlo decision procedures.
//! - [`oracle`]: exact desk-scale ground truth via dense or matrix-free
//!   eigensolvers, component enumeration, and brute-force UNSAT.
//! - [`circuit`]: reversible verification circuits and their compilation
//!   into uniform stoquastic instances.

pub mod circuit;
pub mod decompose;
pub mod dits;
pub mod error;
pub mod expansion;
pub mod fixtures;
pub mod format;
pub mod graph;
pub mod instance;
pub mod oracle;
pub mod rng;
pub mod verify;

pub use dits::{Alphabet, DitString};
pub use error::{Error, Result};
pub use instance::{
    BadnessReport, Class, HamiltonianInstance, MatrixTerm, SetConstraint, SetCspInstance, Term,
};
pub use rng::CounterRng;
