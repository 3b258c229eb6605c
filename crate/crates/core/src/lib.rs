//! Exact finite unitary groups acting on C², their invariant theory and
//! singularity resolutions, and numerical certificates for the symplectic
//! forms used to resolve 4-dimensional orbifolds.

pub mod cyclotomic;
pub mod error;
pub mod groups;
pub mod invariants;
pub mod isotropy;
pub mod resolution;
pub mod symp;
pub mod unitary;

pub use error::{Error, Result};
