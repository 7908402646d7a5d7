//! Exact computations with smooth mod-p representations of GL₂ over a
//! non-archimedean local field: weights of KZ, ball-truncated compact
//! induction, the Hecke operator T and the operator S, quotient
//! representations, invariant subspaces, and canonical-diagram data.
//!
//! Everything is exact arithmetic over small finite fields; all public
//! values are immutable after construction and safe to share across
//! threads.

pub mod error;
pub mod cind;
pub mod diagram;
pub mod gl2;
pub mod weights;
pub mod linalg;
pub mod subspace;
pub mod localring;
pub mod oracle;
pub mod quotient;

pub use error::{Error, Result};
