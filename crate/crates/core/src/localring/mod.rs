//! Exact arithmetic for the coefficient field F_{p^m}, the residue field
//! F_q (q = p^f) and the truncated local ring O/ϖ^N with its Teichmüller
//! section.

pub mod field;
pub mod scalar;

pub use field::{FieldCtx, Fq};
pub use scalar::{Backend, LocalRingCtx, LocalScalar};
