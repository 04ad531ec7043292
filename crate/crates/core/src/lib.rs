//! Computational toolkit for vector-valued modular forms attached to even
//! lattices: Weil representations, lattice theta series, Hurwitz and Cohen
//! class numbers, Rankin–Cohen brackets, and the higher Siegel theta lift in
//! signature (1,2) together with verifiers for the class number relations it
//! produces.
//!
//! Exact computations run over [`Rat`] (arbitrary precision rationals);
//! numerical ones run in `f64` with an optional double-double path for the
//! few places where cancellation matters.

// index loops mirror the matrix formulas; negated comparisons reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod classical;
pub mod classnum;
pub mod discform;
pub mod error;
pub mod lift;
pub mod numth;
pub mod qexp;
pub mod relations;
pub mod report;
pub mod special;
pub mod thetaser;

pub use error::{Error, Result};
pub use numth::Rat;
pub use qexp::{Coeff, CosetGroup, QSeries};
pub use report::RelationReport;
