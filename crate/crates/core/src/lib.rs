//! Psychometric test-quality algorithms.
//!
//! Classical item analysis, Fisher-z confidence screening of items,
//! measurement resolution in entropy quanta, guessing correction, joint
//! maximum-likelihood IRT calibration with misfit down-weighting and
//! extreme-score remedies, and a seeded Monte Carlo harness.
//!
//! The crate is `no_std` and needs only `alloc`; file formats and the
//! command line live in the `testgauge` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classical;
pub mod error;
pub mod guessing;
pub mod irt;
pub mod math;
pub mod quanta;
pub mod response;
pub mod screening;
pub mod simulation;

pub use error::{Error, Result};
pub use response::{
    validate_matrix, FormatFamily, FormatMap, ItemFormat, OmitPolicy, ResponseCell, ResponseMatrix, ValidationReport,
};
