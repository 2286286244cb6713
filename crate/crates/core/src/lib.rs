//! Entropy, pseudo-orbit and chain-recurrence analysis for non-autonomous sequences of
//! piecewise-linear interval maps.
//!
//! Start with [`corpus::load_fixture`] or [`sysfile::parse_system_file`] to obtain a
//! [`systems::MapSequence`], then hand it to the estimators in [`bowen`], [`pseudograph`],
//! [`recurrence`] and [`bounds`].

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod bowen;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod growth;
pub mod pseudograph;
pub mod recurrence;
pub mod sysfile;
pub mod systems;

pub use error::{Error, Result};
pub use grid::Grid;
pub use systems::{MapSequence, PiecewiseLinearMap};
