//! Photon transmission through layered magneto-refractive structures read out
//! by a Faraday-rotation clock.
//!
//! The crate computes the complex transmission amplitude of a dielectric
//! stack, its multiple-reflection path expansion, the traversal times read
//! out by the clock, the polarimetric measurement statistics of the read-out
//! schemes, and CHSH correlations of photon pairs where one photon crosses
//! the stack.

// Negated float comparisons are used on purpose so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod clock;
pub mod config;
pub mod error;
pub mod jet;
pub mod medium;
pub mod output;
pub mod paths;
pub mod polarimetry;
pub mod readout;
pub mod run;
pub mod scatter;

pub use error::{Error, Result};
pub use medium::{ClockSetting, Layer, StructureSpec};
