//! Scannerless non-line-of-sight imaging with a SPAD array: synthetic
//! three-bounce acquisitions, sensor calibration, and voxel reconstruction by
//! filtered back projection or phasor-field propagation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod forward;
pub mod histogram;
pub mod metrics;
pub mod reconstruct;

pub use error::{Error, Result};
