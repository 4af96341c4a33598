//! Physical constants and time/distance conversions.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const PS: f64 = 1e-12;

/// Physical constants used by every time↔distance conversion in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    c: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants { c: SPEED_OF_LIGHT };

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Optical path length (meters) travelled during `bin_index` bins of `bin_width_ps`.
pub fn bin_to_path_length(bin_index: i64, bin_width_ps: f64) -> Result<f64> {
    if bin_index < 0 {
        return Err(Error::domain(format!(
            "bin index must be non-negative, got {bin_index}"
        )));
    }
    check_bin_width(bin_width_ps)?;
    Ok(bin_index as f64 * bin_width_ps * PS * SPEED_OF_LIGHT)
}

/// Path length (meters) covered by one bin.
pub fn meters_per_bin(bin_width_ps: f64) -> f64 {
    bin_width_ps * PS * SPEED_OF_LIGHT
}

/// Fractional bin position of a path length (meters).
#[inline]
pub fn path_to_bins(path_m: f64, bin_width_ps: f64) -> f64 {
    path_m / meters_per_bin(bin_width_ps)
}

pub(crate) fn check_bin_width(bin_width_ps: f64) -> Result<()> {
    if !(bin_width_ps > 0.0 && bin_width_ps.is_finite()) {
        return Err(Error::domain(format!(
            "bin width must be positive and finite, got {bin_width_ps} ps"
        )));
    }
    Ok(())
}
