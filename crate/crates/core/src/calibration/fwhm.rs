//! Timing-response width of every pixel.

use serde::{Deserialize, Serialize};

use crate::calibration::align::detect_peaks;
use crate::calibration::peak::Gate;
use crate::error::{Error, Result};
use crate::histogram::cube::TimeHistogramCube;

/// √(τ_L² + τ_D²) for Gaussian laser and detector responses.
pub fn combined_fwhm(tau_l_ps: f64, tau_d_ps: f64) -> Result<f64> {
    if !(tau_l_ps >= 0.0 && tau_d_ps >= 0.0) {
        return Err(Error::domain(format!(
            "widths must be non-negative, got {tau_l_ps} and {tau_d_ps}"
        )));
    }
    Ok(tau_l_ps.hypot(tau_d_ps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwhmMap {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, picoseconds.
    pub widths_ps: Vec<f64>,
}

impl FwhmMap {
    pub fn mean_ps(&self) -> f64 {
        self.widths_ps.iter().sum::<f64>() / self.widths_ps.len() as f64
    }

    pub fn min_ps(&self) -> f64 {
        self.widths_ps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_ps(&self) -> f64 {
        self.widths_ps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn estimate_fwhm_map(cube: &TimeHistogramCube, gate: Gate) -> Result<FwhmMap> {
    let bw = cube.bin_width_ps();
    let widths_ps = detect_peaks(cube, gate, None)?
        .into_iter()
        .map(|p| p.expect("no pixel skipped").fwhm_ps(bw))
        .collect();
    Ok(FwhmMap {
        rows: cube.rows(),
        cols: cube.cols(),
        widths_ps,
    })
}
