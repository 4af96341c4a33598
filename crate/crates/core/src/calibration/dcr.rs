//! Dark-count rates, bad-pixel classification and bad-pixel interpolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::background::tail_mean;
use crate::error::{Error, Result};
use crate::histogram::cube::TimeHistogramCube;

/// Pixels counting more than this many dark counts per second are bad.
pub const DEFAULT_DCR_THRESHOLD: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcrMap {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, counts per second.
    pub rates: Vec<f64>,
    pub bad_mask: Vec<bool>,
    pub threshold: f64,
}

impl DcrMap {
    pub fn from_rates(rows: usize, cols: usize, rates: Vec<f64>, threshold: f64) -> Result<Self> {
        if rates.len() != rows * cols {
            return Err(Error::invalid(
                "dcr map",
                format!("{} rates for a {rows}×{cols} array", rates.len()),
            ));
        }
        let bad_mask = rates.iter().map(|&r| r > threshold).collect();
        Ok(Self {
            rows,
            cols,
            rates,
            bad_mask,
            threshold,
        })
    }

    /// Re-classify against another threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self::from_rates(self.rows, self.cols, self.rates.clone(), threshold).expect("shape unchanged")
    }

    pub fn bad_count(&self) -> usize {
        self.bad_mask.iter().filter(|&&b| b).count()
    }

    /// Fraction of pixels whose rate is strictly below `rate`.
    pub fn fraction_below(&self, rate: f64) -> f64 {
        if self.rates.is_empty() {
            return 0.0;
        }
        self.rates.iter().filter(|&&r| r < rate).count() as f64 / self.rates.len() as f64
    }
}

fn check_exposure(exposure_s: f64) -> Result<()> {
    if !(exposure_s > 0.0 && exposure_s.is_finite()) {
        return Err(Error::domain(format!("exposure must be positive, got {exposure_s} s")));
    }
    Ok(())
}

/// Dark-count rates from a covered-sensor acquisition: total counts / exposure.
pub fn estimate_dcr(dark: &TimeHistogramCube, exposure_s: f64) -> Result<DcrMap> {
    check_exposure(exposure_s)?;
    let rates = (0..dark.pixel_count())
        .map(|p| dark.pixel_total(p) / exposure_s)
        .collect();
    DcrMap::from_rates(dark.rows(), dark.cols(), rates, DEFAULT_DCR_THRESHOLD)
}

/// Background rates from the signal-free tail of an illuminated acquisition,
/// for when no dark cube exists. Includes ambient light.
pub fn estimate_dcr_from_tail(cube: &TimeHistogramCube, exposure_s: f64, tail_fraction: f64) -> Result<DcrMap> {
    check_exposure(exposure_s)?;
    let bins = cube.bins() as f64;
    let rates = (0..cube.pixel_count())
        .map(|p| Ok(tail_mean(&cube.pixel_real(p)?, tail_fraction) * bins / exposure_s))
        .collect::<Result<Vec<_>>>()?;
    DcrMap::from_rates(cube.rows(), cube.cols(), rates, DEFAULT_DCR_THRESHOLD)
}

/// Good pixels used to replace bad pixel `(row, col)`: the 8-neighborhood,
/// widened one ring at a time until it holds at least one good pixel.
pub fn replacement_neighbors(rows: usize, cols: usize, bad_mask: &[bool], row: usize, col: usize) -> Vec<usize> {
    let reach = rows.max(cols);
    for radius in 1..=reach {
        let r0 = row.saturating_sub(radius);
        let r1 = (row + radius).min(rows - 1);
        let c0 = col.saturating_sub(radius);
        let c1 = (col + radius).min(cols - 1);
        let good: Vec<usize> = (r0..=r1)
            .flat_map(|r| (c0..=c1).map(move |c| r * cols + c))
            .filter(|&p| !bad_mask[p])
            .collect();
        if !good.is_empty() {
            return good;
        }
    }
    Vec::new()
}

/// Replace every bad pixel's histogram, bin-wise, by the mean of its good
/// neighbors (see [`replacement_neighbors`]). Returns a real-kind cube.
pub fn interpolate_bad_pixels(cube: &TimeHistogramCube, bad_mask: &[bool]) -> Result<TimeHistogramCube> {
    let pixels = cube.pixel_count();
    if bad_mask.len() != pixels {
        return Err(Error::invalid(
            "bad mask",
            format!("{} entries for {pixels} pixels", bad_mask.len()),
        ));
    }
    let src = cube.to_real()?;
    if !bad_mask.iter().any(|&b| b) {
        return cube.with_real_data(src);
    }
    if bad_mask.iter().all(|&b| b) {
        return Err(Error::AllPixelsBad(pixels));
    }
    let bins = cube.bins();
    let (rows, cols) = (cube.rows(), cube.cols());
    let mut out = src.clone();
    out.par_chunks_mut(bins).enumerate().for_each(|(p, dst)| {
        if !bad_mask[p] {
            return;
        }
        let good = replacement_neighbors(rows, cols, bad_mask, p / cols, p % cols);
        let inv = 1.0 / good.len() as f64;
        for (b, x) in dst.iter_mut().enumerate() {
            *x = good.iter().map(|&q| src[q * bins + b]).sum::<f64>() * inv;
        }
    });
    cube.with_real_data(out)
}
