//! Removal of the first-scatter signature before reconstruction.

use rayon::prelude::*;

use crate::calibration::background::{tail_median, DEFAULT_TAIL_FRACTION};
use crate::error::{Error, Result};
use crate::histogram::cube::TimeHistogramCube;

/// Replace bins `[reference_bin − guard, reference_bin + guard]` of every
/// pixel by its tail-median background. Returns a real-kind cube.
pub fn strip_first_scatter(cube: &TimeHistogramCube, reference_bin: usize, guard: usize) -> Result<TimeHistogramCube> {
    let bins = cube.bins();
    if reference_bin >= bins {
        return Err(Error::domain(format!(
            "reference bin {reference_bin} is outside a {bins}-bin histogram"
        )));
    }
    let lo = reference_bin.saturating_sub(guard);
    let hi = (reference_bin + guard).min(bins - 1);
    if lo == 0 && hi == bins - 1 {
        return Err(Error::domain(format!(
            "guard of {guard} bins around bin {reference_bin} covers the whole histogram"
        )));
    }
    let mut data = cube.to_real()?;
    data.par_chunks_mut(bins).for_each(|hist| {
        let fill = tail_median(hist, DEFAULT_TAIL_FRACTION);
        hist[lo..=hi].iter_mut().for_each(|x| *x = fill);
    });
    cube.with_real_data(data)
}
