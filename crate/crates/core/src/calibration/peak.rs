//! First-scatter peak detection with sub-bin position and width.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open bin range `[start, end)` searched for the first-scatter peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub start: usize,
    pub end: usize,
}

pub const DEFAULT_GATE_BINS: usize = 200;

impl Default for Gate {
    fn default() -> Self {
        Self {
            start: 0,
            end: DEFAULT_GATE_BINS,
        }
    }
}

impl Gate {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    /// The gate clipped to a histogram of `bins` bins; empty or out-of-range gates are errors.
    pub fn within(self, bins: usize) -> Result<Gate> {
        let end = self.end.min(bins);
        if self.start >= end {
            return Err(Error::domain(format!(
                "gate [{}, {}) is empty within a {bins}-bin histogram",
                self.start, self.end
            )));
        }
        Ok(Gate { start: self.start, end })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Argmax within the gate, smallest index on ties.
    pub bin: usize,
    /// Parabolic refinement of `bin`.
    pub subbin: f64,
    pub height: f64,
    /// Full width at half maximum, bins.
    pub fwhm_bins: f64,
}

impl Peak {
    pub fn fwhm_ps(&self, bin_width_ps: f64) -> f64 {
        self.fwhm_bins * bin_width_ps
    }
}

/// Locate the first-scatter peak of one histogram.
///
/// The width is measured between the half-maximum crossings on either side,
/// each found by linear interpolation; a crossing that never happens is taken
/// at the histogram edge.
pub fn detect_first_scatter_peak(hist: &[f64], gate: Gate) -> Result<Peak> {
    let gate = gate.within(hist.len())?;
    let no_peak = || Error::NoPeak {
        pixel: None,
        start: gate.start,
        end: gate.end,
    };
    let mut bin = gate.start;
    for b in gate.start..gate.end {
        if hist[b] > hist[bin] {
            bin = b;
        }
    }
    let y0 = hist[bin];
    if !(y0 > 0.0) {
        return Err(no_peak());
    }

    let subbin = if bin > 0 && bin + 1 < hist.len() {
        let (ym, yp) = (hist[bin - 1], hist[bin + 1]);
        let denom = ym - 2.0 * y0 + yp;
        if denom < 0.0 {
            bin as f64 + (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
        } else {
            bin as f64
        }
    } else {
        bin as f64
    };

    let half = 0.5 * y0;
    let mut left = 0.0;
    let mut k = bin;
    while k > 0 {
        if hist[k - 1] <= half {
            let (a, b) = (hist[k - 1], hist[k]);
            left = (k - 1) as f64 + (half - a) / (b - a);
            break;
        }
        k -= 1;
    }
    let mut right = (hist.len() - 1) as f64;
    let mut k = bin;
    while k + 1 < hist.len() {
        if hist[k + 1] <= half {
            let (a, b) = (hist[k], hist[k + 1]);
            right = k as f64 + (a - half) / (a - b);
            break;
        }
        k += 1;
    }

    Ok(Peak {
        bin,
        subbin,
        height: y0,
        fwhm_bins: right - left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::instrument::gaussian_kernel;

    fn impulse(at: usize, n: usize) -> Vec<f64> {
        let mut h = vec![0.0; n];
        h[at] = 1.0;
        h
    }

    #[test]
    fn pure_impulse_is_one_bin_wide() {
        let p = detect_first_scatter_peak(&impulse(100, 256), Gate::default()).unwrap();
        assert_eq!(p.bin, 100);
        assert_eq!(p.subbin, 100.0);
        assert_eq!(p.fwhm_bins, 1.0);
    }

    #[test]
    fn three_bin_gaussian_is_about_165_ps() {
        let k = gaussian_kernel(3.0);
        let mut h = vec![0.0; 256];
        let half = k.len() / 2;
        for (i, &w) in k.iter().enumerate() {
            h[100 + i - half] = w;
        }
        let p = detect_first_scatter_peak(&h, Gate::default()).unwrap();
        assert_eq!(p.bin, 100);
        let ps = p.fwhm_ps(55.0);
        assert!((ps - 165.0).abs() < 16.5, "{ps}");
    }

    #[test]
    fn ties_go_to_the_earliest_bin() {
        let mut h = vec![0.0; 256];
        h[90] = 5.0;
        h[110] = 5.0;
        assert_eq!(detect_first_scatter_peak(&h, Gate::default()).unwrap().bin, 90);
    }

    #[test]
    fn empty_gate_window_has_no_peak() {
        let mut h = vec![0.0; 256];
        h[220] = 9.0;
        match detect_first_scatter_peak(&h, Gate::default()) {
            Err(Error::NoPeak { pixel: None, start: 0, end: 200 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn subbin_tracks_an_asymmetric_peak() {
        let mut h = vec![0.0; 64];
        h[19] = 0.5;
        h[20] = 1.0;
        h[21] = 0.8;
        let p = detect_first_scatter_peak(&h, Gate::new(0, 64)).unwrap();
        assert!(p.subbin > 20.0 && p.subbin < 20.5, "{}", p.subbin);
    }

    #[test]
    fn gate_outside_histogram_is_rejected() {
        assert!(detect_first_scatter_peak(&[1.0; 10], Gate::new(20, 30)).is_err());
    }
}
