//! SPAD-array instrument model: timing response, per-pixel delays, dark and
//! ambient background, detection efficiency and Poisson counting noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::cube::{shift_into, CubeData, TimeHistogramCube, ValueKind};

pub const DEFAULT_JITTER_FWHM_PS: f64 = 150.0;
pub const DEFAULT_LASER_PULSE_FWHM_PS: f64 = 70.0;
pub const DEFAULT_PDE: f64 = 0.28;
pub const DEFAULT_EXPOSURE_S: f64 = 3.0;

/// FWHM of a Gaussian in units of its standard deviation, 2·√(2·ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Instrument imperfections for one acquisition. Per-pixel maps are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Dark counts per second.
    pub dcr: Vec<f64>,
    /// Per-pixel timing offset, bins (later arrival for positive values).
    pub delay: Vec<i64>,
    /// Detector timing jitter τ_D, ps.
    pub jitter_fwhm_ps: f64,
    /// Optional per-pixel jitter overriding `jitter_fwhm_ps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_map_ps: Option<Vec<f64>>,
    /// Laser pulse width τ_L, ps.
    pub laser_pulse_fwhm_ps: f64,
    /// Ambient-light detections per second per pixel.
    pub ambient_rate: f64,
    /// Photon detection efficiency, (0, 1].
    pub pde: f64,
    pub exposure_s: f64,
    pub rng_seed: u64,
}

impl SensorModel {
    /// Ideal-ish sensor for `pixels` pixels: no dark counts, no delays, default
    /// timing response, efficiency and exposure.
    pub fn clean(pixels: usize) -> Self {
        Self {
            dcr: vec![0.0; pixels],
            delay: vec![0; pixels],
            jitter_fwhm_ps: DEFAULT_JITTER_FWHM_PS,
            jitter_map_ps: None,
            laser_pulse_fwhm_ps: DEFAULT_LASER_PULSE_FWHM_PS,
            ambient_rate: 0.0,
            pde: DEFAULT_PDE,
            exposure_s: DEFAULT_EXPOSURE_S,
            rng_seed: 0,
        }
    }

    /// Pass-through instrument: no blur, delay, background or loss, unit exposure.
    pub fn identity(pixels: usize) -> Self {
        Self {
            jitter_fwhm_ps: 0.0,
            laser_pulse_fwhm_ps: 0.0,
            pde: 1.0,
            exposure_s: 1.0,
            ..Self::clean(pixels)
        }
    }

    pub fn validate(&self, pixels: usize) -> Result<()> {
        let check_len = |name: &str, len: usize| {
            if len != pixels {
                Err(Error::invalid(
                    "sensor model",
                    format!("{name} map has {len} entries for {pixels} pixels"),
                ))
            } else {
                Ok(())
            }
        };
        check_len("dcr", self.dcr.len())?;
        check_len("delay", self.delay.len())?;
        if let Some(j) = &self.jitter_map_ps {
            check_len("jitter", j.len())?;
            if j.iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::invalid("sensor model", "jitter must be non-negative"));
            }
        }
        if self.dcr.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || !(self.ambient_rate >= 0.0) {
            return Err(Error::invalid("sensor model", "dark and ambient rates must be non-negative"));
        }
        if !(self.jitter_fwhm_ps >= 0.0 && self.laser_pulse_fwhm_ps >= 0.0) {
            return Err(Error::invalid("sensor model", "timing widths must be non-negative"));
        }
        if !(self.pde > 0.0 && self.pde <= 1.0) {
            return Err(Error::invalid("sensor model", format!("pde {} is outside (0, 1]", self.pde)));
        }
        if !(self.exposure_s > 0.0) {
            return Err(Error::invalid("sensor model", "exposure must be positive"));
        }
        Ok(())
    }

    /// Timing-response FWHM of one pixel, ps: √(τ_L² + τ_D²).
    pub fn response_fwhm_ps(&self, pixel: usize) -> f64 {
        let jitter = self
            .jitter_map_ps
            .as_ref()
            .map_or(self.jitter_fwhm_ps, |m| m[pixel]);
        self.laser_pulse_fwhm_ps.hypot(jitter)
    }

    /// Expected background counts per bin for one pixel.
    pub fn background_per_bin(&self, pixel: usize, bins: usize) -> f64 {
        (self.dcr[pixel] + self.ambient_rate) * self.exposure_s / bins as f64
    }
}

/// Unit-sum Gaussian kernel sampled at integer bin offsets, truncated at ±4σ.
/// Returns `[1.0]` for a zero width.
pub fn gaussian_kernel(fwhm_bins: f64) -> Vec<f64> {
    let sigma = fwhm_bins / FWHM_PER_SIGMA;
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let half = (4.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|x| *x /= sum);
    k
}

/// Same-length convolution with a centered odd kernel, zero outside the histogram.
fn convolve_same(hist: &[f64], kernel: &[f64], out: &mut [f64]) {
    let half = (kernel.len() / 2) as i64;
    let n = hist.len() as i64;
    out.iter_mut().for_each(|x| *x = 0.0);
    for (m, &h) in hist.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        for (k, &w) in kernel.iter().enumerate() {
            let j = m as i64 + k as i64 - half;
            if (0..n).contains(&j) {
                out[j as usize] += h * w;
            }
        }
    }
}

/// Expected detected counts per bin (real-kind): ideal photon rates blurred by
/// the timing response, delayed, scaled by efficiency and exposure, plus
/// uniform dark and ambient background.
pub fn expected_counts(ideal: &TimeHistogramCube, sensor: &SensorModel) -> Result<TimeHistogramCube> {
    if ideal.kind() != ValueKind::Real {
        return Err(Error::invalid("cube", "instrument input must be a real-kind ideal cube"));
    }
    sensor.validate(ideal.pixel_count())?;
    let src = ideal.to_real()?;
    if src.iter().any(|&x| x < 0.0) {
        return Err(Error::invalid("cube", "ideal cube must be non-negative"));
    }
    let bins = ideal.bins();
    let bw = ideal.bin_width_ps();
    let gain = sensor.pde * sensor.exposure_s;
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(bins)
        .zip(src.par_chunks(bins))
        .enumerate()
        .for_each(|(pixel, (dst, hist))| {
            let kernel = gaussian_kernel(sensor.response_fwhm_ps(pixel) / bw);
            let mut blurred = vec![0.0; bins];
            convolve_same(hist, &kernel, &mut blurred);
            shift_into(&blurred, sensor.delay[pixel], 0.0, dst);
            let background = sensor.background_per_bin(pixel, bins);
            dst.iter_mut().for_each(|x| *x = *x * gain + background);
        });
    ideal.with_real_data(out).map(|mut c| {
        c.set_alignment(None);
        c
    })
}

/// RNG stream of one pixel: independent of scheduling and worker count.
pub fn pixel_rng(seed: u64, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pixel as u64);
    rng
}

pub fn sample_poisson<R: Rng>(rng: &mut R, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    draw.min(u32::MAX as f64) as u32
}

/// Counts-kind measurement: Poisson draws around [`expected_counts`], or the
/// expected counts rounded to the nearest integer when `poisson` is false.
pub fn apply_instrument(ideal: &TimeHistogramCube, sensor: &SensorModel, poisson: bool) -> Result<TimeHistogramCube> {
    let expected = expected_counts(ideal, sensor)?;
    let bins = expected.bins();
    let mean = expected.to_real()?;
    let mut counts = vec![0u32; mean.len()];
    if poisson {
        counts
            .par_chunks_mut(bins)
            .zip(mean.par_chunks(bins))
            .enumerate()
            .for_each(|(pixel, (dst, lam))| {
                let mut rng = pixel_rng(sensor.rng_seed, pixel);
                for (c, &m) in dst.iter_mut().zip(lam) {
                    *c = sample_poisson(&mut rng, m);
                }
            });
    } else {
        for (c, &m) in counts.iter_mut().zip(&mean) {
            *c = m.round().min(u32::MAX as f64) as u32;
        }
    }
    TimeHistogramCube::new(
        expected.rows(),
        expected.cols(),
        bins,
        expected.bin_width_ps(),
        CubeData::Counts(counts),
    )
}
