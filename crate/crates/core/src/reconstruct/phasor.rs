//! Phasor-field reconstruction: histograms modulated by a virtual wavelet and
//! propagated into the volume as a complex wave.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::cube::{TimeHistogramCube, ValueKind};
use crate::histogram::geometry::SceneGeometry;
use crate::histogram::units::{meters_per_bin, SPEED_OF_LIGHT};
use crate::histogram::volume::VoxelVolume;
use crate::metrics::{iou, peak_to_background, threshold_mask, DEFAULT_THRESHOLD};
use crate::reconstruct::fbp::{check_inputs, ReconstructionSpec};
use crate::reconstruct::kernel::Gather;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasorParams {
    /// Virtual wavelength, meters.
    pub lambda: f64,
    /// Wavelet length in wavelengths.
    pub sigma: f64,
}

impl PhasorParams {
    pub fn new(lambda: f64, sigma: f64) -> Self {
        Self { lambda, sigma }
    }

    pub fn validate(&self, bin_width_ps: f64) -> Result<()> {
        if !(self.lambda > 0.0 && self.sigma > 0.0 && self.lambda.is_finite() && self.sigma.is_finite()) {
            return Err(Error::domain(format!(
                "lambda and sigma must be positive, got λ = {} m, σ = {}",
                self.lambda, self.sigma
            )));
        }
        let nyquist = 2.0 * meters_per_bin(bin_width_ps);
        if self.lambda < nyquist {
            return Err(Error::domain(format!(
                "λ = {:.4} m aliases on {bin_width_ps} ps bins; it must be at least {nyquist:.4} m",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Complex wavelet sampled at the histogram bin spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualWavelet {
    pub samples: Vec<Complex64>,
    pub center: usize,
}

/// Number of wavelet samples: σ·λ/(c·Δt) rounded, bumped to the next odd count.
pub fn wavelet_len(params: PhasorParams, bin_width_ps: f64) -> usize {
    let n = (params.sigma * params.lambda / meters_per_bin(bin_width_ps)).round().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Gaussian-windowed carrier at c/λ with total support σ·λ/c (±3 standard
/// deviations), mean-subtracted and scaled to unit energy.
pub fn make_wavelet(params: PhasorParams, bin_width_ps: f64) -> Result<VirtualWavelet> {
    params.validate(bin_width_ps)?;
    let n = wavelet_len(params, bin_width_ps);
    let center = n / 2;
    let dt = bin_width_ps * 1e-12;
    let support = params.sigma * params.lambda / SPEED_OF_LIGHT;
    let s = support / 6.0;
    let mut samples: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = (k as f64 - center as f64) * dt;
            let phase = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * t / params.lambda;
            Complex64::from_polar((-t * t / (2.0 * s * s)).exp(), phase)
        })
        .collect();
    let mean = samples.iter().sum::<Complex64>() / n as f64;
    samples.iter_mut().for_each(|z| *z -= mean);
    let energy = samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(energy > 0.0) {
        return Err(Error::domain(format!(
            "wavelet for λ = {} m, σ = {} vanishes after mean removal",
            params.lambda, params.sigma
        )));
    }
    samples.iter_mut().for_each(|z| *z /= energy);
    Ok(VirtualWavelet { samples, center })
}

/// Convolve every pixel with the wavelet: `out[j] = Σ_k w[k]·h[j − k + center]`,
/// zero outside the histogram. Output is complex-kind with the input's alignment.
pub fn phasor_transform(cube: &TimeHistogramCube, wavelet: &VirtualWavelet) -> Result<TimeHistogramCube> {
    let bins = cube.bins();
    if wavelet.samples.len() > bins {
        return Err(Error::invalid(
            "wavelet",
            format!("{} samples exceed the {bins}-bin histogram", wavelet.samples.len()),
        ));
    }
    let src = cube.to_real()?;
    let c = wavelet.center as i64;
    let mut out = vec![Complex64::default(); src.len()];
    out.par_chunks_mut(bins)
        .zip(src.par_chunks(bins))
        .for_each(|(dst, hist)| {
            for (m, &h) in hist.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                for (k, &w) in wavelet.samples.iter().enumerate() {
                    let j = m as i64 + k as i64 - c;
                    if (0..bins as i64).contains(&j) {
                        dst[j as usize] += w * h;
                    }
                }
            }
        });
    cube.with_complex_data(out)
}

/// Complex back projection of a phasor cube.
pub fn propagate(cube: &TimeHistogramCube, geometry: &SceneGeometry, spec: &ReconstructionSpec) -> Result<VoxelVolume> {
    check_inputs(cube, geometry, spec)?;
    let crate::histogram::cube::CubeData::Complex(hists) = cube.data() else {
        return Err(Error::invalid("cube", "propagation needs a complex cube"));
    };
    let values = Gather {
        hists,
        bins: cube.bins(),
        bin_width_ps: cube.bin_width_ps(),
        pixels: geometry.pixel_points(),
        spot: geometry.laser_spot(),
        attenuation: spec.attenuation_compensation,
    }
    .run(&spec.grid);
    VoxelVolume::complex(spec.grid, values)
}

/// |propagate(phasor_transform(cube, make_wavelet(params)))| as a real volume.
pub fn reconstruct_phasor(
    cube: &TimeHistogramCube,
    geometry: &SceneGeometry,
    spec: &ReconstructionSpec,
    params: PhasorParams,
) -> Result<VoxelVolume> {
    if cube.kind() == ValueKind::Complex {
        return Err(Error::invalid("cube", "phasor reconstruction starts from counts or real data"));
    }
    check_inputs(cube, geometry, spec)?;
    let wavelet = make_wavelet(params, cube.bin_width_ps())?;
    let field = propagate(&phasor_transform(cube, &wavelet)?, geometry, spec)?;
    VoxelVolume::real(*field.grid(), field.magnitude())
}

/// Wavelengths and cycle counts of the published 3 × 3 parameter study.
pub const STUDY_LAMBDAS: [f64; 3] = [0.10, 0.08, 0.06];
pub const STUDY_SIGMAS: [f64; 3] = [3.0, 4.0, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub sigma: f64,
    /// `None` when the median magnitude is zero.
    pub peak_to_background: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou: Option<f64>,
}

/// Reconstruct every (λ, σ) pair, σ-major, and score each volume. `visit`
/// sees each entry with its volume, e.g. to export projections.
pub fn parameter_sweep_with(
    cube: &TimeHistogramCube,
    geometry: &SceneGeometry,
    spec: &ReconstructionSpec,
    lambdas: &[f64],
    sigmas: &[f64],
    truth: Option<&[bool]>,
    mut visit: impl FnMut(&SweepEntry, &VoxelVolume) -> Result<()>,
) -> Result<Vec<SweepEntry>> {
    if lambdas.is_empty() || sigmas.is_empty() {
        return Err(Error::domain("parameter sweep needs at least one λ and one σ"));
    }
    let bw = cube.bin_width_ps();
    for &lambda in lambdas {
        for &sigma in sigmas {
            PhasorParams::new(lambda, sigma).validate(bw)?;
        }
    }
    let mut entries = Vec::with_capacity(lambdas.len() * sigmas.len());
    for &sigma in sigmas {
        for &lambda in lambdas {
            let volume = reconstruct_phasor(cube, geometry, spec, PhasorParams::new(lambda, sigma))?;
            let values = volume.as_real().expect("magnitude volume");
            let entry = SweepEntry {
                lambda,
                sigma,
                peak_to_background: peak_to_background(values),
                iou: truth.map(|t| iou(&threshold_mask(values, DEFAULT_THRESHOLD), t)),
            };
            visit(&entry, &volume)?;
            entries.push(entry);
        }
    }
    Ok(entries)
}

pub fn parameter_sweep(
    cube: &TimeHistogramCube,
    geometry: &SceneGeometry,
    spec: &ReconstructionSpec,
    lambdas: &[f64],
    sigmas: &[f64],
    truth: Option<&[bool]>,
) -> Result<Vec<SweepEntry>> {
    parameter_sweep_with(cube, geometry, spec, lambdas, sigmas, truth, |_, _| Ok(()))
}
