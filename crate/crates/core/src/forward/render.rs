//! Noiseless three-bounce transient rendering.
//!
//! For a wall pixel `w` and a target sample `x` the information-bearing path is
//! laser spot `S` → `x` → `w` → camera. The rendered time axis starts when the
//! light leaves `S`; the wall→camera leg is kept only as its excess over the
//! shortest such leg, which calibration later removes from the geometry.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::target::TargetSurface;
use crate::histogram::cube::{TimeHistogramCube, DEFAULT_BINS, DEFAULT_BIN_WIDTH_PS};
use crate::histogram::geometry::SceneGeometry;
use crate::histogram::units::path_to_bins;

/// Bin of the first-scatter signature before any per-pixel delay.
pub const DEFAULT_FIRST_SCATTER_BIN: usize = 50;
/// First-scatter amplitude relative to the brightest third-bounce bin.
pub const DEFAULT_FIRST_SCATTER_GAIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeSpec {
    pub bins: usize,
    pub bin_width_ps: f64,
}

impl Default for CubeSpec {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            bin_width_ps: DEFAULT_BIN_WIDTH_PS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstScatterAmplitude {
    /// Multiple of the brightest third-bounce bin; 1.0 absolute when the target is empty.
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstScatter {
    pub bin: usize,
    pub amplitude: FirstScatterAmplitude,
}

impl Default for FirstScatter {
    fn default() -> Self {
        Self {
            bin: DEFAULT_FIRST_SCATTER_BIN,
            amplitude: FirstScatterAmplitude::Relative(DEFAULT_FIRST_SCATTER_GAIN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub first_scatter: Option<FirstScatter>,
    /// Add each pixel's wall→camera excess to its third-bounce times.
    pub include_return_leg: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            first_scatter: Some(FirstScatter::default()),
            include_return_leg: true,
        }
    }
}

impl RenderOptions {
    /// Third bounce only, on the calibrated time axis.
    pub fn third_bounce_only() -> Self {
        Self {
            first_scatter: None,
            include_return_leg: false,
        }
    }
}

/// Lambertian three-bounce weight `cosθ₁·cosθ₂ / (r₁²·r₂²)` at the target sample.
#[inline]
pub fn radiometric_weight(cos_in: f64, cos_out: f64, r1: f64, r2: f64) -> f64 {
    cos_in.max(0.0) * cos_out.max(0.0) / (r1 * r1 * r2 * r2)
}

/// Render a real-kind ideal cube: third-bounce returns deposited with linear
/// splitting between the two straddling bins, plus the first-scatter impulse.
pub fn render_ideal_transients(
    geometry: &SceneGeometry,
    target: &TargetSurface,
    spec: &CubeSpec,
    options: &RenderOptions,
) -> Result<TimeHistogramCube> {
    let bins = spec.bins;
    let bw = spec.bin_width_ps;
    let spot = geometry.laser_spot();
    let excess = if options.include_return_leg {
        geometry.return_leg_excess()
    } else {
        vec![0.0; geometry.pixel_count()]
    };
    let max_excess = excess.iter().copied().fold(0.0, f64::max);

    if let Some(fs) = options.first_scatter {
        if fs.bin >= bins {
            return Err(Error::domain(format!(
                "first-scatter bin {} is outside a {bins}-bin histogram",
                fs.bin
            )));
        }
    }

    for (index, p) in target.points().iter().enumerate() {
        let x = p.position;
        if geometry.height_above_wall(x) <= 0.0 {
            return Err(Error::domain(format!(
                "target point {index} at ({:.4}, {:.4}, {:.4}) is not in front of the wall",
                x.x, x.y, x.z
            )));
        }
        let r1 = spot.distance(x);
        let longest = geometry
            .pixel_points()
            .iter()
            .map(|w| x.distance(*w))
            .fold(0.0, f64::max);
        let bin = path_to_bins(r1 + longest + max_excess, bw);
        if bin > (bins - 1) as f64 {
            return Err(Error::PathOutOfSpan {
                index,
                x: x.x,
                y: x.y,
                z: x.z,
                bin,
                bins,
            });
        }
    }

    // Per-sample quantities shared by every pixel.
    let legs: Vec<(f64, f64, f64)> = target
        .points()
        .iter()
        .map(|p| {
            let to_spot = spot - p.position;
            let r1 = to_spot.norm();
            (r1, p.normal.dot(to_spot) / r1, p.albedo)
        })
        .collect();

    let mut data = vec![0.0f64; geometry.pixel_count() * bins];
    data.par_chunks_mut(bins)
        .zip(geometry.pixel_points().par_iter())
        .zip(excess.par_iter())
        .for_each(|((hist, &w), &extra)| {
            for (p, &(r1, cos_in, albedo)) in target.points().iter().zip(&legs) {
                let to_wall = w - p.position;
                let r2 = to_wall.norm();
                let cos_out = p.normal.dot(to_wall) / r2;
                let energy = albedo * radiometric_weight(cos_in, cos_out, r1, r2);
                if energy == 0.0 {
                    continue;
                }
                let pos = path_to_bins(r1 + r2 + extra, bw);
                let lo = pos.floor() as usize;
                let frac = pos - lo as f64;
                hist[lo] += energy * (1.0 - frac);
                if frac > 0.0 {
                    hist[lo + 1] += energy * frac;
                }
            }
        });

    if let Some(fs) = options.first_scatter {
        let amplitude = match fs.amplitude {
            FirstScatterAmplitude::Absolute(a) => a,
            FirstScatterAmplitude::Relative(gain) => {
                let peak = data.iter().copied().fold(0.0, f64::max);
                if peak > 0.0 {
                    gain * peak
                } else {
                    1.0
                }
            }
        };
        for hist in data.chunks_exact_mut(bins) {
            hist[fs.bin] += amplitude;
        }
    }

    TimeHistogramCube::from_real(geometry.rows(), geometry.cols(), bins, bw, data)
}
