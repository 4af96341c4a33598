//! The full sensor-correction pipeline from raw cube to reconstruction input.

use serde::{Deserialize, Serialize};

use crate::calibration::align::{align_first_scatter, compensate_return_leg, AlignReference, DelayMap};
use crate::calibration::background::DEFAULT_TAIL_FRACTION;
use crate::calibration::dcr::{estimate_dcr, estimate_dcr_from_tail, interpolate_bad_pixels, DcrMap, DEFAULT_DCR_THRESHOLD};
use crate::calibration::fwhm::{estimate_fwhm_map, FwhmMap};
use crate::calibration::peak::Gate;
use crate::calibration::strip::strip_first_scatter;
use crate::error::{Error, Result};
use crate::forward::instrument::DEFAULT_EXPOSURE_S;
use crate::forward::render::DEFAULT_FIRST_SCATTER_BIN;
use crate::histogram::cube::TimeHistogramCube;
use crate::histogram::geometry::SceneGeometry;

/// Width of the first-scatter strip window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    /// Keep the first-scatter signature.
    Off,
    /// Fixed half-width in bins.
    Bins(usize),
    /// Half-width of this many mean FWHMs, rounded to whole bins.
    FwhmMultiple(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub gate: Gate,
    pub dcr_threshold: f64,
    pub exposure_s: f64,
    pub reference: AlignReference,
    pub guard: Guard,
    pub compensate_return_leg: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            gate: Gate::default(),
            dcr_threshold: DEFAULT_DCR_THRESHOLD,
            exposure_s: DEFAULT_EXPOSURE_S,
            reference: AlignReference::Fixed(DEFAULT_FIRST_SCATTER_BIN),
            guard: Guard::FwhmMultiple(3.0),
            compensate_return_leg: true,
        }
    }
}

/// Summary figures of one calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStats {
    pub pixels: usize,
    pub bad_pixels: usize,
    pub dcr_source: DcrSource,
    pub fraction_dcr_below_100: f64,
    pub fraction_dcr_below_1000: f64,
    pub delay_min_bins: i64,
    pub delay_max_bins: i64,
    /// max − min of the good pixels' offsets.
    pub delay_spread_bins: i64,
    pub delay_spread_ps: f64,
    pub mean_fwhm_ps: f64,
    pub min_fwhm_ps: f64,
    pub max_fwhm_ps: f64,
    pub guard_bins: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DcrSource {
    DarkCube,
    HistogramTail,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    /// Aligned, interpolated, stripped and return-leg compensated; real-kind.
    pub cube: TimeHistogramCube,
    pub dcr: DcrMap,
    pub delays: DelayMap,
    pub fwhm: FwhmMap,
    pub stats: CalibrationStats,
}

/// Dark-count estimation → first-scatter alignment → bad-pixel interpolation
/// → FWHM estimation → first-scatter strip → return-leg compensation.
///
/// Without a dark cube, rates come from each histogram's tail and include ambient light.
pub fn calibrate(
    raw: &TimeHistogramCube,
    dark: Option<&TimeHistogramCube>,
    geometry: &SceneGeometry,
    config: &CalibrationConfig,
) -> Result<Calibration> {
    let (dcr, dcr_source) = match dark {
        Some(d) => {
            if d.rows() != raw.rows() || d.cols() != raw.cols() {
                return Err(Error::invalid("dark cube", "pixel grid differs from the measurement"));
            }
            (estimate_dcr(d, config.exposure_s)?, DcrSource::DarkCube)
        }
        None => (
            estimate_dcr_from_tail(raw, config.exposure_s, DEFAULT_TAIL_FRACTION)?,
            DcrSource::HistogramTail,
        ),
    };
    let dcr = dcr.with_threshold(config.dcr_threshold);

    let (aligned, delays) = align_first_scatter(raw, config.gate, config.reference, Some(&dcr.bad_mask))?;
    let repaired = interpolate_bad_pixels(&aligned, &dcr.bad_mask)?;
    let fwhm = estimate_fwhm_map(&repaired, config.gate)?;

    let bw = raw.bin_width_ps();
    let guard_bins = match config.guard {
        Guard::Off => None,
        Guard::Bins(n) => Some(n),
        Guard::FwhmMultiple(k) => Some((k * fwhm.mean_ps() / bw).round().max(0.0) as usize),
    };
    let stripped = match guard_bins {
        Some(g) => strip_first_scatter(&repaired, delays.reference_bin, g)?,
        None => repaired,
    };
    let cube = if config.compensate_return_leg {
        compensate_return_leg(&stripped, geometry)?
    } else {
        stripped
    };

    let good: Vec<bool> = dcr.bad_mask.iter().map(|b| !b).collect();
    let good_offsets = delays.offsets.iter().zip(&good).filter(|(_, &g)| g).map(|(&o, _)| o);
    let delay_min_bins = good_offsets.clone().min().unwrap_or(0);
    let delay_max_bins = good_offsets.max().unwrap_or(0);
    let stats = CalibrationStats {
        pixels: raw.pixel_count(),
        bad_pixels: dcr.bad_count(),
        dcr_source,
        fraction_dcr_below_100: dcr.fraction_below(100.0),
        fraction_dcr_below_1000: dcr.fraction_below(1000.0),
        delay_min_bins,
        delay_max_bins,
        delay_spread_bins: delay_max_bins - delay_min_bins,
        delay_spread_ps: (delay_max_bins - delay_min_bins) as f64 * bw,
        mean_fwhm_ps: fwhm.mean_ps(),
        min_fwhm_ps: fwhm.min_ps(),
        max_fwhm_ps: fwhm.max_ps(),
        guard_bins,
    };
    Ok(Calibration {
        cube,
        dcr,
        delays,
        fwhm,
        stats,
    })
}
