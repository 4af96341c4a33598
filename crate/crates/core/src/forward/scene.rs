//! JSON scene descriptions and the end-to-end synthetic acquisition.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::instrument::{
    apply_instrument, expected_counts, pixel_rng, SensorModel, DEFAULT_EXPOSURE_S, DEFAULT_JITTER_FWHM_PS,
    DEFAULT_LASER_PULSE_FWHM_PS, DEFAULT_PDE,
};
use crate::forward::render::{render_ideal_transients, CubeSpec, FirstScatter, RenderOptions};
use crate::forward::target::{make_letter_f_with_albedo, make_plane, TargetSurface};
use crate::histogram::cube::{TimeHistogramCube, ValueKind};
use crate::histogram::geometry::{GeometryDoc, SceneGeometry, Vec3};

/// Mean third-bounce photon rate reaching a pixel, photons/s, before detection losses.
pub const DEFAULT_SIGNAL_RATE: f64 = 2000.0;
pub const DEFAULT_REPETITION_RATE_HZ: f64 = 10e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    LetterF {
        #[serde(default = "letter_size")]
        size: f64,
        #[serde(default = "letter_standoff")]
        standoff: [f64; 2],
        #[serde(default = "letter_tilt")]
        tilt_deg: f64,
        #[serde(default = "letter_pitch")]
        pitch: f64,
        #[serde(default = "unit")]
        albedo: f64,
    },
    Point {
        position: Vec3,
        #[serde(default = "unit")]
        albedo: f64,
    },
    Plane {
        center: Vec3,
        width: f64,
        height: f64,
        #[serde(default = "letter_pitch")]
        pitch: f64,
        #[serde(default = "unit")]
        albedo: f64,
    },
    None,
}

fn letter_size() -> f64 {
    0.5
}
fn letter_standoff() -> [f64; 2] {
    [0.7, 1.0]
}
fn letter_tilt() -> f64 {
    36.0
}
fn letter_pitch() -> f64 {
    0.01
}
fn unit() -> f64 {
    1.0
}

impl TargetSpec {
    pub fn standard_letter() -> Self {
        TargetSpec::LetterF {
            size: letter_size(),
            standoff: letter_standoff(),
            tilt_deg: letter_tilt(),
            pitch: letter_pitch(),
            albedo: 1.0,
        }
    }

    pub fn build(&self) -> Result<TargetSurface> {
        match *self {
            TargetSpec::LetterF {
                size,
                standoff,
                tilt_deg,
                pitch,
                albedo,
            } => make_letter_f_with_albedo(size, standoff, tilt_deg, pitch, albedo),
            TargetSpec::Point { position, albedo } => TargetSurface::point(position, albedo),
            TargetSpec::Plane {
                center,
                width,
                height,
                pitch,
                albedo,
            } => make_plane(center, width, height, pitch, albedo),
            TargetSpec::None => Ok(TargetSurface::empty()),
        }
    }
}

/// How the dark-count map is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DcrSpec {
    Uniform { rate: f64 },
    /// Log-uniform within three bands split at 100 and 1000 counts/s; the
    /// fractions give how many pixels fall below each split.
    Banded {
        #[serde(default = "below_100")]
        below_100: f64,
        #[serde(default = "below_1000")]
        below_1000: f64,
        #[serde(default = "dcr_floor")]
        min_rate: f64,
        #[serde(default = "dcr_ceiling")]
        max_rate: f64,
    },
    /// `fraction` of pixels (chosen at random) at `hot_rate`, the rest at `rate`.
    HotPixels { rate: f64, hot_rate: f64, fraction: f64 },
    Map { rates: Vec<f64> },
}

fn below_100() -> f64 {
    0.8
}
fn below_1000() -> f64 {
    0.9
}
fn dcr_floor() -> f64 {
    5.0
}
fn dcr_ceiling() -> f64 {
    20_000.0
}

impl Default for DcrSpec {
    fn default() -> Self {
        DcrSpec::Banded {
            below_100: below_100(),
            below_1000: below_1000(),
            min_rate: dcr_floor(),
            max_rate: dcr_ceiling(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySpec {
    Zero,
    Constant { bins: i64 },
    /// Independent integer delays drawn uniformly from [0, max].
    Uniform { max: i64 },
    Map { bins: Vec<i64> },
}

impl Default for DelaySpec {
    fn default() -> Self {
        DelaySpec::Uniform { max: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JitterSpec {
    /// Per-pixel detector jitter drawn uniformly from [min, max] bins.
    UniformBins { min: f64, max: f64 },
    Map { fwhm_ps: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default)]
    pub dcr: DcrSpec,
    #[serde(default)]
    pub delay: DelaySpec,
    #[serde(default = "jitter")]
    pub jitter_fwhm_ps: f64,
    #[serde(default)]
    pub jitter: Option<JitterSpec>,
    #[serde(default = "pulse")]
    pub laser_pulse_fwhm_ps: f64,
    #[serde(default = "ambient")]
    pub ambient_rate: f64,
    #[serde(default = "pde")]
    pub pde: f64,
    #[serde(default = "exposure")]
    pub exposure_s: f64,
}

fn jitter() -> f64 {
    DEFAULT_JITTER_FWHM_PS
}
fn pulse() -> f64 {
    DEFAULT_LASER_PULSE_FWHM_PS
}
fn ambient() -> f64 {
    50.0
}
fn pde() -> f64 {
    DEFAULT_PDE
}
fn exposure() -> f64 {
    DEFAULT_EXPOSURE_S
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            dcr: DcrSpec::default(),
            delay: DelaySpec::default(),
            jitter_fwhm_ps: jitter(),
            jitter: None,
            laser_pulse_fwhm_ps: pulse(),
            ambient_rate: ambient(),
            pde: pde(),
            exposure_s: exposure(),
        }
    }
}

// Streams reserved for drawing sensor maps; pixel noise uses streams 0..pixels.
const DCR_STREAM: usize = usize::MAX - 1;
const DELAY_STREAM: usize = usize::MAX - 2;
const JITTER_STREAM: usize = usize::MAX - 3;
const DARK_NOISE_SALT: u64 = 0x6461_726b_6672_6d65;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Fisher-Yates permutation of `0..n`.
fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

impl SensorSpec {
    /// Draw concrete per-pixel maps, deterministically from `seed`.
    pub fn build(&self, pixels: usize, bin_width_ps: f64, seed: u64) -> Result<SensorModel> {
        let dcr = match &self.dcr {
            DcrSpec::Uniform { rate } => vec![*rate; pixels],
            DcrSpec::Banded {
                below_100,
                below_1000,
                min_rate,
                max_rate,
            } => {
                if !(0.0..=1.0).contains(below_100) || !(*below_100..=1.0).contains(below_1000) {
                    return Err(Error::invalid("dcr", "band fractions must satisfy 0 ≤ below_100 ≤ below_1000 ≤ 1"));
                }
                if !(*min_rate > 0.0 && *min_rate < 100.0 && *max_rate > 1000.0) {
                    return Err(Error::invalid("dcr", "min_rate must be in (0, 100) and max_rate above 1000"));
                }
                let mut rng = pixel_rng(seed, DCR_STREAM);
                let n_low = (below_100 * pixels as f64).round() as usize;
                let n_mid = (below_1000 * pixels as f64).round() as usize - n_low;
                let order = permutation(&mut rng, pixels);
                let mut rates = vec![0.0; pixels];
                for (rank, &p) in order.iter().enumerate() {
                    let (lo, hi) = if rank < n_low {
                        (*min_rate, 100.0)
                    } else if rank < n_low + n_mid {
                        (100.0, 1000.0)
                    } else {
                        (1000.0, *max_rate)
                    };
                    rates[p] = log_uniform(&mut rng, lo, hi);
                }
                rates
            }
            DcrSpec::HotPixels {
                rate,
                hot_rate,
                fraction,
            } => {
                let mut rng = pixel_rng(seed, DCR_STREAM);
                let n_hot = (fraction * pixels as f64).round() as usize;
                let order = permutation(&mut rng, pixels);
                let mut rates = vec![*rate; pixels];
                for &p in &order[..n_hot.min(pixels)] {
                    rates[p] = *hot_rate;
                }
                rates
            }
            DcrSpec::Map { rates } => rates.clone(),
        };
        let delay = match &self.delay {
            DelaySpec::Zero => vec![0; pixels],
            DelaySpec::Constant { bins } => vec![*bins; pixels],
            DelaySpec::Uniform { max } => {
                if *max < 0 {
                    return Err(Error::invalid("delay", "uniform delay maximum must be non-negative"));
                }
                let mut rng = pixel_rng(seed, DELAY_STREAM);
                (0..pixels).map(|_| rng.random_range(0..=*max)).collect()
            }
            DelaySpec::Map { bins } => bins.clone(),
        };
        let jitter_map_ps = match &self.jitter {
            None => None,
            Some(JitterSpec::UniformBins { min, max }) => {
                if !(*min >= 0.0 && max >= min) {
                    return Err(Error::invalid("jitter", "need 0 ≤ min ≤ max"));
                }
                let mut rng = pixel_rng(seed, JITTER_STREAM);
                Some(
                    (0..pixels)
                        .map(|_| (min + rng.random::<f64>() * (max - min)) * bin_width_ps)
                        .collect(),
                )
            }
            Some(JitterSpec::Map { fwhm_ps }) => Some(fwhm_ps.clone()),
        };
        let model = SensorModel {
            dcr,
            delay,
            jitter_fwhm_ps: self.jitter_fwhm_ps,
            jitter_map_ps,
            laser_pulse_fwhm_ps: self.laser_pulse_fwhm_ps,
            ambient_rate: self.ambient_rate,
            pde: self.pde,
            exposure_s: self.exposure_s,
            rng_seed: seed,
        };
        model.validate(pixels)?;
        Ok(model)
    }
}

/// Everything needed to synthesize one acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDescription {
    /// Defaults to the standard setup geometry.
    #[serde(default)]
    pub geometry: Option<GeometryDoc>,
    pub target: TargetSpec,
    #[serde(default)]
    pub cube: CubeSpec,
    #[serde(default)]
    pub sensor: SensorSpec,
    /// Mean third-bounce photon rate per pixel, photons/s, before detection losses.
    #[serde(default = "signal_rate")]
    pub signal_rate: f64,
    #[serde(default)]
    pub first_scatter: FirstScatter,
    /// Recorded in output metadata only; histograms are not folded by the laser period.
    #[serde(default = "repetition_rate")]
    pub repetition_rate_hz: f64,
    #[serde(default = "yes")]
    pub poisson: bool,
    /// Covered sensor: laser off and no ambient light, dark counts only.
    #[serde(default)]
    pub dark: bool,
    #[serde(default)]
    pub seed: u64,
}

fn signal_rate() -> f64 {
    DEFAULT_SIGNAL_RATE
}
fn repetition_rate() -> f64 {
    DEFAULT_REPETITION_RATE_HZ
}
fn yes() -> bool {
    true
}

impl SceneDescription {
    pub fn standard() -> Self {
        Self {
            geometry: None,
            target: TargetSpec::standard_letter(),
            cube: CubeSpec::default(),
            sensor: SensorSpec::default(),
            signal_rate: DEFAULT_SIGNAL_RATE,
            first_scatter: FirstScatter::default(),
            repetition_rate_hz: DEFAULT_REPETITION_RATE_HZ,
            poisson: true,
            dark: false,
            seed: 0,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn geometry(&self) -> Result<SceneGeometry> {
        match &self.geometry {
            Some(doc) => SceneGeometry::new(doc.clone()),
            None => Ok(SceneGeometry::standard()),
        }
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub geometry: SceneGeometry,
    pub target: TargetSurface,
    pub sensor: SensorModel,
    /// Counts-kind with Poisson noise, real-kind expected counts otherwise.
    pub cube: TimeHistogramCube,
}

/// Scaled ideal photon-rate cube (photons/s per bin) for a scene.
pub fn ideal_rates(desc: &SceneDescription, geometry: &SceneGeometry, target: &TargetSurface) -> Result<TimeHistogramCube> {
    let pixels = geometry.pixel_count();
    if desc.dark {
        return TimeHistogramCube::zeros(
            geometry.rows(),
            geometry.cols(),
            desc.cube.bins,
            desc.cube.bin_width_ps,
            ValueKind::Real,
        );
    }
    if !(desc.signal_rate >= 0.0) {
        return Err(Error::invalid("scene", "signal_rate must be non-negative"));
    }
    let bare = render_ideal_transients(geometry, target, &desc.cube, &RenderOptions {
        first_scatter: None,
        include_return_leg: true,
    })?;
    let mean_total = (0..pixels).map(|p| bare.pixel_total(p)).sum::<f64>() / pixels as f64;
    let scale = if mean_total > 0.0 {
        desc.signal_rate / mean_total
    } else {
        desc.signal_rate
    };
    let raw = render_ideal_transients(geometry, target, &desc.cube, &RenderOptions {
        first_scatter: Some(desc.first_scatter),
        include_return_leg: true,
    })?;
    let scaled = raw.to_real()?.into_iter().map(|x| x * scale).collect();
    raw.with_real_data(scaled)
}

pub fn simulate(desc: &SceneDescription) -> Result<Simulation> {
    let geometry = desc.geometry()?;
    let target = desc.target.build()?;
    let mut sensor = desc
        .sensor
        .build(geometry.pixel_count(), desc.cube.bin_width_ps, desc.seed)?;
    if desc.dark {
        sensor.ambient_rate = 0.0;
        // Same sensor maps as the illuminated run of this seed, independent noise.
        sensor.rng_seed = desc.seed ^ DARK_NOISE_SALT;
    }
    let ideal = ideal_rates(desc, &geometry, &target)?;
    let cube = if desc.poisson {
        apply_instrument(&ideal, &sensor, true)?
    } else {
        expected_counts(&ideal, &sensor)?
    };
    Ok(Simulation {
        geometry,
        target,
        sensor,
        cube,
    })
}
