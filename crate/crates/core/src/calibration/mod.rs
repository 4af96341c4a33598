//! Sensor corrections: dark counts and bad pixels, first-scatter alignment,
//! timing-response widths and first-scatter removal.

pub mod align;
pub mod background;
pub mod dcr;
pub mod fwhm;
pub mod peak;
pub mod pipeline;
pub mod strip;

pub use align::{align_first_scatter, align_histograms, align_histograms_to, compensate_return_leg, AlignReference, DelayMap};
pub use dcr::{estimate_dcr, interpolate_bad_pixels, DcrMap, DEFAULT_DCR_THRESHOLD};
pub use fwhm::{combined_fwhm, estimate_fwhm_map, FwhmMap};
pub use peak::{detect_first_scatter_peak, Gate, Peak};
pub use pipeline::{calibrate, Calibration, CalibrationConfig, CalibrationStats, Guard};
pub use strip::strip_first_scatter;
