//! Forward model: hidden targets, ideal transients and the SPAD instrument.

pub mod instrument;
pub mod render;
pub mod scene;
pub mod target;

pub use instrument::{apply_instrument, expected_counts, gaussian_kernel, SensorModel};
pub use render::{render_ideal_transients, CubeSpec, FirstScatter, FirstScatterAmplitude, RenderOptions};
pub use scene::{simulate, DcrSpec, DelaySpec, JitterSpec, SceneDescription, SensorSpec, Simulation, TargetSpec};
pub use target::{make_letter_f, make_plane, SurfacePoint, TargetKind, TargetSurface};
