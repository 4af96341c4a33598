//! Voxel reconstruction: filtered back projection and phasor-field propagation.

pub mod fbp;
mod kernel;
pub mod phasor;

pub use fbp::{backproject, depth_laplacian_filter, reconstruct_fbp, FilterKind, ReconstructionSpec};
pub use phasor::{
    make_wavelet, parameter_sweep, parameter_sweep_with, phasor_transform, propagate, reconstruct_phasor, PhasorParams,
    SweepEntry, VirtualWavelet, STUDY_LAMBDAS, STUDY_SIGMAS,
};
