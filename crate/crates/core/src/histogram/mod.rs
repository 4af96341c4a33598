//! Measurement data model: histogram cubes, voxel volumes, scene geometry,
//! unit conversions and the binary file formats.

pub mod cube;
pub mod geometry;
pub mod io;
pub mod units;
pub mod volume;

pub use cube::{Alignment, CubeData, TimeHistogramCube, ValueKind};
pub use geometry::{GeometryDoc, SceneGeometry, Vec3, WallPlane};
pub use io::{load_cube, load_volume, save_cube, save_volume};
pub use units::{bin_to_path_length, meters_per_bin, path_to_bins, PhysicalConstants, SPEED_OF_LIGHT};
pub use volume::{VolumeData, VolumeGrid, VoxelVolume};

/// The default scene: 32 × 32 pixels over a 1 m square, camera and laser 1.2 m out.
pub fn default_paper_geometry() -> SceneGeometry {
    SceneGeometry::standard()
}
