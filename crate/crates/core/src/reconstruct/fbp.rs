//! Filtered back projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::cube::{TimeHistogramCube, ValueKind};
use crate::histogram::geometry::SceneGeometry;
use crate::histogram::volume::{VolumeGrid, VoxelVolume};
use crate::reconstruct::kernel::Gather;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    None,
    DepthLaplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionSpec {
    #[serde(default = "VolumeGrid::standard")]
    pub grid: VolumeGrid,
    /// Weight each sample by r₁²·r₂².
    #[serde(default)]
    pub attenuation_compensation: bool,
    #[serde(default = "laplacian")]
    pub filter: FilterKind,
}

fn laplacian() -> FilterKind {
    FilterKind::DepthLaplacian
}

impl Default for ReconstructionSpec {
    fn default() -> Self {
        Self {
            grid: VolumeGrid::standard(),
            attenuation_compensation: false,
            filter: FilterKind::DepthLaplacian,
        }
    }
}

impl ReconstructionSpec {
    pub fn with_grid(grid: VolumeGrid) -> Self {
        Self {
            grid,
            ..Self::default()
        }
    }

    /// The grid must be valid and lie entirely in front of the wall.
    pub fn validate(&self, geometry: &SceneGeometry) -> Result<()> {
        self.grid.validate()?;
        let [nx, ny, nz] = self.grid.dims;
        for ix in [0, nx - 1] {
            for iy in [0, ny - 1] {
                for iz in [0, nz - 1] {
                    let c = self.grid.center(ix, iy, iz);
                    if geometry.height_above_wall(c) < 0.0 {
                        return Err(Error::invalid(
                            "reconstruction grid",
                            format!("voxel ({ix}, {iy}, {iz}) lies behind the wall"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Checks shared by every reconstruction entry point.
pub(crate) fn check_inputs(cube: &TimeHistogramCube, geometry: &SceneGeometry, spec: &ReconstructionSpec) -> Result<()> {
    if cube.alignment().is_none() {
        return Err(Error::NotAligned(
            "calibrate the cube before reconstruction".to_string(),
        ));
    }
    if cube.rows() != geometry.rows() || cube.cols() != geometry.cols() {
        return Err(Error::invalid(
            "geometry",
            format!(
                "{}×{} pixel grid does not match a {}×{} cube",
                geometry.rows(),
                geometry.cols(),
                cube.rows(),
                cube.cols()
            ),
        ));
    }
    spec.validate(geometry)
}

/// Unfiltered confidence map.
pub fn backproject(cube: &TimeHistogramCube, geometry: &SceneGeometry, spec: &ReconstructionSpec) -> Result<VoxelVolume> {
    check_inputs(cube, geometry, spec)?;
    if cube.kind() == ValueKind::Complex {
        return Err(Error::invalid("cube", "back projection takes counts or real data; use propagate for complex"));
    }
    let hists = cube.to_real()?;
    let values = Gather {
        hists: &hists,
        bins: cube.bins(),
        bin_width_ps: cube.bin_width_ps(),
        pixels: geometry.pixel_points(),
        spot: geometry.laser_spot(),
        attenuation: spec.attenuation_compensation,
    }
    .run(&spec.grid);
    VoxelVolume::real(spec.grid, values)
}

/// `max(0, −(v[z−1] − 2v[z] + v[z+1]))` along depth; the first and last slices are zero.
pub fn depth_laplacian_filter(volume: &VoxelVolume) -> Result<VoxelVolume> {
    let v = volume
        .as_real()
        .ok_or_else(|| Error::invalid("volume", "depth filter needs a real volume"))?;
    let nz = volume.dims()[2];
    if nz < 3 {
        return Err(Error::invalid("volume", format!("depth filter needs nz ≥ 3, got {nz}")));
    }
    let mut out = vec![0.0; v.len()];
    for (src, dst) in v.chunks_exact(nz).zip(out.chunks_exact_mut(nz)) {
        for z in 1..nz - 1 {
            dst[z] = (-(src[z - 1] - 2.0 * src[z] + src[z + 1])).max(0.0);
        }
    }
    VoxelVolume::real(*volume.grid(), out)
}

pub fn reconstruct_fbp(cube: &TimeHistogramCube, geometry: &SceneGeometry, spec: &ReconstructionSpec) -> Result<VoxelVolume> {
    let bp = backproject(cube, geometry, spec)?;
    match spec.filter {
        FilterKind::None => Ok(bp),
        FilterKind::DepthLaplacian => depth_laplacian_filter(&bp),
    }
}
