use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::geometry::Vec3;

/// Shape and placement of a cubic-voxel grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrid {
    pub dims: [usize; 3],
    /// Corner of voxel (0, 0, 0), meters.
    pub origin: Vec3,
    /// Voxel edge length, meters.
    pub voxel_size: f64,
}

impl VolumeGrid {
    pub fn new(dims: [usize; 3], origin: Vec3, voxel_size: f64) -> Result<Self> {
        let grid = Self {
            dims,
            origin,
            voxel_size,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// A 1.2 m cube in front of the wall, centered on the imaged region, 120³ voxels.
    pub fn standard() -> Self {
        Self::centered(120, 1.2)
    }

    /// `n`³ voxels spanning an `extent`-meter cube: x, y ∈ [−extent/2, extent/2], z ∈ [0, extent].
    pub fn centered(n: usize, extent: f64) -> Self {
        Self {
            dims: [n, n, n],
            origin: Vec3::new(-extent / 2.0, -extent / 2.0, 0.0),
            voxel_size: extent / n as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::invalid("volume", "every dimension must be at least 1"));
        }
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::invalid("volume", "voxel size must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], iz]
    }

    #[inline]
    pub fn center(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        let h = self.voxel_size;
        Vec3::new(
            self.origin.x + (ix as f64 + 0.5) * h,
            self.origin.y + (iy as f64 + 0.5) * h,
            self.origin.z + (iz as f64 + 0.5) * h,
        )
    }

    /// Voxel containing `p`, if inside the grid.
    pub fn locate(&self, p: Vec3) -> Option<[usize; 3]> {
        let rel = [
            (p.x - self.origin.x) / self.voxel_size,
            (p.y - self.origin.y) / self.voxel_size,
            (p.z - self.origin.z) / self.voxel_size,
        ];
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = rel[a].floor();
            if f < 0.0 || f >= self.dims[a] as f64 {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VolumeData {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl VolumeData {
    pub fn len(&self) -> usize {
        match self {
            VolumeData::Real(v) => v.len(),
            VolumeData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reconstruction output on a regular grid, indexed `(ix·ny + iy)·nz + iz`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelVolume {
    grid: VolumeGrid,
    data: VolumeData,
}

impl VoxelVolume {
    pub fn new(grid: VolumeGrid, data: VolumeData) -> Result<Self> {
        grid.validate()?;
        if data.len() != grid.len() {
            return Err(Error::invalid(
                "volume",
                format!("grid has {} voxels, data has {}", grid.len(), data.len()),
            ));
        }
        Ok(Self { grid, data })
    }

    pub fn real(grid: VolumeGrid, data: Vec<f64>) -> Result<Self> {
        Self::new(grid, VolumeData::Real(data))
    }

    pub fn complex(grid: VolumeGrid, data: Vec<Complex64>) -> Result<Self> {
        Self::new(grid, VolumeData::Complex(data))
    }

    pub fn grid(&self) -> &VolumeGrid {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims
    }

    pub fn data(&self) -> &VolumeData {
        &self.data
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.data {
            VolumeData::Real(v) => Some(v),
            VolumeData::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.data {
            VolumeData::Complex(v) => Some(v),
            VolumeData::Real(_) => None,
        }
    }

    /// Real values, or magnitudes for complex data.
    pub fn magnitude(&self) -> Vec<f64> {
        match &self.data {
            VolumeData::Real(v) => v.clone(),
            VolumeData::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.data, VolumeData::Complex(_))
    }
}
