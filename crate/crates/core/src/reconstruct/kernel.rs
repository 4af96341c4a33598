//! Voxel-parallel gather over ellipsoidal time-of-flight loci, shared by the
//! real back projector and the complex phasor propagator.

use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::histogram::geometry::Vec3;
use crate::histogram::units::meters_per_bin;
use crate::histogram::volume::VolumeGrid;

pub(crate) trait Sample: Copy + Send + Sync + Default + Add<Output = Self> + AddAssign + Mul<f64, Output = Self> {}

impl Sample for f64 {}
impl Sample for Complex64 {}

/// Inputs of one gather: per-pixel histograms (row-major, `bins` each) and the
/// wall points they were measured at.
pub(crate) struct Gather<'a, T> {
    pub hists: &'a [T],
    pub bins: usize,
    pub bin_width_ps: f64,
    pub pixels: &'a [Vec3],
    pub spot: Vec3,
    pub attenuation: bool,
}

/// Linear interpolation of `hist` at fractional bin `pos`; zero outside `[0, bins − 1]`.
#[inline(always)]
pub(crate) fn sample_at<T: Sample>(hist: &[T], pos: f64) -> T {
    let last = (hist.len() - 1) as f64;
    if !(pos >= 0.0 && pos <= last) {
        return T::default();
    }
    let lo = pos as usize;
    let frac = pos - lo as f64;
    if lo + 1 < hist.len() {
        hist[lo] * (1.0 - frac) + hist[lo + 1] * frac
    } else {
        hist[lo]
    }
}

impl<'a, T: Sample> Gather<'a, T> {
    /// value(x) = Σ_i H_i(t_i(x))·A_i(x), accumulated in pixel order for every voxel.
    pub fn run(&self, grid: &VolumeGrid) -> Vec<T> {
        if self.attenuation {
            self.run_impl::<true>(grid)
        } else {
            self.run_impl::<false>(grid)
        }
    }

    fn run_impl<const ATTENUATE: bool>(&self, grid: &VolumeGrid) -> Vec<T> {
        let [nx, ny, nz] = grid.dims;
        let inv = 1.0 / meters_per_bin(self.bin_width_ps);
        let mut out = vec![T::default(); nx * ny * nz];
        out.par_chunks_mut(nz).enumerate().for_each_init(
            || (vec![0.0; nz], vec![0.0; nz]),
            |(pos, r2), (column, acc)| {
                let (ix, iy) = (column / ny, column % ny);
                let base = grid.center(ix, iy, 0);
                let z: Vec<f64> = (0..nz).map(|iz| grid.center(ix, iy, iz).z).collect();
                let r1: Vec<f64> = (0..nz).map(|iz| self.spot.distance(grid.center(ix, iy, iz))).collect();
                for (hist, w) in self.hists.chunks_exact(self.bins).zip(self.pixels) {
                    let (dx, dy) = (base.x - w.x, base.y - w.y);
                    let lateral = dx * dx + dy * dy;
                    // Distances first so this loop vectorizes; the gather follows.
                    for k in 0..nz {
                        let dz = z[k] - w.z;
                        r2[k] = (lateral + dz * dz).sqrt();
                        pos[k] = (r1[k] + r2[k]) * inv;
                    }
                    for k in 0..nz {
                        let v = sample_at(hist, pos[k]);
                        acc[k] += if ATTENUATE {
                            v * (r1[k] * r1[k] * r2[k] * r2[k])
                        } else {
                            v
                        };
                    }
                }
            },
        );
        out
    }
}
