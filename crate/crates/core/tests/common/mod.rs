#![allow(dead_code)]

use nlos::histogram::{GeometryDoc, SceneGeometry, Vec3, VolumeGrid};
use num_complex::Complex64;

/// Default wall, camera and laser spot with an `n` × `n` pixel grid.
pub fn small_geometry(n: usize) -> SceneGeometry {
    let doc = GeometryDoc {
        rows: n,
        cols: n,
        ..SceneGeometry::standard().doc().clone()
    };
    SceneGeometry::new(doc).unwrap()
}

/// `n`³ voxels of `pitch` meters centered on the wall normal at depth `z0`.
pub fn grid_around(n: usize, pitch: f64, z0: f64) -> VolumeGrid {
    let half = n as f64 * pitch / 2.0;
    VolumeGrid::new([n, n, n], Vec3::new(-half, -half, z0 - half), pitch).unwrap()
}

fn lerp<T>(hist: &[T], pos: f64) -> T
where
    T: Copy + Default + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    if pos < 0.0 || pos > (hist.len() - 1) as f64 {
        return T::default();
    }
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(hist.len() - 1);
    let f = pos - lo as f64;
    hist[lo] * (1.0 - f) + hist[hi] * f
}

/// Straight triple loop: voxel, pixel, interpolated sample at the ellipsoidal delay.
pub fn naive_gather<T>(hists: &[T], bins: usize, bin_width_ps: f64, geometry: &SceneGeometry, grid: &VolumeGrid, attenuate: bool) -> Vec<T>
where
    T: Copy + Default + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let meters_per_bin = 299_792_458.0 * bin_width_ps * 1e-12;
    let spot = geometry.laser_spot();
    let [nx, ny, nz] = grid.dims;
    let mut out = vec![T::default(); nx * ny * nz];
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let x = grid.center(ix, iy, iz);
                let mut acc = T::default();
                for (p, w) in geometry.pixel_points().iter().enumerate() {
                    let r1 = spot.distance(x);
                    let r2 = w.distance(x);
                    let v = lerp(&hists[p * bins..(p + 1) * bins], (r1 + r2) / meters_per_bin);
                    let a = if attenuate { r1 * r1 * r2 * r2 } else { 1.0 };
                    acc = acc + v * a;
                }
                out[grid.index(ix, iy, iz)] = acc;
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs_diff_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
