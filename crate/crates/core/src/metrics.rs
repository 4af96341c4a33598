//! Volume scoring and maximum-intensity projections.

use serde::{Deserialize, Serialize};

use crate::forward::target::TargetSurface;
use crate::histogram::volume::{VolumeGrid, VoxelVolume};

/// Fraction of the volume maximum a voxel must reach to count as object.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Index of the largest value, earliest on ties. `None` for an empty slice.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Voxels at or above `fraction` of the maximum. All false when the maximum is not positive.
pub fn threshold_mask(values: &[f64], fraction: f64) -> Vec<bool> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return vec![false; values.len()];
    }
    let cut = fraction * max;
    values.iter().map(|&v| v >= cut).collect()
}

/// Intersection over union; two empty masks score 0.
pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len(), "masks of different sizes");
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Voxels containing at least one target sample.
pub fn occupancy(grid: &VolumeGrid, target: &TargetSurface) -> Vec<bool> {
    let mut mask = vec![false; grid.len()];
    for p in target.points() {
        if let Some([ix, iy, iz]) = grid.locate(p.position) {
            mask[grid.index(ix, iy, iz)] = true;
        }
    }
    mask
}

/// max / median. `None` when the median is zero.
pub fn peak_to_background(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    (median != 0.0).then(|| sorted[n - 1] / median)
}

/// Viewing direction of a projection.
///
/// | axis  | collapses | image width | image height | top row |
/// |-------|-----------|-------------|--------------|---------|
/// | front | z         | nx          | ny           | max y   |
/// | side  | x         | nz          | ny           | max y   |
/// | top   | y         | nx          | nz           | z = 0   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionAxis {
    Front,
    Side,
    Top,
}

impl std::str::FromStr for ProjectionAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "front" => Ok(Self::Front),
            "side" => Ok(Self::Side),
            "top" => Ok(Self::Top),
            other => Err(format!("unknown projection axis '{other}' (expected front, side or top)")),
        }
    }
}

/// A row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

/// Maximum-intensity projection of a volume (magnitude for complex volumes).
pub fn max_intensity_projection(volume: &VoxelVolume, axis: ProjectionAxis) -> Image {
    let grid = volume.grid();
    let [nx, ny, nz] = grid.dims;
    let values = volume.magnitude();
    let (width, height) = match axis {
        ProjectionAxis::Front => (nx, ny),
        ProjectionAxis::Side => (nz, ny),
        ProjectionAxis::Top => (nx, nz),
    };
    let mut pixels = vec![f64::NEG_INFINITY; width * height];
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let (col, row) = match axis {
                    ProjectionAxis::Front => (ix, ny - 1 - iy),
                    ProjectionAxis::Side => (iz, ny - 1 - iy),
                    ProjectionAxis::Top => (ix, iz),
                };
                let px = &mut pixels[row * width + col];
                *px = px.max(values[grid.index(ix, iy, iz)]);
            }
        }
    }
    Image { width, height, pixels }
}

impl Image {
    /// Binary PGM (P5, maxval 65535, big-endian samples), min–max normalized.
    /// A constant image maps to all zeros.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        let min = self.pixels.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        for &v in &self.pixels {
            let level = if span > 0.0 {
                ((v - min) / span * 65535.0).round() as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::geometry::Vec3;

    fn volume(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64) -> VoxelVolume {
        let grid = VolumeGrid::new(dims, Vec3::new(0.0, 0.0, 0.0), 0.01).unwrap();
        let mut v = vec![0.0; grid.len()];
        for ix in 0..dims[0] {
            for iy in 0..dims[1] {
                for iz in 0..dims[2] {
                    v[grid.index(ix, iy, iz)] = f(ix, iy, iz);
                }
            }
        }
        VoxelVolume::real(grid, v).unwrap()
    }

    #[test]
    fn argmax_prefers_the_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn iou_of_known_masks() {
        assert_eq!(iou(&[true, true, false, false], &[true, false, true, false]), 1.0 / 3.0);
        assert_eq!(iou(&[false; 3], &[false; 3]), 0.0);
    }

    #[test]
    fn threshold_is_inclusive() {
        assert_eq!(threshold_mask(&[1.0, 2.0, 4.0], 0.5), vec![false, true, true]);
        assert_eq!(threshold_mask(&[0.0, 0.0], 0.5), vec![false, false]);
    }

    #[test]
    fn peak_to_background_uses_the_median() {
        assert_eq!(peak_to_background(&[1.0, 2.0, 10.0]), Some(5.0));
        assert_eq!(peak_to_background(&[0.0, 0.0, 10.0]), None);
    }

    #[test]
    fn projection_shapes_follow_the_axis_table() {
        let v = volume([4, 3, 2], |_, _, _| 1.0);
        let f = max_intensity_projection(&v, ProjectionAxis::Front);
        assert_eq!((f.width, f.height), (4, 3));
        let s = max_intensity_projection(&v, ProjectionAxis::Side);
        assert_eq!((s.width, s.height), (2, 3));
        let t = max_intensity_projection(&v, ProjectionAxis::Top);
        assert_eq!((t.width, t.height), (4, 2));
    }

    #[test]
    fn single_bright_voxel_lights_one_pixel_per_view() {
        let v = volume([5, 4, 3], |x, y, z| if (x, y, z) == (1, 2, 0) { 7.0 } else { 0.0 });
        for (axis, at) in [
            (ProjectionAxis::Front, (1, 4 - 1 - 2)),
            (ProjectionAxis::Side, (0, 4 - 1 - 2)),
            (ProjectionAxis::Top, (1, 0)),
        ] {
            let img = max_intensity_projection(&v, axis);
            for row in 0..img.height {
                for col in 0..img.width {
                    let expected = if (col, row) == at { 7.0 } else { 0.0 };
                    assert_eq!(img.pixels[row * img.width + col], expected, "{axis:?}");
                }
            }
        }
    }

    #[test]
    fn pgm_layout_and_normalization() {
        let img = Image {
            width: 3,
            height: 1,
            pixels: vec![2.0, 4.0, 3.0],
        };
        let bytes = img.to_pgm();
        let header = b"P5\n3 1\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 0, 0xff, 0xff, 0x80, 0x00]);
        let flat = Image {
            width: 2,
            height: 2,
            pixels: vec![5.0; 4],
        };
        assert!(flat.to_pgm()[b"P5\n2 2\n65535\n".len()..].iter().all(|&b| b == 0));
    }
}
