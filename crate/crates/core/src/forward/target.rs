//! Hidden target surfaces as oriented, albedo-weighted point samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub albedo: f64,
    pub normal: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    LetterF,
    Plane,
    Point,
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSurface {
    points: Vec<SurfacePoint>,
    kind: TargetKind,
}

impl TargetSurface {
    pub fn new(points: Vec<SurfacePoint>, kind: TargetKind) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if (p.normal.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("target", format!("normal of point {i} is not unit length")));
            }
            if !(0.0..=1.0).contains(&p.albedo) {
                return Err(Error::invalid("target", format!("albedo of point {i} is outside [0, 1]")));
            }
        }
        Ok(Self { points, kind })
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            kind: TargetKind::Empty,
        }
    }

    /// A single reflector facing the wall.
    pub fn point(position: Vec3, albedo: f64) -> Result<Self> {
        Self::new(
            vec![SurfacePoint {
                position,
                albedo,
                normal: Vec3::new(0.0, 0.0, -1.0),
            }],
            TargetKind::Point,
        )
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.points
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same geometry, every albedo multiplied by `factor`. Albedos may leave
    /// [0, 1]; used for radiometric linearity checks only.
    pub fn scaled_albedo(&self, factor: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| SurfacePoint {
                    albedo: p.albedo * factor,
                    ..*p
                })
                .collect(),
            kind: self.kind,
        }
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| SurfacePoint {
                    position: p.position + offset,
                    ..*p
                })
                .collect(),
            kind: self.kind,
        }
    }

    /// Axis-aligned bounding box (min, max), `None` when empty.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = self.points.first()?.position;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            let q = p.position;
            (
                Vec3::new(lo.x.min(q.x), lo.y.min(q.y), lo.z.min(q.z)),
                Vec3::new(hi.x.max(q.x), hi.y.max(q.y), hi.z.max(q.z)),
            )
        }))
    }
}

/// Letter-F silhouette on the unit square, u to the right and v up.
/// Stem on the left, full-width top bar, shorter middle bar.
pub fn letter_f_mask(u: f64, v: f64) -> bool {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return false;
    }
    let stem = u < 0.2;
    let top = v >= 0.8;
    let middle = (0.45..0.63).contains(&v) && u < 0.7;
    stem || top || middle
}

/// Fraction of the unit square covered by [`letter_f_mask`].
pub const LETTER_F_AREA_FRACTION: f64 = 0.2 + 0.8 * 0.2 + 0.5 * 0.18;

/// Point samples of a flat letter 'F' of side `size`, centered on the z axis,
/// rotated by `tilt_deg` about the vertical axis and centered in `standoff`
/// (z range, meters). Samples sit at the centers of a `sample_pitch` grid.
pub fn make_letter_f(size: f64, standoff: [f64; 2], tilt_deg: f64, sample_pitch: f64) -> Result<TargetSurface> {
    make_letter_f_with_albedo(size, standoff, tilt_deg, sample_pitch, 1.0)
}

pub fn make_letter_f_with_albedo(
    size: f64,
    standoff: [f64; 2],
    tilt_deg: f64,
    sample_pitch: f64,
    albedo: f64,
) -> Result<TargetSurface> {
    if !(size > 0.0) {
        return Err(Error::domain(format!("letter size must be positive, got {size}")));
    }
    if !(sample_pitch > 0.0 && sample_pitch < size) {
        return Err(Error::domain(format!(
            "sample pitch {sample_pitch} must be positive and smaller than the size {size}"
        )));
    }
    let [z_near, z_far] = standoff;
    if !(z_near > 0.0 && z_far >= z_near) {
        return Err(Error::domain(format!("invalid standoff range [{z_near}, {z_far}]")));
    }
    let theta = tilt_deg.to_radians();
    let depth_span = size * theta.sin().abs();
    if depth_span > z_far - z_near + 1e-12 {
        return Err(Error::domain(format!(
            "a {size} m letter tilted {tilt_deg}° spans {depth_span:.3} m in depth, more than the standoff range"
        )));
    }
    let z_mid = 0.5 * (z_near + z_far);
    // In-plane axes after rotating about y; the normal faces the wall.
    let axis_u = Vec3::new(theta.cos(), 0.0, theta.sin());
    let axis_v = Vec3::new(0.0, 1.0, 0.0);
    let normal = Vec3::new(theta.sin(), 0.0, -theta.cos());
    let center = Vec3::new(0.0, 0.0, z_mid);

    let n = (size / sample_pitch + 1e-9).floor() as usize;
    let mut points = Vec::new();
    for j in 0..n {
        let v = (j as f64 + 0.5) * sample_pitch;
        for i in 0..n {
            let u = (i as f64 + 0.5) * sample_pitch;
            if letter_f_mask(u / size, v / size) {
                let local_u = u - size / 2.0;
                let local_v = v - size / 2.0;
                let position = center + axis_u * local_u + axis_v * local_v;
                points.push(SurfacePoint {
                    position: Vec3::new(position.x, position.y, position.z.clamp(z_near, z_far)),
                    albedo,
                    normal,
                });
            }
        }
    }
    TargetSurface::new(points, TargetKind::LetterF)
}

/// A flat rectangle `width` × `height` facing the wall at depth `z`.
pub fn make_plane(center: Vec3, width: f64, height: f64, sample_pitch: f64, albedo: f64) -> Result<TargetSurface> {
    if !(width > 0.0 && height > 0.0 && sample_pitch > 0.0) {
        return Err(Error::domain("plane width, height and pitch must be positive"));
    }
    let nu = (width / sample_pitch).round().max(1.0) as usize;
    let nv = (height / sample_pitch).round().max(1.0) as usize;
    let mut points = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let x = center.x - width / 2.0 + (i as f64 + 0.5) * width / nu as f64;
            let y = center.y - height / 2.0 + (j as f64 + 0.5) * height / nv as f64;
            points.push(SurfacePoint {
                position: Vec3::new(x, y, center.z),
                albedo,
                normal: Vec3::new(0.0, 0.0, -1.0),
            });
        }
    }
    TargetSurface::new(points, TargetKind::Plane)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_letter_stays_in_standoff_range() {
        let f = make_letter_f(0.5, [0.7, 1.0], 36.0, 0.01).unwrap();
        assert!(!f.is_empty());
        for p in f.points() {
            assert!((0.7..=1.0).contains(&p.position.z), "{:?}", p.position);
            assert!((p.normal.norm() - 1.0).abs() < 1e-12);
        }
        let (lo, hi) = f.bounds().unwrap();
        // 0.5 m · sin 36° of depth, 0.5 m · cos 36° of width.
        assert!((hi.z - lo.z - 0.49 * 36f64.to_radians().sin()).abs() < 0.01);
        assert!((hi.x - lo.x - 0.49 * 36f64.to_radians().cos()).abs() < 0.01);
    }

    #[test]
    fn untilted_normals_face_the_wall() {
        let f = make_letter_f(0.5, [0.7, 1.0], 0.0, 0.01).unwrap();
        for p in f.points() {
            assert_eq!(p.normal, Vec3::new(0.0, 0.0, -1.0));
            assert_eq!(p.position.z, 0.85);
        }
    }

    #[test]
    fn point_count_tracks_silhouette_area() {
        // Brute-force count of the mask over a fine grid gives the area fraction.
        let n = 2000;
        let mut inside = 0usize;
        for j in 0..n {
            for i in 0..n {
                if letter_f_mask((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64) {
                    inside += 1;
                }
            }
        }
        let fraction = inside as f64 / (n * n) as f64;
        assert!((fraction - LETTER_F_AREA_FRACTION).abs() < 1e-3, "{fraction}");

        let f = make_letter_f(0.5, [0.7, 1.0], 36.0, 0.01).unwrap();
        let expected = fraction * 0.25 / 1e-4;
        let rel = (f.len() as f64 - expected).abs() / expected;
        assert!(rel < 0.02, "{} vs {expected}", f.len());
    }

    #[test]
    fn degenerate_pitch_is_an_error() {
        assert!(make_letter_f(0.5, [0.7, 1.0], 36.0, 0.0).is_err());
        assert!(make_letter_f(0.5, [0.7, 1.0], 36.0, 0.6).is_err());
        assert!(make_letter_f(0.0, [0.7, 1.0], 36.0, 0.01).is_err());
    }

    #[test]
    fn narrow_standoff_for_large_tilt_is_an_error() {
        assert!(make_letter_f(0.5, [0.8, 0.9], 36.0, 0.01).is_err());
    }

    #[test]
    fn invariants_are_checked() {
        let bad = SurfacePoint {
            position: Vec3::new(0.0, 0.0, 1.0),
            albedo: 1.5,
            normal: Vec3::new(0.0, 0.0, -1.0),
        };
        assert!(TargetSurface::new(vec![bad], TargetKind::Point).is_err());
        let bad = SurfacePoint {
            albedo: 0.5,
            normal: Vec3::new(0.0, 0.0, -2.0),
            ..bad
        };
        assert!(TargetSurface::new(vec![bad], TargetKind::Point).is_err());
    }
}
