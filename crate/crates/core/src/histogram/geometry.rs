//! Scene geometry of the relay wall, laser and camera.
//!
//! Frame convention: the relay wall is the plane z = 0, +z points into the
//! hidden volume, x is right and y is up as seen from the camera. The camera
//! and laser stand in front of the wall (z > 0); the hidden object shares that
//! half-space but is occluded from the camera's direct view.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Relay-wall plane: `origin` is the center of the imaged region, `basis_u`
/// runs along pixel columns (right), `basis_v` along rows (up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallPlane {
    pub origin: Vec3,
    pub basis_u: Vec3,
    pub basis_v: Vec3,
}

impl WallPlane {
    pub fn normal(&self) -> Vec3 {
        self.basis_u.cross(self.basis_v)
    }

    fn validate(&self) -> Result<()> {
        let tol = 1e-9;
        let (u, v) = (self.basis_u, self.basis_v);
        if (u.norm() - 1.0).abs() > tol || (v.norm() - 1.0).abs() > tol || u.dot(v).abs() > tol {
            return Err(Error::invalid(
                "wall plane",
                "basis_u and basis_v must be orthonormal",
            ));
        }
        Ok(())
    }
}

/// Serialized geometry document. Pixel points are derived, not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    pub wall_plane: WallPlane,
    pub camera_pos: Vec3,
    pub laser_pos: Vec3,
    pub laser_spot: Vec3,
    pub fov_extent: [f64; 2],
    pub rows: usize,
    pub cols: usize,
}

/// Relay-wall scene: wall plane, per-pixel wall sampling points, laser spot and
/// the camera/laser positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    doc: GeometryDoc,
    pixel_points: Vec<Vec3>,
}

/// Camera and laser distance from the wall in the default setup.
pub const DEFAULT_STANDOFF_M: f64 = 1.2;
/// Side length of the square imaged wall region.
pub const DEFAULT_FOV_M: f64 = 1.0;
/// How far outside the imaged region the default laser spot sits.
pub const DEFAULT_SPOT_MARGIN_M: f64 = 0.2;

impl SceneGeometry {
    pub fn new(doc: GeometryDoc) -> Result<Self> {
        doc.wall_plane.validate()?;
        if doc.rows == 0 || doc.cols == 0 {
            return Err(Error::invalid("geometry", "rows and cols must be positive"));
        }
        if doc.rows > u16::MAX as usize || doc.cols > u16::MAX as usize {
            return Err(Error::invalid("geometry", "rows and cols must fit in u16"));
        }
        let [w, h] = doc.fov_extent;
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::invalid("geometry", "fov_extent must be positive"));
        }
        let plane = doc.wall_plane;
        let mut pixel_points = Vec::with_capacity(doc.rows * doc.cols);
        for r in 0..doc.rows {
            let v = h / 2.0 - (r as f64 + 0.5) * h / doc.rows as f64;
            for c in 0..doc.cols {
                let u = -w / 2.0 + (c as f64 + 0.5) * w / doc.cols as f64;
                pixel_points.push(plane.origin + plane.basis_u * u + plane.basis_v * v);
            }
        }
        let geometry = Self { doc, pixel_points };
        if geometry.spot_inside_pixel_hull() {
            return Err(Error::invalid(
                "geometry",
                "laser spot must lie outside the camera's imaged wall region",
            ));
        }
        Ok(geometry)
    }

    /// The default setup: camera and laser 1.2 m from the wall, a 1.0 m × 1.0 m
    /// imaged region sampled by 32 × 32 pixels, and the laser spot placed
    /// 0.2 m beyond the left edge of that region.
    pub fn standard() -> Self {
        let half = DEFAULT_FOV_M / 2.0;
        let spot = Vec3::new(-(half + DEFAULT_SPOT_MARGIN_M), 0.0, 0.0);
        let doc = GeometryDoc {
            wall_plane: WallPlane {
                origin: Vec3::new(0.0, 0.0, 0.0),
                basis_u: Vec3::new(1.0, 0.0, 0.0),
                basis_v: Vec3::new(0.0, 1.0, 0.0),
            },
            camera_pos: Vec3::new(0.0, 0.0, DEFAULT_STANDOFF_M),
            laser_pos: Vec3::new(spot.x, spot.y, DEFAULT_STANDOFF_M),
            laser_spot: spot,
            fov_extent: [DEFAULT_FOV_M, DEFAULT_FOV_M],
            rows: 32,
            cols: 32,
        };
        Self::new(doc).expect("default geometry is valid")
    }

    pub fn doc(&self) -> &GeometryDoc {
        &self.doc
    }

    pub fn rows(&self) -> usize {
        self.doc.rows
    }

    pub fn cols(&self) -> usize {
        self.doc.cols
    }

    pub fn pixel_count(&self) -> usize {
        self.doc.rows * self.doc.cols
    }

    /// Wall point imaged by each pixel, row-major.
    pub fn pixel_points(&self) -> &[Vec3] {
        &self.pixel_points
    }

    pub fn pixel_point(&self, row: usize, col: usize) -> Vec3 {
        self.pixel_points[row * self.doc.cols + col]
    }

    pub fn laser_spot(&self) -> Vec3 {
        self.doc.laser_spot
    }

    pub fn camera_pos(&self) -> Vec3 {
        self.doc.camera_pos
    }

    pub fn laser_pos(&self) -> Vec3 {
        self.doc.laser_pos
    }

    pub fn wall_plane(&self) -> &WallPlane {
        &self.doc.wall_plane
    }

    /// Grid spacing between adjacent pixel points along (columns, rows).
    pub fn pixel_pitch(&self) -> (f64, f64) {
        let [w, h] = self.doc.fov_extent;
        (w / self.doc.cols as f64, h / self.doc.rows as f64)
    }

    /// Per-pixel excess of the wall→camera leg over the shortest such leg, meters.
    pub fn return_leg_excess(&self) -> Vec<f64> {
        let cam = self.doc.camera_pos;
        let d: Vec<f64> = self.pixel_points.iter().map(|w| w.distance(cam)).collect();
        let d_ref = d.iter().copied().fold(f64::INFINITY, f64::min);
        d.into_iter().map(|x| x - d_ref).collect()
    }

    /// Signed distance of `p` from the wall plane along its normal.
    pub fn height_above_wall(&self, p: Vec3) -> f64 {
        (p - self.doc.wall_plane.origin).dot(self.doc.wall_plane.normal())
    }

    fn spot_inside_pixel_hull(&self) -> bool {
        let plane = &self.doc.wall_plane;
        let rel = self.doc.laser_spot - plane.origin;
        let (u, v) = (rel.dot(plane.basis_u), rel.dot(plane.basis_v));
        let [w, h] = self.doc.fov_extent;
        // Hull of the pixel centers, half a pitch in from the region edge.
        let (pu, pv) = self.pixel_pitch();
        let (hu, hv) = (w / 2.0 - pu / 2.0, h / 2.0 - pv / 2.0);
        u.abs() <= hu && v.abs() <= hv
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::new(serde_json::from_str(s)?)
    }
}
