//! Temporal alignment on the first-scatter signature and return-leg compensation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::background::{tail_median, DEFAULT_TAIL_FRACTION};
use crate::calibration::peak::{detect_first_scatter_peak, Gate, Peak};
use crate::error::{Error, Result};
use crate::histogram::cube::{shift_into, Alignment, TimeHistogramCube};
use crate::histogram::geometry::SceneGeometry;
use crate::histogram::units::meters_per_bin;

/// Per-pixel timing offsets found by alignment.
///
/// `offsets[i]` is the detected first-scatter bin minus `reference_bin`; the
/// aligned histogram is the raw one shifted by `-offsets[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayMap {
    pub rows: usize,
    pub cols: usize,
    pub offsets: Vec<i64>,
    pub reference_bin: usize,
}

impl DelayMap {
    /// max − min over the pixels selected by `include` (all when `None`).
    pub fn spread(&self, include: Option<&[bool]>) -> i64 {
        let mut it = self
            .offsets
            .iter()
            .enumerate()
            .filter(|(i, _)| include.is_none_or(|m| m[*i]))
            .map(|(_, &o)| o);
        let Some(first) = it.next() else { return 0 };
        let (lo, hi) = it.fold((first, first), |(lo, hi), o| (lo.min(o), hi.max(o)));
        hi - lo
    }
}

/// Bin every first-scatter peak is moved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignReference {
    /// Lower median of the detected peak bins.
    Median,
    /// A known bin, which also removes any delay common to all pixels.
    Fixed(usize),
}

/// First-scatter peak of every pixel. Pixels flagged in `skip` may lack a
/// peak (`None`); any other pixel without one is an error naming it.
pub fn detect_peaks(cube: &TimeHistogramCube, gate: Gate, skip: Option<&[bool]>) -> Result<Vec<Option<Peak>>> {
    let gate = gate.within(cube.bins())?;
    let data = cube.to_real()?;
    let cols = cube.cols();
    let found: Vec<Result<Peak>> = data
        .par_chunks(cube.bins())
        .enumerate()
        .map(|(p, hist)| detect_first_scatter_peak(hist, gate).map_err(|e| e.at(p / cols, p % cols)))
        .collect();
    found
        .into_iter()
        .enumerate()
        .map(|(p, r)| match r {
            Ok(peak) => Ok(Some(peak)),
            Err(_) if skip.is_some_and(|m| m[p]) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Shift pixel `i` by `shifts[i]` bins (positive = later), filling vacated
/// bins with that pixel's tail-median background. Returns a real-kind cube.
pub fn shift_pixels(cube: &TimeHistogramCube, shifts: &[i64]) -> Result<TimeHistogramCube> {
    if shifts.len() != cube.pixel_count() {
        return Err(Error::invalid(
            "shifts",
            format!("{} shifts for {} pixels", shifts.len(), cube.pixel_count()),
        ));
    }
    let bins = cube.bins();
    let src = cube.to_real()?;
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(bins)
        .zip(src.par_chunks(bins))
        .zip(shifts.par_iter())
        .for_each(|((dst, hist), &s)| {
            let fill = tail_median(hist, DEFAULT_TAIL_FRACTION);
            shift_into(hist, s, fill, dst);
        });
    cube.with_real_data(out)
}

/// Integer-shift every histogram so its first-scatter peak sits on the
/// reference bin. Pixels in `skip` without a detectable peak keep offset 0.
pub fn align_first_scatter(
    cube: &TimeHistogramCube,
    gate: Gate,
    reference: AlignReference,
    skip: Option<&[bool]>,
) -> Result<(TimeHistogramCube, DelayMap)> {
    if let Some(m) = skip {
        if m.len() != cube.pixel_count() {
            return Err(Error::invalid("skip mask", "length differs from the pixel count"));
        }
    }
    let peaks = detect_peaks(cube, gate, skip)?;
    let reference_bin = match reference {
        AlignReference::Fixed(b) if b < cube.bins() => b,
        AlignReference::Fixed(b) => {
            return Err(Error::domain(format!(
                "reference bin {b} is outside a {}-bin histogram",
                cube.bins()
            )))
        }
        AlignReference::Median => {
            let mut bins: Vec<usize> = peaks
                .iter()
                .enumerate()
                .filter(|(p, _)| skip.is_none_or(|m| !m[*p]))
                .filter_map(|(_, pk)| pk.map(|pk| pk.bin))
                .collect();
            if bins.is_empty() {
                bins = peaks.iter().filter_map(|pk| pk.map(|pk| pk.bin)).collect();
            }
            if bins.is_empty() {
                return Err(Error::AllPixelsBad(cube.pixel_count()));
            }
            bins.sort_unstable();
            bins[(bins.len() - 1) / 2]
        }
    };
    let offsets: Vec<i64> = peaks
        .iter()
        .map(|pk| pk.map_or(0, |pk| pk.bin as i64 - reference_bin as i64))
        .collect();
    let shifts: Vec<i64> = offsets.iter().map(|o| -o).collect();
    let aligned = shift_pixels(cube, &shifts)?.with_alignment(Alignment { reference_bin });
    Ok((
        aligned,
        DelayMap {
            rows: cube.rows(),
            cols: cube.cols(),
            offsets,
            reference_bin,
        },
    ))
}

/// Whole-bin count of each pixel's wall→camera excess.
pub fn return_leg_bins(geometry: &SceneGeometry, bin_width_ps: f64) -> Vec<i64> {
    let per_bin = meters_per_bin(bin_width_ps);
    geometry
        .return_leg_excess()
        .into_iter()
        .map(|e| (e / per_bin).round() as i64)
        .collect()
}

/// Move each pixel earlier by its return-leg excess so the time axis counts
/// from the laser spot to the wall point only.
pub fn compensate_return_leg(cube: &TimeHistogramCube, geometry: &SceneGeometry) -> Result<TimeHistogramCube> {
    if geometry.rows() != cube.rows() || geometry.cols() != cube.cols() {
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
    let shifts: Vec<i64> = return_leg_bins(geometry, cube.bin_width_ps())
        .into_iter()
        .map(|s| -s)
        .collect();
    shift_pixels(cube, &shifts)
}

/// Align on the median first-scatter bin, then compensate the return leg.
pub fn align_histograms(
    cube: &TimeHistogramCube,
    gate: Gate,
    geometry: &SceneGeometry,
) -> Result<(TimeHistogramCube, DelayMap)> {
    align_histograms_to(cube, gate, geometry, AlignReference::Median)
}

pub fn align_histograms_to(
    cube: &TimeHistogramCube,
    gate: Gate,
    geometry: &SceneGeometry,
    reference: AlignReference,
) -> Result<(TimeHistogramCube, DelayMap)> {
    let (aligned, delays) = align_first_scatter(cube, gate, reference, None)?;
    Ok((compensate_return_leg(&aligned, geometry)?, delays))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::geometry::{GeometryDoc, Vec3, WallPlane};

    /// Geometry whose camera is so far away that every return-leg excess rounds to zero bins.
    fn flat_geometry(rows: usize, cols: usize) -> SceneGeometry {
        SceneGeometry::new(GeometryDoc {
            wall_plane: WallPlane {
                origin: Vec3::new(0.0, 0.0, 0.0),
                basis_u: Vec3::new(1.0, 0.0, 0.0),
                basis_v: Vec3::new(0.0, 1.0, 0.0),
            },
            camera_pos: Vec3::new(0.0, 0.0, 1000.0),
            laser_pos: Vec3::new(-0.7, 0.0, 1000.0),
            laser_spot: Vec3::new(-0.7, 0.0, 0.0),
            fov_extent: [0.1, 0.1],
            rows,
            cols,
        })
        .unwrap()
    }

    fn cube_with_peaks(peaks: &[usize], bins: usize) -> TimeHistogramCube {
        let mut data = vec![1.0; peaks.len() * bins];
        for (p, &b) in peaks.iter().enumerate() {
            data[p * bins + b] = 100.0;
            data[p * bins + b + 1] = 40.0;
        }
        TimeHistogramCube::from_real(1, peaks.len(), bins, 55.0, data).unwrap()
    }

    #[test]
    fn already_aligned_cube_is_unchanged() {
        let cube = cube_with_peaks(&[50, 50, 50, 50], 256);
        let g = flat_geometry(1, 4);
        assert!(return_leg_bins(&g, 55.0).iter().all(|&s| s == 0));
        let (out, delays) = align_histograms(&cube, Gate::default(), &g).unwrap();
        assert_eq!(delays.offsets, vec![0; 4]);
        assert_eq!(delays.reference_bin, 50);
        assert_eq!(out.to_real().unwrap(), cube.to_real().unwrap());
        assert_eq!(out.alignment(), Some(Alignment { reference_bin: 50 }));
    }

    #[test]
    fn offsets_are_peak_minus_reference() {
        let cube = cube_with_peaks(&[50, 53, 60, 51, 75], 256);
        let (out, delays) = align_first_scatter(&cube, Gate::default(), AlignReference::Median, None).unwrap();
        assert_eq!(delays.reference_bin, 53);
        assert_eq!(delays.offsets, vec![-3, 0, 7, -2, 22]);
        assert_eq!(delays.spread(None), 25);
        for p in 0..5 {
            let h = out.pixel_real(p).unwrap();
            assert_eq!(h[53], 100.0);
            assert_eq!(h[54], 40.0);
        }
    }

    #[test]
    fn fixed_reference_removes_a_common_delay() {
        let cube = cube_with_peaks(&[70, 70, 70], 256);
        let (_, delays) = align_first_scatter(&cube, Gate::default(), AlignReference::Fixed(50), None).unwrap();
        assert_eq!(delays.offsets, vec![20; 3]);
    }

    #[test]
    fn vacated_bins_take_the_tail_median() {
        let mut data = vec![0.0; 2 * 100];
        for b in 0..100 {
            data[b] = 2.0;
            data[100 + b] = 2.0;
        }
        data[10] = 50.0;
        data[100 + 30] = 50.0;
        for b in 90..100 {
            data[100 + b] = 5.0;
        }
        let cube = TimeHistogramCube::from_real(1, 2, 100, 55.0, data).unwrap();
        let (out, _) = align_first_scatter(&cube, Gate::new(0, 50), AlignReference::Fixed(10), None).unwrap();
        let h = out.pixel_real(1).unwrap();
        assert_eq!(h[10], 50.0);
        assert!(h[80..].iter().all(|&x| x == 5.0));
    }

    #[test]
    fn missing_peak_names_the_pixel() {
        let mut data = vec![0.0; 4 * 64];
        for p in [0, 1, 3] {
            data[p * 64 + 5] = 1.0;
        }
        let cube = TimeHistogramCube::from_real(2, 2, 64, 55.0, data).unwrap();
        match align_first_scatter(&cube, Gate::new(0, 32), AlignReference::Median, None) {
            Err(Error::NoPeak { pixel: Some((1, 0)), .. }) => {}
            other => panic!("{other:?}"),
        }
        let skip = [false, false, true, false];
        let (_, delays) = align_first_scatter(&cube, Gate::new(0, 32), AlignReference::Median, Some(&skip)).unwrap();
        assert_eq!(delays.offsets, vec![0; 4]);
    }

    #[test]
    fn default_geometry_return_leg_is_a_few_bins() {
        let g = SceneGeometry::standard();
        let legs = return_leg_bins(&g, 55.0);
        assert_eq!(*legs.iter().min().unwrap(), 0);
        let max = *legs.iter().max().unwrap();
        assert!((9..=12).contains(&max), "{max}");
    }
}
