use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::histogram::units::check_bin_width;

pub const DEFAULT_ROWS: usize = 32;
pub const DEFAULT_COLS: usize = 32;
pub const DEFAULT_BINS: usize = 1024;
pub const DEFAULT_BIN_WIDTH_PS: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Counts,
    Real,
    Complex,
}

impl ValueKind {
    pub fn code(self) -> u16 {
        match self {
            ValueKind::Counts => 0,
            ValueKind::Real => 1,
            ValueKind::Complex => 2,
        }
    }

    pub fn from_code(code: u16) -> Option<Self> {
        match code {
            0 => Some(ValueKind::Counts),
            1 => Some(ValueKind::Real),
            2 => Some(ValueKind::Complex),
            _ => None,
        }
    }
}

/// Histogram payload, laid out (row, col, bin) with bin fastest.
#[derive(Debug, Clone, PartialEq)]
pub enum CubeData {
    Counts(Vec<u32>),
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl CubeData {
    pub fn len(&self) -> usize {
        match self {
            CubeData::Counts(v) => v.len(),
            CubeData::Real(v) => v.len(),
            CubeData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            CubeData::Counts(_) => ValueKind::Counts,
            CubeData::Real(_) => ValueKind::Real,
            CubeData::Complex(_) => ValueKind::Complex,
        }
    }
}

/// Marks a cube whose time axis follows the calibrated convention: bin 0 is
/// the instant light leaves the laser spot on the wall, the per-pixel delays
/// and the wall→camera leg have been removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Alignment {
    /// Bin on which the first-scatter signature was placed.
    pub reference_bin: usize,
}

/// A rows × cols grid of per-pixel photon arrival-time histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeHistogramCube {
    rows: usize,
    cols: usize,
    bins: usize,
    bin_width_ps: f64,
    data: CubeData,
    alignment: Option<Alignment>,
}

impl TimeHistogramCube {
    pub fn new(
        rows: usize,
        cols: usize,
        bins: usize,
        bin_width_ps: f64,
        data: CubeData,
    ) -> Result<Self> {
        check_bin_width(bin_width_ps)?;
        if rows == 0 || cols == 0 || bins == 0 {
            return Err(Error::invalid("cube", "rows, cols and bins must be positive"));
        }
        if rows > u16::MAX as usize || cols > u16::MAX as usize || bins > u32::MAX as usize {
            return Err(Error::invalid("cube", "dimensions exceed the file format range"));
        }
        let expected = rows * cols * bins;
        if data.len() != expected {
            return Err(Error::invalid(
                "cube",
                format!(
                    "{rows}x{cols}x{bins} needs {expected} values, got {}",
                    data.len()
                ),
            ));
        }
        if let CubeData::Real(v) = &data {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("cube", "real data must be finite"));
            }
        }
        Ok(Self {
            rows,
            cols,
            bins,
            bin_width_ps,
            data,
            alignment: None,
        })
    }

    pub fn zeros(rows: usize, cols: usize, bins: usize, bin_width_ps: f64, kind: ValueKind) -> Result<Self> {
        let n = rows * cols * bins;
        let data = match kind {
            ValueKind::Counts => CubeData::Counts(vec![0; n]),
            ValueKind::Real => CubeData::Real(vec![0.0; n]),
            ValueKind::Complex => CubeData::Complex(vec![Complex64::new(0.0, 0.0); n]),
        };
        Self::new(rows, cols, bins, bin_width_ps, data)
    }

    pub fn from_real(rows: usize, cols: usize, bins: usize, bin_width_ps: f64, data: Vec<f64>) -> Result<Self> {
        Self::new(rows, cols, bins, bin_width_ps, CubeData::Real(data))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn bin_width_ps(&self) -> f64 {
        self.bin_width_ps
    }

    pub fn kind(&self) -> ValueKind {
        self.data.kind()
    }

    pub fn data(&self) -> &CubeData {
        &self.data
    }

    pub fn into_data(self) -> CubeData {
        self.data
    }

    pub fn alignment(&self) -> Option<Alignment> {
        self.alignment
    }

    pub fn set_alignment(&mut self, alignment: Option<Alignment>) {
        self.alignment = alignment;
    }

    pub fn with_alignment(mut self, alignment: Alignment) -> Self {
        self.alignment = Some(alignment);
        self
    }

    pub fn same_shape(&self, other: &TimeHistogramCube) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.bins == other.bins
            && self.bin_width_ps == other.bin_width_ps
    }

    /// Pixel histograms widened to f64. Complex cubes are rejected.
    pub fn to_real(&self) -> Result<Vec<f64>> {
        match &self.data {
            CubeData::Counts(v) => Ok(v.iter().map(|&x| x as f64).collect()),
            CubeData::Real(v) => Ok(v.clone()),
            CubeData::Complex(_) => Err(Error::invalid("cube", "expected counts or real data, got complex")),
        }
    }

    /// Histogram of one pixel as f64 (counts and real only).
    pub fn pixel_real(&self, pixel: usize) -> Result<Vec<f64>> {
        let range = pixel * self.bins..(pixel + 1) * self.bins;
        match &self.data {
            CubeData::Counts(v) => Ok(v[range].iter().map(|&x| x as f64).collect()),
            CubeData::Real(v) => Ok(v[range].to_vec()),
            CubeData::Complex(_) => Err(Error::invalid("cube", "expected counts or real data, got complex")),
        }
    }

    /// Sum over all bins of one pixel (counts and real only).
    pub fn pixel_total(&self, pixel: usize) -> f64 {
        let range = pixel * self.bins..(pixel + 1) * self.bins;
        match &self.data {
            CubeData::Counts(v) => v[range].iter().map(|&x| x as f64).sum(),
            CubeData::Real(v) => v[range].iter().sum(),
            CubeData::Complex(v) => v[range].iter().map(|z| z.norm()).sum(),
        }
    }

    /// Same header, new real payload.
    pub fn with_real_data(&self, data: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.rows, self.cols, self.bins, self.bin_width_ps, CubeData::Real(data))?;
        out.alignment = self.alignment;
        Ok(out)
    }

    pub fn with_complex_data(&self, data: Vec<Complex64>) -> Result<Self> {
        let mut out = Self::new(self.rows, self.cols, self.bins, self.bin_width_ps, CubeData::Complex(data))?;
        out.alignment = self.alignment;
        Ok(out)
    }

    /// Shift every pixel later in time by `bins` (earlier if negative), zero-filling
    /// vacated bins. Alignment metadata is kept, so this models an uncompensated
    /// global timing error on a cube believed to be calibrated.
    pub fn shift_all(&self, bins: i64) -> Self {
        let n = self.bins;
        let shift_vec = |src: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; src.len()];
            for (p, hist) in src.chunks_exact(n).enumerate() {
                shift_into(hist, bins, 0.0, &mut out[p * n..(p + 1) * n]);
            }
            out
        };
        let data = match &self.data {
            CubeData::Counts(v) => {
                let mut out = vec![0u32; v.len()];
                for (p, hist) in v.chunks_exact(n).enumerate() {
                    shift_into(hist, bins, 0, &mut out[p * n..(p + 1) * n]);
                }
                CubeData::Counts(out)
            }
            CubeData::Real(v) => CubeData::Real(shift_vec(v)),
            CubeData::Complex(v) => {
                let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
                for (p, hist) in v.chunks_exact(n).enumerate() {
                    shift_into(hist, bins, Complex64::new(0.0, 0.0), &mut out[p * n..(p + 1) * n]);
                }
                CubeData::Complex(out)
            }
        };
        Self {
            data,
            ..self.clone()
        }
    }
}

/// `out[b] = src[b - shift]`, with `fill` where the source index falls outside.
pub(crate) fn shift_into<T: Copy>(src: &[T], shift: i64, fill: T, out: &mut [T]) {
    let n = src.len() as i64;
    for (b, o) in out.iter_mut().enumerate() {
        let s = b as i64 - shift;
        *o = if (0..n).contains(&s) { src[s as usize] } else { fill };
    }
}
