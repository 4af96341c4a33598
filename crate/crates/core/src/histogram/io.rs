//! NLCB (histogram cube) and NLVL (voxel volume) files. Both are little-endian.
//!
//! NLCB, 32-byte header:
//!
//! | offset | size | field                                         |
//! |--------|------|-----------------------------------------------|
//! | 0      | 4    | magic `NLCB`                                  |
//! | 4      | 2    | version = 1                                   |
//! | 6      | 2    | value kind (0 counts/u32, 1 real/f64, 2 complex f64 re,im) |
//! | 8      | 2    | rows                                          |
//! | 10     | 2    | cols                                          |
//! | 12     | 4    | bins                                          |
//! | 16     | 8    | bin width, ps (f64)                           |
//! | 24     | 8    | reserved, zero                                |
//!
//! followed by the payload in (row, col, bin) order, bin fastest.
//!
//! NLVL, 52-byte header: magic `NLVL`, version u16 = 1, value kind u16
//! (1 real, 2 complex), nx/ny/nz u32, origin f64×3, voxel size f64, then the
//! payload indexed `(ix·ny + iy)·nz + iz`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::histogram::cube::{CubeData, TimeHistogramCube, ValueKind};
use crate::histogram::geometry::Vec3;
use crate::histogram::volume::{VolumeData, VolumeGrid, VoxelVolume};

pub const CUBE_MAGIC: &[u8; 4] = b"NLCB";
pub const VOLUME_MAGIC: &[u8; 4] = b"NLVL";
pub const FORMAT_VERSION: u16 = 1;
pub const CUBE_HEADER_LEN: usize = 32;
pub const VOLUME_HEADER_LEN: usize = 52;

pub fn encode_cube(cube: &TimeHistogramCube) -> Vec<u8> {
    let elem = match cube.kind() {
        ValueKind::Counts => 4,
        ValueKind::Real => 8,
        ValueKind::Complex => 16,
    };
    let mut out = Vec::with_capacity(CUBE_HEADER_LEN + cube.data().len() * elem);
    out.extend_from_slice(CUBE_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&cube.kind().code().to_le_bytes());
    out.extend_from_slice(&(cube.rows() as u16).to_le_bytes());
    out.extend_from_slice(&(cube.cols() as u16).to_le_bytes());
    out.extend_from_slice(&(cube.bins() as u32).to_le_bytes());
    out.extend_from_slice(&cube.bin_width_ps().to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    match cube.data() {
        CubeData::Counts(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        CubeData::Real(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        CubeData::Complex(v) => v.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
    }
    out
}

pub fn decode_cube(bytes: &[u8]) -> Result<TimeHistogramCube> {
    let mut r = Reader::new(bytes);
    r.magic(CUBE_MAGIC)?;
    r.version()?;
    let kind_at = r.pos;
    let kind = ValueKind::from_code(r.u16()?)
        .ok_or_else(|| Error::format(kind_at as u64, "unknown value kind"))?;
    let rows = r.u16()? as usize;
    let cols = r.u16()? as usize;
    let bins = r.u32()? as usize;
    let bw_at = r.pos;
    let bin_width = r.f64()?;
    let reserved_at = r.pos;
    if r.take(8)?.iter().any(|&b| b != 0) {
        return Err(Error::format(reserved_at as u64, "reserved header bytes must be zero"));
    }
    if rows == 0 || cols == 0 || bins == 0 {
        return Err(Error::format(8, format!("degenerate dims {rows}x{cols}x{bins}")));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::format(bw_at as u64, format!("bin width {bin_width} is not positive")));
    }
    let n = rows * cols * bins;
    let elem = match kind {
        ValueKind::Counts => 4,
        ValueKind::Real => 8,
        ValueKind::Complex => 16,
    };
    r.expect_payload(n, elem, &format!("{rows}x{cols}x{bins}"))?;
    let data = match kind {
        ValueKind::Counts => CubeData::Counts((0..n).map(|_| r.u32()).collect::<Result<_>>()?),
        ValueKind::Real => CubeData::Real((0..n).map(|_| r.f64()).collect::<Result<_>>()?),
        ValueKind::Complex => CubeData::Complex(
            (0..n)
                .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
                .collect::<Result<_>>()?,
        ),
    };
    TimeHistogramCube::new(rows, cols, bins, bin_width, data)
        .map_err(|e| Error::format(CUBE_HEADER_LEN as u64, e.to_string()))
}

pub fn save_cube(cube: &TimeHistogramCube, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_cube(cube))?;
    Ok(())
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<TimeHistogramCube> {
    decode_cube(&fs::read(path)?)
}

pub fn encode_volume(volume: &VoxelVolume) -> Vec<u8> {
    let grid = volume.grid();
    let kind: u16 = if volume.is_complex() { 2 } else { 1 };
    let mut out = Vec::with_capacity(VOLUME_HEADER_LEN + grid.len() * 16);
    out.extend_from_slice(VOLUME_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&kind.to_le_bytes());
    for d in grid.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for c in [grid.origin.x, grid.origin.y, grid.origin.z, grid.voxel_size] {
        out.extend_from_slice(&c.to_le_bytes());
    }
    match volume.data() {
        VolumeData::Real(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        VolumeData::Complex(v) => v.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
    }
    out
}

pub fn decode_volume(bytes: &[u8]) -> Result<VoxelVolume> {
    let mut r = Reader::new(bytes);
    r.magic(VOLUME_MAGIC)?;
    r.version()?;
    let kind_at = r.pos;
    let kind = r.u16()?;
    if kind != 1 && kind != 2 {
        return Err(Error::format(kind_at as u64, format!("unknown volume value kind {kind}")));
    }
    let dims = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let origin = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
    let size_at = r.pos;
    let voxel_size = r.f64()?;
    let grid = VolumeGrid::new(dims, origin, voxel_size)
        .map_err(|e| Error::format(size_at as u64, e.to_string()))?;
    let n = grid.len();
    let elem = if kind == 1 { 8 } else { 16 };
    r.expect_payload(n, elem, &format!("{}x{}x{}", dims[0], dims[1], dims[2]))?;
    let data = if kind == 1 {
        VolumeData::Real((0..n).map(|_| r.f64()).collect::<Result<_>>()?)
    } else {
        VolumeData::Complex(
            (0..n)
                .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
                .collect::<Result<_>>()?,
        )
    };
    VoxelVolume::new(grid, data)
}

pub fn save_volume(volume: &VoxelVolume, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_volume(volume))?;
    Ok(())
}

pub fn load_volume(path: impl AsRef<Path>) -> Result<VoxelVolume> {
    decode_volume(&fs::read(path)?)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.pos as u64,
                format!("truncated: need {n} bytes, {} remain", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != expected {
            return Err(Error::format(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    fn version(&mut self) -> Result<()> {
        let at = self.pos;
        let v = self.u16()?;
        if v != FORMAT_VERSION {
            return Err(Error::format(at as u64, format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn expect_payload(&self, n: usize, elem: usize, dims: &str) -> Result<()> {
        let have = self.bytes.len() - self.pos;
        let need = n
            .checked_mul(elem)
            .ok_or_else(|| Error::format(self.pos as u64, "payload size overflows"))?;
        if have != need {
            let offset = (self.pos + have.min(need)) as u64;
            return Err(Error::format(
                offset,
                format!("dims {dims} need {need} payload bytes, file has {have}"),
            ));
        }
        Ok(())
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cube() -> TimeHistogramCube {
        let data: Vec<u32> = (0..2 * 3 * 5).map(|i| i * 7).collect();
        TimeHistogramCube::new(2, 3, 5, 55.0, CubeData::Counts(data)).unwrap()
    }

    #[test]
    fn counts_cube_file_size() {
        let cube = TimeHistogramCube::zeros(32, 32, 1024, 55.0, ValueKind::Counts).unwrap();
        assert_eq!(encode_cube(&cube).len(), 32 + 32 * 32 * 1024 * 4);
    }

    #[test]
    fn header_layout() {
        let bytes = encode_cube(&sample_cube());
        assert_eq!(&bytes[0..4], b"NLCB");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 0);
        assert_eq!(u16::from_le_bytes([bytes[8], bytes[9]]), 2);
        assert_eq!(u16::from_le_bytes([bytes[10], bytes[11]]), 3);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 5);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 55.0);
        assert_eq!(&bytes[24..32], &[0; 8]);
        // First payload value is pixel (0,0) bin 0, second is bin 1.
        assert_eq!(u32::from_le_bytes(bytes[36..40].try_into().unwrap()), 7);
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let mut bytes = encode_cube(&sample_cube());
        bytes[0..4].copy_from_slice(b"XXXX");
        match decode_cube(&bytes) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let bytes = encode_cube(&sample_cube());
        let cut = &bytes[..bytes.len() - 3];
        match decode_cube(cut) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset as usize, cut.len());
                assert!(message.contains("payload"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
        match decode_cube(&bytes[..10]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut bytes = encode_cube(&sample_cube());
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        assert!(matches!(decode_cube(&bytes), Err(Error::Format { .. })));
    }

    #[test]
    fn nonzero_reserved_bytes_are_rejected() {
        let mut bytes = encode_cube(&sample_cube());
        bytes[30] = 1;
        match decode_cube(&bytes) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 24),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.nlcb");
        let cube = sample_cube();
        save_cube(&cube, &path).unwrap();
        assert_eq!(load_cube(&path).unwrap(), cube);
    }

    #[test]
    fn volume_header_and_round_trip() {
        let grid = VolumeGrid::new([2, 3, 4], Vec3::new(-0.6, -0.6, 0.0), 0.01).unwrap();
        let vol = VoxelVolume::real(grid, (0..24).map(|i| i as f64 * 0.5).collect()).unwrap();
        let bytes = encode_volume(&vol);
        assert_eq!(bytes.len(), VOLUME_HEADER_LEN + 24 * 8);
        assert_eq!(&bytes[0..4], b"NLVL");
        assert_eq!(decode_volume(&bytes).unwrap(), vol);

        let mut bad = bytes.clone();
        bad.truncate(VOLUME_HEADER_LEN + 8);
        assert!(matches!(decode_volume(&bad), Err(Error::Format { .. })));
    }
}
