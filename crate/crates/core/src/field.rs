//! Complex fields on a [`Grid3`] and the error measures used to compare them.

use std::io::{Read, Write};
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid3;

/// Magic bytes at the start of every field snapshot.
pub const FIELD_MAGIC: [u8; 8] = *b"HLMFLD01";
/// Snapshot header: magic followed by three little-endian `u64` extents.
pub const FIELD_HEADER_LEN: usize = 32;

/// Complex samples on every node of a grid, x fastest, then y, then z.
///
/// Slice `l` (fixed z) is the contiguous block
/// `data[l * nx * ny .. (l + 1) * nx * ny]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    grid: Grid3,
    data: Vec<Complex64>,
}

impl Field3 {
    pub fn zeros(grid: &Grid3) -> Self {
        Self {
            grid: *grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_vec(grid: &Grid3, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid: *grid, data })
    }

    /// Samples `f` at every node (0-based indices passed through to `Grid3::point`).
    pub fn from_fn(grid: &Grid3, mut f: impl FnMut([f64; 3]) -> Complex64) -> Self {
        let [nx, ny, nz] = grid.dims();
        let mut data = Vec::with_capacity(grid.len());
        for l in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    data.push(f(grid.point(i as isize, j as isize, l as isize)));
                }
            }
        }
        Self { grid: *grid, data }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// 1-based access following the layout of [`Grid3::index`].
    pub fn get(&self, i: usize, j: usize, l: usize) -> Result<Complex64> {
        Ok(self.data[self.grid.index(i, j, l)?])
    }

    /// Horizontal slice `l` (0-based).
    pub fn slice(&self, l: usize) -> &[Complex64] {
        let m = self.grid.slice_len();
        &self.data[l * m..(l + 1) * m]
    }

    pub fn slice_mut(&mut self, l: usize) -> &mut [Complex64] {
        let m = self.grid.slice_len();
        &mut self.data[l * m..(l + 1) * m]
    }

    pub fn scale(&mut self, c: Complex64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &Field3) -> Result<()> {
        self.grid.ensure_compatible(&other.grid)?;
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += c * b);
        Ok(())
    }

    pub fn norm_l2(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.data)
    }

    /// Writes the snapshot format: 32-byte header then interleaved `(re, im)`
    /// little-endian doubles.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        write_raw(w, self.grid.dims(), &self.data)
    }

    /// Reads a snapshot and attaches it to `grid`, whose extents must match.
    pub fn read_from(r: &mut impl Read, grid: &Grid3) -> Result<Self> {
        let (dims, data) = read_raw(r)?;
        if dims != grid.dims() {
            return Err(Error::Format(format!(
                "snapshot extents {dims:?} do not match grid {:?}",
                grid.dims()
            )));
        }
        Ok(Self { grid: *grid, data })
    }
}

impl Index<usize> for Field3 {
    type Output = Complex64;

    fn index(&self, k: usize) -> &Complex64 {
        &self.data[k]
    }
}

impl IndexMut<usize> for Field3 {
    fn index_mut(&mut self, k: usize) -> &mut Complex64 {
        &mut self.data[k]
    }
}

/// Writes `data` with extents `dims` in the snapshot format.
pub fn write_raw(w: &mut impl Write, dims: [usize; 3], data: &[Complex64]) -> Result<()> {
    if dims.iter().product::<usize>() != data.len() {
        return Err(Error::Format(format!(
            "extents {dims:?} do not cover {} values",
            data.len()
        )));
    }
    let mut header = [0u8; FIELD_HEADER_LEN];
    header[..8].copy_from_slice(&FIELD_MAGIC);
    for (k, &n) in dims.iter().enumerate() {
        header[8 + 8 * k..16 + 8 * k].copy_from_slice(&(n as u64).to_le_bytes());
    }
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(16 * data.len());
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads one snapshot record, returning its extents and values.
pub fn read_raw(r: &mut impl Read) -> Result<([usize; 3], Vec<Complex64>)> {
    let mut header = [0u8; FIELD_HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..8] != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut dims = [0usize; 3];
    for (k, d) in dims.iter_mut().enumerate() {
        let mut b = [0u8; 8];
        b.copy_from_slice(&header[8 + 8 * k..16 + 8 * k]);
        *d = usize::try_from(u64::from_le_bytes(b))
            .map_err(|_| Error::Format("extent overflows usize".into()))?;
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("extent product overflows".into()))?;
    let mut bytes = vec![0u8; 16 * n];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((dims, data))
}

pub(crate) fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The error triplet reported for a computed field against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormReport {
    /// `‖u - ref‖₂ / ‖ref‖₂`
    pub l2_rel: f64,
    /// `‖u - ref‖∞`
    pub linf_abs: f64,
    /// `‖u - ref‖∞ / ‖ref‖∞`
    pub linf_rel: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl NormReport {
    /// Compares raw vectors of equal length.
    pub fn between(u: &[Complex64], reference: &[Complex64]) -> Self {
        debug_assert_eq!(u.len(), reference.len());
        let mut sq = 0.0;
        let mut inf = 0.0f64;
        for (a, b) in u.iter().zip(reference) {
            let d = a - b;
            sq += d.norm_sqr();
            inf = inf.max(d.norm());
        }
        let diff2 = sq.sqrt();
        Self {
            l2_rel: ratio(diff2, norm2(reference)),
            linf_abs: inf,
            linf_rel: ratio(inf, norm_inf(reference)),
        }
    }
}

/// L2-relative, max-absolute and max-relative error of `u` against `reference`.
pub fn norms(u: &Field3, reference: &Field3) -> Result<NormReport> {
    u.grid().ensure_compatible(reference.grid())?;
    Ok(NormReport::between(u.as_slice(), reference.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Placement;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let g = Grid3::unit_cube(3, Placement::Collocated).unwrap();
        let u = Field3::from_fn(&g, |p| Complex64::new(p[0], p[1] * p[2]));
        let r = norms(&u, &u).unwrap();
        assert_eq!(r, NormReport::default());
    }

    #[test]
    fn single_perturbation() {
        let g = Grid3::unit_cube(2, Placement::Collocated).unwrap();
        let reference = Field3::from_vec(&g, vec![c(1.0); 8]).unwrap();
        let mut u = reference.clone();
        u[0] += 0.1;
        let r = norms(&u, &reference).unwrap();
        assert!((r.linf_abs - 0.1).abs() < 1e-15);
        assert!((r.l2_rel - 0.1 / 8f64.sqrt()).abs() < 1e-15);
        assert!((r.linf_rel - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_reference_gives_infinite_relative_error() {
        let g = Grid3::unit_cube(2, Placement::Staggered).unwrap();
        let zero = Field3::zeros(&g);
        let mut u = zero.clone();
        u[3] = c(2.0);
        let r = norms(&u, &zero).unwrap();
        assert!(r.l2_rel.is_infinite() && r.linf_rel.is_infinite());
        assert_eq!(r.linf_abs, 2.0);
        assert_eq!(norms(&zero, &zero).unwrap().l2_rel, 0.0);
    }

    #[test]
    fn snapshot_header_layout() {
        let g = Grid3::new([2, 3, 1], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
        let u = Field3::from_fn(&g, |p| Complex64::new(p[0], -p[1]));
        let mut buf = Vec::new();
        u.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), FIELD_HEADER_LEN + 16 * 6);
        assert_eq!(&buf[..8], b"HLMFLD01");
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 3);
        let back = Field3::read_from(&mut buf.as_slice(), &g).unwrap();
        assert_eq!(back, u);

        let other = Grid3::new([3, 2, 1], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
        assert!(Field3::read_from(&mut buf.as_slice(), &other).is_err());
        buf[0] = b'X';
        assert!(read_raw(&mut buf.as_slice()).is_err());
    }
}
