//! Structured rectangular grids.
//!
//! Nodes are either collocated with the domain boundary (first and last node
//! sit on the faces) or staggered by half a cell, so that the faces fall
//! midway between the first two and last two nodes.

use crate::error::{Error, Result};

/// One of the three coordinate directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Where grid nodes sit relative to the domain faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    /// `h = (R - L) / (N - 1)`, node `j` at `L + (j - 1) h`.
    Collocated,
    /// `h = (R - L) / N`, node `j` at `L + h/2 + (j - 1) h`.
    Staggered,
}

/// Relative tolerance used to decide whether two spacings are equal.
const UNIFORM_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    dims: [usize; 3],
    bounds: [(f64, f64); 3],
    spacing: [f64; 3],
    placement: Placement,
}

impl Grid3 {
    pub fn new(dims: [usize; 3], bounds: [(f64, f64); 3], placement: Placement) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for axis in 0..3 {
            let n = dims[axis];
            let (lo, hi) = bounds[axis];
            if n == 0 {
                return Err(Error::InvalidGrid(format!("axis {axis} has zero points")));
            }
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} bounds ({lo}, {hi}) are not an increasing finite interval"
                )));
            }
            spacing[axis] = match placement {
                Placement::Collocated => {
                    if n < 2 {
                        return Err(Error::InvalidGrid(format!(
                            "collocated axis {axis} needs at least two points"
                        )));
                    }
                    (hi - lo) / (n - 1) as f64
                }
                Placement::Staggered => (hi - lo) / n as f64,
            };
        }
        Ok(Self {
            dims,
            bounds,
            spacing,
            placement,
        })
    }

    /// `n^3` grid on the unit cube.
    pub fn unit_cube(n: usize, placement: Placement) -> Result<Self> {
        Self::new([n; 3], [(0.0, 1.0); 3], placement)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn nx(&self) -> usize {
        self.dims[0]
    }

    pub fn ny(&self) -> usize {
        self.dims[1]
    }

    pub fn nz(&self) -> usize {
        self.dims[2]
    }

    pub fn n(&self, axis: Axis) -> usize {
        self.dims[axis.index()]
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of nodes in one horizontal (`z = const`) slice.
    pub fn slice_len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn bounds(&self, axis: Axis) -> (f64, f64) {
        self.bounds[axis.index()]
    }

    pub fn h(&self, axis: Axis) -> f64 {
        self.spacing[axis.index()]
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn is_uniform(&self) -> bool {
        let [hx, hy, hz] = self.spacing;
        let close = |a: f64, b: f64| (a - b).abs() <= UNIFORM_RTOL * a.abs().max(b.abs());
        close(hx, hy) && close(hx, hz)
    }

    /// Coordinate of the 0-based node `j` along `axis`. Negative or
    /// past-the-end indices give ghost positions.
    pub fn coord(&self, axis: Axis, j: isize) -> f64 {
        let (lo, _) = self.bounds[axis.index()];
        let h = self.spacing[axis.index()];
        match self.placement {
            Placement::Collocated => lo + j as f64 * h,
            Placement::Staggered => lo + 0.5 * h + j as f64 * h,
        }
    }

    /// Physical position of the 0-based node `(i, j, l)`.
    pub fn point(&self, i: isize, j: isize, l: isize) -> [f64; 3] {
        [
            self.coord(Axis::X, i),
            self.coord(Axis::Y, j),
            self.coord(Axis::Z, l),
        ]
    }

    /// Flat offset of the 1-based node `(i, j, l)`; x runs fastest.
    pub fn index(&self, i: usize, j: usize, l: usize) -> Result<usize> {
        let [nx, ny, nz] = self.dims;
        if i == 0 || j == 0 || l == 0 || i > nx || j > ny || l > nz {
            return Err(Error::IndexOutOfRange {
                i,
                j,
                l,
                nx,
                ny,
                nz,
            });
        }
        Ok(self.offset(i - 1, j - 1, l - 1))
    }

    /// Flat offset of the 0-based node `(i, j, l)` without bounds checks.
    #[inline]
    pub fn offset(&self, i: usize, j: usize, l: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * l)
    }

    /// Inverse of [`Grid3::offset`].
    pub fn unflatten(&self, offset: usize) -> (usize, usize, usize) {
        let nx = self.dims[0];
        let ny = self.dims[1];
        (offset % nx, (offset / nx) % ny, offset / (nx * ny))
    }

    /// Same node counts and spacing (up to rounding).
    pub fn compatible(&self, other: &Grid3) -> bool {
        self.dims == other.dims
            && self.placement == other.placement
            && self
                .spacing
                .iter()
                .zip(other.spacing.iter())
                .all(|(a, b)| (a - b).abs() <= UNIFORM_RTOL * a.abs().max(b.abs()))
    }

    pub(crate) fn ensure_compatible(&self, other: &Grid3) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )))
        }
    }

    /// 0-based index of the node nearest to coordinate `x` along `axis`.
    pub fn nearest(&self, axis: Axis, x: f64) -> usize {
        let (lo, _) = self.bounds(axis);
        let h = self.h(axis);
        let offset = match self.placement {
            Placement::Collocated => 0.0,
            Placement::Staggered => 0.5 * h,
        };
        let j = ((x - lo - offset) / h).round();
        (j.max(0.0) as usize).min(self.n(axis) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_examples() {
        let g = Grid3::unit_cube(4, Placement::Collocated).unwrap();
        assert_eq!(g.index(1, 1, 1).unwrap(), 0);
        assert_eq!(g.index(4, 4, 4).unwrap(), 63);
        assert_eq!(g.index(2, 1, 1).unwrap(), 1);
        assert!(g.index(0, 1, 1).is_err());
        assert!(g.index(5, 1, 1).is_err());
    }

    #[test]
    fn index_is_bijection() {
        let g = Grid3::new([3, 4, 5], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
        let mut seen = vec![false; g.len()];
        for l in 1..=5 {
            for j in 1..=4 {
                for i in 1..=3 {
                    let k = g.index(i, j, l).unwrap();
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(g.unflatten(k), (i - 1, j - 1, l - 1));
                }
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn node_positions() {
        let c = Grid3::unit_cube(11, Placement::Collocated).unwrap();
        assert!((c.h(Axis::X) - 0.1).abs() < 1e-15);
        assert!((c.coord(Axis::Y, 10) - 1.0).abs() < 1e-15);

        let s = Grid3::unit_cube(10, Placement::Staggered).unwrap();
        assert!((s.h(Axis::Z) - 0.1).abs() < 1e-15);
        assert!((s.coord(Axis::Z, 0) - 0.05).abs() < 1e-15);
        assert!((s.coord(Axis::Z, 9) - 0.95).abs() < 1e-15);
        assert_eq!(s.nearest(Axis::X, 0.5), 5);
    }

    #[test]
    fn uniformity() {
        let g = Grid3::new([5, 5, 9], [(0.0, 1.0); 3], Placement::Collocated).unwrap();
        assert!(!g.is_uniform());
        assert!(Grid3::unit_cube(5, Placement::Collocated)
            .unwrap()
            .is_uniform());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Grid3::new([1, 4, 4], [(0.0, 1.0); 3], Placement::Collocated).is_err());
        assert!(Grid3::new([0, 4, 4], [(0.0, 1.0); 3], Placement::Staggered).is_err());
        assert!(Grid3::new([4, 4, 4], [(1.0, 0.0); 3], Placement::Staggered).is_err());
    }
}
