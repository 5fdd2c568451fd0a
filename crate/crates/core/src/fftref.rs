//! Reference sine-transform preconditioners with Dirichlet closure on every
//! face and a constant wavenumber.
//!
//! The interior stencil matches the requested scheme order, so the solver is
//! the exact inverse of the compact operator with `γ = 0, ζ = 1` ghosts and
//! constant `k²`. These exist as baselines for the absorbing-boundary
//! preconditioners.

use num_complex::Complex64;

use crate::dst::{Dst2, DstKernel};
use crate::error::{Error, Result};
use crate::field::Field3;
use crate::grid::Grid3;
use crate::krylov::LinearOperator;
use crate::stencil::{separable_symbol, SchemeOrder};
use crate::tridiag::LineBatch;
use crate::C64;

#[derive(Debug, Clone)]
pub struct FftRefPrecond {
    grid: Grid3,
    order: SchemeOrder,
    k0: C64,
    dst: Dst2,
    lines: LineBatch,
}

/// Eigenvalue of the Dirichlet second difference, `(2 cos θ − 2) / h²`.
fn second_difference_symbol(n: usize, a: usize, h: f64) -> f64 {
    let theta = std::f64::consts::PI * a as f64 / (n + 1) as f64;
    (2.0 * theta.cos() - 2.0) / (h * h)
}

impl FftRefPrecond {
    pub fn new(order: SchemeOrder, grid: &Grid3, k0: C64) -> Result<Self> {
        if order == SchemeOrder::Sixth && !grid.is_uniform() {
            let [hx, hy, hz] = grid.spacing();
            return Err(Error::NonUniformGrid { hx, hy, hz });
        }
        let [nx, ny, nz] = grid.dims();
        let h = grid.spacing();
        let lines = nx * ny;
        let mut e = Vec::with_capacity(lines);
        let mut bline = Vec::with_capacity(lines);
        for b in 1..=ny {
            let my = second_difference_symbol(ny, b, h[1]);
            for a in 1..=nx {
                let mx = second_difference_symbol(nx, a, h[0]);
                let (ev, bv) = separable_symbol(order, h, k0 * k0, mx, my);
                e.push(ev);
                bline.push(bv);
            }
        }
        let mut bvals = Vec::with_capacity(lines * nz);
        for _ in 0..nz {
            bvals.extend_from_slice(&bline);
        }
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let lines = LineBatch::new(nz, nx, zero, one, bvals, Some(e))?;
        Ok(Self {
            grid: *grid,
            order,
            k0,
            dst: Dst2::new(nx, ny, DstKernel::Auto),
            lines,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn order(&self) -> SchemeOrder {
        self.order
    }

    pub fn k0(&self) -> C64 {
        self.k0
    }

    pub fn solve_slices(&self, y: &[C64], u: &mut [C64]) -> Result<()> {
        if y.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "reference solver on {} nodes given {} values",
                self.grid.len(),
                y.len()
            )));
        }
        u.copy_from_slice(y);
        let m = self.grid.slice_len();
        for s in u.chunks_exact_mut(m) {
            self.dst.apply(s);
        }
        self.lines.solve_in_place(u)?;
        for s in u.chunks_exact_mut(m) {
            self.dst.apply(s);
        }
        Ok(())
    }

    pub fn solve(&self, y: &Field3) -> Result<Field3> {
        self.grid.ensure_compatible(y.grid())?;
        let mut out = Field3::zeros(&self.grid);
        self.solve_slices(y.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }
}

impl LinearOperator for FftRefPrecond {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.solve_slices(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NormReport;
    use crate::grid::Placement;
    use crate::stencil::{apply_operator, BoundaryCoeffs, Medium};

    #[test]
    fn inverts_dirichlet_operator_of_each_order() {
        let k0 = Complex64::new(9.0, 0.3);
        for placement in [Placement::Staggered, Placement::Collocated] {
            let g = Grid3::new([6, 6, 6], [(0.0, 1.0); 3], placement).unwrap();
            let medium = Medium::constant(&g, k0);
            let u = Field3::from_fn(&g, |p| {
                Complex64::new(p[0] - p[1] * p[2], p[0] * p[2] + 0.2)
            });
            for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
                let au = apply_operator(order, &medium, &BoundaryCoeffs::dirichlet(), &u).unwrap();
                let p = FftRefPrecond::new(order, &g, k0).unwrap();
                let back = p.solve(&au).unwrap();
                let err = NormReport::between(back.as_slice(), u.as_slice()).linf_rel;
                assert!(err < 1e-10, "{order:?} {err}");
            }
        }
    }

    #[test]
    fn sixth_order_needs_uniform_grid() {
        let g = Grid3::new([4, 5, 6], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
        assert!(matches!(
            FftRefPrecond::new(SchemeOrder::Sixth, &g, Complex64::new(1.0, 0.0)),
            Err(Error::NonUniformGrid { .. })
        ));
        assert!(FftRefPrecond::new(SchemeOrder::Fourth, &g, Complex64::new(1.0, 0.0)).is_ok());
    }
}
