//! Eigenvector-transform (EigT) direct solver for the second-order
//! constant-coefficient operator
//!
//! ```text
//! A_p = I_z ⊗ (α_y Λ̄_y ⊗ I_x + α_x I_y ⊗ Λ̄_x) + (Λ̄_z + K_z − 2(α_x + α_y + 1) I_z) ⊗ I_xy
//! ```
//!
//! Each horizontal slice is transformed with `V_y⁻¹ ⊗ V_x⁻¹`, which
//! decouples the system into `N_x N_y` independent vertical tridiagonal
//! systems; the solution is transformed back with `V_y ⊗ V_x`.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::eig::{decompose, EigCache, TridiagEig, TridiagSpec};
use crate::error::{Error, Result};
use crate::field::Field3;
use crate::grid::{Axis, Grid3};
use crate::krylov::LinearOperator;
use crate::linalg::{gemm, CMatrix, Layout};
use crate::stencil::BoundaryCoeffs;
use crate::tridiag::LineBatch;
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// `K_z` entries `h_z² k0(z_l)²` for a constant background.
pub fn constant_profile(grid: &Grid3, k0: C64) -> Vec<C64> {
    vec![k0 * k0 * grid.h(Axis::Z).powi(2); grid.nz()]
}

/// Applies the Kronecker matrix `A_p` (or `A_p^F` when `lambda_x`/`lambda_y`
/// are the Dirichlet matrices) directly from its definition.
pub fn apply_kronecker(grid: &Grid3, lambda: [TridiagSpec; 3], kz: &[C64], u: &[C64]) -> Vec<C64> {
    let [nx, ny, nz] = grid.dims();
    let h = grid.spacing();
    let hz2 = h[2] * h[2];
    let ax = hz2 / (h[0] * h[0]);
    let ay = hz2 / (h[1] * h[1]);
    let mut out = vec![ZERO; u.len()];
    let mut line = Vec::new();
    // x lines
    for q in 0..ny * nz {
        let y = lambda[0].apply(&u[q * nx..(q + 1) * nx]);
        for i in 0..nx {
            out[q * nx + i] += y[i] * ax;
        }
    }
    // y lines
    for l in 0..nz {
        for i in 0..nx {
            line.clear();
            line.extend((0..ny).map(|j| u[i + nx * (j + ny * l)]));
            let y = lambda[1].apply(&line);
            for j in 0..ny {
                out[i + nx * (j + ny * l)] += y[j] * ay;
            }
        }
    }
    // z lines and diagonal
    let diag_shift = -2.0 * (ax + ay + 1.0);
    for p in 0..nx * ny {
        line.clear();
        line.extend((0..nz).map(|l| u[p + nx * ny * l]));
        let y = lambda[2].apply(&line);
        for l in 0..nz {
            let k = p + nx * ny * l;
            out[k] += y[l] + (kz[l] + diag_shift) * u[k];
        }
    }
    out
}

/// Precomputed EigT state.
#[derive(Debug)]
pub struct EigTPrecond {
    grid: Grid3,
    bc: BoundaryCoeffs,
    pub eig_x: TridiagEig,
    pub eig_y: TridiagEig,
    alpha: [f64; 2],
    kz: Vec<C64>,
    bbar: Vec<C64>,
    lines: LineBatch,
    transform_ops: AtomicU64,
}

impl Clone for EigTPrecond {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            bc: self.bc,
            eig_x: self.eig_x.clone(),
            eig_y: self.eig_y.clone(),
            alpha: self.alpha,
            kz: self.kz.clone(),
            bbar: self.bbar.clone(),
            lines: self.lines.clone(),
            transform_ops: AtomicU64::new(self.transform_ops.load(Ordering::Relaxed)),
        }
    }
}

fn decompose_axis(n: usize, gamma: C64, zeta: C64, cache: Option<&EigCache>) -> Result<TridiagEig> {
    let spec = TridiagSpec::new(n, gamma, zeta);
    match cache {
        Some(c) => c.get_or_compute(&spec),
        None => decompose(&spec),
    }
}

impl EigTPrecond {
    /// Builds the solver for `grid`, ghost coefficients `bc` and the
    /// per-slice `K_z = h_z² k0(z_l)²` values.
    pub fn new(grid: &Grid3, bc: &BoundaryCoeffs, kz: &[C64]) -> Result<Self> {
        Self::with_cache(grid, bc, kz, None)
    }

    pub fn with_cache(
        grid: &Grid3,
        bc: &BoundaryCoeffs,
        kz: &[C64],
        cache: Option<&EigCache>,
    ) -> Result<Self> {
        let [nx, ny, nz] = grid.dims();
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "EigT needs at least two nodes in x and y, got {:?}",
                grid.dims()
            )));
        }
        if kz.len() != nz {
            return Err(Error::GridMismatch(format!(
                "{} K_z values for {nz} slices",
                kz.len()
            )));
        }
        let eig_x = decompose_axis(nx, bc.gamma[0], bc.zeta[0], cache)?;
        let eig_y = decompose_axis(ny, bc.gamma[1], bc.zeta[1], cache)?;
        let h = grid.spacing();
        let hz2 = h[2] * h[2];
        let alpha = [hz2 / (h[0] * h[0]), hz2 / (h[1] * h[1])];
        let bbar = bbar_values(&eig_x.values, &eig_y.values, alpha, kz);
        let lines = LineBatch::new(nz, nx, bc.gamma[2], bc.zeta[2], bbar.clone(), None)?;
        Ok(Self {
            grid: *grid,
            bc: *bc,
            eig_x,
            eig_y,
            alpha,
            kz: kz.to_vec(),
            bbar,
            lines,
            transform_ops: AtomicU64::new(0),
        })
    }

    /// Constant background `k0`.
    pub fn constant(grid: &Grid3, bc: &BoundaryCoeffs, k0: C64) -> Result<Self> {
        Self::new(grid, bc, &constant_profile(grid, k0))
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn boundary(&self) -> &BoundaryCoeffs {
        &self.bc
    }

    pub fn alpha(&self) -> [f64; 2] {
        self.alpha
    }

    pub fn kz(&self) -> &[C64] {
        &self.kz
    }

    /// `b̄_{i,j,l}` (0-based), slice-major.
    pub fn bbar(&self) -> &[C64] {
        &self.bbar
    }

    pub fn line_batch(&self) -> &LineBatch {
        &self.lines
    }

    /// Complex multiply-adds spent in slice transforms since the last reset.
    pub fn transform_ops(&self) -> u64 {
        self.transform_ops.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.transform_ops.store(0, Ordering::Relaxed);
    }

    /// The three `Λ̄` matrices.
    pub fn lambda_specs(&self) -> [TridiagSpec; 3] {
        let [nx, ny, nz] = self.grid.dims();
        [
            TridiagSpec::new(nx, self.bc.gamma[0], self.bc.zeta[0]),
            TridiagSpec::new(ny, self.bc.gamma[1], self.bc.zeta[1]),
            TridiagSpec::new(nz, self.bc.gamma[2], self.bc.zeta[2]),
        ]
    }

    /// `A_p u` from the Kronecker definition.
    pub fn apply_ap(&self, u: &[C64]) -> Vec<C64> {
        apply_kronecker(&self.grid, self.lambda_specs(), &self.kz, u)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "EigT on {} nodes given {len} values",
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Per slice `out = L X Rᵀ` with `L` `nx × nx` and `R` `ny × ny`.
    fn transform_slices(&self, data: &mut [C64], left: &CMatrix, right: &CMatrix) {
        let [nx, ny, _] = self.grid.dims();
        let m = nx * ny;
        let mut tmp = vec![ZERO; m];
        for slice in data.chunks_exact_mut(m) {
            gemm(
                nx,
                nx,
                ny,
                ONE,
                left.as_slice(),
                left.layout(),
                slice,
                Layout::col_major(nx),
                ZERO,
                &mut tmp,
                Layout::col_major(nx),
            );
            gemm(
                nx,
                ny,
                ny,
                ONE,
                &tmp,
                Layout::col_major(nx),
                right.as_slice(),
                Layout::row_major(ny),
                ZERO,
                slice,
                Layout::col_major(nx),
            );
        }
        let per_slice = (nx * nx * ny + nx * ny * ny) as u64;
        self.transform_ops
            .fetch_add(per_slice * self.grid.nz() as u64, Ordering::Relaxed);
    }

    /// `Ȳ_l = (V_y⁻¹ ⊗ V_x⁻¹) Y_l` for every slice, in place.
    pub fn forward_in_place(&self, data: &mut [C64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform_slices(data, &self.eig_x.v_inv, &self.eig_y.v_inv);
        Ok(())
    }

    /// `U_l = (V_y ⊗ V_x) Ū_l` for every slice, in place.
    pub fn inverse_in_place(&self, data: &mut [C64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform_slices(data, &self.eig_x.v, &self.eig_y.v);
        Ok(())
    }

    /// Solves the `N_x N_y` vertical systems in place.
    pub fn vertical_in_place(&self, data: &mut [C64]) -> Result<()> {
        self.check_len(data.len())?;
        self.lines.solve_in_place(data)
    }

    pub fn forward_transform(&self, y: &Field3) -> Result<Field3> {
        self.grid.ensure_compatible(y.grid())?;
        let mut out = y.clone();
        self.forward_in_place(out.as_mut_slice())?;
        Ok(out)
    }

    pub fn inverse_transform(&self, y: &Field3) -> Result<Field3> {
        self.grid.ensure_compatible(y.grid())?;
        let mut out = y.clone();
        self.inverse_in_place(out.as_mut_slice())?;
        Ok(out)
    }

    pub fn vertical_solve(&self, y: &Field3) -> Result<Field3> {
        self.grid.ensure_compatible(y.grid())?;
        let mut out = y.clone();
        self.vertical_in_place(out.as_mut_slice())?;
        Ok(out)
    }

    /// `U = A_p⁻¹ Y` on raw slices.
    pub fn solve_slices(&self, y: &[C64], u: &mut [C64]) -> Result<()> {
        self.check_len(y.len())?;
        u.copy_from_slice(y);
        self.forward_in_place(u)?;
        self.vertical_in_place(u)?;
        self.inverse_in_place(u)
    }

    pub fn solve(&self, y: &Field3) -> Result<Field3> {
        self.grid.ensure_compatible(y.grid())?;
        let mut out = Field3::zeros(&self.grid);
        self.solve_slices(y.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }
}

/// `b̄_{i,j,l} = α_x d_{x,i} + α_y d_{y,j} + K_z(l) − 2(α_x + α_y + 1)`.
pub(crate) fn bbar_values(dx: &[C64], dy: &[C64], alpha: [f64; 2], kz: &[C64]) -> Vec<C64> {
    let shift = -2.0 * (alpha[0] + alpha[1] + 1.0);
    let mut out = Vec::with_capacity(dx.len() * dy.len() * kz.len());
    for &k in kz {
        for &y in dy {
            for &x in dx {
                out.push(x * alpha[0] + y * alpha[1] + k + shift);
            }
        }
    }
    out
}

impl LinearOperator for EigTPrecond {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.solve_slices(x, y)
    }
}

/// Builds the EigT solver for a constant background `k0`.
pub fn build_eigt(grid: &Grid3, bc: &BoundaryCoeffs, k0_profile: &[C64]) -> Result<EigTPrecond> {
    let hz2 = grid.h(Axis::Z).powi(2);
    let kz: Vec<C64> = k0_profile.iter().map(|k| k * k * hz2).collect();
    EigTPrecond::new(grid, bc, &kz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NormReport;
    use crate::grid::Placement;
    use crate::stencil::{apply_operator, Medium, SchemeOrder};
    use rand::{rngs::StdRng, RngExt, SeedableRng};

    fn random(n: usize, seed: u64) -> Vec<C64> {
        let mut r = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect()
    }

    fn k0() -> C64 {
        Complex64::new(439.2f64.sqrt(), 0.0)
    }

    #[test]
    fn kronecker_equals_second_order_operator() {
        for placement in [Placement::Staggered, Placement::Collocated] {
            let g = Grid3::new([5, 6, 7], [(0.0, 1.0), (0.0, 1.2), (0.0, 0.9)], placement).unwrap();
            let bc = BoundaryCoeffs::for_grid(&g, k0());
            let p = EigTPrecond::constant(&g, &bc, k0()).unwrap();
            let u = Field3::from_vec(&g, random(g.len(), 4)).unwrap();
            let a =
                apply_operator(SchemeOrder::Second, &Medium::constant(&g, k0()), &bc, &u).unwrap();
            let b = p.apply_ap(u.as_slice());
            assert!(NormReport::between(&b, a.as_slice()).linf_rel < 1e-13);
        }
    }

    #[test]
    fn solve_inverts_ap_both_ways() {
        let g = Grid3::unit_cube(12, Placement::Staggered).unwrap();
        let bc = BoundaryCoeffs::staggered(&g, k0());
        let p = EigTPrecond::constant(&g, &bc, k0()).unwrap();
        let y = random(g.len(), 7);
        let mut u = vec![ZERO; y.len()];
        p.solve_slices(&y, &mut u).unwrap();
        assert!(NormReport::between(&p.apply_ap(&u), &y).linf_rel < 1e-10);
        let mut back = vec![ZERO; y.len()];
        p.solve_slices(&p.apply_ap(&y), &mut back).unwrap();
        assert!(NormReport::between(&back, &y).linf_rel < 1e-10);
    }

    #[test]
    fn transform_roundtrip_and_zero() {
        let g = Grid3::unit_cube(8, Placement::Collocated).unwrap();
        let bc = BoundaryCoeffs::collocated(&g, k0());
        let p = EigTPrecond::constant(&g, &bc, k0()).unwrap();
        let y = Field3::from_vec(&g, random(g.len(), 1)).unwrap();
        let back = p
            .inverse_transform(&p.forward_transform(&y).unwrap())
            .unwrap();
        assert!(NormReport::between(back.as_slice(), y.as_slice()).linf_rel < 1e-10);
        let z = p.forward_transform(&Field3::zeros(&g)).unwrap();
        assert!(z.as_slice().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn deterministic_construction() {
        let g = Grid3::unit_cube(6, Placement::Staggered).unwrap();
        let bc = BoundaryCoeffs::staggered(&g, k0());
        let a = EigTPrecond::constant(&g, &bc, k0()).unwrap();
        let b = EigTPrecond::constant(&g, &bc, k0()).unwrap();
        assert_eq!(a.bbar(), b.bbar());
        assert_eq!(a.eig_x, b.eig_x);
    }

    #[test]
    fn bbar_formula_spot_check() {
        let g = Grid3::new([4, 5, 3], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
        let bc = BoundaryCoeffs::staggered(&g, k0());
        let p = EigTPrecond::constant(&g, &bc, k0()).unwrap();
        let [ax, ay] = p.alpha();
        let (i, j, l) = (2, 3, 1);
        let expect =
            p.eig_x.values[i] * ax + p.eig_y.values[j] * ay + p.kz()[l] - 2.0 * (ax + ay + 1.0);
        assert!((p.bbar()[g.offset(i, j, l)] - expect).norm() < 1e-14);
    }

    #[test]
    fn transform_counter() {
        let g = Grid3::new([4, 6, 3], [(0.0, 1.0); 3], Placement::Staggered).unwrap();
        let bc = BoundaryCoeffs::staggered(&g, k0());
        let p = EigTPrecond::constant(&g, &bc, k0()).unwrap();
        p.reset_counters();
        let mut y = random(g.len(), 2);
        p.forward_in_place(&mut y).unwrap();
        assert_eq!(p.transform_ops(), (4 * 4 * 6 + 4 * 6 * 6) * 3);
    }
}
