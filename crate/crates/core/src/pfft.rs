//! Partial-FFT (PFFT) direct solver for `A_p U = Y`.
//!
//! `A_p^F` replaces the x and y boundary rows of `A_p` by homogeneous
//! Dirichlet ones, so sine transforms diagonalize it in x and y. The
//! difference `Δ = A_p^F − A_p` only has nonzeros in the rows `i ∈ {1, N_x}`
//! and columns `j ∈ {1, N_y}` of each slice, and only reads the values at
//! `i ∈ {1, 2, N_x − 1, N_x}` (two of them when `ζ = 1`). The solver:
//!
//! 1. `Θ = (A_p^F)⁻¹ Y`, evaluated only where `Δ` reads it;
//! 2. `W = A_p⁻¹ Δ Θ` through the EigT solver, with a sparse forward
//!    transform and an inverse transform restricted to the same boundary set;
//! 3. `U = (A_p^F)⁻¹ (Y + Δ(Θ + W))`, reusing the transformed `Y` of step 1.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::dst::{sine_entry, Dst2, DstKernel};
use crate::eig::sine_eigensystem;
use crate::eigt::{bbar_values, constant_profile, EigTPrecond};
use crate::error::{Error, Result};
use crate::field::Field3;
use crate::grid::Grid3;
use crate::krylov::LinearOperator;
use crate::stencil::BoundaryCoeffs;
use crate::tridiag::LineBatch;
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// Sparse `Δ Θ`: rows `0` and `nx − 1` of every slice (x part) and columns
/// `0` and `ny − 1` (y part). Layouts: `rows[(l * 2 + r) * ny + j]`,
/// `cols[(l * 2 + c) * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseStacks {
    pub dims: [usize; 3],
    pub rows: Vec<C64>,
    pub cols: Vec<C64>,
}

impl SparseStacks {
    pub fn zeros(dims: [usize; 3]) -> Self {
        let [nx, ny, nz] = dims;
        Self {
            dims,
            rows: vec![ZERO; nz * 2 * ny],
            cols: vec![ZERO; nz * 2 * nx],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().chain(&self.cols).all(|v| *v == ZERO)
    }

    /// Dense field `Θ^x + Θ^y`.
    pub fn to_dense(&self, grid: &Grid3) -> Field3 {
        let [nx, ny, nz] = self.dims;
        let mut f = Field3::zeros(grid);
        for l in 0..nz {
            for (r, i) in [0, nx - 1].into_iter().enumerate() {
                for j in 0..ny {
                    f[grid.offset(i, j, l)] += self.rows[(l * 2 + r) * ny + j];
                }
            }
            for (c, j) in [0, ny - 1].into_iter().enumerate() {
                for i in 0..nx {
                    f[grid.offset(i, j, l)] += self.cols[(l * 2 + c) * nx + i];
                }
            }
        }
        f
    }
}

/// Node indices read by `Δ` along an axis of length `n`.
fn boundary_set(n: usize, zeta: C64) -> Vec<usize> {
    let mut s = vec![0, n - 1];
    if zeta != ONE {
        s.push(1);
        s.push(n - 2);
    }
    s.sort_unstable();
    s.dedup();
    s
}

/// Precomputed PFFT state.
#[derive(Debug)]
pub struct PfftPrecond {
    eigt: EigTPrecond,
    dst: Dst2,
    sine_lines: LineBatch,
    rows_x: Vec<usize>,
    cols_y: Vec<usize>,
    /// `sine[r][a]` = `S_x[rows_x[r], a]`
    sine_rows_x: Vec<Vec<f64>>,
    sine_cols_y: Vec<Vec<f64>>,
    correction_ops: AtomicU64,
}

impl PfftPrecond {
    pub fn new(grid: &Grid3, bc: &BoundaryCoeffs, kz: &[C64]) -> Result<Self> {
        Self::with_kernel(grid, bc, kz, DstKernel::Auto)
    }

    pub fn constant(grid: &Grid3, bc: &BoundaryCoeffs, k0: C64) -> Result<Self> {
        Self::new(grid, bc, &constant_profile(grid, k0))
    }

    pub fn with_kernel(
        grid: &Grid3,
        bc: &BoundaryCoeffs,
        kz: &[C64],
        kernel: DstKernel,
    ) -> Result<Self> {
        let eigt = EigTPrecond::new(grid, bc, kz)?;
        Self::from_eigt(eigt, kernel)
    }

    /// Reuses an existing EigT solver for the correction step.
    pub fn from_eigt(eigt: EigTPrecond, kernel: DstKernel) -> Result<Self> {
        let grid = *eigt.grid();
        let bc = *eigt.boundary();
        let [nx, ny, nz] = grid.dims();
        let dst = Dst2::new(nx, ny, kernel);
        let lx = sine_eigensystem(nx).values;
        let ly = sine_eigensystem(ny).values;
        let bbar = bbar_values(&lx, &ly, eigt.alpha(), eigt.kz());
        let sine_lines = LineBatch::new(nz, nx, bc.gamma[2], bc.zeta[2], bbar, None)?;
        let rows_x = boundary_set(nx, bc.zeta[0]);
        let cols_y = boundary_set(ny, bc.zeta[1]);
        let sine_rows_x = rows_x
            .iter()
            .map(|&i| (0..nx).map(|a| sine_entry(nx, i + 1, a + 1)).collect())
            .collect();
        let sine_cols_y = cols_y
            .iter()
            .map(|&j| (0..ny).map(|b| sine_entry(ny, j + 1, b + 1)).collect())
            .collect();
        Ok(Self {
            eigt,
            dst,
            sine_lines,
            rows_x,
            cols_y,
            sine_rows_x,
            sine_cols_y,
            correction_ops: AtomicU64::new(0),
        })
    }

    pub fn grid(&self) -> &Grid3 {
        self.eigt.grid()
    }

    pub fn eigt(&self) -> &EigTPrecond {
        &self.eigt
    }

    /// Rows (0-based) of each slice where `Θ` and `W` are evaluated.
    pub fn boundary_rows(&self) -> &[usize] {
        &self.rows_x
    }

    pub fn boundary_cols(&self) -> &[usize] {
        &self.cols_y
    }

    /// Complex multiply-adds of the correction step since the last reset.
    pub fn correction_ops(&self) -> u64 {
        self.correction_ops.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.correction_ops.store(0, Ordering::Relaxed);
        self.eigt.reset_counters();
    }

    fn dims(&self) -> [usize; 3] {
        self.grid().dims()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.grid().len() {
            return Err(Error::GridMismatch(format!(
                "PFFT on {} nodes given {n} values",
                self.grid().len()
            )));
        }
        Ok(())
    }

    fn dst_slices(&self, data: &mut [C64]) {
        let [nx, ny, _] = self.dims();
        for slice in data.chunks_exact_mut(nx * ny) {
            self.dst.apply(slice);
        }
    }

    /// Inverse sine transform evaluated only on the boundary rows and
    /// columns; everything else is left zero.
    fn boundary_sine_inverse(&self, hat: &[C64], out: &mut [C64]) {
        let [nx, ny, _] = self.dims();
        let m = nx * ny;
        out.iter_mut().for_each(|v| *v = ZERO);
        let mut row = vec![ZERO; ny];
        let mut col = vec![ZERO; nx];
        for (src, dst) in hat.chunks_exact(m).zip(out.chunks_exact_mut(m)) {
            for (r, &i) in self.rows_x.iter().enumerate() {
                let s = &self.sine_rows_x[r];
                for (j, v) in row.iter_mut().enumerate() {
                    let column = &src[j * nx..(j + 1) * nx];
                    *v = column.iter().zip(s).map(|(x, w)| x * w).sum();
                }
                self.dst.y.apply(&mut row);
                for j in 0..ny {
                    dst[i + nx * j] = row[j];
                }
            }
            for (c, &j) in self.cols_y.iter().enumerate() {
                let s = &self.sine_cols_y[c];
                col.iter_mut().for_each(|v| *v = ZERO);
                for (b, w) in s.iter().enumerate() {
                    let column = &src[b * nx..(b + 1) * nx];
                    col.iter_mut()
                        .zip(column)
                        .for_each(|(acc, x)| *acc += x * w);
                }
                self.dst.x.apply(&mut col);
                dst[j * nx..(j + 1) * nx].copy_from_slice(&col);
            }
        }
    }

    /// Step 1 alone: `Θ = (A_p^F)⁻¹ Y`. With `boundary_only`, `Θ` is only
    /// evaluated on the boundary rows and columns (zero elsewhere).
    pub fn sine_solve(&self, y: &Field3, boundary_only: bool) -> Result<Field3> {
        self.grid().ensure_compatible(y.grid())?;
        let mut hat = y.as_slice().to_vec();
        self.dst_slices(&mut hat);
        self.sine_lines.solve_in_place(&mut hat)?;
        let mut out = Field3::zeros(self.grid());
        if boundary_only {
            self.boundary_sine_inverse(&hat, out.as_mut_slice());
        } else {
            self.dst_slices(&mut hat);
            out.as_mut_slice().copy_from_slice(&hat);
        }
        Ok(out)
    }

    /// `(A_p^F − A_p) θ` in sparse form; reads `θ` only on the boundary set.
    pub fn boundary_residual(&self, theta: &Field3) -> SparseStacks {
        let [nx, ny, nz] = self.dims();
        let bc = self.eigt.boundary();
        let [ax, ay] = self.eigt.alpha();
        let (gx, zx) = (bc.gamma[0], ONE - bc.zeta[0]);
        let (gy, zy) = (bc.gamma[1], ONE - bc.zeta[1]);
        let t = theta.as_slice();
        let mut s = SparseStacks::zeros([nx, ny, nz]);
        for l in 0..nz {
            let base = l * nx * ny;
            let at = |i: usize, j: usize| t[base + i + nx * j];
            for j in 0..ny {
                s.rows[(l * 2) * ny + j] = (-gx * at(0, j) + zx * at(1, j)) * ax;
                s.rows[(l * 2 + 1) * ny + j] = (zx * at(nx - 2, j) - gx * at(nx - 1, j)) * ax;
            }
            for i in 0..nx {
                s.cols[(l * 2) * nx + i] = (-gy * at(i, 0) + zy * at(i, 1)) * ay;
                s.cols[(l * 2 + 1) * nx + i] = (zy * at(i, ny - 2) - gy * at(i, ny - 1)) * ay;
            }
        }
        s
    }

    /// `(V_y⁻¹ ⊗ V_x⁻¹)` applied to the densified stacks, exploiting sparsity.
    pub fn sparse_forward_transform(&self, s: &SparseStacks) -> Field3 {
        let mut out = Field3::zeros(self.grid());
        self.sparse_forward_into(s, out.as_mut_slice());
        out
    }

    fn sparse_forward_into(&self, s: &SparseStacks, out: &mut [C64]) {
        let [nx, ny, nz] = self.dims();
        let vxi = &self.eigt.eig_x.v_inv;
        let vyi = &self.eigt.eig_y.v_inv;
        let mut t = vec![ZERO; ny];
        let mut sc = vec![ZERO; nx];
        for l in 0..nz {
            let slice = &mut out[l * nx * ny..(l + 1) * nx * ny];
            slice.iter_mut().for_each(|v| *v = ZERO);
            for (r, i) in [0, nx - 1].into_iter().enumerate() {
                let row = &s.rows[(l * 2 + r) * ny..(l * 2 + r + 1) * ny];
                if row.iter().all(|v| *v == ZERO) {
                    continue;
                }
                // t = row · V_y⁻ᵀ
                t.iter_mut().for_each(|v| *v = ZERO);
                for (jj, &x) in row.iter().enumerate() {
                    if x == ZERO {
                        continue;
                    }
                    t.iter_mut()
                        .zip(vyi.column(jj))
                        .for_each(|(acc, v)| *acc += v * x);
                }
                let vcol = vxi.column(i);
                for (jp, &tv) in t.iter().enumerate() {
                    let dst = &mut slice[jp * nx..(jp + 1) * nx];
                    dst.iter_mut().zip(vcol).for_each(|(acc, v)| *acc += v * tv);
                }
            }
            for (c, j) in [0, ny - 1].into_iter().enumerate() {
                let col = &s.cols[(l * 2 + c) * nx..(l * 2 + c + 1) * nx];
                if col.iter().all(|v| *v == ZERO) {
                    continue;
                }
                sc.iter_mut().for_each(|v| *v = ZERO);
                for (ii, &x) in col.iter().enumerate() {
                    if x == ZERO {
                        continue;
                    }
                    sc.iter_mut()
                        .zip(vxi.column(ii))
                        .for_each(|(acc, v)| *acc += v * x);
                }
                let wcol = vyi.column(j);
                for (jp, &w) in wcol.iter().enumerate() {
                    let dst = &mut slice[jp * nx..(jp + 1) * nx];
                    dst.iter_mut().zip(&sc).for_each(|(acc, v)| *acc += v * w);
                }
            }
        }
        let per_slice = 2 * (ny * ny + nx * ny) + 2 * (nx * nx + nx * ny);
        self.correction_ops
            .fetch_add((per_slice * nz) as u64, Ordering::Relaxed);
    }

    /// `W = (V_y ⊗ V_x) W̄` on the boundary rows and columns only.
    pub fn boundary_inverse_transform(&self, wbar: &Field3) -> Field3 {
        let mut out = Field3::zeros(self.grid());
        self.boundary_inverse_into(wbar.as_slice(), out.as_mut_slice());
        out
    }

    fn boundary_inverse_into(&self, wbar: &[C64], out: &mut [C64]) {
        let [nx, ny, nz] = self.dims();
        let vx = &self.eigt.eig_x.v;
        let vy = &self.eigt.eig_y.v;
        let m = nx * ny;
        out.iter_mut().for_each(|v| *v = ZERO);
        let mut q = vec![ZERO; ny];
        let mut p = vec![ZERO; nx];
        for (src, dst) in wbar.chunks_exact(m).zip(out.chunks_exact_mut(m)) {
            for &i in &self.rows_x {
                // q_b = Σ_a V_x[i, a] W̄[a, b]
                for (b, qb) in q.iter_mut().enumerate() {
                    let column = &src[b * nx..(b + 1) * nx];
                    *qb = (0..nx).map(|a| vx[(i, a)] * column[a]).sum();
                }
                // W[i, j] = Σ_b q_b V_y[j, b]
                for j in 0..ny {
                    dst[i + nx * j] = ZERO;
                }
                for (b, &qb) in q.iter().enumerate() {
                    let vcol = vy.column(b);
                    for j in 0..ny {
                        dst[i + nx * j] += vcol[j] * qb;
                    }
                }
            }
            for &j in &self.cols_y {
                // p_a = Σ_b W̄[a, b] V_y[j, b]
                p.iter_mut().for_each(|v| *v = ZERO);
                for b in 0..ny {
                    let w = vy[(j, b)];
                    let column = &src[b * nx..(b + 1) * nx];
                    p.iter_mut().zip(column).for_each(|(acc, x)| *acc += x * w);
                }
                // W[i, j] = Σ_a V_x[i, a] p_a
                let d = &mut dst[j * nx..(j + 1) * nx];
                d.iter_mut().for_each(|v| *v = ZERO);
                for (a, &pa) in p.iter().enumerate() {
                    d.iter_mut()
                        .zip(vx.column(a))
                        .for_each(|(acc, v)| *acc += v * pa);
                }
            }
        }
        let per_slice =
            self.rows_x.len() * (nx * ny + ny * ny) + self.cols_y.len() * (nx * ny + nx * nx);
        self.correction_ops
            .fetch_add((per_slice * nz) as u64, Ordering::Relaxed);
    }

    /// Adds the sine transform of the sparse stacks to `hat`.
    fn add_sparse_sine(&self, s: &SparseStacks, hat: &mut [C64]) {
        let [nx, ny, nz] = self.dims();
        let mut t = vec![ZERO; ny];
        let mut c = vec![ZERO; nx];
        for l in 0..nz {
            let slice = &mut hat[l * nx * ny..(l + 1) * nx * ny];
            for (r, i) in [0, nx - 1].into_iter().enumerate() {
                t.copy_from_slice(&s.rows[(l * 2 + r) * ny..(l * 2 + r + 1) * ny]);
                self.dst.y.apply(&mut t);
                for a in 0..nx {
                    let w = sine_entry(nx, a + 1, i + 1);
                    for (b, &tb) in t.iter().enumerate() {
                        slice[a + nx * b] += tb * w;
                    }
                }
            }
            for (cc, j) in [0, ny - 1].into_iter().enumerate() {
                c.copy_from_slice(&s.cols[(l * 2 + cc) * nx..(l * 2 + cc + 1) * nx]);
                self.dst.x.apply(&mut c);
                for b in 0..ny {
                    let w = sine_entry(ny, j + 1, b + 1);
                    let dst = &mut slice[b * nx..(b + 1) * nx];
                    dst.iter_mut().zip(&c).for_each(|(acc, v)| *acc += v * w);
                }
            }
        }
    }

    /// `U = A_p⁻¹ Y` on raw slices.
    pub fn solve_slices(&self, y: &[C64], u: &mut [C64]) -> Result<()> {
        self.check_len(y.len())?;
        let n = y.len();
        // Step 1: transformed Y is kept for step 3.
        let mut yhat = y.to_vec();
        self.dst_slices(&mut yhat);
        let mut work = yhat.clone();
        self.sine_lines.solve_in_place(&mut work)?;
        let mut theta = Field3::zeros(self.grid());
        self.boundary_sine_inverse(&work, theta.as_mut_slice());
        // Step 2: W = A_p⁻¹ Δ Θ on the boundary set.
        let stacks = self.boundary_residual(&theta);
        let mut wbar = vec![ZERO; n];
        self.sparse_forward_into(&stacks, &mut wbar);
        self.eigt.vertical_in_place(&mut wbar)?;
        let mut w = vec![ZERO; n];
        self.boundary_inverse_into(&wbar, &mut w);
        // Step 3: solve A_p^F U = Y + Δ(Θ + W).
        theta
            .as_mut_slice()
            .iter_mut()
            .zip(&w)
            .for_each(|(t, wv)| *t += wv);
        let corr = self.boundary_residual(&theta);
        self.add_sparse_sine(&corr, &mut yhat);
        self.sine_lines.solve_in_place(&mut yhat)?;
        self.dst_slices(&mut yhat);
        u.copy_from_slice(&yhat);
        Ok(())
    }

    pub fn solve(&self, y: &Field3) -> Result<Field3> {
        self.grid().ensure_compatible(y.grid())?;
        let mut out = Field3::zeros(self.grid());
        self.solve_slices(y.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// Reference implementation with full transforms everywhere (four 3D
    /// sine transforms and a full EigT solve).
    pub fn solve_naive(&self, y: &Field3) -> Result<Field3> {
        let theta = self.sine_solve(y, false)?;
        let r = self.boundary_residual(&theta).to_dense(self.grid());
        let w = self.eigt.solve(&r)?;
        let mut tw = theta;
        tw.axpy(ONE, &w)?;
        let mut rhs = self.boundary_residual(&tw).to_dense(self.grid());
        rhs.axpy(ONE, y)?;
        self.sine_solve(&rhs, false)
    }
}

impl LinearOperator for PfftPrecond {
    fn len(&self) -> usize {
        self.grid().len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.solve_slices(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::TridiagSpec;
    use crate::eigt::apply_kronecker;
    use crate::field::NormReport;
    use crate::grid::Placement;
    use rand::{rngs::StdRng, RngExt, SeedableRng};

    fn random_field(g: &Grid3, seed: u64) -> Field3 {
        let mut r = StdRng::seed_from_u64(seed);
        let data = (0..g.len())
            .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect();
        Field3::from_vec(g, data).unwrap()
    }

    fn k0() -> C64 {
        Complex64::new(439.2f64.sqrt(), 0.0)
    }

    fn setups() -> Vec<(Grid3, BoundaryCoeffs)> {
        let mut v = Vec::new();
        for placement in [Placement::Staggered, Placement::Collocated] {
            let g = Grid3::new([7, 9, 5], [(0.0, 1.0); 3], placement).unwrap();
            v.push((g, BoundaryCoeffs::for_grid(&g, k0())));
        }
        v
    }

    fn apply_apf(p: &PfftPrecond, u: &[C64]) -> Vec<C64> {
        let [nx, ny, nz] = p.grid().dims();
        let bc = p.eigt().boundary();
        apply_kronecker(
            p.grid(),
            [
                TridiagSpec::new(nx, ZERO, ONE),
                TridiagSpec::new(ny, ZERO, ONE),
                TridiagSpec::new(nz, bc.gamma[2], bc.zeta[2]),
            ],
            p.eigt().kz(),
            u,
        )
    }

    #[test]
    fn sine_solve_inverts_dirichlet_preconditioner() {
        for (g, bc) in setups() {
            let p = PfftPrecond::constant(&g, &bc, k0()).unwrap();
            let u = random_field(&g, 5);
            let y = Field3::from_vec(&g, apply_apf(&p, u.as_slice())).unwrap();
            let back = p.sine_solve(&y, false).unwrap();
            assert!(NormReport::between(back.as_slice(), u.as_slice()).linf_rel < 1e-10);
        }
    }

    #[test]
    fn residual_stacks_match_dense_difference() {
        for (g, bc) in setups() {
            let p = PfftPrecond::constant(&g, &bc, k0()).unwrap();
            let theta = random_field(&g, 8);
            let dense: Vec<C64> = apply_apf(&p, theta.as_slice())
                .iter()
                .zip(p.eigt().apply_ap(theta.as_slice()))
                .map(|(a, b)| a - b)
                .collect();
            let sparse = p.boundary_residual(&theta).to_dense(&g);
            assert!(NormReport::between(sparse.as_slice(), &dense).linf_abs < 1e-12);
            // boundary-only Θ gives the same stacks
            let y = random_field(&g, 9);
            let full = p.sine_solve(&y, false).unwrap();
            let part = p.sine_solve(&y, true).unwrap();
            let a = p.boundary_residual(&full);
            let b = p.boundary_residual(&part);
            assert!(NormReport::between(&a.rows, &b.rows).linf_rel < 1e-12);
            assert!(NormReport::between(&a.cols, &b.cols).linf_rel < 1e-12);
        }
    }

    #[test]
    fn staggered_residual_uses_outer_layers_only() {
        let g = Grid3::unit_cube(6, Placement::Staggered).unwrap();
        let bc = BoundaryCoeffs::staggered(&g, k0());
        let p = PfftPrecond::constant(&g, &bc, k0()).unwrap();
        assert_eq!(p.boundary_rows(), &[0, 5]);
        let g2 = Grid3::unit_cube(6, Placement::Collocated).unwrap();
        let p2 = PfftPrecond::constant(&g2, &BoundaryCoeffs::collocated(&g2, k0()), k0()).unwrap();
        assert_eq!(p2.boundary_rows(), &[0, 1, 4, 5]);
        assert!(p.boundary_residual(&Field3::zeros(&g)).is_zero());
    }

    #[test]
    fn sparse_transforms_match_full_ones() {
        for (g, bc) in setups() {
            let p = PfftPrecond::constant(&g, &bc, k0()).unwrap();
            let s = p.boundary_residual(&random_field(&g, 3));
            let sparse = p.sparse_forward_transform(&s);
            let full = p.eigt().forward_transform(&s.to_dense(&g)).unwrap();
            assert!(NormReport::between(sparse.as_slice(), full.as_slice()).linf_rel < 1e-11);

            let wbar = random_field(&g, 4);
            let part = p.boundary_inverse_transform(&wbar);
            let full = p.eigt().inverse_transform(&wbar).unwrap();
            let [nx, ny, nz] = g.dims();
            for l in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        let k = g.offset(i, j, l);
                        let on = p.boundary_rows().contains(&i) || p.boundary_cols().contains(&j);
                        let expect = if on { full[k] } else { ZERO };
                        assert!((part[k] - expect).norm() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn solve_matches_eigt_and_naive_variant() {
        for (g, bc) in setups() {
            let p = PfftPrecond::constant(&g, &bc, k0()).unwrap();
            let y = random_field(&g, 12);
            let fast = p.solve(&y).unwrap();
            let eig = p.eigt().solve(&y).unwrap();
            let naive = p.solve_naive(&y).unwrap();
            assert!(NormReport::between(fast.as_slice(), eig.as_slice()).linf_rel < 1e-9);
            assert!(NormReport::between(fast.as_slice(), naive.as_slice()).linf_rel < 1e-12);
        }
    }
}
