//! Matrix-free second-, fourth- and sixth-order compact Helmholtz operators.
//!
//! Every operator is scaled by `s = h_z²` so that the second-order operator
//! coincides with the Kronecker-structured preconditioner matrix. Ghost
//! values outside the grid are eliminated with the linear rule
//!
//! ```text
//! U_0 = γ U_1 + (ζ − 1) U_2,     U_{N+1} = γ U_N + (ζ − 1) U_{N−1}
//! ```
//!
//! applied axis by axis (x, then y, then z), which makes every difference
//! operator the Kronecker product of its one-dimensional ghost-eliminated
//! counterparts.

mod medium;
mod source;

pub use medium::{ConstantMedium, Medium, MediumDerivatives};
pub use source::{fd_derivatives, Source, SourceDerivativeFields, SourceDerivatives};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field3, NormReport};
use crate::grid::{Grid3, Placement};
use crate::linalg::CMatrix;
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// Largest grid accepted by [`assemble_dense`].
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeOrder {
    Second,
    Fourth,
    Sixth,
}

impl SchemeOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Self::Second),
            4 => Ok(Self::Fourth),
            6 => Ok(Self::Sixth),
            _ => Err(Error::InvalidConfig(format!(
                "unsupported scheme order {order}"
            ))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::Second => 2,
            Self::Fourth => 4,
            Self::Sixth => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Two-point central condition midway between the first two nodes.
    StaggeredTwoPoint,
    /// Central-difference condition at a boundary node.
    CollocatedThreePoint,
    /// Ghost values are supplied from a known solution; the linear part
    /// sees zero ghosts (see [`HelmholtzOperator::ghost_forcing`]).
    OracleGhost,
    Custom,
}

/// Per-axis ghost elimination coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCoeffs {
    pub gamma: [C64; 3],
    pub zeta: [C64; 3],
    pub mode: BoundaryMode,
}

impl BoundaryCoeffs {
    /// `γ = (2 + i k0 h)/(2 − i k0 h)`, `ζ = 1`.
    pub fn staggered(grid: &Grid3, k0: C64) -> Self {
        let i = Complex64::i();
        let gamma = grid
            .spacing()
            .map(|h| (2.0 + i * k0 * h) / (2.0 - i * k0 * h));
        Self {
            gamma,
            zeta: [ONE; 3],
            mode: BoundaryMode::StaggeredTwoPoint,
        }
    }

    /// `γ = 2 i k0 h`, `ζ = 2`.
    pub fn collocated(grid: &Grid3, k0: C64) -> Self {
        let i = Complex64::i();
        Self {
            gamma: grid.spacing().map(|h| 2.0 * i * k0 * h),
            zeta: [Complex64::new(2.0, 0.0); 3],
            mode: BoundaryMode::CollocatedThreePoint,
        }
    }

    /// The closure matching the grid placement.
    pub fn for_grid(grid: &Grid3, k0: C64) -> Self {
        match grid.placement() {
            Placement::Staggered => Self::staggered(grid, k0),
            Placement::Collocated => Self::collocated(grid, k0),
        }
    }

    /// Zero ghosts: the linear part used together with ghost forcing.
    pub fn oracle_ghost() -> Self {
        Self {
            gamma: [ZERO; 3],
            zeta: [ONE; 3],
            mode: BoundaryMode::OracleGhost,
        }
    }

    /// Homogeneous Dirichlet ghosts (`γ = 0`, `ζ = 1`).
    pub fn dirichlet() -> Self {
        Self::custom([ZERO; 3], [ONE; 3])
    }

    pub fn custom(gamma: [C64; 3], zeta: [C64; 3]) -> Self {
        Self {
            gamma,
            zeta,
            mode: BoundaryMode::Custom,
        }
    }
}

/// A sparse stencil over the 27 neighbours: `(padded offset, weight)`.
#[derive(Debug, Clone, Default)]
struct Stencil(Vec<(isize, f64)>);

impl Stencil {
    #[inline]
    fn eval(&self, p: &[C64], at: usize) -> C64 {
        let mut acc = ZERO;
        for &(off, w) in &self.0 {
            acc += p[(at as isize + off) as usize] * w;
        }
        acc
    }
}

struct Padded {
    dims: [usize; 3],
}

impl Padded {
    fn new(g: &Grid3) -> Self {
        Self {
            dims: [g.nx() + 2, g.ny() + 2, g.nz() + 2],
        }
    }

    fn len(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    fn at(&self, i: usize, j: usize, l: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * l)
    }

    fn offset(&self, d: [isize; 3]) -> isize {
        d[0] + self.dims[0] as isize * (d[1] + self.dims[1] as isize * d[2])
    }

    fn load(&self, u: &[C64], out: &mut [C64]) {
        let [px, py, _] = self.dims;
        let (nx, ny) = (px - 2, py - 2);
        for (l, slice) in u.chunks_exact(nx * ny).enumerate() {
            for (j, row) in slice.chunks_exact(nx).enumerate() {
                let s = self.at(1, j + 1, l + 1);
                out[s..s + nx].copy_from_slice(row);
            }
        }
    }

    /// Fills every ghost (faces, edges, corners) by the elimination rule.
    fn fill_ghosts(&self, p: &mut [C64], gamma: [C64; 3], zeta: [C64; 3]) {
        let [px, py, pz] = self.dims;
        let (nx, ny, nz) = (px - 2, py - 2, pz - 2);
        let zm = zeta.map(|z| z - 1.0);
        for l in 1..=nz {
            for j in 1..=ny {
                let a = self.at(0, j, l);
                p[a] = gamma[0] * p[a + 1] + zm[0] * p[a + 2];
                let b = self.at(nx + 1, j, l);
                p[b] = gamma[0] * p[b - 1] + zm[0] * p[b - 2];
            }
        }
        let sy = px;
        for l in 1..=nz {
            for i in 0..px {
                let a = self.at(i, 0, l);
                p[a] = gamma[1] * p[a + sy] + zm[1] * p[a + 2 * sy];
                let b = self.at(i, ny + 1, l);
                p[b] = gamma[1] * p[b - sy] + zm[1] * p[b - 2 * sy];
            }
        }
        let sz = px * py;
        for j in 0..py {
            for i in 0..px {
                let a = self.at(i, j, 0);
                p[a] = gamma[2] * p[a + sz] + zm[2] * p[a + 2 * sz];
                let b = self.at(i, j, nz + 1);
                p[b] = gamma[2] * p[b - sz] + zm[2] * p[b - 2 * sz];
            }
        }
    }
}

struct SixthData {
    /// `(k²)_ν` at the nodes
    grad: [Vec<C64>; 3],
    /// `∇²(k²) − k⁴` at the nodes
    lap_minus_k4: Vec<C64>,
}

/// Matrix-free Helmholtz operator of a given order on a fixed medium.
pub struct HelmholtzOperator {
    order: SchemeOrder,
    grid: Grid3,
    bc: BoundaryCoeffs,
    medium: Medium,
    scale: f64,
    pad: Padded,
    lap: Stencil,
    mix2: Stencil,
    mix3: Stencil,
    /// `G_ν Q_ν` acting on U, sixth order only
    gq: [Stencil; 3],
    sixth: Option<SixthData>,
}

impl std::fmt::Debug for HelmholtzOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzOperator")
            .field("order", &self.order)
            .field("grid", &self.grid)
            .field("bc", &self.bc)
            .finish()
    }
}

fn check_grid(order: SchemeOrder, grid: &Grid3) -> Result<()> {
    if grid.dims().iter().any(|&n| n < 2) {
        return Err(Error::InvalidGrid(format!(
            "operator needs at least two nodes per axis, got {:?}",
            grid.dims()
        )));
    }
    if order == SchemeOrder::Sixth && !grid.is_uniform() {
        let [hx, hy, hz] = grid.spacing();
        return Err(Error::NonUniformGrid { hx, hy, hz });
    }
    Ok(())
}

/// True when `d` is zero on every axis outside `axes`.
fn product_offsets(axes: &[usize], d: [isize; 3]) -> bool {
    (0..3).all(|a| axes.contains(&a) || d[a] == 0)
}

const W3: [f64; 3] = [1.0, -2.0, 1.0];

impl HelmholtzOperator {
    pub fn new(order: SchemeOrder, medium: &Medium, bc: BoundaryCoeffs) -> Result<Self> {
        let grid = *medium.grid();
        check_grid(order, &grid)?;
        let pad = Padded::new(&grid);
        let h = grid.spacing();
        let h2 = h.map(|x| x * x);
        let scale = h2[2];

        let mut lap = Stencil::default();
        let mut mix2 = Stencil::default();
        let mut mix3 = Stencil::default();
        let mut gq: [Stencil; 3] = Default::default();
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let d = [dx, dy, dz];
                    let off = pad.offset(d);
                    let w = d.map(|t| W3[(t + 1) as usize]);
                    let mut l = 0.0;
                    for a in 0..3 {
                        if product_offsets(&[a], d) {
                            l += w[a] / h2[a];
                        }
                    }
                    let mut m2 = 0.0;
                    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                        if product_offsets(&[a, b], d) {
                            let c = match order {
                                SchemeOrder::Sixth => 1.0,
                                _ => (h2[a] + h2[b]) / 12.0,
                            };
                            m2 += c * w[a] * w[b] / (h2[a] * h2[b]);
                        }
                    }
                    let m3 = w[0] * w[1] * w[2] / (h2[0] * h2[1] * h2[2]);
                    if l != 0.0 {
                        lap.0.push((off, l));
                    }
                    if m2 != 0.0 && order != SchemeOrder::Second {
                        mix2.0.push((off, m2));
                    }
                    if order == SchemeOrder::Sixth {
                        mix3.0.push((off, m3));
                        for nu in 0..3 {
                            // Q(p) = U(p)/3 + (sum of 4 tangential neighbours)/6,
                            // G_ν Q = (Q(+e_ν) − Q(−e_ν)) / 2h
                            if d[nu] == 0 {
                                continue;
                            }
                            let tang: Vec<usize> = (0..3).filter(|&a| a != nu).collect();
                            let nz_t = tang.iter().filter(|&&a| d[a] != 0).count();
                            let wq = match nz_t {
                                0 => 1.0 / 3.0,
                                1 => 1.0 / 6.0,
                                _ => 0.0,
                            };
                            if wq != 0.0 {
                                gq[nu].0.push((off, wq * d[nu] as f64 / (2.0 * h[nu])));
                            }
                        }
                    }
                }
            }
        }
        let sixth = (order == SchemeOrder::Sixth).then(|| {
            let (grad, lap_k) = medium.derivative_fields();
            let lap_minus_k4 = lap_k
                .iter()
                .zip(medium.k_sq().as_slice())
                .map(|(l, k2)| l - k2 * k2)
                .collect();
            SixthData { grad, lap_minus_k4 }
        });
        Ok(Self {
            order,
            grid,
            bc,
            medium: medium.clone(),
            scale,
            pad,
            lap,
            mix2,
            mix3,
            gq,
            sixth,
        })
    }

    pub fn order(&self) -> SchemeOrder {
        self.order
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn boundary(&self) -> &BoundaryCoeffs {
        &self.bc
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    /// Scale factor `s = h_z²` applied to the operator and right-hand side.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `out = A u` on raw slices.
    pub fn apply(&self, u: &[C64], out: &mut [C64]) -> Result<()> {
        if u.len() != self.grid.len() || out.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "operator on {} nodes applied to {} -> {}",
                self.grid.len(),
                u.len(),
                out.len()
            )));
        }
        let mut pu = vec![ZERO; self.pad.len()];
        self.pad.load(u, &mut pu);
        self.pad.fill_ghosts(&mut pu, self.bc.gamma, self.bc.zeta);
        let pw = if self.order == SchemeOrder::Second {
            Vec::new()
        } else {
            let w: Vec<C64> = u
                .iter()
                .zip(self.medium.k_sq().as_slice())
                .map(|(a, b)| a * b)
                .collect();
            let mut pw = vec![ZERO; self.pad.len()];
            self.pad.load(&w, &mut pw);
            self.pad.fill_ghosts(&mut pw, self.bc.gamma, self.bc.zeta);
            pw
        };
        self.kernel(&pu, &pw, out);
        Ok(())
    }

    pub fn apply_field(&self, u: &Field3) -> Result<Field3> {
        self.grid.ensure_compatible(u.grid())?;
        let mut out = Field3::zeros(&self.grid);
        self.apply(u.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// Contribution of prescribed ghost values: the operator applied to a
    /// field that is zero at the nodes and equals `u(p)` at every ghost
    /// position. With [`BoundaryCoeffs::oracle_ghost`], the system
    /// `A U = rhs − ghost_forcing(u)` has the grid samples of `u` as its
    /// exact solution up to truncation error.
    pub fn ghost_forcing(&self, u: &dyn Fn([f64; 3]) -> C64) -> Field3 {
        let [px, py, pz] = self.pad.dims;
        let mut pu = vec![ZERO; self.pad.len()];
        let mut pw = vec![ZERO; self.pad.len()];
        for l in 0..pz {
            for j in 0..py {
                for i in 0..px {
                    let ghost =
                        i == 0 || j == 0 || l == 0 || i == px - 1 || j == py - 1 || l == pz - 1;
                    if !ghost {
                        continue;
                    }
                    let p = self
                        .grid
                        .point(i as isize - 1, j as isize - 1, l as isize - 1);
                    let v = u(p);
                    let k = self.pad.at(i, j, l);
                    pu[k] = v;
                    pw[k] = v * self.medium.k_sq_at(p);
                }
            }
        }
        let mut out = Field3::zeros(&self.grid);
        self.kernel(&pu, &pw, out.as_mut_slice());
        out
    }

    fn kernel(&self, pu: &[C64], pw: &[C64], out: &mut [C64]) {
        let g = &self.grid;
        let [nx, ny, nz] = g.dims();
        let k_sq = self.medium.k_sq().as_slice();
        let s = self.scale;
        let h = g.h(crate::grid::Axis::X);
        let h2 = h * h;
        let sx = 1usize;
        let sy = self.pad.dims[0];
        let sz = self.pad.dims[0] * self.pad.dims[1];
        for l in 0..nz {
            for j in 0..ny {
                let row = g.offset(0, j, l);
                let prow = self.pad.at(1, j + 1, l + 1);
                for i in 0..nx {
                    let k = row + i;
                    let p = prow + i;
                    let k2 = k_sq[k];
                    let lap = self.lap.eval(pu, p);
                    let val = match self.order {
                        SchemeOrder::Second => lap + k2 * pu[p],
                        SchemeOrder::Fourth => {
                            let faces = pw[p - sx]
                                + pw[p + sx]
                                + pw[p - sy]
                                + pw[p + sy]
                                + pw[p - sz]
                                + pw[p + sz];
                            lap + self.mix2.eval(pu, p) + pw[p] * 0.5 + faces / 12.0
                        }
                        SchemeOrder::Sixth => {
                            let six = self.sixth.as_ref().expect("sixth-order data");
                            let t2 = k2 * h2;
                            let mut grad_term = ZERO;
                            for (nu, stride) in [sx, sy, sz].into_iter().enumerate() {
                                let gk = six.grad[nu][k];
                                if gk == ZERO {
                                    continue;
                                }
                                let gq = self.gq[nu].eval(pu, p)
                                    + (pw[p + stride] - pw[p - stride]) * (h2 / 6.0 / (2.0 * h));
                                grad_term += gk * gq;
                            }
                            lap * (1.0 + t2 / 30.0)
                                + self.mix3.eval(pu, p) * (h2 * h2 / 30.0)
                                + pw[p]
                                + self.mix2.eval(pu, p) * (1.0 + t2 / 15.0) * (h2 / 6.0)
                                + (six.lap_minus_k4[k] * pu[p] + grad_term * 2.0) * (h2 / 20.0)
                        }
                    };
                    out[k] = val * s;
                }
            }
        }
    }

    /// Explicit matrix of the operator, built column by column.
    pub fn assemble_dense(&self) -> Result<CMatrix> {
        let n = self.grid.len();
        if n > DENSE_LIMIT {
            return Err(Error::SizeGuard {
                size: n,
                limit: DENSE_LIMIT,
            });
        }
        let mut m = CMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        let mut col = vec![ZERO; n];
        for c in 0..n {
            e[c] = ONE;
            self.apply(&e, &mut col)?;
            m.column_mut(c).copy_from_slice(&col);
            e[c] = ZERO;
        }
        Ok(m)
    }
}

/// `A u` for the given scheme.
pub fn apply_operator(
    order: SchemeOrder,
    medium: &Medium,
    bc: &BoundaryCoeffs,
    u: &Field3,
) -> Result<Field3> {
    medium.grid().ensure_compatible(u.grid())?;
    HelmholtzOperator::new(order, medium, *bc)?.apply_field(u)
}

/// Dense matrix of the operator (test oracle; at most [`DENSE_LIMIT`] nodes).
pub fn assemble_dense(order: SchemeOrder, medium: &Medium, bc: &BoundaryCoeffs) -> Result<CMatrix> {
    let n = medium.grid().len();
    if n > DENSE_LIMIT {
        return Err(Error::SizeGuard {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    HelmholtzOperator::new(order, medium, *bc)?.assemble_dense()
}

/// Modified right-hand side, scaled like the operator.
///
/// * Second: `s f`
/// * Fourth: `s (1 + Σ h_ν²/12 ∂_ν²) f`
/// * Sixth: `s [f + h²/12 ∇²f + h⁴/360 ∇⁴f + h⁴/180 Σ f_ααββ
///   − h²/20 (k² f − h²/3 Σ (k²)_ν f_ν)]`
pub fn build_rhs(order: SchemeOrder, medium: &Medium, src: &Source) -> Result<Field3> {
    let g = *medium.grid();
    g.ensure_compatible(src.grid())?;
    check_grid(order, &g)?;
    let s = g.h(crate::grid::Axis::Z).powi(2);
    let f = src.samples().as_slice();
    let mut out = Field3::zeros(&g);
    match order {
        SchemeOrder::Second => {
            for (o, v) in out.as_mut_slice().iter_mut().zip(f) {
                *o = v * s;
            }
        }
        SchemeOrder::Fourth => {
            let d = src.derivative_fields()?;
            let c = g.spacing().map(|h| h * h / 12.0);
            for (k, o) in out.as_mut_slice().iter_mut().enumerate() {
                let corr = d.second[0][k] * c[0] + d.second[1][k] * c[1] + d.second[2][k] * c[2];
                *o = (f[k] + corr) * s;
            }
        }
        SchemeOrder::Sixth => {
            let d = src.derivative_fields()?;
            let (grad_k, _) = medium.derivative_fields();
            let k_sq = medium.k_sq().as_slice();
            let h2 = s;
            let h4 = h2 * h2;
            for (k, o) in out.as_mut_slice().iter_mut().enumerate() {
                let lap = d.second[0][k] + d.second[1][k] + d.second[2][k];
                let mixed = d.mixed[0][k] + d.mixed[1][k] + d.mixed[2][k];
                let bilap = d.fourth[0][k] + d.fourth[1][k] + d.fourth[2][k] + mixed * 2.0;
                let kf: C64 = (0..3).map(|a| grad_k[a][k] * d.gradient[a][k]).sum();
                let v = f[k] + lap * (h2 / 12.0) + bilap * (h4 / 360.0) + mixed * (h4 / 180.0)
                    - (k_sq[k] * f[k] - kf * (h2 / 3.0)) * (h2 / 20.0);
                *o = v * s;
            }
        }
    }
    Ok(out)
}

/// Residual `A u − rhs` measured relative to `rhs` (the zero initial guess).
pub fn residual(
    order: SchemeOrder,
    medium: &Medium,
    bc: &BoundaryCoeffs,
    u: &Field3,
    rhs: &Field3,
) -> Result<NormReport> {
    let au = apply_operator(order, medium, bc, u)?;
    crate::field::norms(&au, rhs)
}

/// Line coefficients of the constant-coefficient operator with Dirichlet
/// ghosts after sine transforms in x and y.
///
/// With `μ_x`, `μ_y` the eigenvalues of the x and y second differences
/// (`(2 cos θ − 2)/h²`), the scaled operator on a vertical line is
/// `e Λ_z + diag(b)`, where `Λ_z` has zero diagonal and unit
/// off-diagonals. Returns `(e, b)`.
pub fn separable_symbol(
    order: SchemeOrder,
    h: [f64; 3],
    k0_sq: C64,
    mu_x: f64,
    mu_y: f64,
) -> (C64, C64) {
    let s = h[2] * h[2];
    let h2 = h.map(|x| x * x);
    let (p, q) = match order {
        SchemeOrder::Second => (k0_sq + mu_x + mu_y, ONE),
        SchemeOrder::Fourth => {
            let cxy = (h2[0] + h2[1]) / 12.0;
            let cxz = (h2[0] + h2[2]) / 12.0;
            let cyz = (h2[1] + h2[2]) / 12.0;
            let p = k0_sq * (1.0 + h2[0] / 12.0 * mu_x + h2[1] / 12.0 * mu_y)
                + mu_x
                + mu_y
                + cxy * mu_x * mu_y;
            let q = k0_sq * (h2[2] / 12.0) + 1.0 + cxz * mu_x + cyz * mu_y;
            (p, q)
        }
        SchemeOrder::Sixth => {
            let hh = h2[2];
            let t2 = k0_sq * hh;
            let a = t2 / 30.0 + 1.0;
            let b = (t2 / 15.0 + 1.0) * (hh / 6.0);
            let p = a * (mu_x + mu_y) + k0_sq - k0_sq * k0_sq * (hh / 20.0) + b * mu_x * mu_y;
            let q = a + b * (mu_x + mu_y) + hh * hh / 30.0 * mu_x * mu_y;
            (p, q)
        }
    };
    (q, p * s - q * 2.0)
}

#[cfg(test)]
mod tests;
