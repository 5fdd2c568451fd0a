//! Tridiagonal solvers: a pivoted single-system solver and a batched
//! line solver for the vertical systems of the fast direct preconditioners.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);

/// Relative residual above which a Thomas solve is redone with pivoting.
pub const RESIDUAL_FALLBACK: f64 = 1e-9;

fn is_negligible(pivot: C64, scale: f64) -> bool {
    !(pivot.norm() > scale * f64::EPSILON * 1e-2) || !pivot.is_finite()
}

/// Solves a general tridiagonal system by Gaussian elimination with partial
/// pivoting. `dl` is the subdiagonal (`n - 1`), `d` the diagonal, `du` the
/// superdiagonal (`n - 1`).
pub fn solve_pivoted(dl: &[C64], d: &[C64], du: &[C64], b: &[C64]) -> Result<Vec<C64>> {
    let n = d.len();
    assert!(dl.len() + 1 == n.max(1) && du.len() + 1 == n.max(1) && b.len() == n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = d
        .iter()
        .chain(dl)
        .chain(du)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut d = d.to_vec();
    let mut du = du.to_vec();
    let mut du2 = vec![ZERO; n.saturating_sub(2)];
    let mut dl = dl.to_vec();
    let mut x = b.to_vec();
    for i in 0..n - 1 {
        if d[i].norm() >= dl[i].norm() {
            if is_negligible(d[i], scale) {
                return Err(Error::Singular(format!("zero pivot in row {i}")));
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            x[i + 1] = x[i + 1] - fact * x[i];
            dl[i] = ZERO;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let tb = x[i];
            x[i] = x[i + 1];
            x[i + 1] = tb - fact * x[i + 1];
        }
    }
    if is_negligible(d[n - 1], scale) {
        return Err(Error::Singular(format!("zero pivot in row {}", n - 1)));
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok(x)
}

/// A batch of independent tridiagonal systems of equal size `n`, one per
/// line `p = i + nx * j`, stored slice-major: entry `r` of line `p` lives at
/// `r * lines + p`.
///
/// Line `p` has the matrix `e_p * Λ̄(γ, ζ) + diag(b_p)` where `Λ̄` has zero
/// interior diagonal, unit off-diagonals, `γ` added to the first and last
/// diagonal entries and `ζ` as the off-diagonal coupling of the first and
/// last rows.
#[derive(Debug, Clone)]
pub struct LineBatch {
    n: usize,
    nx: usize,
    lines: usize,
    gamma: C64,
    zeta: C64,
    scale_e: Option<Vec<C64>>,
    diag: Vec<C64>,
    inv_pivot: Vec<C64>,
    cprime: Vec<C64>,
    /// Lines whose unpivoted factorization was unreliable.
    pivoted_lines: Vec<usize>,
}

impl LineBatch {
    /// Factors every line. `b` is slice-major with `n * lines` entries;
    /// `e`, if given, holds one off-diagonal scale per line. `nx` is only used
    /// to report failing lines as `(i, j)`.
    pub fn new(
        n: usize,
        nx: usize,
        gamma: C64,
        zeta: C64,
        b: Vec<C64>,
        e: Option<Vec<C64>>,
    ) -> Result<Self> {
        assert!(n >= 1 && nx >= 1 && b.len() % n == 0);
        let lines = b.len() / n;
        if let Some(e) = &e {
            assert_eq!(e.len(), lines);
        }
        let mut batch = Self {
            n,
            nx,
            lines,
            gamma,
            zeta,
            scale_e: e,
            diag: b,
            inv_pivot: vec![ZERO; n * lines],
            cprime: vec![ZERO; n * lines],
            pivoted_lines: Vec::new(),
        };
        batch.factor()?;
        Ok(batch)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    /// Lines routed to the pivoted solver at construction.
    pub fn pivoted_lines(&self) -> &[usize] {
        &self.pivoted_lines
    }

    #[inline]
    fn e(&self, p: usize) -> C64 {
        self.scale_e
            .as_ref()
            .map_or(Complex64::new(1.0, 0.0), |e| e[p])
    }

    #[inline]
    fn lower(&self, r: usize, p: usize) -> C64 {
        if r + 1 == self.n && r > 0 {
            self.e(p) * self.zeta
        } else {
            self.e(p)
        }
    }

    #[inline]
    fn upper(&self, r: usize, p: usize) -> C64 {
        if r == 0 && self.n > 1 {
            self.e(p) * self.zeta
        } else {
            self.e(p)
        }
    }

    #[inline]
    fn diagonal(&self, r: usize, p: usize) -> C64 {
        let base = self.diag[r * self.lines + p];
        if r == 0 || r + 1 == self.n {
            base + self.e(p) * self.gamma
        } else {
            base
        }
    }

    /// Full diagonal of line `p`, boundary corrections included.
    pub fn line_diagonal(&self, p: usize) -> Vec<C64> {
        (0..self.n).map(|r| self.diagonal(r, p)).collect()
    }

    fn line_bands(&self, p: usize) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let n = self.n;
        let dl = (1..n).map(|r| self.lower(r, p)).collect();
        let du = (0..n - 1).map(|r| self.upper(r, p)).collect();
        (dl, self.line_diagonal(p), du)
    }

    fn report(&self, p: usize) -> Error {
        Error::Resonance(format!(
            "vertical system at (i, j) = ({}, {}) is singular",
            p % self.nx + 1,
            p / self.nx + 1
        ))
    }

    fn factor(&mut self) -> Result<()> {
        let (n, lines) = (self.n, self.lines);
        let mut bad = vec![false; lines];
        for p in 0..lines {
            let mut scale = 0.0f64;
            for r in 0..n {
                scale = scale
                    .max(self.diagonal(r, p).norm())
                    .max(self.lower(r, p).norm())
                    .max(self.upper(r, p).norm());
            }
            let mut prev_c = ZERO;
            for r in 0..n {
                let piv = if r == 0 {
                    self.diagonal(0, p)
                } else {
                    self.diagonal(r, p) - self.lower(r, p) * prev_c
                };
                // Guard against tiny pivots and runaway growth.
                if is_negligible(piv, scale) || piv.norm() > 1e8 * scale.max(f64::MIN_POSITIVE) {
                    bad[p] = true;
                    break;
                }
                let inv = Complex64::new(1.0, 0.0) / piv;
                let c = if r + 1 < n {
                    self.upper(r, p) * inv
                } else {
                    ZERO
                };
                if c.norm() > 1e8 {
                    bad[p] = true;
                    break;
                }
                self.inv_pivot[r * lines + p] = inv;
                self.cprime[r * lines + p] = c;
                prev_c = c;
            }
        }
        for (p, &flag) in bad.iter().enumerate() {
            if flag {
                let (dl, d, du) = self.line_bands(p);
                solve_pivoted(&dl, &d, &du, &vec![Complex64::new(1.0, 0.0); n])
                    .map_err(|_| self.report(p))?;
                self.pivoted_lines.push(p);
            }
        }
        Ok(())
    }

    /// Solves all lines in place; `data` is slice-major.
    pub fn solve_in_place(&self, data: &mut [C64]) -> Result<()> {
        let (n, lines) = (self.n, self.lines);
        assert_eq!(data.len(), n * lines);
        let rhs = data.to_vec();
        // forward sweep
        for r in 0..n {
            let (done, rest) = data.split_at_mut(r * lines);
            let cur = &mut rest[..lines];
            let inv = &self.inv_pivot[r * lines..(r + 1) * lines];
            if r == 0 {
                cur.iter_mut().zip(inv).for_each(|(y, q)| *y *= q);
            } else {
                let prev = &done[(r - 1) * lines..];
                match &self.scale_e {
                    None => {
                        let lf = if r + 1 == n {
                            self.zeta
                        } else {
                            Complex64::new(1.0, 0.0)
                        };
                        for p in 0..lines {
                            cur[p] = (cur[p] - lf * prev[p]) * inv[p];
                        }
                    }
                    Some(_) => {
                        for p in 0..lines {
                            cur[p] = (cur[p] - self.lower(r, p) * prev[p]) * inv[p];
                        }
                    }
                }
            }
        }
        // back substitution
        for r in (0..n.saturating_sub(1)).rev() {
            let (head, tail) = data.split_at_mut((r + 1) * lines);
            let cur = &mut head[r * lines..];
            let next = &tail[..lines];
            let c = &self.cprime[r * lines..(r + 1) * lines];
            for p in 0..lines {
                cur[p] -= c[p] * next[p];
            }
        }
        // residual check, per line
        let mut res = vec![0.0f64; lines];
        let mut rhs_norm = vec![0.0f64; lines];
        for r in 0..n {
            for p in 0..lines {
                let mut t = self.diagonal(r, p) * data[r * lines + p] - rhs[r * lines + p];
                if r > 0 {
                    t += self.lower(r, p) * data[(r - 1) * lines + p];
                }
                if r + 1 < n {
                    t += self.upper(r, p) * data[(r + 1) * lines + p];
                }
                res[p] = res[p].max(t.norm());
                rhs_norm[p] = rhs_norm[p].max(rhs[r * lines + p].norm());
            }
        }
        for p in 0..lines {
            let failed = !(res[p] <= RESIDUAL_FALLBACK * rhs_norm[p]);
            if failed || self.pivoted_lines.binary_search(&p).is_ok() {
                let (dl, d, du) = self.line_bands(p);
                let b: Vec<C64> = (0..n).map(|r| rhs[r * lines + p]).collect();
                let x = solve_pivoted(&dl, &d, &du, &b).map_err(|_| self.report(p))?;
                for (r, v) in x.into_iter().enumerate() {
                    data[r * lines + p] = v;
                }
            }
        }
        Ok(())
    }

    /// Applies the line matrices: `out = T x`, slice-major.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let (n, lines) = (self.n, self.lines);
        let mut out = vec![ZERO; n * lines];
        for r in 0..n {
            for p in 0..lines {
                let mut t = self.diagonal(r, p) * x[r * lines + p];
                if r > 0 {
                    t += self.lower(r, p) * x[(r - 1) * lines + p];
                }
                if r + 1 < n {
                    t += self.upper(r, p) * x[(r + 1) * lines + p];
                }
                out[r * lines + p] = t;
            }
        }
        out
    }
}
