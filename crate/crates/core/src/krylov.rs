//! Restarted, right-preconditioned GMRES.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{norm2, Field3, NormReport};
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);

/// A linear map on complex vectors of fixed length.
pub trait LinearOperator {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `y = Op x`
    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()>;
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        (**self).apply(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        (**self).apply(x, y)
    }
}

/// The identity map (no preconditioning).
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn len(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[C64], &mut [C64]) -> Result<()>> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[C64], &mut [C64]) -> Result<()>> LinearOperator for FnOperator<F> {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        (self.f)(x, y)
    }
}

impl LinearOperator for crate::linalg::CMatrix {
    fn len(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        y.copy_from_slice(&self.matvec(x));
        Ok(())
    }
}

impl LinearOperator for crate::stencil::HelmholtzOperator {
    fn len(&self) -> usize {
        self.grid().len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        crate::stencil::HelmholtzOperator::apply(self, x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub restart: usize,
    pub tol: f64,
    /// Cap on the total number of inner iterations over all cycles.
    pub max_iterations: usize,
    pub record_history: bool,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: 20,
            tol: 1e-10,
            max_iterations: 100,
            record_history: true,
        }
    }
}

impl GmresConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 {
            return Err(Error::InvalidConfig("restart must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// Least-squares residual estimate inside a cycle.
    Estimated,
    /// `‖F − A U‖₂ / ‖F‖₂` recomputed from the iterate.
    True,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub kind: ResidualKind,
    pub rel_res: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    pub apply: Duration,
    pub precond: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Total inner iterations performed (the iteration at which the
    /// estimated residual first met the tolerance, when converged).
    pub n0: usize,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
    pub timings: Timings,
    /// Last least-squares estimate of the relative residual.
    pub estimated_rel_res: f64,
    /// Residual of the returned iterate against the right-hand side:
    /// `l2_rel` is rel-res, `linf_rel` is relmax-res.
    pub residual: NormReport,
}

/// Solves `A x = b` with GMRES(m) on `A M⁻¹`, starting from `x = 0`.
pub fn gmres_slices(
    a: &dyn LinearOperator,
    minv: &dyn LinearOperator,
    b: &[C64],
    config: &GmresConfig,
) -> Result<(Vec<C64>, SolveReport)> {
    config.validate()?;
    let n = b.len();
    if a.len() != n || minv.len() != n {
        return Err(Error::GridMismatch(format!(
            "operator sizes {} and {} for a right-hand side of {n}",
            a.len(),
            minv.len()
        )));
    }
    let start = Instant::now();
    let mut timings = Timings::default();
    let mut history = Vec::new();
    let mut x = vec![ZERO; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        timings.total = start.elapsed();
        return Ok((
            x,
            SolveReport {
                n0: 0,
                converged: true,
                history,
                timings,
                estimated_rel_res: 0.0,
                residual: NormReport::default(),
            },
        ));
    }

    let m = config.restart.min(n.max(1));
    let apply_a = |v: &[C64], out: &mut [C64], t: &mut Timings| -> Result<()> {
        let s = Instant::now();
        a.apply(v, out)?;
        t.apply += s.elapsed();
        Ok(())
    };
    let apply_m = |v: &[C64], out: &mut [C64], t: &mut Timings| -> Result<()> {
        let s = Instant::now();
        minv.apply(v, out)?;
        t.precond += s.elapsed();
        Ok(())
    };

    let mut r = b.to_vec();
    let mut beta = bnorm;
    let mut total = 0usize;
    let mut converged = false;
    let mut estimate = 1.0;
    let mut z = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    // Hessenberg columns (upper triangular after rotations)
    let mut hcols: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut rot: Vec<(f64, C64)> = Vec::with_capacity(m);
    let mut g: Vec<C64>;

    'outer: loop {
        basis.clear();
        hcols.clear();
        rot.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g = vec![ZERO; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut breakdown = false;
        let mut inner = 0usize;
        while inner < m && total < config.max_iterations {
            let j = inner;
            apply_m(&basis[j], &mut z, &mut timings)?;
            apply_a(&z, &mut w, &mut timings)?;
            let wnorm0 = norm2(&w);
            let mut col = vec![ZERO; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                col[i] = hij;
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= hij * y);
            }
            let hnext = norm2(&w);
            col[j + 1] = Complex64::new(hnext, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let t = c * col[i] + s * col[i + 1];
                col[i + 1] = -s.conj() * col[i] + c * col[i + 1];
                col[i] = t;
            }
            let (c, s) = rotation(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = ZERO;
            rot.push((c, s));
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            hcols.push(col);
            total += 1;
            inner += 1;
            estimate = g[j + 1].norm() / bnorm;
            if config.record_history {
                history.push(HistoryEntry {
                    iteration: total,
                    kind: ResidualKind::Estimated,
                    rel_res: estimate,
                });
            }
            if estimate <= config.tol {
                converged = true;
                break;
            }
            if hnext <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE) {
                breakdown = true;
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        // update x += M⁻¹ V y
        let k = hcols.len();
        if k > 0 {
            let mut y = vec![ZERO; k];
            for i in (0..k).rev() {
                let mut t = g[i];
                for (jj, yj) in y.iter().enumerate().take(k).skip(i + 1) {
                    t -= hcols[jj][i] * yj;
                }
                y[i] = t / hcols[i][i];
            }
            let mut comb = vec![ZERO; n];
            for (v, yi) in basis.iter().zip(&y) {
                comb.iter_mut().zip(v).for_each(|(c, vv)| *c += yi * vv);
            }
            apply_m(&comb, &mut z, &mut timings)?;
            x.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
        }
        apply_a(&x, &mut w, &mut timings)?;
        r.iter_mut()
            .zip(b.iter().zip(&w))
            .for_each(|(ri, (bi, wi))| *ri = bi - wi);
        beta = norm2(&r);
        let true_rel = beta / bnorm;
        if config.record_history {
            history.push(HistoryEntry {
                iteration: total,
                kind: ResidualKind::True,
                rel_res: true_rel,
            });
        }
        if converged {
            break 'outer;
        }
        if breakdown {
            if true_rel <= config.tol {
                converged = true;
                estimate = true_rel;
                break 'outer;
            }
            return Err(Error::Breakdown { residual: true_rel });
        }
        if total >= config.max_iterations {
            break 'outer;
        }
        if beta == 0.0 {
            converged = true;
            estimate = 0.0;
            break 'outer;
        }
    }
    let residual = NormReport::between(&w, b);
    timings.total = start.elapsed();
    Ok((
        x,
        SolveReport {
            n0: total,
            converged,
            history,
            timings,
            estimated_rel_res: estimate,
            residual,
        },
    ))
}

/// Field version of [`gmres_slices`].
pub fn gmres(
    a: &dyn LinearOperator,
    minv: &dyn LinearOperator,
    rhs: &Field3,
    config: &GmresConfig,
) -> Result<(Field3, SolveReport)> {
    let (x, rep) = gmres_slices(a, minv, rhs.as_slice(), config)?;
    Ok((Field3::from_vec(rhs.grid(), x)?, rep))
}

/// Complex Givens rotation `(c, s)` with real `c` mapping `(a, b)` to `(r, 0)`.
fn rotation(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}
