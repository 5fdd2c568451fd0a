//! Eigendecomposition of the boundary-modified tridiagonal matrices
//!
//! ```text
//!       | γ  ζ             |
//!       | 1  0  1          |
//!   Λ̄ = |    .  .  .       |
//!       |       1  0  1    |
//!       |          ζ  γ    |
//! ```
//!
//! and the closed-form sine eigensystem of the Dirichlet case.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::dst::sine_entry;
use crate::error::{Error, Result};
use crate::field::{read_raw, write_raw};
use crate::linalg::CMatrix;
use crate::tridiag::solve_pivoted;
use crate::C64;

const ZERO: C64 = Complex64::new(0.0, 0.0);
const ONE: C64 = Complex64::new(1.0, 0.0);

/// Eigenvector matrices above this 1-norm condition number are rejected.
pub const MAX_COND: f64 = 1e12;
/// Largest accepted `‖V V⁻¹ − I‖_max`.
pub const MAX_INVERSE_ERROR: f64 = 1e-8;

/// Size and boundary entries of `Λ̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagSpec {
    pub n: usize,
    pub gamma: C64,
    pub zeta: C64,
}

impl TridiagSpec {
    pub fn new(n: usize, gamma: C64, zeta: C64) -> Self {
        Self { n, gamma, zeta }
    }

    /// Bands `(sub, diag, super)`.
    pub fn bands(&self) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let n = self.n;
        let mut d = vec![ZERO; n];
        let mut dl = vec![ONE; n.saturating_sub(1)];
        let mut du = vec![ONE; n.saturating_sub(1)];
        if n >= 1 {
            d[0] += self.gamma;
            if n > 1 {
                d[n - 1] += self.gamma;
                du[0] = self.zeta;
                dl[n - 2] = self.zeta;
            }
        }
        (dl, d, du)
    }

    pub fn dense(&self) -> CMatrix {
        let (dl, d, du) = self.bands();
        let mut m = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = d[i];
            if i + 1 < self.n {
                m[(i, i + 1)] = du[i];
                m[(i + 1, i)] = dl[i];
            }
        }
        m
    }

    /// `y = Λ̄ x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let (dl, d, du) = self.bands();
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut t = d[i] * x[i];
                if i > 0 {
                    t += dl[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    t += du[i] * x[i + 1];
                }
                t
            })
            .collect()
    }
}

/// `Λ̄ = V diag(d) V⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEig {
    pub values: Vec<C64>,
    pub v: CMatrix,
    pub v_inv: CMatrix,
    /// `‖V‖₁ ‖V⁻¹‖₁`
    pub cond_v: f64,
    /// `‖V V⁻¹ − I‖_max`
    pub inverse_error: f64,
}

impl TridiagEig {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `‖Λ̄ V − V D‖_max / ‖Λ̄‖_max` for the given matrix.
    pub fn residual(&self, spec: &TridiagSpec) -> f64 {
        let a = spec.dense();
        let av = a.matmul(&self.v);
        let mut err = 0.0f64;
        for c in 0..self.n() {
            for r in 0..self.n() {
                err = err.max((av[(r, c)] - self.v[(r, c)] * self.values[c]).norm());
            }
        }
        err / a.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `‖V D V⁻¹ − Λ̄‖_max / ‖Λ̄‖_max`.
    pub fn reconstruction_error(&self, spec: &TridiagSpec) -> f64 {
        let n = self.n();
        let vd = CMatrix::from_fn(n, n, |r, c| self.v[(r, c)] * self.values[c]);
        let a = spec.dense();
        vd.matmul(&self.v_inv).max_abs_diff(&a) / a.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Closed-form eigensystem of the Dirichlet matrix (`γ = 0`, `ζ = 1`):
/// `λ_i = 2 cos(π h i)`, `V_{l,i} = sqrt(2h) sin(π h i l)`, `V⁻¹ = Vᵀ`.
pub fn sine_eigensystem(n: usize) -> TridiagEig {
    assert!(n >= 1);
    let h = 1.0 / (n + 1) as f64;
    let values = (1..=n)
        .map(|i| Complex64::new(2.0 * (std::f64::consts::PI * h * i as f64).cos(), 0.0))
        .collect();
    let v = CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(sine_entry(n, r + 1, c + 1), 0.0)
    });
    let v_inv = v.transpose();
    TridiagEig {
        values,
        v,
        v_inv,
        cond_v: 1.0,
        inverse_error: 0.0,
    }
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, ONE);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Eigenvalues of an upper Hessenberg matrix (row-major `n x n`) by the
/// shifted complex QR iteration with deflation.
pub fn hessenberg_eigenvalues(mut h: Vec<C64>, n: usize) -> Result<Vec<C64>> {
    let at = |r: usize, c: usize| r * n + c;
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Ok(eig);
    }
    let max_iter = 60 * n.max(10);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    let mut rot = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eig[0] = h[at(0, 0)];
            break;
        }
        // look for a negligible subdiagonal entry
        let mut lo = hi;
        while lo > 0 {
            let s = h[at(lo - 1, lo - 1)].norm() + h[at(lo, lo)].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[at(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[at(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[at(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > max_iter {
            return Err(Error::NoConvergence(total));
        }
        // Wilkinson shift from the trailing 2x2 block
        let a = h[at(hi - 1, hi - 1)];
        let b = h[at(hi - 1, hi)];
        let c = h[at(hi, hi - 1)];
        let d = h[at(hi, hi)];
        let mut mu = {
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let l1 = tr * 0.5 + disc;
            let l2 = tr * 0.5 - disc;
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        if its % 11 == 10 {
            // exceptional shift
            mu = d
                + Complex64::new(h[at(hi, hi - 1)].norm(), 0.0)
                + if hi >= 2 {
                    Complex64::new(0.0, 0.75 * h[at(hi - 1, hi - 2)].norm())
                } else {
                    ZERO
                };
        }
        for k in lo..=hi {
            h[at(k, k)] -= mu;
        }
        rot.clear();
        for k in lo..hi {
            let (cs, sn) = givens(h[at(k, k)], h[at(k + 1, k)]);
            for col in k..=hi {
                let x = h[at(k, col)];
                let y = h[at(k + 1, col)];
                h[at(k, col)] = x * cs + sn * y;
                h[at(k + 1, col)] = -sn.conj() * x + y * cs;
            }
            h[at(k + 1, k)] = ZERO;
            rot.push((cs, sn));
        }
        for (idx, &(cs, sn)) in rot.iter().enumerate() {
            let k = lo + idx;
            for row in lo..=(k + 2).min(hi) {
                let x = h[at(row, k)];
                let y = h[at(row, k + 1)];
                h[at(row, k)] = x * cs + sn.conj() * y;
                h[at(row, k + 1)] = -sn * x + y * cs;
            }
        }
        for k in lo..=hi {
            h[at(k, k)] += mu;
        }
    }
    Ok(eig)
}

fn normalize_phase(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    // largest component, first index on ties, made real and positive
    let mut best = 0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = k;
        }
    }
    let phase = if v[best].norm() > 0.0 {
        v[best].conj() / v[best].norm()
    } else {
        ONE
    };
    for z in v.iter_mut() {
        *z *= phase / norm;
    }
}

/// Eigenvector for the (approximate) eigenvalue `lambda` by inverse iteration.
fn inverse_iteration(spec: &TridiagSpec, lambda: C64, scale: f64) -> Result<Vec<C64>> {
    let n = spec.n;
    let (dl, d, du) = spec.bands();
    // perturb the shift so the shifted matrix is numerically nonsingular
    let shift = lambda + Complex64::new(1.0, 0.5) * (scale * 1e-13);
    let dshift: Vec<C64> = d.iter().map(|x| x - shift).collect();
    let mut v: Vec<C64> = (0..n)
        .map(|k| Complex64::new(1.0 + 0.1 * ((k * 7 % 5) as f64), 0.05 * (k % 3) as f64))
        .collect();
    // initial solve plus refinement passes
    for _ in 0..3 {
        let mut x = match solve_pivoted(&dl, &dshift, &du, &v) {
            Ok(x) => x,
            Err(_) => {
                let nudged: Vec<C64> = dshift
                    .iter()
                    .map(|x| x - Complex64::new(scale * 1e-10, 0.0))
                    .collect();
                solve_pivoted(&dl, &nudged, &du, &v)?
            }
        };
        normalize_phase(&mut x);
        v = x;
    }
    Ok(v)
}

/// Full eigendecomposition of `Λ̄`, eigenvalues sorted by real part, then
/// imaginary part. Eigenvectors have unit 2-norm with their largest entry real
/// and positive.
pub fn decompose(spec: &TridiagSpec) -> Result<TridiagEig> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "tridiagonal eigendecomposition needs n >= 2, got {n}"
        )));
    }
    let dense = spec.dense();
    let mut rows = vec![ZERO; n * n];
    for r in 0..n {
        for c in 0..n {
            rows[r * n + c] = dense[(r, c)];
        }
    }
    let mut values = hessenberg_eigenvalues(rows, n)?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = dense.max_abs().max(1.0);
    let mut v = CMatrix::zeros(n, n);
    for (c, &lambda) in values.iter().enumerate() {
        let x = inverse_iteration(spec, lambda, scale)?;
        v.column_mut(c).copy_from_slice(&x);
    }
    // Rayleigh-type refinement of each eigenvalue from its vector
    for (c, value) in values.iter_mut().enumerate() {
        let x = v.column(c);
        let ax = spec.apply(x);
        let num: C64 = x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum();
        let den: C64 = x.iter().map(|a| a.conj() * a).sum();
        let refined = num / den;
        if (refined - *value).norm() < 1e-8 * scale {
            *value = refined;
        }
    }
    let v_inv = invert_eigenvectors(&v)?;
    let inverse_error = v.matmul(&v_inv).max_abs_diff(&CMatrix::identity(n));
    let cond_v = v.norm_one() * v_inv.norm_one();
    if !(cond_v <= MAX_COND) || !(inverse_error <= MAX_INVERSE_ERROR) {
        return Err(Error::NotDiagonalizable(format!(
            "n = {n}, γ = {}, ζ = {}: cond(V) = {cond_v:.3e}, ‖VV⁻¹ − I‖ = {inverse_error:.3e}",
            spec.gamma, spec.zeta
        )));
    }
    Ok(TridiagEig {
        values,
        v,
        v_inv,
        cond_v,
        inverse_error,
    })
}

/// Dense inverse of an eigenvector matrix.
pub fn invert_eigenvectors(v: &CMatrix) -> Result<CMatrix> {
    v.inverse().map_err(|e| match e {
        Error::Singular(msg) => Error::NotDiagonalizable(msg),
        other => other,
    })
}

/// Directory of cached decompositions, one file per `(n, γ, ζ)`.
#[derive(Debug, Clone)]
pub struct EigCache {
    dir: PathBuf,
}

impl EigCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        Self {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, spec: &TridiagSpec) -> PathBuf {
        let key = format!(
            "eig-{}-{:016x}{:016x}-{:016x}{:016x}.bin",
            spec.n,
            spec.gamma.re.to_bits(),
            spec.gamma.im.to_bits(),
            spec.zeta.re.to_bits(),
            spec.zeta.im.to_bits()
        );
        self.dir.join(key)
    }

    pub fn load(&self, spec: &TridiagSpec) -> Result<Option<TridiagEig>> {
        let path = self.path(spec);
        if !path.exists() {
            return Ok(None);
        }
        let mut r = BufReader::new(fs::File::open(path)?);
        let n = spec.n;
        let (d0, values) = read_raw(&mut r)?;
        let (d1, v) = read_raw(&mut r)?;
        let (d2, v_inv) = read_raw(&mut r)?;
        if d0 != [n, 1, 1] || d1 != [n, n, 1] || d2 != [n, n, 1] {
            return Err(Error::Format("cached decomposition has wrong shape".into()));
        }
        let v = CMatrix::from_col_major(n, n, v)?;
        let v_inv = CMatrix::from_col_major(n, n, v_inv)?;
        let inverse_error = v.matmul(&v_inv).max_abs_diff(&CMatrix::identity(n));
        let cond_v = v.norm_one() * v_inv.norm_one();
        Ok(Some(TridiagEig {
            values,
            v,
            v_inv,
            cond_v,
            inverse_error,
        }))
    }

    pub fn store(&self, spec: &TridiagSpec, eig: &TridiagEig) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let n = spec.n;
        let mut buf = Vec::new();
        write_raw(&mut buf, [n, 1, 1], &eig.values)?;
        write_raw(&mut buf, [n, n, 1], eig.v.as_slice())?;
        write_raw(&mut buf, [n, n, 1], eig.v_inv.as_slice())?;
        fs::write(self.path(spec), buf)?;
        Ok(())
    }

    /// Loads the decomposition, computing and storing it on a miss.
    pub fn get_or_compute(&self, spec: &TridiagSpec) -> Result<TridiagEig> {
        if let Some(e) = self.load(spec)? {
            return Ok(e);
        }
        let e = decompose(spec)?;
        self.store(spec, &e)?;
        Ok(e)
    }
}
