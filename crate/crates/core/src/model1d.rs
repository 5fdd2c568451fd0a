//! One-dimensional model problem `u'' + k² u = f` on `[0, 1]` with
//! homogeneous Dirichlet data, discretized by compact schemes of order `2r`
//! and preconditioned by the second-order matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::krylov::{gmres_slices, FnOperator, GmresConfig, ResidualKind};
use crate::linalg::CMatrix;
use crate::tridiag::solve_pivoted;
use crate::C64;

const ONE: C64 = Complex64::new(1.0, 0.0);

/// Scheme of order `2r` on `n` interior points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1D {
    pub n: usize,
    pub k: f64,
    pub r: usize,
}

impl Model1D {
    pub fn new(n: usize, k: f64, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 interior points, got {n}"
            )));
        }
        if r < 1 {
            return Err(Error::InvalidConfig(
                "scheme half-order r must be at least 1".into(),
            ));
        }
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "wavenumber must be finite and nonnegative, got {k}"
            )));
        }
        Ok(Self { n, k, r })
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    pub fn tau(&self) -> f64 {
        self.k * self.h()
    }

    /// Diagonal entry `-2 d_r` of the scheme matrix.
    pub fn diagonal(&self) -> f64 {
        -2.0 * coefficient_d(self.r, self.tau())
    }

    /// Diagonal entry of the second-order preconditioner.
    pub fn precond_diagonal(&self) -> f64 {
        -2.0 * coefficient_d(1, self.tau())
    }

    /// `A = Λ − 2 d_r I`
    pub fn a_matrix(&self) -> CMatrix {
        tridiagonal(self.n, self.diagonal())
    }

    /// `A_p = Λ − 2 (1 − τ²/2) I`
    pub fn ap_matrix(&self) -> CMatrix {
        tridiagonal(self.n, self.precond_diagonal())
    }

    /// Explicit `A A_p⁻¹`.
    pub fn preconditioned_matrix(&self) -> Result<CMatrix> {
        Ok(self.a_matrix().matmul(&self.ap_matrix().inverse()?))
    }
}

fn tridiagonal(n: usize, diag: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(diag, 0.0)
        } else if r.abs_diff(c) == 1 {
            ONE
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|v| v as f64).product()
}

/// `d_r = Σ_{j=0}^{r} (−1)^j τ^{2j} / (2j)!`
pub fn coefficient_d(r: usize, tau: f64) -> f64 {
    assert!(r >= 1);
    (0..=r)
        .map(|j| (-1f64).powi(j as i32) * tau.powi(2 * j as i32) / factorial(2 * j))
        .sum()
}

/// Right-hand side of the order-`2r` scheme. `even_derivs[j]` holds the
/// samples of `f^{(2j)}` at the interior nodes, `j = 0..r`.
pub fn build_rhs_1d(model: &Model1D, even_derivs: &[Vec<C64>]) -> Result<Vec<C64>> {
    let r = model.r;
    if even_derivs.len() < r {
        return Err(Error::MissingDerivatives(
            "even derivatives of f up to order 2r - 2",
        ));
    }
    let (h, tau) = (model.h(), model.tau());
    let n = model.n;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, d) in even_derivs.iter().take(r).enumerate() {
        if d.len() != n {
            return Err(Error::GridMismatch(format!(
                "derivative of order {} has {} samples for {n} nodes",
                2 * j,
                d.len()
            )));
        }
        let inner: f64 = (0..r - j)
            .map(|l| (-1f64).powi(l as i32) * tau.powi(2 * l as i32) / factorial(2 * (l + j + 1)))
            .sum();
        let w = 2.0 * h * h * h.powi(2 * j as i32) * inner;
        out.iter_mut().zip(d).for_each(|(o, v)| *o += v * w);
    }
    Ok(out)
}

/// Closed-form spectral data of the preconditioned model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub lambda_a: Vec<f64>,
    pub lambda_ap: Vec<f64>,
    /// `λ_i(A A_p⁻¹) = λ_i(A) / λ_i(A_p)`
    pub lambda_ratio: Vec<f64>,
    pub d_ii: Vec<f64>,
    pub delta0: f64,
    /// Bound on `|d_ii|`; the residual envelope is `(M h²)^n`.
    pub m_bound: f64,
}

impl SpectrumReport {
    pub fn envelope(&self, h: f64, n: usize) -> f64 {
        (self.m_bound * h * h).powi(n as i32)
    }
}

/// Eigenvalue `2 cos(π h i)` of `Λ`, `i = 1..n`.
pub fn lambda_eigenvalue(n: usize, i: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    2.0 * (std::f64::consts::PI * h * i as f64).cos()
}

pub fn spectrum(model: &Model1D) -> Result<SpectrumReport> {
    let (n, k, r) = (model.n, model.k, model.r);
    let (h, tau) = (model.h(), model.tau());
    let da = model.diagonal();
    let dp = model.precond_diagonal();
    let series: f64 = (0..r.saturating_sub(1))
        .map(|l| (-1f64).powi(l as i32 + 1) * tau.powi(2 * l as i32) / factorial(2 * (l + 2)))
        .sum();
    let mut report = SpectrumReport {
        lambda_a: Vec::with_capacity(n),
        lambda_ap: Vec::with_capacity(n),
        lambda_ratio: Vec::with_capacity(n),
        d_ii: Vec::with_capacity(n),
        delta0: f64::INFINITY,
        m_bound: 0.0,
    };
    for i in 1..=n {
        let s = (std::f64::consts::PI * h * i as f64 / 2.0).sin();
        let la = -4.0 * s * s + (2.0 + da);
        let lp = -4.0 * s * s + tau * tau;
        debug_assert!((lp - (lambda_eigenvalue(n, i) + dp)).abs() < 1e-12);
        if lp.abs() <= 4.0 * f64::EPSILON * (4.0 + tau * tau) {
            return Err(Error::Resonance(format!(
                "eigenvalue {i} of the preconditioner vanishes for k = {k}, h = {h}"
            )));
        }
        let gap = 4.0 * s * s / (h * h) - k * k;
        report.lambda_a.push(la);
        report.lambda_ap.push(lp);
        report.lambda_ratio.push(la / lp);
        report.d_ii.push(-2.0 * k.powi(4) * series / gap);
        if k > 0.0 {
            report.delta0 = report.delta0.min(gap.abs() / (k * k));
        }
    }
    if k > 0.0 {
        let sum: f64 = (0..r.saturating_sub(1))
            .map(|l| k.powi(2 * l as i32) / (4f64.powi(l as i32) * factorial(2 * (l + 2))))
            .sum();
        report.m_bound = 2.0 * k * k / report.delta0 * sum;
    }
    Ok(report)
}

/// Result of the full GMRES run on the model problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    /// `‖r_n‖ / ‖r_0‖` for `n = 0, 1, ...`
    pub history: Vec<f64>,
    /// `(M h²)^n` for the same `n`.
    pub envelope: Vec<f64>,
    /// Iterations to reach the tolerance.
    pub iterations: usize,
    pub converged: bool,
    pub true_rel_res: f64,
}

impl ModelRun {
    /// Whether every recorded residual lies under the envelope, allowing a
    /// relative slack `rel` and an absolute floor for roundoff.
    pub fn within_envelope(&self, rel: f64, floor: f64) -> bool {
        self.history
            .iter()
            .zip(&self.envelope)
            .all(|(r, e)| *r <= e * (1.0 + rel) || *r <= floor)
    }
}

/// Non-restarted GMRES on `A A_p⁻¹ y = F`.
pub fn run_model_gmres(model: &Model1D, f: &[C64], tol: f64) -> Result<ModelRun> {
    let n = model.n;
    if f.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} values for {n} nodes",
            f.len()
        )));
    }
    let spec = spectrum(model)?;
    let (da, dp) = (
        Complex64::new(model.diagonal(), 0.0),
        Complex64::new(model.precond_diagonal(), 0.0),
    );
    let tri = move |diag: C64, x: &[C64], y: &mut [C64]| {
        for i in 0..x.len() {
            let mut v = diag * x[i];
            if i > 0 {
                v += x[i - 1];
            }
            if i + 1 < x.len() {
                v += x[i + 1];
            }
            y[i] = v;
        }
    };
    let a = FnOperator::new(n, move |x: &[C64], y: &mut [C64]| {
        tri(da, x, y);
        Ok(())
    });
    let off = vec![ONE; n - 1];
    let diag = vec![dp; n];
    let minv = FnOperator::new(n, move |x: &[C64], y: &mut [C64]| {
        y.copy_from_slice(&solve_pivoted(&off, &diag, &off, x)?);
        Ok(())
    });
    let cfg = GmresConfig {
        restart: n,
        tol,
        max_iterations: n,
        record_history: true,
    };
    let (_, report) = gmres_slices(&a, &minv, f, &cfg)?;
    let mut history = vec![1.0];
    history.extend(
        report
            .history
            .iter()
            .filter(|e| e.kind == ResidualKind::Estimated)
            .map(|e| e.rel_res),
    );
    let h = model.h();
    let envelope = (0..history.len()).map(|m| spec.envelope(h, m)).collect();
    Ok(ModelRun {
        history,
        envelope,
        iterations: report.n0,
        converged: report.converged,
        true_rel_res: report.residual.l2_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_d_partial_sums() {
        let t: f64 = 0.3;
        assert!((coefficient_d(1, t) - (1.0 - t * t / 2.0)).abs() < 1e-15);
        assert!((coefficient_d(2, t) - (1.0 - t * t / 2.0 + t.powi(4) / 24.0)).abs() < 1e-15);
        assert!((coefficient_d(12, t) - t.cos()).abs() < 1e-12);
    }

    #[test]
    fn rhs_for_constant_source() {
        let m = Model1D::new(9, 7.0, 1).unwrap();
        let ones = vec![ONE; 9];
        let zeros = vec![Complex64::new(0.0, 0.0); 9];
        let f = build_rhs_1d(&m, &[ones.clone()]).unwrap();
        let h = m.h();
        assert!(f.iter().all(|v| (v - h * h).norm() < 1e-15));
        let m2 = Model1D::new(9, 7.0, 2).unwrap();
        let f = build_rhs_1d(&m2, &[ones.clone(), zeros]).unwrap();
        let t = m2.tau();
        assert!(f
            .iter()
            .all(|v| (v - h * h * (1.0 - t * t / 12.0)).norm() < 1e-15));
        assert!(matches!(
            build_rhs_1d(&m2, &[ones]),
            Err(Error::MissingDerivatives(_))
        ));
    }

    #[test]
    fn small_spectrum_of_lambda() {
        let v: Vec<f64> = (1..=3).map(|i| lambda_eigenvalue(3, i)).collect();
        let s = 2f64.sqrt();
        assert!((v[0] - s).abs() < 1e-15 && v[1].abs() < 1e-15 && (v[2] + s).abs() < 1e-15);
    }

    #[test]
    fn ratio_equals_one_plus_h2_dii_and_is_bounded() {
        let m = Model1D::new(100, 20.0, 2).unwrap();
        let s = spectrum(&m).unwrap();
        let h2 = m.h() * m.h();
        for (r, d) in s.lambda_ratio.iter().zip(&s.d_ii) {
            assert!((r - (1.0 + h2 * d)).abs() < 1e-12);
            // equality at the index attaining δ0
            assert!(d.abs() <= s.m_bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn second_order_preconditioner_is_exact_for_r1() {
        let m = Model1D::new(30, 9.0, 1).unwrap();
        let f = vec![ONE; 30];
        let run = run_model_gmres(&m, &f, 1e-12).unwrap();
        assert_eq!(run.iterations, 1);
        assert!(run.converged);
    }

    #[test]
    fn resonance_is_rejected() {
        // λ_1(A_p) = 0 when τ² = 4 sin²(π h / 2)
        let n = 10;
        let h = 1.0 / (n + 1) as f64;
        let k = 2.0 * (std::f64::consts::PI * h / 2.0).sin() / h;
        let m = Model1D::new(n, k, 2).unwrap();
        assert!(matches!(spectrum(&m), Err(Error::Resonance(_))));
    }
}
