//! Sweeps of the one-dimensional model problem.

use std::fmt::Write as _;

use helmholtz_core::model1d::{build_rhs_1d, run_model_gmres, spectrum, Model1D, ModelRun};
use helmholtz_core::Complex64;

use crate::emit::sci;
use crate::HarnessError;

pub const SWEEP_HEADER: &str = "N,k,r,delta0,M,Mh2,iterations,converged,within-envelope";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub model: Model1D,
    pub delta0: f64,
    pub m_bound: f64,
    pub run: ModelRun,
}

impl ModelRow {
    pub fn within_envelope(&self) -> bool {
        self.run.within_envelope(1e-9, 1e-13)
    }
}

/// Right-hand side for `f(x) = eˣ`, whose even derivatives are all `eˣ`.
pub fn exp_rhs(model: &Model1D) -> Result<Vec<Complex64>, HarnessError> {
    let h = model.h();
    let f: Vec<Complex64> = (1..=model.n)
        .map(|i| Complex64::new((i as f64 * h).exp(), 0.0))
        .collect();
    let derivs = vec![f; model.r];
    Ok(build_rhs_1d(model, &derivs)?)
}

pub fn run_model(n: usize, k: f64, r: usize, tol: f64) -> Result<ModelRow, HarnessError> {
    let model = Model1D::new(n, k, r)?;
    let spec = spectrum(&model)?;
    let rhs = exp_rhs(&model)?;
    let run = run_model_gmres(&model, &rhs, tol)?;
    Ok(ModelRow {
        model,
        delta0: spec.delta0,
        m_bound: spec.m_bound,
        run,
    })
}

pub fn sweep(
    ns: &[usize],
    ks: &[f64],
    rs: &[usize],
    tol: f64,
) -> Result<Vec<ModelRow>, HarnessError> {
    let mut rows = Vec::new();
    for &r in rs {
        for &k in ks {
            for &n in ns {
                rows.push(run_model(n, k, r, tol)?);
            }
        }
    }
    Ok(rows)
}

/// `n,rel_res,envelope` for one run.
pub fn history_csv(row: &ModelRow) -> String {
    let mut s = String::from("n,rel_res,envelope\n");
    for (n, (r, e)) in row.run.history.iter().zip(&row.run.envelope).enumerate() {
        let _ = writeln!(s, "{n},{},{}", sci(*r), sci(*e));
    }
    s
}

pub fn sweep_csv(rows: &[ModelRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        let m = &row.model;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            m.n,
            m.k,
            m.r,
            sci(row.delta0),
            sci(row.m_bound),
            sci(row.m_bound * m.h() * m.h()),
            row.run.iterations,
            row.run.converged,
            row.within_envelope()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_table_has_one_row_per_case() {
        let rows = sweep(&[50, 100], &[20.0], &[2, 3], 1e-10).unwrap();
        assert_eq!(rows.len(), 4);
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        assert!(rows.iter().all(|r| r.run.converged && r.within_envelope()));
    }
}
