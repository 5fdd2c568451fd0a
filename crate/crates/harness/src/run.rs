use std::time::{Duration, Instant};

use helmholtz_core::eigt::EigTPrecond;
use helmholtz_core::fftref::FftRefPrecond;
use helmholtz_core::krylov::{gmres, Identity, LinearOperator, SolveReport};
use helmholtz_core::pfft::PfftPrecond;
use helmholtz_core::problems::{analytic_fields, inclusion_fields, AnalyticSeparable};
use helmholtz_core::stencil::{
    build_rhs, BoundaryCoeffs, HelmholtzOperator, Medium, SchemeOrder, Source,
};
use helmholtz_core::{Complex64, Field3, Grid3, NormReport};

use crate::config::{BoundaryChoice, ExperimentSpec, PrecondId, ProblemId, SolverKind};
use crate::emit;
use crate::HarnessError;

/// One line of a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub grid: usize,
    pub order: u32,
    pub precond: PrecondId,
    pub max_err: Option<f64>,
    pub l2_err: Option<f64>,
    pub relmax_err: Option<f64>,
    pub rel_res: f64,
    pub relmax_res: f64,
    pub n0: usize,
    /// Preconditioner setup plus solve, seconds (median over repeats).
    pub tp: f64,
    pub setup: f64,
    pub apply: f64,
    pub precond_time: f64,
    pub converged: bool,
    pub error: Option<String>,
}

impl ResultRow {
    fn failed(spec: &ExperimentSpec, n: usize, err: &HarnessError) -> Self {
        Self {
            grid: n,
            order: spec.order,
            precond: spec.precond,
            max_err: None,
            l2_err: None,
            relmax_err: None,
            rel_res: f64::NAN,
            relmax_res: f64::NAN,
            n0: 0,
            tp: 0.0,
            setup: 0.0,
            apply: 0.0,
            precond_time: 0.0,
            converged: false,
            error: Some(err.to_string()),
        }
    }
}

/// Full result of one grid: the row plus the solver report and solution.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub report: SolveReport,
    pub solution: Field3,
}

/// The discrete problem on one grid.
pub struct Setup {
    pub grid: Grid3,
    pub order: SchemeOrder,
    pub medium: Medium,
    pub source: Source,
    pub exact: Option<Field3>,
    pub operator: HelmholtzOperator,
    pub rhs: Field3,
}

/// Builds grid, medium, operator and right-hand side for `spec` at size `n`.
pub fn setup(spec: &ExperimentSpec, n: usize) -> Result<Setup, HarnessError> {
    let order = spec.scheme()?;
    let grid = Grid3::unit_cube(n, spec.placement())?;
    let (exact, medium, source, analytic) = match spec.problem {
        ProblemId::Analytic => {
            let p = AnalyticSeparable::new(spec.analytic.k0_sq)?;
            let (u, m, s) = analytic_fields(&p, &grid)?;
            (Some(u), m, s, Some(p))
        }
        ProblemId::Inclusion => {
            let (m, s) = inclusion_fields(
                &spec.inclusion.to_problem(),
                &grid,
                spec.inclusion.derivatives(),
            )?;
            (None, m, s, None)
        }
    };
    let bc = match spec.boundary {
        BoundaryChoice::Oracle => BoundaryCoeffs::oracle_ghost(),
        _ => BoundaryCoeffs::for_grid(&grid, medium.k0()),
    };
    let operator = HelmholtzOperator::new(order, &medium, bc)?;
    let mut rhs = build_rhs(order, &medium, &source)?;
    if let (BoundaryChoice::Oracle, Some(p)) = (spec.boundary, analytic) {
        let forcing = operator.ghost_forcing(&|x| p.exact(x));
        rhs.axpy(Complex64::new(-1.0, 0.0), &forcing)?;
    }
    Ok(Setup {
        grid,
        order,
        medium,
        source,
        exact,
        operator,
        rhs,
    })
}

/// Preconditioner `M⁻¹` for a grid and background wavenumber.
pub fn build_preconditioner(
    id: PrecondId,
    grid: &Grid3,
    k0: Complex64,
) -> Result<Box<dyn LinearOperator>, HarnessError> {
    let bc = BoundaryCoeffs::for_grid(grid, k0);
    Ok(match id {
        PrecondId::Eigt2 | PrecondId::Eigt3 => Box::new(EigTPrecond::constant(grid, &bc, k0)?),
        PrecondId::Pfft2 | PrecondId::Pfft3 => Box::new(PfftPrecond::constant(grid, &bc, k0)?),
        PrecondId::Fft2 => Box::new(FftRefPrecond::new(SchemeOrder::Second, grid, k0)?),
        PrecondId::Fft4 => Box::new(FftRefPrecond::new(SchemeOrder::Fourth, grid, k0)?),
        PrecondId::Fft6 => Box::new(FftRefPrecond::new(SchemeOrder::Sixth, grid, k0)?),
        PrecondId::None => Box::new(Identity(grid.len())),
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

fn solve_once(
    spec: &ExperimentSpec,
    s: &Setup,
) -> Result<(Field3, SolveReport, Duration), HarnessError> {
    let t = Instant::now();
    let m = build_preconditioner(spec.precond, &s.grid, s.medium.k0())?;
    let setup_time = t.elapsed();
    match spec.solver {
        SolverKind::Gmres => {
            let (u, report) = gmres(&s.operator, m.as_ref(), &s.rhs, &spec.gmres.to_config())?;
            Ok((u, report, setup_time))
        }
        SolverKind::Direct => {
            let start = Instant::now();
            let mut u = Field3::zeros(&s.grid);
            m.apply(s.rhs.as_slice(), u.as_mut_slice())?;
            let solve = start.elapsed();
            let au = s.operator.apply_field(&u)?;
            let residual = NormReport::between(au.as_slice(), s.rhs.as_slice());
            let report = SolveReport {
                n0: 0,
                converged: residual.l2_rel <= spec.gmres.tol,
                history: Vec::new(),
                timings: helmholtz_core::krylov::Timings {
                    apply: Duration::ZERO,
                    precond: solve,
                    total: solve,
                },
                estimated_rel_res: residual.l2_rel,
                residual,
            };
            Ok((u, report, setup_time))
        }
    }
}

/// Runs one grid size.
pub fn run_grid(spec: &ExperimentSpec, n: usize) -> Result<RunOutcome, HarnessError> {
    spec.validate()?;
    let s = setup(spec, n)?;
    let mut times = Vec::with_capacity(spec.repeat);
    let mut last = None;
    for _ in 0..spec.repeat {
        let (u, report, setup_time) = solve_once(spec, &s)?;
        times.push((setup_time + report.timings.total).as_secs_f64());
        last = Some((u, report, setup_time));
    }
    let (u, report, setup_time) = last.expect("repeat >= 1");
    let errs = s
        .exact
        .as_ref()
        .map(|e| NormReport::between(u.as_slice(), e.as_slice()));
    let row = ResultRow {
        grid: n,
        order: spec.order,
        precond: spec.precond,
        max_err: errs.map(|e| e.linf_abs),
        l2_err: errs.map(|e| e.l2_rel),
        relmax_err: errs.map(|e| e.linf_rel),
        rel_res: report.residual.l2_rel,
        relmax_res: report.residual.linf_rel,
        n0: report.n0,
        tp: median(times),
        setup: setup_time.as_secs_f64(),
        apply: report.timings.apply.as_secs_f64(),
        precond_time: report.timings.precond.as_secs_f64(),
        converged: report.converged,
        error: None,
    };
    Ok(RunOutcome {
        row,
        report,
        solution: u,
    })
}

/// Runs every grid of `spec`, writing outputs when an output directory is
/// set. A failing grid becomes a failed row; the remaining grids still run.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    if let Some(dir) = &spec.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::new();
    for n in spec.grid_list() {
        match run_grid(spec, n) {
            Ok(out) => {
                if let Some(dir) = &spec.out {
                    emit::write_history(dir, spec, n, &out.report)?;
                    if spec.slices {
                        emit::write_slices(dir, spec, n, &out.solution)?;
                    }
                }
                rows.push(out.row);
            }
            Err(e) => rows.push(ResultRow::failed(spec, n, &e)),
        }
    }
    if let Some(dir) = &spec.out {
        emit::write_tables(dir, spec, &rows)?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_direct_solve_has_tiny_residual() {
        let spec = ExperimentSpec {
            solver: SolverKind::Direct,
            ..ExperimentSpec::new(ProblemId::Analytic, 2, PrecondId::Pfft2, &[10])
        };
        let out = run_grid(&spec, 10).unwrap();
        assert!(out.row.rel_res < 1e-12, "{}", out.row.rel_res);
        assert!(out.row.converged);
    }

    #[test]
    fn unpreconditioned_baseline_runs() {
        let spec = ExperimentSpec {
            gmres: crate::config::GmresSection {
                tol: 1e-6,
                restart: 20,
                max_iter: 400,
            },
            ..ExperimentSpec::new(ProblemId::Analytic, 2, PrecondId::None, &[8])
        };
        let rows = run(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.is_none());
        assert!(rows[0].n0 > 1);
    }

    #[test]
    fn invalid_grid_is_rejected_and_unknown_exact_leaves_blank_errors() {
        let spec = ExperimentSpec::new(ProblemId::Analytic, 4, PrecondId::Eigt3, &[1, 6]);
        assert!(run(&spec).is_err());
        let spec = ExperimentSpec::new(ProblemId::Inclusion, 2, PrecondId::Eigt2, &[6]);
        let rows = run(&spec).unwrap();
        assert!(rows[0].max_err.is_none());
    }
}
