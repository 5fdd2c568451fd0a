use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use helmholtz_core::field::write_raw;
use helmholtz_core::krylov::{ResidualKind, SolveReport};
use helmholtz_core::{Axis, Field3};

use crate::config::ExperimentSpec;
use crate::run::ResultRow;
use crate::HarnessError;

/// Header of the short result table.
pub const TABLE_HEADER: &str = "grid,max-err,L2-err,precond,N0,TP";
pub const DETAIL_HEADER: &str =
    "grid,order,precond,converged,N0,max-err,L2-err,relmax-err,rel-res,relmax-res,TP,setup,apply,precond-time,error";
pub const HISTORY_HEADER: &str = "iteration,kind,rel_res";

/// 15 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.14e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

fn stem(spec: &ExperimentSpec) -> String {
    format!("{}_o{}_{}", spec.problem, spec.order, spec.precond)
}

pub fn table_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(TABLE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.3}",
            r.grid,
            opt(r.max_err),
            opt(r.l2_err),
            r.precond.label(),
            r.n0,
            r.tp
        );
    }
    s
}

pub fn detail_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(DETAIL_HEADER);
    s.push('\n');
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{}",
            r.grid,
            r.order,
            r.precond.label(),
            r.converged,
            r.n0,
            opt(r.max_err),
            opt(r.l2_err),
            opt(r.relmax_err),
            sci(r.rel_res),
            sci(r.relmax_res),
            r.tp,
            r.setup,
            r.apply,
            r.precond_time,
            err
        );
    }
    s
}

pub fn history_csv(report: &SolveReport) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for e in &report.history {
        let kind = match e.kind {
            ResidualKind::Estimated => "estimated",
            ResidualKind::True => "true",
        };
        let _ = writeln!(s, "{},{},{}", e.iteration, kind, sci(e.rel_res));
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_tables(
    dir: &Path,
    spec: &ExperimentSpec,
    rows: &[ResultRow],
) -> Result<[PathBuf; 2], HarnessError> {
    let table = dir.join(format!("table_{}.csv", stem(spec)));
    let detail = dir.join(format!("details_{}.csv", stem(spec)));
    write_file(&table, &table_csv(rows))?;
    write_file(&detail, &detail_csv(rows))?;
    Ok([table, detail])
}

pub fn write_history(
    dir: &Path,
    spec: &ExperimentSpec,
    n: usize,
    report: &SolveReport,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(format!("history_{}_{n}.csv", stem(spec)));
    write_file(&path, &history_csv(report))?;
    Ok(path)
}

/// Plane of `u` through the node nearest to `0.5` along `axis`: values in
/// row-major order of the two remaining axes.
pub fn mid_plane(u: &Field3, axis: Axis) -> (usize, [usize; 2], Vec<helmholtz_core::Complex64>) {
    let g = u.grid();
    let [nx, ny, nz] = g.dims();
    let c = g.nearest(axis, 0.5);
    let mut v = Vec::new();
    let dims = match axis {
        Axis::X => {
            for l in 0..nz {
                for j in 0..ny {
                    v.push(u[g.offset(c, j, l)]);
                }
            }
            [ny, nz]
        }
        Axis::Y => {
            for l in 0..nz {
                for i in 0..nx {
                    v.push(u[g.offset(i, c, l)]);
                }
            }
            [nx, nz]
        }
        Axis::Z => {
            v.extend_from_slice(u.slice(c));
            [nx, ny]
        }
    };
    (c, dims, v)
}

/// Real part of the solution on the `x = 0.5` and `y = 0.5` planes, as CSV
/// (`a,b,coord_a,coord_b,re`) and in the raw binary field format.
pub fn write_slices(
    dir: &Path,
    spec: &ExperimentSpec,
    n: usize,
    u: &Field3,
) -> Result<Vec<PathBuf>, HarnessError> {
    let g = u.grid();
    let mut written = Vec::new();
    for (axis, name, other) in [(Axis::X, "x", Axis::Y), (Axis::Y, "y", Axis::X)] {
        let (_, dims, vals) = mid_plane(u, axis);
        let csv = dir.join(format!("slice_{name}_{}_{n}.csv", stem(spec)));
        let mut w = BufWriter::new(File::create(&csv)?);
        writeln!(w, "a,b,coord_a,coord_b,re")?;
        for b in 0..dims[1] {
            for a in 0..dims[0] {
                let v = vals[a + dims[0] * b];
                writeln!(
                    w,
                    "{a},{b},{},{},{}",
                    g.coord(other, a as isize),
                    g.coord(Axis::Z, b as isize),
                    sci(v.re)
                )?;
            }
        }
        w.flush()?;
        let bin = dir.join(format!("slice_{name}_{}_{n}.fld", stem(spec)));
        let mut w = BufWriter::new(File::create(&bin)?);
        write_raw(&mut w, [1, dims[0], dims[1]], &vals)?;
        w.flush()?;
        written.push(csv);
        written.push(bin);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PrecondId;

    fn row() -> ResultRow {
        ResultRow {
            grid: 50,
            order: 4,
            precond: PrecondId::Eigt3,
            max_err: Some(0.02),
            l2_err: Some(5.25e-4),
            relmax_err: None,
            rel_res: 1e-11,
            relmax_res: 2e-11,
            n0: 8,
            tp: 0.31,
            setup: 0.0,
            apply: 0.0,
            precond_time: 0.0,
            converged: true,
            error: None,
        }
    }

    #[test]
    fn table_format() {
        let t = table_csv(&[row()]);
        let mut lines = t.lines();
        assert_eq!(lines.next(), Some(TABLE_HEADER));
        assert_eq!(
            lines.next(),
            Some("50,2.00000000000000e-2,5.25000000000000e-4,EigT3,8,0.310")
        );
    }

    #[test]
    fn missing_errors_are_blank() {
        let mut r = row();
        r.max_err = None;
        r.l2_err = None;
        let t = table_csv(&[r]);
        assert!(t.lines().nth(1).unwrap().starts_with("50,,,EigT3"));
    }
}
