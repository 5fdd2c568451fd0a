//! Timing of the transform kernels of the two direct solvers.

use std::fmt::Write as _;
use std::time::Instant;

use helmholtz_core::dst::{Dst2, DstKernel};
use helmholtz_core::eig::{decompose, TridiagSpec};
use helmholtz_core::eigt::EigTPrecond;
use helmholtz_core::pfft::PfftPrecond;
use helmholtz_core::problems::{analytic_fields, AnalyticSeparable};
use helmholtz_core::stencil::BoundaryCoeffs;
use helmholtz_core::{Complex64, Grid3, Placement};

use crate::HarnessError;

pub const BENCH_HEADER: &str = "grid,eig-setup,sine,eigt,pfft,eigt-ops,pfft-ops";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub grid: usize,
    /// Both 1D eigendecompositions, seconds.
    pub eig_setup: f64,
    /// 2D sine transform of every slice.
    pub sine: f64,
    /// Full eigenvector transform of every slice.
    pub eigt: f64,
    /// Boundary correction of the partial-FFT solver (boundary-only sine
    /// solve and the sparse eigenvector correction).
    pub pfft: f64,
    pub eigt_ops: u64,
    pub pfft_ops: u64,
}

fn median_secs(
    repeat: usize,
    mut f: impl FnMut() -> Result<(), HarnessError>,
) -> Result<f64, HarnessError> {
    let mut t = Vec::with_capacity(repeat);
    for _ in 0..repeat.max(1) {
        let s = Instant::now();
        f()?;
        t.push(s.elapsed().as_secs_f64());
    }
    t.sort_by(|a, b| a.total_cmp(b));
    Ok(t[t.len() / 2])
}

/// Times the transforms on the second-order right-hand side of the analytic
/// problem (staggered grid, two-point closure).
pub fn run_direct_bench(sizes: &[usize], repeat: usize) -> Result<Vec<BenchRow>, HarnessError> {
    let p = AnalyticSeparable::default();
    let k0 = Complex64::new(p.k0(), 0.0);
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = Grid3::unit_cube(n, Placement::Staggered)?;
        let bc = BoundaryCoeffs::for_grid(&grid, k0);
        let (_, _, source) = analytic_fields(&p, &grid)?;
        let y = source.samples().clone();
        let specs = [
            TridiagSpec::new(n, bc.gamma[0], bc.zeta[0]),
            TridiagSpec::new(n, bc.gamma[1], bc.zeta[1]),
        ];
        let eig_setup = median_secs(repeat, || {
            for s in &specs {
                decompose(s)?;
            }
            Ok(())
        })?;
        let dst = Dst2::new(n, n, DstKernel::Auto);
        let sine = median_secs(repeat, || {
            let mut d = y.as_slice().to_vec();
            for s in d.chunks_exact_mut(n * n) {
                dst.apply(s);
            }
            Ok(())
        })?;
        let eigt = EigTPrecond::constant(&grid, &bc, k0)?;
        eigt.reset_counters();
        let eigt_time = median_secs(repeat, || {
            eigt.forward_transform(&y)?;
            Ok(())
        })?;
        let eigt_ops = eigt.transform_ops() / repeat.max(1) as u64;
        let pfft = PfftPrecond::constant(&grid, &bc, k0)?;
        pfft.reset_counters();
        let pfft_time = median_secs(repeat, || {
            let theta = pfft.sine_solve(&y, true)?;
            let stacks = pfft.boundary_residual(&theta);
            let wbar = pfft.sparse_forward_transform(&stacks);
            let wbar = pfft.eigt().vertical_solve(&wbar)?;
            pfft.boundary_inverse_transform(&wbar);
            Ok(())
        })?;
        let pfft_ops = pfft.correction_ops() / repeat.max(1) as u64;
        rows.push(BenchRow {
            grid: n,
            eig_setup,
            sine,
            eigt: eigt_time,
            pfft: pfft_time,
            eigt_ops,
            pfft_ops,
        });
    }
    Ok(rows)
}

/// First size at which the partial-FFT correction beats the full
/// eigenvector transform, after a size where it did not.
pub fn crossover(rows: &[BenchRow]) -> Option<usize> {
    let mut sorted: Vec<&BenchRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.grid);
    let mut seen_slower = false;
    for r in sorted {
        if r.pfft >= r.eigt {
            seen_slower = true;
        } else if seen_slower {
            return Some(r.grid);
        }
    }
    None
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(BENCH_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.4},{:.4},{:.4},{:.4},{},{}",
            r.grid, r.eig_setup, r.sine, r.eigt, r.pfft, r.eigt_ops, r.pfft_ops
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_size_list_gives_empty_table() {
        assert!(run_direct_bench(&[], 1).unwrap().is_empty());
        assert_eq!(bench_csv(&[]), format!("{BENCH_HEADER}\n"));
    }

    #[test]
    fn eigt_ops_grow_like_n4() {
        let rows = run_direct_bench(&[12, 24], 1).unwrap();
        let ratio = rows[1].eigt_ops as f64 / rows[0].eigt_ops as f64;
        assert!((ratio / 16.0 - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn crossover_detection() {
        let mk = |grid, eigt, pfft| BenchRow {
            grid,
            eig_setup: 0.0,
            sine: 0.0,
            eigt,
            pfft,
            eigt_ops: 0,
            pfft_ops: 0,
        };
        assert_eq!(
            crossover(&[mk(100, 1.0, 2.0), mk(400, 9.0, 7.0)]),
            Some(400)
        );
        assert_eq!(crossover(&[mk(100, 1.0, 2.0), mk(200, 2.0, 3.0)]), None);
    }
}
