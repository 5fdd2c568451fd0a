use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helmholtz_harness::bench::{bench_csv, crossover, run_direct_bench};
use helmholtz_harness::config::{
    BoundaryChoice, ConfigFile, SolverKind, DEFAULT_GRIDS, LARGE_GRIDS,
};
use helmholtz_harness::emit::table_csv;
use helmholtz_harness::model::{history_csv, sweep, sweep_csv};
use helmholtz_harness::{run, HarnessError, PrecondId, ProblemId};

#[derive(Parser)]
#[command(
    name = "helmholtz",
    version,
    about = "Preconditioned GMRES experiments for the 3D Helmholtz equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a test problem on one or more grids.
    Run(RunArgs),
    /// Time the transform kernels of the direct solvers.
    BenchTransforms(BenchArgs),
    /// One-dimensional model problem: residual histories and bound.
    Model1d(ModelArgs),
}

/// Values given here override the config file, which overrides defaults.
#[derive(Args)]
struct RunArgs {
    /// TOML file with [run], [gmres], [analytic] and [inclusion] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemId>,
    #[arg(long)]
    order: Option<u32>,
    /// Grid sizes per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    precond: Option<PrecondId>,
    /// Closure of the high-order operator: auto, staggered, collocated, oracle.
    #[arg(long)]
    boundary: Option<BoundaryChoice>,
    /// gmres or direct.
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    restart: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add the large grid sizes.
    #[arg(long)]
    large: bool,
    /// Dump solution slices at x = 0.5 and y = 0.5.
    #[arg(long)]
    slices: bool,
    #[arg(long)]
    repeat: Option<usize>,
    /// Background k0^2 of the selected problem.
    #[arg(long)]
    k0_sq: Option<f64>,
    /// Inclusion problem: differentiate the nodal samples of k^2 and f.
    #[arg(long)]
    sampled_derivatives: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    large: bool,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long = "N", value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "20")]
    k: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    r: Vec<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_run(a: RunArgs) -> Result<bool, HarnessError> {
    let file = match &a.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut spec = file.into_spec();
    if let Some(v) = a.problem {
        spec.problem = v;
    }
    if let Some(v) = a.order {
        spec.order = v;
    }
    if let Some(v) = a.grid {
        spec.grids = v;
    }
    if let Some(v) = a.precond {
        spec.precond = v;
    }
    if let Some(v) = a.boundary {
        spec.boundary = v;
    }
    if let Some(v) = a.solver {
        spec.solver = v;
    }
    if let Some(v) = a.tol {
        spec.gmres.tol = v;
    }
    if let Some(v) = a.restart {
        spec.gmres.restart = v;
    }
    if let Some(v) = a.max_iter {
        spec.gmres.max_iter = v;
    }
    if let Some(v) = a.out {
        spec.out = Some(v);
    }
    if let Some(v) = a.repeat {
        spec.repeat = v;
    }
    if let Some(v) = a.k0_sq {
        spec.analytic.k0_sq = v;
        spec.inclusion.k0_sq = v;
    }
    spec.inclusion.sampled_derivatives |= a.sampled_derivatives;
    spec.large |= a.large;
    spec.slices |= a.slices;
    let rows = run(&spec)?;
    print!("{}", table_csv(&rows));
    let mut ok = true;
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("grid {}: {e}", r.grid);
        }
        if !r.converged {
            eprintln!(
                "grid {}: not converged (rel-res {:.3e}, N0 {})",
                r.grid, r.rel_res, r.n0
            );
            ok = false;
        }
    }
    Ok(ok)
}

fn cmd_bench(a: BenchArgs) -> Result<bool, HarnessError> {
    let mut sizes = a.grid.unwrap_or_else(|| DEFAULT_GRIDS.to_vec());
    if a.large {
        sizes.extend(LARGE_GRIDS);
    }
    let rows = run_direct_bench(&sizes, a.repeat)?;
    let csv = bench_csv(&rows);
    print!("{csv}");
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("bench_transforms.csv"), &csv)?;
    }
    match crossover(&rows) {
        Some(n) => eprintln!("partial FFT overtakes the eigenvector transform at {n}^3"),
        None => eprintln!("no crossover among the measured sizes"),
    }
    if a.large {
        let c = crossover(&rows);
        return Ok(matches!(c, Some(n) if (255..=600).contains(&n)));
    }
    Ok(true)
}

fn cmd_model(a: ModelArgs) -> Result<bool, HarnessError> {
    let rows = sweep(&a.n, &a.k, &a.r, a.tol)?;
    let table = sweep_csv(&rows);
    print!("{table}");
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("model1d_sweep.csv"), &table)?;
        for row in &rows {
            let m = &row.model;
            let name = format!("model1d_N{}_k{}_r{}.csv", m.n, m.k, m.r);
            std::fs::write(dir.join(name), history_csv(row))?;
        }
    }
    Ok(rows.iter().all(|r| r.run.converged))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::BenchTransforms(a) => cmd_bench(a),
        Command::Model1d(a) => cmd_model(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
