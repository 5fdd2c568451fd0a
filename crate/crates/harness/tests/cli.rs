use std::process::Command;

fn helmholtz() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helmholtz"))
}

#[test]
fn run_writes_tables_history_and_slices() {
    let dir = tempfile::tempdir().unwrap();
    let out = helmholtz()
        .args([
            "run",
            "--order",
            "4",
            "--precond",
            "pfft3",
            "--grid",
            "16,20",
            "--slices",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("grid,max-err,L2-err,precond,N0,TP"));
    assert!(lines.next().unwrap().starts_with("16,"));
    for name in [
        "table_analytic_o4_pfft3.csv",
        "details_analytic_o4_pfft3.csv",
        "history_analytic_o4_pfft3_20.csv",
        "slice_x_analytic_o4_pfft3_20.csv",
        "slice_y_analytic_o4_pfft3_20.fld",
    ] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    let hist =
        std::fs::read_to_string(dir.path().join("history_analytic_o4_pfft3_20.csv")).unwrap();
    assert!(hist.lines().last().unwrap().contains(",true,"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[run]\norder = 6\nprecond = \"eigt2\"\ngrids = [16]\n").unwrap();
    let out = helmholtz()
        .args(["run", "--grid", "20", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let row = stdout.lines().nth(1).unwrap();
    assert!(row.starts_with("20,") && row.contains(",EigT2,"), "{row}");
}

#[test]
fn iteration_cap_gives_failure_status() {
    let out = helmholtz()
        .args([
            "run",
            "--precond",
            "none",
            "--grid",
            "10",
            "--max-iter",
            "3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_configuration_is_an_error() {
    let out = helmholtz()
        .args([
            "run",
            "--problem",
            "inclusion",
            "--boundary",
            "oracle",
            "--grid",
            "8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle"));
}

#[test]
fn model1d_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = helmholtz()
        .args(["model1d", "--N", "50,100", "--k", "20", "--r", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("model1d_sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(dir.path().join("model1d_N100_k20_r2.csv").is_file());
}
