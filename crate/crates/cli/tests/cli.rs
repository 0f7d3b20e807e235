//! End-to-end tests of the experiment runner: config handling, CSV schema,
//! exit codes, determinism, and the mesh/VTK exports.

use fluxls_cli::{run, Refinement, RunConfig};
use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fluxls"))
}

fn read_csv(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn aligned_problem_single_row_tiny_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default();
    config.problem = "pwc_aligned".into();
    config.refinement = Refinement::Adaptive;
    config.output_dir = dir.path().into();
    config.timing = false;
    let summary = run(&config).unwrap();
    assert_eq!(summary.records.len(), 1);
    let rows = read_csv(dir.path());
    assert_eq!(rows.len(), 2, "header plus one record");
    let estimator: f64 = rows[1][4].parse().unwrap();
    assert!(estimator <= 1e-10, "estimator {estimator}");
}

#[test]
fn smooth_uniform_first_order_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default();
    config.problem = "smooth".into();
    config.refinement = Refinement::Uniform;
    config.levels = 6;
    config.output_dir = dir.path().into();
    config.timing = false;
    let summary = run(&config).unwrap();
    assert_eq!(summary.records.len(), 6);
    let rows = read_csv(dir.path());
    assert_eq!(rows.len(), 7);
    assert_eq!(
        rows[0],
        "iter,n_nodes,n_elems,n_dofs,estimator,ls_error,l2_u_error,overshoot,cg_iters,wall_ms,eoc_estimator,eoc_l2"
            .split(',')
            .map(str::to_string)
            .collect::<Vec<_>>()
    );
    // estimator decays at first order on the last rows
    for row in &rows[5..] {
        let eoc: f64 = row[10].parse().unwrap();
        assert!((eoc - 1.0).abs() < 0.15, "eoc_estimator {eoc}");
    }
}

#[test]
fn identical_configs_identical_bytes() {
    let run_once = || {
        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig::default();
        config.problem = "pwc_nonmatching".into();
        config.refinement = Refinement::Adaptive;
        config.node_budget = 300;
        config.output_dir = dir.path().into();
        config.timing = false;
        run(&config).unwrap();
        fs::read(dir.path().join("convergence.csv")).unwrap()
    };
    assert_eq!(run_once(), run_once());
}

#[test]
fn malformed_config_exits_3_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "problm = \"smooth\"\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("problm"), "diagnostic should name the field: {err}");
}

#[test]
fn bad_field_values_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    for (args, needle) in [
        (vec!["run", "--problem", "nope"], "problem"),
        (vec!["run", "--method", "magic"], "method"),
        (vec!["run", "--method", "c-lsfem", "--order", "0"], "order"),
        (vec!["run", "--problem", "smooth", "--theta", "1.5"], "theta"),
        (vec!["run", "--method", "lsfem-b2", "--alpha-f=-1"], "alpha_f"),
    ] {
        let out = bin()
            .args(&args)
            .args(["--output-dir"])
            .arg(dir.path().join("o"))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(3), "args {args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}

#[test]
fn json_config_accepted_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        format!(
            "{{\"problem\": \"pwc_aligned\", \"refinement\": \"adaptive\", \"timing\": false, \"output_dir\": {:?}}}",
            dir.path().join("from_json")
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("cli_override");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--output-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("convergence.csv").exists());
}

#[test]
fn vtk_export_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default();
    config.problem = "pwc_nonmatching".into();
    config.refinement = Refinement::Adaptive;
    config.node_budget = 120;
    config.output_dir = dir.path().into();
    config.export_solutions = true;
    config.timing = false;
    let summary = run(&config).unwrap();
    for i in 0..summary.records.len() {
        let path = dir.path().join(format!("solution_{i:04}.vtk"));
        assert!(path.exists(), "{}", path.display());
        let text = fs::read_to_string(path).unwrap();
        assert!(text.contains("DATASET UNSTRUCTURED_GRID"));
        assert!(text.contains("SCALARS u double 1"));
        assert!(text.contains("VECTORS sigma_avg double"));
    }
}

#[test]
fn mesh_subcommand_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let txt = dir.path().join("mesh.txt");
    let vtk = dir.path().join("mesh.vtk");
    let out = bin()
        .args(["mesh", "--problem", "pwc_nonmatching", "--refine", "1", "--out"])
        .arg(&txt)
        .arg("--vtk")
        .arg(&vtk)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mesh = fluxls::io::read_mesh_text(fs::read_to_string(&txt).unwrap().as_bytes()).unwrap();
    assert_eq!(mesh.n_triangles(), 8, "fan mesh after one bisection pass");
    assert!(fs::read_to_string(&vtk).unwrap().contains("CELL_TYPES 8"));
}

#[test]
fn problems_subcommand_lists_catalog() {
    let out = bin().arg("problems").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["smooth", "peterson", "curved_m11", "layer_1e-10"] {
        assert!(text.lines().any(|l| l == name), "missing {name}");
    }
}
