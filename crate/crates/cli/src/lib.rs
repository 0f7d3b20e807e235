//! Configuration-driven experiment runner: convergence tables (CSV),
//! overshoot histories, and mesh/solution exports for the transport solver.

use fluxls::adaptivity::{
    amr_loop_cb, uniform_loop_cb, AmrConfig, AmrRecord, StopReason, UniformConfig,
};
use fluxls::assembly::MethodKind;
use fluxls::io::{cell_averages, write_mesh_text, write_vtk};
use fluxls::problems::{catalog, problem};
use serde::Deserialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Uniform,
    Adaptive,
}

/// Fully resolved run settings; every field is also a CLI flag.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub method: String,
    pub order: usize,
    pub refinement: Refinement,
    pub theta: f64,
    pub alpha_f: f64,
    pub node_budget: usize,
    pub levels: usize,
    pub solver_tol: f64,
    pub output_dir: PathBuf,
    pub export_solutions: bool,
    /// Record wall-clock times; off gives byte-reproducible CSVs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "smooth".into(),
            method: "lsfem".into(),
            order: 0,
            refinement: Refinement::Adaptive,
            theta: 0.5,
            alpha_f: 10.0,
            node_budget: 20_000,
            levels: 6,
            solver_tol: 1e-10,
            output_dir: PathBuf::from("out"),
            export_solutions: false,
            timing: true,
        }
    }
}

/// On-disk config; any subset of the fields, unknown names rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub method: Option<String>,
    pub order: Option<usize>,
    pub refinement: Option<String>,
    pub theta: Option<f64>,
    pub alpha_f: Option<f64>,
    pub node_budget: Option<usize>,
    pub levels: Option<usize>,
    pub solver_tol: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub export_solutions: Option<bool>,
    pub timing: Option<bool>,
}

#[derive(Debug)]
pub enum RunError {
    /// Bad configuration: exit code 3.
    Config(String),
    /// Solver failure: exit code 2.
    Solver(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::Solver(_) => 2,
        }
    }
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().map(|e| e == "json").unwrap_or(false);
    if is_json {
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }
}

impl RunConfig {
    /// Overlay the file settings onto the defaults (CLI flags are applied
    /// on top by the binary).
    pub fn from_file(fc: FileConfig) -> Result<RunConfig, RunError> {
        let mut c = RunConfig::default();
        if let Some(v) = fc.problem {
            c.problem = v;
        }
        if let Some(v) = fc.method {
            c.method = v;
        }
        if let Some(v) = fc.order {
            c.order = v;
        }
        if let Some(v) = fc.refinement {
            c.refinement = parse_refinement(&v)?;
        }
        if let Some(v) = fc.theta {
            c.theta = v;
        }
        if let Some(v) = fc.alpha_f {
            c.alpha_f = v;
        }
        if let Some(v) = fc.node_budget {
            c.node_budget = v;
        }
        if let Some(v) = fc.levels {
            c.levels = v;
        }
        if let Some(v) = fc.solver_tol {
            c.solver_tol = v;
        }
        if let Some(v) = fc.output_dir {
            c.output_dir = v;
        }
        if let Some(v) = fc.export_solutions {
            c.export_solutions = v;
        }
        if let Some(v) = fc.timing {
            c.timing = v;
        }
        Ok(c)
    }
}

pub fn parse_refinement(s: &str) -> Result<Refinement, RunError> {
    match s {
        "uniform" => Ok(Refinement::Uniform),
        "adaptive" => Ok(Refinement::Adaptive),
        other => Err(RunError::Config(format!(
            "refinement must be 'uniform' or 'adaptive', got '{other}'"
        ))),
    }
}

pub fn parse_method(name: &str, alpha_f: f64) -> Result<MethodKind, RunError> {
    match name {
        "lsfem" => Ok(MethodKind::Lsfem),
        "lsfem-b1" => Ok(MethodKind::LsfemB1),
        "lsfem-b2" => {
            if !(alpha_f > 0.0) {
                return Err(RunError::Config(format!(
                    "field alpha_f must be positive for lsfem-b2, got {alpha_f}"
                )));
            }
            Ok(MethodKind::LsfemB2 { alpha_f })
        }
        "c-lsfem" => Ok(MethodKind::CLsfem),
        other => Err(RunError::Config(format!(
            "method must be one of lsfem, lsfem-b1, lsfem-b2, c-lsfem; got '{other}'"
        ))),
    }
}

fn validate(config: &RunConfig) -> Result<MethodKind, RunError> {
    let method = parse_method(&config.method, config.alpha_f)?;
    if method == MethodKind::CLsfem && config.order == 0 {
        return Err(RunError::Config(
            "field order: c-lsfem uses continuous P1 elements; order 0 is invalid".into(),
        ));
    }
    if config.order > 1 {
        return Err(RunError::Config(format!(
            "field order must be 0 or 1, got {}",
            config.order
        )));
    }
    if !(config.theta > 0.0 && config.theta <= 1.0) {
        return Err(RunError::Config(format!(
            "field theta must lie in (0, 1], got {}",
            config.theta
        )));
    }
    if !(config.solver_tol > 0.0 && config.solver_tol < 1.0) {
        return Err(RunError::Config(format!(
            "field solver_tol must lie in (0, 1), got {}",
            config.solver_tol
        )));
    }
    Ok(method)
}

#[derive(Debug)]
pub struct RunSummary {
    pub records: Vec<AmrRecord>,
    pub csv_path: PathBuf,
    pub stop: StopReason,
}

/// Execute one experiment: runs the refinement loop, writes
/// convergence.csv (and per-iteration VTK exports when requested).
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let method = validate(config)?;
    let prob = problem(&config.problem)
        .map_err(|e| RunError::Config(format!("field problem: {e}")))?;
    fs::create_dir_all(&config.output_dir).map_err(|e| {
        RunError::Config(format!(
            "field output_dir: cannot create {}: {e}",
            config.output_dir.display()
        ))
    })?;

    let export_dir = config.output_dir.clone();
    let export = config.export_solutions;
    let exporter = move |iter: usize, mesh: &fluxls::mesh::Mesh, sol: &fluxls::assembly::Solution| {
        if !export {
            return;
        }
        let (u, sigma) = cell_averages(mesh, sol);
        let path = export_dir.join(format!("solution_{iter:04}.vtk"));
        if let Ok(f) = fs::File::create(&path) {
            let _ = write_vtk(mesh, Some(&u), Some(&sigma), std::io::BufWriter::new(f));
        }
    };

    let run_out = match config.refinement {
        Refinement::Adaptive => {
            let mut cfg = AmrConfig::new(config.order);
            cfg.theta = config.theta;
            cfg.node_budget = config.node_budget;
            cfg.solver_tol = config.solver_tol;
            cfg.timing = config.timing;
            amr_loop_cb(&prob, method, &cfg, exporter)
        }
        Refinement::Uniform => {
            let mut cfg = UniformConfig::new(config.order, config.levels);
            cfg.solver_tol = config.solver_tol;
            cfg.timing = config.timing;
            uniform_loop_cb(&prob, method, &cfg, exporter)
        }
    }
    .map_err(|e| RunError::Solver(e.to_string()))?;

    // always flush the table, even for aborted runs
    let csv_path = config.output_dir.join("convergence.csv");
    let csv = render_csv(&run_out.records, config.refinement);
    fs::write(&csv_path, csv).map_err(|e| {
        RunError::Config(format!("cannot write {}: {e}", csv_path.display()))
    })?;

    if let StopReason::SolverFailed = run_out.stop {
        return Err(RunError::Solver(format!(
            "linear solver did not converge (iteration {})",
            run_out.records.len().saturating_sub(1)
        )));
    }
    if let StopReason::RefinementFailed(e) = &run_out.stop {
        return Err(RunError::Solver(format!("mesh refinement aborted: {e}")));
    }
    Ok(RunSummary { records: run_out.records, csv_path, stop: run_out.stop })
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

/// Experimental order of convergence between consecutive rows: against h
/// for uniform refinement, against n_dofs^{-1/2} for adaptive runs.
fn eoc(prev: &AmrRecord, cur: &AmrRecord, value: impl Fn(&AmrRecord) -> Option<f64>, refinement: Refinement) -> Option<f64> {
    let (a, b) = (value(prev)?, value(cur)?);
    if !(a > 0.0 && b > 0.0) {
        return None;
    }
    let (ha, hb) = match refinement {
        Refinement::Uniform => (prev.h_max, cur.h_max),
        Refinement::Adaptive => {
            ((prev.n_dofs as f64).powf(-0.5), (cur.n_dofs as f64).powf(-0.5))
        }
    };
    if !(ha > hb) {
        return None;
    }
    Some((a / b).ln() / (ha / hb).ln())
}

pub fn render_csv(records: &[AmrRecord], refinement: Refinement) -> String {
    let mut out = String::from(
        "iter,n_nodes,n_elems,n_dofs,estimator,ls_error,l2_u_error,overshoot,cg_iters,wall_ms,eoc_estimator,eoc_l2\n",
    );
    for (i, r) in records.iter().enumerate() {
        let ls = r.errors.as_ref().map(|e| e.ls_norm);
        let l2 = r.errors.as_ref().map(|e| e.l2_u);
        let eoc_est = if i > 0 {
            eoc(&records[i - 1], r, |r| Some(r.estimator), refinement)
        } else {
            None
        };
        let eoc_l2 = if i > 0 {
            eoc(&records[i - 1], r, |r| r.errors.as_ref().map(|e| e.l2_u), refinement)
        } else {
            None
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.iter,
            r.n_vertices,
            r.n_triangles,
            r.n_dofs,
            r.estimator,
            fmt_opt(ls),
            fmt_opt(l2),
            fmt_opt(r.overshoot),
            r.cg_iterations,
            r.wall_ms,
            fmt_opt(eoc_est),
            fmt_opt(eoc_l2),
        ));
    }
    out
}

/// Names of all catalog problems.
pub fn problem_names() -> Vec<&'static str> {
    catalog().iter().map(|p| p.name).collect()
}

/// Write a problem's initial mesh (optionally refined uniformly) as text
/// and/or VTK.
pub fn export_mesh(
    problem_name: &str,
    refine_passes: usize,
    out: Option<&Path>,
    vtk: Option<&Path>,
) -> Result<(), RunError> {
    let prob =
        problem(problem_name).map_err(|e| RunError::Config(format!("field problem: {e}")))?;
    let mut mesh = prob.initial_mesh.clone();
    for _ in 0..refine_passes {
        mesh = mesh
            .uniform_refine()
            .map_err(|e| RunError::Solver(format!("refinement failed: {e}")))?;
    }
    if let Some(path) = out {
        let f = fs::File::create(path)
            .map_err(|e| RunError::Config(format!("cannot write {}: {e}", path.display())))?;
        write_mesh_text(&mesh, std::io::BufWriter::new(f))
            .map_err(|e| RunError::Solver(e.to_string()))?;
    }
    if let Some(path) = vtk {
        let f = fs::File::create(path)
            .map_err(|e| RunError::Config(format!("cannot write {}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(f);
        write_vtk(&mesh, None, None, &mut w).map_err(|e| RunError::Solver(e.to_string()))?;
        w.flush().map_err(|e| RunError::Solver(e.to_string()))?;
    }
    Ok(())
}
