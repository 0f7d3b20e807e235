//! Least-squares a-posteriori indicators, Doerfler bulk marking, and the
//! solve-estimate-mark-refine loop.
//!
//! The element indicator is the local least-squares functional itself:
//!   eta_K^2  = ||sigma_h - beta u_h||_{0,K}^2 + ||div sigma_h + gamma u_h - f||_{0,K}^2
//! plus, for the boundary-functional methods, the weighted inflow-edge
//! residual of the element (xi_K), and zeta_K = ||beta.grad u_h + mu u_h - f||_{0,K}
//! for C-LSFEM. The global value is sqrt(sum eta_K^2) and coincides with the
//! least-squares norm of the error.

use crate::assembly::{self, solve, MethodKind, Solution};
use crate::cut;
use crate::mesh::{Mesh, MeshError};
use crate::problems::{exact_errors, ErrorReport, ProblemSpec};
use crate::quadrature::{quadrature, QuadDomain};
use crate::spaces::{self, DofMap, SpaceKind};
use std::time::Instant;

/// Per-element estimator values; the global estimator is the square root of
/// the sum of squares.
#[derive(Debug, Clone)]
pub struct Indicators {
    pub per_element: Vec<f64>,
}

impl Indicators {
    pub fn global(&self) -> f64 {
        self.per_element.iter().map(|e| e * e).sum::<f64>().sqrt()
    }
}

/// Element indicators with the default assembly quadrature (degree 2k + 4).
pub fn compute_indicators(
    mesh: &Mesh,
    solution: &Solution,
    problem: &ProblemSpec,
) -> Indicators {
    let degree = match solution {
        Solution::Flux { k, .. } => 2 * k + 4,
        Solution::Continuous { .. } => 6,
    };
    compute_indicators_quad(mesh, solution, problem, degree, false)
}

/// Element indicators at a chosen quadrature degree; with `split` set, cut
/// elements are integrated on each side of the known interface (used for
/// estimator-exactness comparisons against split-quadrature error norms).
pub fn compute_indicators_quad(
    mesh: &Mesh,
    solution: &Solution,
    problem: &ProblemSpec,
    degree: usize,
    split: bool,
) -> Indicators {
    let rule = quadrature(QuadDomain::Triangle, degree).unwrap();
    let nt = mesh.n_triangles();
    let mut per_sq = vec![0.0; nt];
    match solution {
        Solution::Flux { k, sigma, u, .. } => {
            let rt = DofMap::build(mesh, SpaceKind::rt(*k).unwrap());
            let pk = DofMap::build(mesh, SpaceKind::pk(*k).unwrap());
            for t in 0..nt {
                let residual_sq = |x: f64, y: f64, sv: [f64; 2], sd: f64, uv: f64, fv: f64| {
                    let b = (problem.beta)(x, y);
                    let gam = (problem.gamma)(x, y);
                    let r1 = [sv[0] - b[0] * uv, sv[1] - b[1] * uv];
                    let r2 = sd + gam * uv - fv;
                    r1[0] * r1[0] + r1[1] * r1[1] + r2 * r2
                };
                let use_split = split
                    && problem.discontinuity.is_some()
                    && problem.branches.is_some()
                    && cut::is_cut(mesh, t, problem.discontinuity.as_ref().unwrap());
                if use_split {
                    let iface = problem.discontinuity.as_ref().unwrap();
                    let br = problem.branches.as_ref().unwrap();
                    per_sq[t] = cut::split_integral(mesh, t, iface, degree, |x, y, q, side| {
                        let (sv, sd) = spaces::eval_vector(mesh, &rt, sigma, t, &[q]);
                        let uv = spaces::eval_scalar(mesh, &pk, u, t, &[q])[0];
                        let fv = if side < 0.0 { (br.f_neg)(x, y) } else { (br.f_pos)(x, y) };
                        residual_sq(x, y, sv[0], sd[0], uv, fv)
                    });
                } else {
                    let coords = mesh.tri_coords(t);
                    let area = mesh.triangles[t].area;
                    let (sv, sd) = spaces::eval_vector(mesh, &rt, sigma, t, &rule.points);
                    let uv = spaces::eval_scalar(mesh, &pk, u, t, &rule.points);
                    let mut acc = 0.0;
                    for (q, w) in rule.weights.iter().enumerate() {
                        let x = spaces::map_point(&coords, rule.points[q]);
                        let fv = (problem.f)(x[0], x[1]);
                        acc += w * residual_sq(x[0], x[1], sv[q], sd[q], uv[q], fv);
                    }
                    per_sq[t] = acc * 2.0 * area;
                }
            }
            // inflow-edge residual terms of the boundary-functional methods
            for (t, r) in assembly::inflow_edge_residuals(mesh, solution, problem)
                .expect("inflow boundary was validated during assembly")
            {
                per_sq[t] += r;
            }
        }
        Solution::Continuous { u } => {
            let dm = DofMap::build(mesh, SpaceKind::P1c);
            for t in 0..nt {
                let coords = mesh.tri_coords(t);
                let area = mesh.triangles[t].area;
                let h_k = mesh.triangles[t].diameter;
                let uv = spaces::eval_scalar(mesh, &dm, u, t, &rule.points);
                let gv = spaces::eval_scalar_grad(mesh, &dm, u, t, &rule.points);
                let mut acc = 0.0;
                for (q, w) in rule.weights.iter().enumerate() {
                    let x = spaces::map_point(&coords, rule.points[q]);
                    let b = (problem.beta)(x[0], x[1]);
                    let mu = clsfem_mu(problem, x[0], x[1], h_k);
                    let r = b[0] * gv[q][0] + b[1] * gv[q][1] + mu * uv[q]
                        - (problem.f)(x[0], x[1]);
                    acc += w * r * r;
                }
                per_sq[t] = acc * 2.0 * area;
            }
        }
    }
    Indicators { per_element: per_sq.iter().map(|s| s.max(0.0).sqrt()).collect() }
}

fn clsfem_mu(problem: &ProblemSpec, x: f64, y: f64, h_k: f64) -> f64 {
    match &problem.div_beta {
        Some(d) => (problem.gamma)(x, y) + d(x, y),
        None => {
            let h = 1e-6 * h_k;
            let db = ((problem.beta)(x + h, y)[0] - (problem.beta)(x - h, y)[0]) / (2.0 * h)
                + ((problem.beta)(x, y + h)[1] - (problem.beta)(x, y - h)[1]) / (2.0 * h);
            (problem.gamma)(x, y) + db
        }
    }
}

/// Doerfler bulk marking on squared indicators: the smallest prefix (in
/// decreasing order, ties by ascending id) whose mass reaches
/// theta * total. All-zero indicators give an empty set.
pub fn dorfler_mark(indicators: &Indicators, theta: f64) -> Vec<usize> {
    assert!(theta > 0.0 && theta <= 1.0, "theta must be in (0, 1]");
    let total: f64 = indicators.per_element.iter().map(|e| e * e).sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..indicators.per_element.len()).collect();
    order.sort_by(|&a, &b| {
        indicators.per_element[b]
            .total_cmp(&indicators.per_element[a])
            .then(a.cmp(&b))
    });
    let mut marked = Vec::new();
    let mut mass = 0.0;
    for t in order {
        let e = indicators.per_element[t];
        if e == 0.0 || mass >= theta * total {
            break;
        }
        mass += e * e;
        marked.push(t);
    }
    marked.sort_unstable();
    marked
}

/// Excess of the coefficient values beyond [lo, hi], floored at zero. For
/// P0 these are the element values, for discontinuous P1 the element vertex
/// values.
pub fn overshoot(u_coeffs: &[f64], bounds: [f64; 2]) -> f64 {
    let [lo, hi] = bounds;
    let mut worst = 0.0f64;
    for &v in u_coeffs {
        worst = worst.max(v - hi).max(lo - v);
    }
    worst
}

#[derive(Debug, Clone, Copy)]
pub struct AmrConfig {
    pub theta: f64,
    pub node_budget: usize,
    pub order: usize,
    pub solver_tol: f64,
    /// Loop stops once the global estimator falls below this.
    pub estimator_tol: f64,
    pub max_iterations: usize,
    pub compute_errors: bool,
    pub error_quad_degree: usize,
    /// Record wall-clock times (disable for byte-reproducible output).
    pub timing: bool,
}

impl AmrConfig {
    pub fn new(order: usize) -> Self {
        AmrConfig {
            theta: 0.5,
            node_budget: 20_000,
            order,
            solver_tol: 1e-10,
            estimator_tol: 1e-10,
            max_iterations: 500,
            compute_errors: true,
            error_quad_degree: 8,
            timing: true,
        }
    }
}

/// One row of a convergence history.
#[derive(Debug, Clone)]
pub struct AmrRecord {
    pub iter: usize,
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub n_dofs: usize,
    pub estimator: f64,
    pub errors: Option<ErrorReport>,
    pub overshoot: Option<f64>,
    pub cg_iterations: usize,
    pub wall_ms: f64,
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    /// Node budget reached.
    Budget,
    /// Indicators fell below the tolerance (or the marked set was empty).
    EstimatorVanished,
    MaxIterations,
    SolverFailed,
    RefinementFailed(MeshError),
}

#[derive(Debug)]
pub struct AmrRun {
    pub records: Vec<AmrRecord>,
    pub mesh: Mesh,
    pub solution: Solution,
    pub stop: StopReason,
}

/// Adaptive solve-estimate-mark-refine loop; each iteration re-solves on
/// the current mesh.
pub fn amr_loop(
    problem: &ProblemSpec,
    method: MethodKind,
    config: &AmrConfig,
) -> Result<AmrRun, assembly::AssemblyError> {
    amr_loop_cb(problem, method, config, |_, _, _| {})
}

/// As amr_loop, invoking the callback with (iteration, mesh, solution)
/// after each solve (for per-iteration exports).
pub fn amr_loop_cb(
    problem: &ProblemSpec,
    method: MethodKind,
    config: &AmrConfig,
    mut cb: impl FnMut(usize, &Mesh, &Solution),
) -> Result<AmrRun, assembly::AssemblyError> {
    let mut mesh = problem.initial_mesh.clone();
    let mut records = Vec::new();
    let vertex_cap = config.node_budget.saturating_mul(10).max(100_000);
    let mut iter = 0;
    loop {
        let t0 = Instant::now();
        let out = solve(&mesh, problem, method, config.order, config.solver_tol)?;
        let indicators = compute_indicators(&mesh, &out.solution, problem);
        let wall_ms = if config.timing { t0.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let errors = if config.compute_errors && problem.exact_u.is_some() {
            exact_errors(&mesh, &out.solution, problem, config.error_quad_degree).ok()
        } else {
            None
        };
        let os = match (&out.solution, problem.exact_u_bounds) {
            (Solution::Flux { u, .. }, Some(b)) => Some(overshoot(u, b)),
            _ => None,
        };
        records.push(AmrRecord {
            iter,
            n_vertices: mesh.n_vertices(),
            n_triangles: mesh.n_triangles(),
            n_dofs: out.n_dofs,
            estimator: indicators.global(),
            errors,
            overshoot: os,
            cg_iterations: out.report.iterations,
            wall_ms,
            h_max: mesh.max_diameter(),
        });
        cb(iter, &mesh, &out.solution);

        if !out.report.converged {
            return Ok(AmrRun { records, mesh, solution: out.solution, stop: StopReason::SolverFailed });
        }
        if indicators.global() <= config.estimator_tol {
            return Ok(AmrRun {
                records,
                mesh,
                solution: out.solution,
                stop: StopReason::EstimatorVanished,
            });
        }
        if mesh.n_vertices() >= config.node_budget {
            return Ok(AmrRun { records, mesh, solution: out.solution, stop: StopReason::Budget });
        }
        if iter + 1 >= config.max_iterations {
            return Ok(AmrRun {
                records,
                mesh,
                solution: out.solution,
                stop: StopReason::MaxIterations,
            });
        }
        let marked = dorfler_mark(&indicators, config.theta);
        if marked.is_empty() {
            return Ok(AmrRun {
                records,
                mesh,
                solution: out.solution,
                stop: StopReason::EstimatorVanished,
            });
        }
        match mesh.refine_capped(&marked, vertex_cap) {
            Ok(refined) => {
                let mut refined = refined;
                let beta = problem.beta.clone();
                refined.classify_boundary(move |x, y| beta(x, y));
                mesh = refined;
            }
            Err(e) => {
                return Ok(AmrRun {
                    records,
                    mesh,
                    solution: out.solution,
                    stop: StopReason::RefinementFailed(e),
                });
            }
        }
        iter += 1;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniformConfig {
    pub levels: usize,
    pub order: usize,
    pub solver_tol: f64,
    /// Bisection passes between recorded levels (2 halves the mesh size).
    pub passes_per_level: usize,
    pub compute_errors: bool,
    pub error_quad_degree: usize,
    pub timing: bool,
}

impl UniformConfig {
    pub fn new(order: usize, levels: usize) -> Self {
        UniformConfig {
            levels,
            order,
            solver_tol: 1e-10,
            passes_per_level: 2,
            compute_errors: true,
            error_quad_degree: 8,
            timing: true,
        }
    }
}

/// Uniform refinement study: level i uses the problem's mesh family when it
/// has one, otherwise `passes_per_level` uniform bisection passes between
/// levels.
pub fn uniform_loop(
    problem: &ProblemSpec,
    method: MethodKind,
    config: &UniformConfig,
) -> Result<AmrRun, assembly::AssemblyError> {
    uniform_loop_cb(problem, method, config, |_, _, _| {})
}

pub fn uniform_loop_cb(
    problem: &ProblemSpec,
    method: MethodKind,
    config: &UniformConfig,
    mut cb: impl FnMut(usize, &Mesh, &Solution),
) -> Result<AmrRun, assembly::AssemblyError> {
    let mut records = Vec::new();
    let mut mesh = problem.initial_mesh.clone();
    let mut last: Option<(Mesh, Solution)> = None;
    for level in 0..config.levels.max(1) {
        if level > 0 {
            match &problem.mesh_family {
                Some(family) => mesh = family(level),
                None => {
                    for _ in 0..config.passes_per_level {
                        mesh = mesh.uniform_refine().expect("uniform refinement");
                    }
                    let beta = problem.beta.clone();
                    mesh.classify_boundary(move |x, y| beta(x, y));
                }
            }
        }
        let t0 = Instant::now();
        let out = solve(&mesh, problem, method, config.order, config.solver_tol)?;
        let indicators = compute_indicators(&mesh, &out.solution, problem);
        let wall_ms = if config.timing { t0.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let errors = if config.compute_errors && problem.exact_u.is_some() {
            exact_errors(&mesh, &out.solution, problem, config.error_quad_degree).ok()
        } else {
            None
        };
        let os = match (&out.solution, problem.exact_u_bounds) {
            (Solution::Flux { u, .. }, Some(b)) => Some(overshoot(u, b)),
            _ => None,
        };
        records.push(AmrRecord {
            iter: level,
            n_vertices: mesh.n_vertices(),
            n_triangles: mesh.n_triangles(),
            n_dofs: out.n_dofs,
            estimator: indicators.global(),
            errors,
            overshoot: os,
            cg_iterations: out.report.iterations,
            wall_ms,
            h_max: mesh.max_diameter(),
        });
        cb(level, &mesh, &out.solution);
        let failed = !out.report.converged;
        last = Some((mesh.clone(), out.solution));
        if failed {
            let (mesh, solution) = last.unwrap();
            return Ok(AmrRun { records, mesh, solution, stop: StopReason::SolverFailed });
        }
    }
    let (mesh, solution) = last.expect("at least one level");
    Ok(AmrRun { records, mesh, solution, stop: StopReason::Budget })
}
