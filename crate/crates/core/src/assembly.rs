//! Assembly of the sparse SPD least-squares systems.
//!
//! All methods minimize a residual functional, so every local block has the
//! form sum_q w_q (R_i . R_j) over per-dof residual vectors R; entries (i,j)
//! and (j,i) are the same floating-point products and the assembled matrix is
//! exactly symmetric.
//!
//! Flux methods (sigma, u) in RT_k x P_k:
//!   R1 = tau - beta v (2 components), R2 = div tau + gamma v,
//! with the inflow datum either fixed strongly on the RT edge dofs (LSFEM)
//! or added as a weighted boundary functional (LSFEM-B1/B2).
//! The comparison C-LSFEM uses continuous P1 with the residual
//! beta . grad v + mu v, mu = gamma + div beta.

use crate::linalg::{direct_solve, SolveReport, SparseSym};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::quadrature::{quadrature, QuadDomain};
use crate::spaces::{self, piola_map, reference_basis, DofMap, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodKind {
    /// Strong inflow condition in the RT space.
    Lsfem,
    /// Boundary functional with weight 1.
    LsfemB1,
    /// Boundary functional with weight alpha_f * h_F.
    LsfemB2 { alpha_f: f64 },
    /// Continuous-P1 least squares on the non-conservative form.
    CLsfem,
}

impl MethodKind {
    pub fn b2_default() -> Self {
        MethodKind::LsfemB2 { alpha_f: 10.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Lsfem => "lsfem",
            MethodKind::LsfemB1 => "lsfem-b1",
            MethodKind::LsfemB2 { .. } => "lsfem-b2",
            MethodKind::CLsfem => "c-lsfem",
        }
    }

    pub fn is_flux(&self) -> bool {
        !matches!(self, MethodKind::CLsfem)
    }

    /// Boundary weight omega on an inflow edge of length h, if the method
    /// has a boundary functional.
    pub fn boundary_weight(&self, h: f64) -> Option<f64> {
        match self {
            MethodKind::LsfemB1 => Some(1.0),
            MethodKind::LsfemB2 { alpha_f } => Some(alpha_f * h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum AssemblyError {
    /// classify_boundary has not run on the mesh
    NotClassified,
    /// |beta . n| degenerates on an edge classified as inflow; the weak
    /// boundary functional requires |beta . n| >= c > 0 there
    CharacteristicInflow { edge: usize },
    UnsupportedOrder(usize),
}

impl std::fmt::Display for AssemblyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AssemblyError::NotClassified => {
                write!(f, "mesh boundary has not been classified against the advection field")
            }
            AssemblyError::CharacteristicInflow { edge } => write!(
                f,
                "inflow edge {edge} has |beta . n| below threshold; the boundary functional \
                 assumes a non-degenerate inflow boundary"
            ),
            AssemblyError::UnsupportedOrder(k) => write!(f, "unsupported order k = {k}"),
        }
    }
}

impl std::error::Error for AssemblyError {}

/// Inflow boundary data: moments of (beta. n) g per inflow edge and the
/// strong-BC dof values derived from them. For the boundary-functional
/// methods the datum contributions are added to the load vector during
/// assembly instead.
#[derive(Debug, Clone, Default)]
pub struct BoundaryData {
    /// (edge id, [m0, m1]): moments of (beta.n) g against {1, t - 1/2} in
    /// the stored edge parameterization, outward normal.
    pub edge_moments: Vec<(usize, [f64; 2])>,
    /// Global RT dof values fixing sigma.n = (beta.n) g on the inflow.
    pub constrained: Vec<(usize, f64)>,
}

/// L2-project (beta.n) g onto P_k of each inflow edge. Since boundary edges
/// store the outward normal and the moments are taken in the stored
/// parameterization, the moments are exactly the global RT dof values.
pub fn project_inflow_g(mesh: &Mesh, problem: &ProblemSpec, k: usize) -> BoundaryData {
    let rule = quadrature(QuadDomain::Segment, 2 * k + 5).unwrap();
    let mut edge_moments = Vec::new();
    let mut constrained = Vec::new();
    for e in mesh.inflow_edges() {
        let pa = mesh.vertices[e.vertices[0]].pos();
        let pb = mesh.vertices[e.vertices[1]].pos();
        let n = e.unit_normal;
        let mut m = [0.0, 0.0];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let t = p[0];
            let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
            let b = (problem.beta)(x[0], x[1]);
            let bn = b[0] * n[0] + b[1] * n[1];
            let gv = (problem.g)(x[0], x[1]);
            m[0] += w * bn * gv * e.length;
            m[1] += w * bn * gv * (t - 0.5) * e.length;
        }
        edge_moments.push((e.id, m));
        if k == 0 {
            constrained.push((e.id, m[0]));
        } else {
            constrained.push((2 * e.id, m[0]));
            constrained.push((2 * e.id + 1, m[1]));
        }
    }
    BoundaryData { edge_moments, constrained }
}

/// Nodal inflow values for C-LSFEM: g at each inflow vertex, with the
/// averaged value at listed jump locations.
pub fn assemble_clsfem_bc(mesh: &Mesh, problem: &ProblemSpec) -> Vec<(usize, f64)> {
    let mut verts: Vec<usize> = mesh.inflow_edges().flat_map(|e| e.vertices).collect();
    verts.sort_unstable();
    verts.dedup();
    verts
        .into_iter()
        .map(|v| {
            let p = mesh.vertices[v].pos();
            let jump = problem
                .g_jumps
                .iter()
                .find(|(j, _)| ((p[0] - j[0]).powi(2) + (p[1] - j[1]).powi(2)).sqrt() < 1e-10);
            let val = match jump {
                Some((_, avg)) => *avg,
                None => (problem.g)(p[0], p[1]),
            };
            (v, val)
        })
        .collect()
}

/// Normal-trace polynomials of the RT edge dofs in the stored edge
/// parameterization: p_0 = 1/h, p_1 = 12 (t - 1/2) / h.
fn edge_trace(k: usize, h: f64, t: f64) -> [f64; 2] {
    [1.0 / h, if k == 1 { 12.0 * (t - 0.5) / h } else { 0.0 }]
}

/// Assemble the least-squares system. Returns the full (unconstrained)
/// symmetric matrix, load vector and inflow boundary data; LSFEM callers
/// pass the latter to apply_strong_bc.
pub fn assemble(
    mesh: &Mesh,
    method: MethodKind,
    k: usize,
    problem: &ProblemSpec,
) -> Result<(SparseSym, Vec<f64>, BoundaryData), AssemblyError> {
    if !mesh.classified {
        return Err(AssemblyError::NotClassified);
    }
    if k > 1 {
        return Err(AssemblyError::UnsupportedOrder(k));
    }
    match method {
        MethodKind::CLsfem => assemble_clsfem(mesh, problem),
        _ => assemble_flux(mesh, method, k, problem),
    }
}

fn assemble_flux(
    mesh: &Mesh,
    method: MethodKind,
    k: usize,
    problem: &ProblemSpec,
) -> Result<(SparseSym, Vec<f64>, BoundaryData), AssemblyError> {
    let rt_space = SpaceKind::rt(k).map_err(|_| AssemblyError::UnsupportedOrder(k))?;
    let pk_space = SpaceKind::pk(k).unwrap();
    let rt = DofMap::build(mesh, rt_space);
    let pk = DofMap::build(mesh, pk_space);
    let n_rt = rt.n_global;
    let n = n_rt + pk.n_global;
    let m = rt_space.local_dim();
    let p = pk_space.local_dim();
    let nl = m + p;

    let rule = quadrature(QuadDomain::Triangle, 2 * k + 4).unwrap();
    let nq = rule.points.len();
    let ref_rt = reference_basis(rt_space, &rule.points);
    let ref_pk = reference_basis(pk_space, &rule.points);
    let pk_vals = &ref_pk.as_scalar().values;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.n_triangles() * nl * nl);
    let mut b = vec![0.0; n];

    // residual components per local dof per quadrature point
    let mut r1 = vec![[0.0f64; 2]; nl * nq];
    let mut r2 = vec![0.0f64; nl * nq];
    for t in 0..mesh.n_triangles() {
        let coords = mesh.tri_coords(t);
        let area = mesh.triangles[t].area;
        let mapped = piola_map(mesh, t, rt_space, &ref_rt);
        let vb = mapped.as_vector();
        let mut beta_q = Vec::with_capacity(nq);
        let mut gamma_q = Vec::with_capacity(nq);
        let mut f_q = Vec::with_capacity(nq);
        for q in 0..nq {
            let x = spaces::map_point(&coords, rule.points[q]);
            beta_q.push((problem.beta)(x[0], x[1]));
            gamma_q.push((problem.gamma)(x[0], x[1]));
            f_q.push((problem.f)(x[0], x[1]));
        }
        for i in 0..m {
            for q in 0..nq {
                r1[i * nq + q] = vb.values[i][q];
                r2[i * nq + q] = vb.divergences[i][q];
            }
        }
        for a in 0..p {
            for q in 0..nq {
                let psi = pk_vals[a][q];
                let bq = beta_q[q];
                r1[(m + a) * nq + q] = [-bq[0] * psi, -bq[1] * psi];
                r2[(m + a) * nq + q] = gamma_q[q] * psi;
            }
        }
        // global indices: RT dofs then P_k dofs
        let gdof = |i: usize| {
            if i < m {
                rt.cell_dofs[t][i].0
            } else {
                n_rt + pk.cell_dofs[t][i - m].0
            }
        };
        for i in 0..nl {
            let gi = gdof(i);
            for j in i..nl {
                let mut s = 0.0;
                for q in 0..nq {
                    let a1 = r1[i * nq + q];
                    let b1 = r1[j * nq + q];
                    s += rule.weights[q]
                        * (a1[0] * b1[0] + a1[1] * b1[1] + r2[i * nq + q] * r2[j * nq + q]);
                }
                s *= 2.0 * area;
                let gj = gdof(j);
                triplets.push((gi, gj, s));
                if gi != gj {
                    triplets.push((gj, gi, s));
                }
            }
            let mut rhs = 0.0;
            for q in 0..nq {
                rhs += rule.weights[q] * f_q[q] * r2[i * nq + q];
            }
            b[gi] += rhs * 2.0 * area;
        }
    }

    let bdata = project_inflow_g(mesh, problem, k);

    // weak boundary functional
    if method.boundary_weight(1.0).is_some() {
        let erule = quadrature(QuadDomain::Segment, 2 * k + 5).unwrap();
        for e in mesh.inflow_edges() {
            let w_edge = method.boundary_weight(e.length).unwrap();
            let pa = mesh.vertices[e.vertices[0]].pos();
            let pb = mesh.vertices[e.vertices[1]].pos();
            let nrm = e.unit_normal;
            let gdofs: [usize; 2] =
                if k == 0 { [e.id, usize::MAX] } else { [2 * e.id, 2 * e.id + 1] };
            let ndof = if k == 0 { 1 } else { 2 };
            let mut local = [[0.0f64; 2]; 2];
            let mut load = [0.0f64; 2];
            for (pq, wq) in erule.points.iter().zip(&erule.weights) {
                let t = pq[0];
                let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let bv = (problem.beta)(x[0], x[1]);
                let bn = bv[0] * nrm[0] + bv[1] * nrm[1];
                let bmag = (bv[0] * bv[0] + bv[1] * bv[1]).sqrt();
                if bn.abs() < 1e-10 * bmag.max(1e-300) {
                    return Err(AssemblyError::CharacteristicInflow { edge: e.id });
                }
                let tr = edge_trace(k, e.length, t);
                let gv = (problem.g)(x[0], x[1]);
                let scale = wq * w_edge / bn.abs() * e.length;
                for i in 0..ndof {
                    for j in 0..ndof {
                        local[i][j] += scale * tr[i] * tr[j];
                    }
                    load[i] += scale * bn * gv * tr[i];
                }
            }
            for i in 0..ndof {
                for j in 0..ndof {
                    triplets.push((gdofs[i], gdofs[j], local[i][j]));
                }
                b[gdofs[i]] += load[i];
            }
        }
    }

    Ok((SparseSym::from_triplets(n, triplets), b, bdata))
}

/// mu = gamma + div beta, analytic when available, else central differences
/// with step 1e-6 * h_K.
fn mu_at(problem: &ProblemSpec, x: f64, y: f64, h_k: f64) -> f64 {
    let div_b = match &problem.div_beta {
        Some(d) => d(x, y),
        None => {
            let h = 1e-6 * h_k;
            let bxp = (problem.beta)(x + h, y)[0];
            let bxm = (problem.beta)(x - h, y)[0];
            let byp = (problem.beta)(x, y + h)[1];
            let bym = (problem.beta)(x, y - h)[1];
            (bxp - bxm) / (2.0 * h) + (byp - bym) / (2.0 * h)
        }
    };
    (problem.gamma)(x, y) + div_b
}

fn assemble_clsfem(
    mesh: &Mesh,
    problem: &ProblemSpec,
) -> Result<(SparseSym, Vec<f64>, BoundaryData), AssemblyError> {
    let dm = DofMap::build(mesh, SpaceKind::P1c);
    let n = dm.n_global;
    let rule = quadrature(QuadDomain::Triangle, 6).unwrap();
    let nq = rule.points.len();
    let ref_p1 = reference_basis(SpaceKind::P1c, &rule.points);
    let mut triplets = Vec::with_capacity(mesh.n_triangles() * 9);
    let mut b = vec![0.0; n];
    for t in 0..mesh.n_triangles() {
        let coords = mesh.tri_coords(t);
        let area = mesh.triangles[t].area;
        let h_k = mesh.triangles[t].diameter;
        let mapped = piola_map(mesh, t, SpaceKind::P1c, &ref_p1);
        let sb = mapped.as_scalar();
        // residuals beta . grad psi + mu psi
        let mut r = vec![0.0; 3 * nq];
        let mut f_q = Vec::with_capacity(nq);
        for q in 0..nq {
            let x = spaces::map_point(&coords, rule.points[q]);
            let bv = (problem.beta)(x[0], x[1]);
            let mu = mu_at(problem, x[0], x[1], h_k);
            for i in 0..3 {
                let gr = sb.gradients[i][q];
                r[i * nq + q] = bv[0] * gr[0] + bv[1] * gr[1] + mu * sb.values[i][q];
            }
            f_q.push((problem.f)(x[0], x[1]));
        }
        for i in 0..3 {
            let gi = dm.cell_dofs[t][i].0;
            for j in i..3 {
                let mut s = 0.0;
                for q in 0..nq {
                    s += rule.weights[q] * r[i * nq + q] * r[j * nq + q];
                }
                s *= 2.0 * area;
                let gj = dm.cell_dofs[t][j].0;
                triplets.push((gi, gj, s));
                if gi != gj {
                    triplets.push((gj, gi, s));
                }
            }
            let mut rhs = 0.0;
            for q in 0..nq {
                rhs += rule.weights[q] * f_q[q] * r[i * nq + q];
            }
            b[gi] += rhs * 2.0 * area;
        }
    }
    Ok((SparseSym::from_triplets(n, triplets), b, BoundaryData::default()))
}

/// The constrained system after symmetric elimination of fixed dofs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: SparseSym,
    pub rhs: Vec<f64>,
    pub constrained: Vec<(usize, f64)>,
    /// Original dof index of each reduced unknown.
    pub free: Vec<usize>,
}

impl ReducedSystem {
    /// Scatter a reduced solution back to the full dof vector, filling in
    /// the constrained values.
    pub fn expand(&self, x: &[f64], n_full: usize) -> Vec<f64> {
        let mut full = vec![0.0; n_full];
        for (&fi, &xi) in self.free.iter().zip(x) {
            full[fi] = xi;
        }
        for &(ci, cv) in &self.constrained {
            full[ci] = cv;
        }
        full
    }
}

/// Symmetric elimination: rows and columns of constrained dofs are removed
/// and their column contributions moved to the right-hand side.
pub fn apply_strong_bc(a: &SparseSym, b: &[f64], bc: &BoundaryData) -> ReducedSystem {
    let n = a.n;
    let mut value = vec![0.0; n];
    let mut fixed = vec![false; n];
    for &(i, v) in &bc.constrained {
        fixed[i] = true;
        value[i] = v;
    }
    let mut free = Vec::with_capacity(n - bc.constrained.len());
    let mut new_id = vec![usize::MAX; n];
    for i in 0..n {
        if !fixed[i] {
            new_id[i] = free.len();
            free.push(i);
        }
    }
    let mut triplets = Vec::new();
    let mut rhs: Vec<f64> = free.iter().map(|&i| b[i]).collect();
    for i in 0..n {
        if fixed[i] {
            continue;
        }
        let ri = new_id[i];
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col_idx[k];
            let v = a.values[k];
            if fixed[j] {
                rhs[ri] -= v * value[j];
            } else {
                triplets.push((ri, new_id[j], v));
            }
        }
    }
    ReducedSystem {
        matrix: SparseSym::from_triplets(free.len(), triplets),
        rhs,
        constrained: bc.constrained.clone(),
        free,
    }
}

/// A discrete solution: flux methods carry RT_k x P_k coefficients,
/// C-LSFEM nodal P1 values.
#[derive(Debug, Clone)]
pub enum Solution {
    Flux { method: MethodKind, k: usize, sigma: Vec<f64>, u: Vec<f64> },
    Continuous { u: Vec<f64> },
}

impl Solution {
    pub fn u_coeffs(&self) -> &[f64] {
        match self {
            Solution::Flux { u, .. } => u,
            Solution::Continuous { u } => u,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub solution: Solution,
    pub report: SolveReport,
    /// Number of unknowns actually solved for.
    pub n_dofs: usize,
}

/// Assemble, apply boundary conditions, and run preconditioned CG.
pub fn solve(
    mesh: &Mesh,
    problem: &ProblemSpec,
    method: MethodKind,
    k: usize,
    tol: f64,
) -> Result<SolveOutput, AssemblyError> {
    let (a, b, bdata) = assemble(mesh, method, k, problem)?;
    let n_full = a.n;
    match method {
        MethodKind::Lsfem => {
            let reduced = apply_strong_bc(&a, &b, &bdata);
            let (x, report) = direct_solve(&reduced.matrix, &reduced.rhs, tol);
            let full = reduced.expand(&x, n_full);
            let n_rt = rt_dim(mesh, k);
            Ok(SolveOutput {
                solution: Solution::Flux {
                    method,
                    k,
                    sigma: full[..n_rt].to_vec(),
                    u: full[n_rt..].to_vec(),
                },
                report,
                n_dofs: reduced.matrix.n,
            })
        }
        MethodKind::LsfemB1 | MethodKind::LsfemB2 { .. } => {
            let (x, report) = direct_solve(&a, &b, tol);
            let n_rt = rt_dim(mesh, k);
            Ok(SolveOutput {
                solution: Solution::Flux {
                    method,
                    k,
                    sigma: x[..n_rt].to_vec(),
                    u: x[n_rt..].to_vec(),
                },
                report,
                n_dofs: n_full,
            })
        }
        MethodKind::CLsfem => {
            let constrained = assemble_clsfem_bc(mesh, problem);
            let bc = BoundaryData { edge_moments: Vec::new(), constrained };
            let reduced = apply_strong_bc(&a, &b, &bc);
            let (x, report) = direct_solve(&reduced.matrix, &reduced.rhs, tol);
            let full = reduced.expand(&x, n_full);
            Ok(SolveOutput {
                solution: Solution::Continuous { u: full },
                report,
                n_dofs: reduced.matrix.n,
            })
        }
    }
}

pub fn rt_dim(mesh: &Mesh, k: usize) -> usize {
    if k == 0 {
        mesh.n_edges()
    } else {
        2 * mesh.n_edges() + 2 * mesh.n_triangles()
    }
}

pub fn pk_dim(mesh: &Mesh, k: usize) -> usize {
    if k == 0 {
        mesh.n_triangles()
    } else {
        3 * mesh.n_triangles()
    }
}

/// Per-inflow-edge squared residual of the boundary functional,
/// || sigma_h . n - (beta.n) g ||^2_{omega,F}, attributed to the adjacent
/// triangle. Empty for methods without a boundary functional.
pub fn inflow_edge_residuals(
    mesh: &Mesh,
    solution: &Solution,
    problem: &ProblemSpec,
) -> Result<Vec<(usize, f64)>, AssemblyError> {
    let Solution::Flux { method, k, sigma, .. } = solution else {
        return Ok(Vec::new());
    };
    if method.boundary_weight(1.0).is_none() {
        return Ok(Vec::new());
    }
    let rule = quadrature(QuadDomain::Segment, 2 * k + 5).unwrap();
    let mut out = Vec::new();
    for e in mesh.inflow_edges() {
        let w_edge = method.boundary_weight(e.length).unwrap();
        let pa = mesh.vertices[e.vertices[0]].pos();
        let pb = mesh.vertices[e.vertices[1]].pos();
        let nrm = e.unit_normal;
        let d0 = if *k == 0 { sigma[e.id] } else { sigma[2 * e.id] };
        let d1 = if *k == 0 { 0.0 } else { sigma[2 * e.id + 1] };
        let mut acc = 0.0;
        for (pq, wq) in rule.points.iter().zip(&rule.weights) {
            let t = pq[0];
            let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
            let bv = (problem.beta)(x[0], x[1]);
            let bn = bv[0] * nrm[0] + bv[1] * nrm[1];
            let bmag = (bv[0] * bv[0] + bv[1] * bv[1]).sqrt();
            if bn.abs() < 1e-10 * bmag.max(1e-300) {
                return Err(AssemblyError::CharacteristicInflow { edge: e.id });
            }
            let tr = edge_trace(*k, e.length, t);
            let sn = d0 * tr[0] + d1 * tr[1];
            let resid = sn - bn * (problem.g)(x[0], x[1]);
            acc += wq * w_edge / bn.abs() * resid * resid * e.length;
        }
        out.push((e.triangles[0].expect("boundary edge has a triangle"), acc));
    }
    Ok(out)
}

/// Total squared boundary residual of the B-norm.
pub fn inflow_residual_sq(
    mesh: &Mesh,
    solution: &Solution,
    problem: &ProblemSpec,
) -> Result<f64, AssemblyError> {
    Ok(inflow_edge_residuals(mesh, solution, problem)?.iter().map(|(_, r)| r).sum())
}
