//! Reference-element bases for RT0, RT1, P0, discontinuous and continuous P1,
//! the Piola mapping, global degree-of-freedom maps, canonical Raviart-Thomas
//! interpolation and element-local L2 projection.
//!
//! Reference triangle: (0,0), (1,0), (0,1). Local edge `l` is opposite vertex
//! `l` and is traversed from vertex `l+1` to vertex `l+2` (counterclockwise).
//! RT degrees of freedom are total normal-flux moments: on edge F the m-th
//! moment of `v` is `int_F (v . n) q_m ds` with `q_0 = 1`, `q_1 = t - 1/2`
//! and `t` the arclength parameter. Globally, `n` and `t` follow the stored
//! edge orientation; locally they follow the element's outward normal and
//! counterclockwise traversal. The two differ by the per-element signs kept
//! in the dof map.

use crate::linalg::dense_solve;
use crate::mesh::Mesh;
use crate::quadrature::{quadrature, QuadDomain};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    RT0,
    RT1,
    P0,
    P1dg,
    P1c,
}

impl SpaceKind {
    pub fn is_vector(self) -> bool {
        matches!(self, SpaceKind::RT0 | SpaceKind::RT1)
    }

    /// Number of local basis functions per triangle.
    pub fn local_dim(self) -> usize {
        match self {
            SpaceKind::RT0 => 3,
            SpaceKind::RT1 => 8,
            SpaceKind::P0 => 1,
            SpaceKind::P1dg | SpaceKind::P1c => 3,
        }
    }

    pub fn order(self) -> usize {
        match self {
            SpaceKind::RT0 | SpaceKind::P0 => 0,
            _ => 1,
        }
    }

    pub fn rt(k: usize) -> Result<Self, SpaceError> {
        match k {
            0 => Ok(SpaceKind::RT0),
            1 => Ok(SpaceKind::RT1),
            _ => Err(SpaceError::UnsupportedOrder(k)),
        }
    }

    pub fn pk(k: usize) -> Result<Self, SpaceError> {
        match k {
            0 => Ok(SpaceKind::P0),
            1 => Ok(SpaceKind::P1dg),
            _ => Err(SpaceError::UnsupportedOrder(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    UnsupportedOrder(usize),
}

impl std::fmt::Display for SpaceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceError::UnsupportedOrder(k) => write!(f, "unsupported polynomial order k = {k}"),
        }
    }
}

impl std::error::Error for SpaceError {}

/// Vector-valued basis evaluations: `values[i][q]` is basis `i` at point `q`.
#[derive(Debug, Clone)]
pub struct VectorBasis {
    pub values: Vec<Vec<[f64; 2]>>,
    pub divergences: Vec<Vec<f64>>,
}

/// Scalar basis evaluations with gradients (needed by C-LSFEM).
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    pub values: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone)]
pub enum BasisEval {
    Vector(VectorBasis),
    Scalar(ScalarBasis),
}

impl BasisEval {
    pub fn as_vector(&self) -> &VectorBasis {
        match self {
            BasisEval::Vector(v) => v,
            BasisEval::Scalar(_) => panic!("expected vector basis"),
        }
    }

    pub fn as_scalar(&self) -> &ScalarBasis {
        match self {
            BasisEval::Scalar(s) => s,
            BasisEval::Vector(_) => panic!("expected scalar basis"),
        }
    }
}

pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Outward unit normals of the reference edges (edge l opposite vertex l).
pub const REF_EDGE_NORMALS: [[f64; 2]; 3] = [
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [-1.0, 0.0],
    [0.0, -1.0],
];

pub fn ref_edge_length(l: usize) -> f64 {
    if l == 0 {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// Point on local edge `l` at parameter `t` in [0,1] (counterclockwise
/// traversal, from vertex l+1 to vertex l+2).
pub fn ref_edge_point(l: usize, t: f64) -> [f64; 2] {
    let a = REF_VERTICES[(l + 1) % 3];
    let b = REF_VERTICES[(l + 2) % 3];
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// RT1 monomial frame: P1^2 plus x * (homogeneous P1).
fn rt1_monomial(j: usize, p: [f64; 2]) -> ([f64; 2], f64) {
    let [x, y] = p;
    match j {
        0 => ([1.0, 0.0], 0.0),
        1 => ([x, 0.0], 1.0),
        2 => ([y, 0.0], 0.0),
        3 => ([0.0, 1.0], 0.0),
        4 => ([0.0, x], 0.0),
        5 => ([0.0, y], 1.0),
        6 => ([x * x, x * y], 3.0 * x),
        7 => ([x * y, y * y], 3.0 * y),
        _ => unreachable!(),
    }
}

/// Columns of the RT1 nodal-basis coefficient matrix: basis l is
/// sum_j COEFF[l][j] * monomial_j, dual to the 8 reference dofs.
fn rt1_coefficients() -> &'static Vec<[f64; 8]> {
    static COEFF: OnceLock<Vec<[f64; 8]>> = OnceLock::new();
    COEFF.get_or_init(|| {
        let seg = quadrature(QuadDomain::Segment, 5).unwrap();
        let tri = quadrature(QuadDomain::Triangle, 4).unwrap();
        // dof x monomial matrix
        let mut d = vec![vec![0.0f64; 8]; 8];
        for l in 0..3 {
            let n = REF_EDGE_NORMALS[l];
            let len = ref_edge_length(l);
            for (p, w) in seg.points.iter().zip(&seg.weights) {
                let t = p[0];
                let xp = ref_edge_point(l, t);
                for j in 0..8 {
                    let (v, _) = rt1_monomial(j, xp);
                    let vn = v[0] * n[0] + v[1] * n[1];
                    d[2 * l][j] += w * vn * len;
                    d[2 * l + 1][j] += w * vn * (t - 0.5) * len;
                }
            }
        }
        for (p, w) in tri.points.iter().zip(&tri.weights) {
            for j in 0..8 {
                let (v, _) = rt1_monomial(j, [p[0], p[1]]);
                d[6][j] += w * v[0];
                d[7][j] += w * v[1];
            }
        }
        // invert: column l of D^{-1} gives the coefficients of basis l
        let mut cols = Vec::with_capacity(8);
        for l in 0..8 {
            let mut rhs = vec![0.0; 8];
            rhs[l] = 1.0;
            let x = dense_solve(d.clone(), rhs).expect("RT1 dof matrix is invertible");
            let mut col = [0.0; 8];
            col.copy_from_slice(&x);
            cols.push(col);
        }
        cols
    })
}

/// Evaluate the reference basis of `space` at the given reference points.
pub fn reference_basis(space: SpaceKind, points: &[[f64; 2]]) -> BasisEval {
    match space {
        SpaceKind::RT0 => {
            // phi_l = x - V_l has unit total flux through edge l, zero
            // through the others; div phi_l = 2 on the unit-area-1/2 triangle
            let mut values = vec![Vec::with_capacity(points.len()); 3];
            let mut divergences = vec![Vec::with_capacity(points.len()); 3];
            for &p in points {
                for l in 0..3 {
                    let v = REF_VERTICES[l];
                    values[l].push([p[0] - v[0], p[1] - v[1]]);
                    divergences[l].push(2.0);
                }
            }
            BasisEval::Vector(VectorBasis { values, divergences })
        }
        SpaceKind::RT1 => {
            let coeff = rt1_coefficients();
            let mut values = vec![Vec::with_capacity(points.len()); 8];
            let mut divergences = vec![Vec::with_capacity(points.len()); 8];
            for &p in points {
                let monos: Vec<([f64; 2], f64)> = (0..8).map(|j| rt1_monomial(j, p)).collect();
                for l in 0..8 {
                    let mut v = [0.0, 0.0];
                    let mut dv = 0.0;
                    for j in 0..8 {
                        let c = coeff[l][j];
                        v[0] += c * monos[j].0[0];
                        v[1] += c * monos[j].0[1];
                        dv += c * monos[j].1;
                    }
                    values[l].push(v);
                    divergences[l].push(dv);
                }
            }
            BasisEval::Vector(VectorBasis { values, divergences })
        }
        SpaceKind::P0 => {
            let values = vec![vec![1.0; points.len()]];
            let gradients = vec![vec![[0.0, 0.0]; points.len()]];
            BasisEval::Scalar(ScalarBasis { values, gradients })
        }
        SpaceKind::P1dg | SpaceKind::P1c => {
            // barycentric coordinates
            let mut values = vec![Vec::with_capacity(points.len()); 3];
            let mut gradients = vec![Vec::with_capacity(points.len()); 3];
            const GRADS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            for &p in points {
                let lam = [1.0 - p[0] - p[1], p[0], p[1]];
                for l in 0..3 {
                    values[l].push(lam[l]);
                    gradients[l].push(GRADS[l]);
                }
            }
            BasisEval::Scalar(ScalarBasis { values, gradients })
        }
    }
}

/// Affine map data for a triangle: columns of B are the edge vectors from
/// vertex 0; det B = 2 * area > 0 for counterclockwise triangles.
pub fn tri_jacobian(c: &[[f64; 2]; 3]) -> ([[f64; 2]; 2], f64) {
    let b = [[c[1][0] - c[0][0], c[2][0] - c[0][0]], [c[1][1] - c[0][1], c[2][1] - c[0][1]]];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    (b, det)
}

pub fn map_point(c: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 2] {
    let (b, _) = tri_jacobian(c);
    [c[0][0] + b[0][0] * p[0] + b[0][1] * p[1], c[0][1] + b[1][0] * p[0] + b[1][1] * p[1]]
}

/// +1 when triangle `t` traverses local edge `l` in the stored (lower id
/// first) direction, -1 otherwise.
pub fn local_edge_direction(mesh: &Mesh, t: usize, l: usize) -> f64 {
    let tri = &mesh.triangles[t];
    let first = tri.vertices[(l + 1) % 3];
    if first == mesh.edges[tri.edges[l]].vertices[0] {
        1.0
    } else {
        -1.0
    }
}

/// Per-local-dof factors turning the mapped reference basis into the
/// restriction of the global basis functions.
pub fn dof_signs(mesh: &Mesh, t: usize, space: SpaceKind) -> Vec<f64> {
    let tri = &mesh.triangles[t];
    match space {
        SpaceKind::RT0 => tri.edge_signs.to_vec(),
        SpaceKind::RT1 => {
            let mut s = Vec::with_capacity(8);
            for l in 0..3 {
                let sn = tri.edge_signs[l];
                let sd = local_edge_direction(mesh, t, l);
                s.push(sn);
                // the linear moment flips with both the normal and the
                // traversal direction
                s.push(sn * sd);
            }
            s.push(1.0);
            s.push(1.0);
            s
        }
        _ => vec![1.0; space.local_dim()],
    }
}

/// Map reference evaluations to physical triangle `t`: contravariant Piola
/// for vector spaces (values by B/detB, divergences by 1/detB) followed by
/// the dof sign correction; scalar values are unchanged and gradients map by
/// B^{-T}.
pub fn piola_map(mesh: &Mesh, t: usize, space: SpaceKind, reference: &BasisEval) -> BasisEval {
    let coords = mesh.tri_coords(t);
    let (b, det) = tri_jacobian(&coords);
    match reference {
        BasisEval::Vector(rb) => {
            let signs = dof_signs(mesh, t, space);
            let mut values = Vec::with_capacity(rb.values.len());
            let mut divergences = Vec::with_capacity(rb.values.len());
            for (l, (vals, divs)) in rb.values.iter().zip(&rb.divergences).enumerate() {
                let s = signs[l];
                values.push(
                    vals.iter()
                        .map(|v| {
                            [
                                s * (b[0][0] * v[0] + b[0][1] * v[1]) / det,
                                s * (b[1][0] * v[0] + b[1][1] * v[1]) / det,
                            ]
                        })
                        .collect(),
                );
                divergences.push(divs.iter().map(|d| s * d / det).collect());
            }
            BasisEval::Vector(VectorBasis { values, divergences })
        }
        BasisEval::Scalar(rb) => {
            // B^{-T} = (1/det) [[b11, -b10], [-b01, b00]]
            let binv_t = [[b[1][1] / det, -b[1][0] / det], [-b[0][1] / det, b[0][0] / det]];
            let gradients = rb
                .gradients
                .iter()
                .map(|gs| {
                    gs.iter()
                        .map(|g| {
                            [
                                binv_t[0][0] * g[0] + binv_t[0][1] * g[1],
                                binv_t[1][0] * g[0] + binv_t[1][1] * g[1],
                            ]
                        })
                        .collect()
                })
                .collect();
            BasisEval::Scalar(ScalarBasis { values: rb.values.clone(), gradients })
        }
    }
}

/// Global numbering with per-element signs.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub space: SpaceKind,
    pub n_global: usize,
    /// Per triangle: (global dof, sign) in local basis order.
    pub cell_dofs: Vec<Vec<(usize, f64)>>,
    /// RT spaces: edge dofs on the inflow boundary. P1c: inflow vertices.
    pub inflow_dofs: Vec<usize>,
}

impl DofMap {
    pub fn build(mesh: &Mesh, space: SpaceKind) -> Self {
        let nt = mesh.n_triangles();
        let ne = mesh.n_edges();
        let mut cell_dofs = Vec::with_capacity(nt);
        let n_global;
        match space {
            SpaceKind::RT0 => {
                n_global = ne;
                for t in 0..nt {
                    let tri = &mesh.triangles[t];
                    cell_dofs.push(
                        (0..3).map(|l| (tri.edges[l], tri.edge_signs[l])).collect(),
                    );
                }
            }
            SpaceKind::RT1 => {
                n_global = 2 * ne + 2 * nt;
                for t in 0..nt {
                    let tri = &mesh.triangles[t];
                    let mut dofs = Vec::with_capacity(8);
                    for l in 0..3 {
                        let e = tri.edges[l];
                        let sn = tri.edge_signs[l];
                        let sd = local_edge_direction(mesh, t, l);
                        dofs.push((2 * e, sn));
                        dofs.push((2 * e + 1, sn * sd));
                    }
                    dofs.push((2 * ne + 2 * t, 1.0));
                    dofs.push((2 * ne + 2 * t + 1, 1.0));
                    cell_dofs.push(dofs);
                }
            }
            SpaceKind::P0 => {
                n_global = nt;
                for t in 0..nt {
                    cell_dofs.push(vec![(t, 1.0)]);
                }
            }
            SpaceKind::P1dg => {
                n_global = 3 * nt;
                for t in 0..nt {
                    cell_dofs.push((0..3).map(|i| (3 * t + i, 1.0)).collect());
                }
            }
            SpaceKind::P1c => {
                n_global = mesh.n_vertices();
                for t in 0..nt {
                    let tv = mesh.triangles[t].vertices;
                    cell_dofs.push(tv.iter().map(|&v| (v, 1.0)).collect());
                }
            }
        }
        let mut inflow_dofs = Vec::new();
        for e in mesh.inflow_edges() {
            match space {
                SpaceKind::RT0 => inflow_dofs.push(e.id),
                SpaceKind::RT1 => {
                    inflow_dofs.push(2 * e.id);
                    inflow_dofs.push(2 * e.id + 1);
                }
                SpaceKind::P1c => inflow_dofs.extend(e.vertices),
                _ => {}
            }
        }
        inflow_dofs.sort_unstable();
        inflow_dofs.dedup();
        DofMap { space, n_global, cell_dofs, inflow_dofs }
    }
}

/// Canonical RT interpolation: edge normal-flux moments (plus interior
/// moments for k = 1) of an analytic field.
pub fn interpolate_rt(
    mesh: &Mesh,
    field: impl Fn(f64, f64) -> [f64; 2],
    k: usize,
) -> Result<Vec<f64>, SpaceError> {
    SpaceKind::rt(k)?;
    let ne = mesh.n_edges();
    let mut coeffs = vec![0.0; if k == 0 { ne } else { 2 * ne + 2 * mesh.n_triangles() }];
    let seg = quadrature(QuadDomain::Segment, 2 * k + 5).unwrap();
    for e in &mesh.edges {
        let pa = mesh.vertices[e.vertices[0]].pos();
        let pb = mesh.vertices[e.vertices[1]].pos();
        let n = e.unit_normal;
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for (p, w) in seg.points.iter().zip(&seg.weights) {
            let t = p[0];
            let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
            let v = field(x[0], x[1]);
            let vn = v[0] * n[0] + v[1] * n[1];
            m0 += w * vn * e.length;
            m1 += w * vn * (t - 0.5) * e.length;
        }
        if k == 0 {
            coeffs[e.id] = m0;
        } else {
            coeffs[2 * e.id] = m0;
            coeffs[2 * e.id + 1] = m1;
        }
    }
    if k == 1 {
        let tri = quadrature(QuadDomain::Triangle, 2 * k + 4).unwrap();
        for t in 0..mesh.n_triangles() {
            let coords = mesh.tri_coords(t);
            let (b, det) = tri_jacobian(&coords);
            // pullback: det * B^{-1} * field(F(x))
            let binv = [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
            let mut mx = 0.0;
            let mut my = 0.0;
            for (p, w) in tri.points.iter().zip(&tri.weights) {
                let x = map_point(&coords, *p);
                let v = field(x[0], x[1]);
                mx += w * det * (binv[0][0] * v[0] + binv[0][1] * v[1]);
                my += w * det * (binv[1][0] * v[0] + binv[1][1] * v[1]);
            }
            coeffs[2 * ne + 2 * t] = mx;
            coeffs[2 * ne + 2 * t + 1] = my;
        }
    }
    Ok(coeffs)
}

/// Element-local L2 projection onto P_k (discontinuous).
pub fn project_l2(
    mesh: &Mesh,
    field: impl Fn(f64, f64) -> f64,
    k: usize,
) -> Result<Vec<f64>, SpaceError> {
    if k > 1 {
        return Err(SpaceError::UnsupportedOrder(k));
    }
    let rule = quadrature(QuadDomain::Triangle, 2 * k + 4).unwrap();
    let nt = mesh.n_triangles();
    let mut coeffs = vec![0.0; if k == 0 { nt } else { 3 * nt }];
    for t in 0..nt {
        let coords = mesh.tri_coords(t);
        let area = mesh.triangles[t].area;
        if k == 0 {
            let mut s = 0.0;
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let x = map_point(&coords, *p);
                s += w * field(x[0], x[1]);
            }
            // mean: (1/|K|) int_K f; the physical measure element is 2*area*w
            coeffs[t] = 2.0 * s;
        } else {
            // rhs_a = int_K field * lambda_a; exact P1 mass inverse
            let mut rhs = [0.0; 3];
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let lam = [1.0 - p[0] - p[1], p[0], p[1]];
                let x = map_point(&coords, *p);
                let f = field(x[0], x[1]);
                for a in 0..3 {
                    rhs[a] += w * 2.0 * area * f * lam[a];
                }
            }
            // M = (|K|/12) [[2,1,1],[1,2,1],[1,1,2]]; M^{-1} = (3/|K|) [[3,-1,-1],...]/...
            let inv = [[3.0, -1.0, -1.0], [-1.0, 3.0, -1.0], [-1.0, -1.0, 3.0]];
            for a in 0..3 {
                let mut v = 0.0;
                for c in 0..3 {
                    v += inv[a][c] * rhs[c];
                }
                coeffs[3 * t + a] = 3.0 * v / area;
            }
        }
    }
    Ok(coeffs)
}

/// Evaluate a vector-space coefficient field on a triangle at reference
/// points: (values, divergences).
pub fn eval_vector(
    mesh: &Mesh,
    dm: &DofMap,
    coeffs: &[f64],
    t: usize,
    points: &[[f64; 2]],
) -> (Vec<[f64; 2]>, Vec<f64>) {
    let rb = reference_basis(dm.space, points);
    let mapped = piola_map(mesh, t, dm.space, &rb);
    let vb = mapped.as_vector();
    let mut vals = vec![[0.0, 0.0]; points.len()];
    let mut divs = vec![0.0; points.len()];
    // piola_map already folds the dof signs into the basis
    for (l, &(g, _)) in dm.cell_dofs[t].iter().enumerate() {
        let c = coeffs[g];
        for q in 0..points.len() {
            vals[q][0] += c * vb.values[l][q][0];
            vals[q][1] += c * vb.values[l][q][1];
            divs[q] += c * vb.divergences[l][q];
        }
    }
    (vals, divs)
}

/// Evaluate a scalar-space coefficient field on a triangle at reference
/// points.
pub fn eval_scalar(
    _mesh: &Mesh,
    dm: &DofMap,
    coeffs: &[f64],
    t: usize,
    points: &[[f64; 2]],
) -> Vec<f64> {
    let rb = reference_basis(dm.space, points);
    let sb = rb.as_scalar();
    let mut vals = vec![0.0; points.len()];
    for (l, &(g, s)) in dm.cell_dofs[t].iter().enumerate() {
        let c = s * coeffs[g];
        for q in 0..points.len() {
            vals[q] += c * sb.values[l][q];
        }
    }
    vals
}

/// Physical gradient of a scalar-space coefficient field on a triangle.
pub fn eval_scalar_grad(
    mesh: &Mesh,
    dm: &DofMap,
    coeffs: &[f64],
    t: usize,
    points: &[[f64; 2]],
) -> Vec<[f64; 2]> {
    let rb = reference_basis(dm.space, points);
    let mapped = piola_map(mesh, t, dm.space, &rb);
    let sb = mapped.as_scalar();
    let mut grads = vec![[0.0, 0.0]; points.len()];
    for (l, &(g, _)) in dm.cell_dofs[t].iter().enumerate() {
        let c = coeffs[g];
        for q in 0..points.len() {
            grads[q][0] += c * sb.gradients[l][q][0];
            grads[q][1] += c * sb.gradients[l][q][1];
        }
    }
    grads
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, criss_cross};
    use crate::quadrature::{quadrature, QuadDomain};

    fn reference_mesh() -> Mesh {
        build_mesh(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0, 1, 2]]).unwrap()
    }

    /// Independent dof evaluation: edge flux moments and interior moments of
    /// a basis given as point-evaluable function.
    fn rt_dofs_of(
        f: impl Fn([f64; 2]) -> [f64; 2],
        k: usize,
    ) -> Vec<f64> {
        let seg = quadrature(QuadDomain::Segment, 7).unwrap();
        let mut dofs = Vec::new();
        for l in 0..3 {
            let n = REF_EDGE_NORMALS[l];
            let len = ref_edge_length(l);
            let mut m0 = 0.0;
            let mut m1 = 0.0;
            for (p, w) in seg.points.iter().zip(&seg.weights) {
                let t = p[0];
                let v = f(ref_edge_point(l, t));
                let vn = v[0] * n[0] + v[1] * n[1];
                m0 += w * vn * len;
                m1 += w * vn * (t - 0.5) * len;
            }
            dofs.push(m0);
            if k == 1 {
                dofs.push(m1);
            }
        }
        if k == 1 {
            let tri = quadrature(QuadDomain::Triangle, 6).unwrap();
            let mut mx = 0.0;
            let mut my = 0.0;
            for (p, w) in tri.points.iter().zip(&tri.weights) {
                let v = f([p[0], p[1]]);
                mx += w * v[0];
                my += w * v[1];
            }
            dofs.push(mx);
            dofs.push(my);
        }
        dofs
    }

    #[test]
    fn rt0_edge_flux_duality() {
        for j in 0..3 {
            let dofs = rt_dofs_of(
                |p| {
                    let rb = reference_basis(SpaceKind::RT0, &[p]);
                    rb.as_vector().values[j][0]
                },
                0,
            );
            for (i, d) in dofs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-13, "dof {i} of basis {j}: {d}");
            }
        }
    }

    #[test]
    fn rt0_divergence_constant() {
        let pts = [[0.1, 0.2], [0.5, 0.3], [0.25, 0.25]];
        let rb = reference_basis(SpaceKind::RT0, &pts);
        for divs in &rb.as_vector().divergences {
            for d in divs {
                assert!((d - divs[0]).abs() < 1e-15);
            }
            assert!((divs[0].abs() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rt1_dof_duality_identity() {
        for j in 0..8 {
            let dofs = rt_dofs_of(
                |p| {
                    let rb = reference_basis(SpaceKind::RT1, &[p]);
                    rb.as_vector().values[j][0]
                },
                1,
            );
            for (i, d) in dofs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12, "dof {i} of basis {j}: {d}");
            }
        }
    }

    #[test]
    fn piola_identity_map() {
        let m = reference_mesh();
        let pts = [[0.2, 0.3], [0.4, 0.1]];
        let rb = reference_basis(SpaceKind::RT0, &pts);
        let mapped = piola_map(&m, 0, SpaceKind::RT0, &rb);
        let (r, p) = (rb.as_vector(), mapped.as_vector());
        for l in 0..3 {
            for q in 0..pts.len() {
                assert!((r.values[l][q][0] - p.values[l][q][0]).abs() < 1e-15);
                assert!((r.values[l][q][1] - p.values[l][q][1]).abs() < 1e-15);
                assert!((r.divergences[l][q] - p.divergences[l][q]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn piola_uniform_scaling() {
        // triangle scaled by 2: det J = 4, divergences scale by 1/4,
        // total edge fluxes are preserved
        let m = build_mesh(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], &[[0, 1, 2]]).unwrap();
        let pts = [[0.3, 0.3]];
        let rb = reference_basis(SpaceKind::RT0, &pts);
        let mapped = piola_map(&m, 0, SpaceKind::RT0, &rb);
        for l in 0..3 {
            assert!((mapped.as_vector().divergences[l][0] - 2.0 / 4.0).abs() < 1e-15);
        }
        // flux across physical edge l of the mapped basis l is 1
        let seg = quadrature(QuadDomain::Segment, 5).unwrap();
        for l in 0..3usize {
            let mut flux = 0.0;
            let e = &m.edges[m.triangles[0].edges[l]];
            let pa = m.vertices[e.vertices[0]].pos();
            let pb = m.vertices[e.vertices[1]].pos();
            for (p, w) in seg.points.iter().zip(&seg.weights) {
                let t = p[0];
                // physical point back to reference coordinates
                let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let xref = [x[0] / 2.0, x[1] / 2.0];
                let rbq = reference_basis(SpaceKind::RT0, &[xref]);
                let mq = piola_map(&m, 0, SpaceKind::RT0, &rbq);
                let v = mq.as_vector().values[l][0];
                let n = e.unit_normal;
                flux += w * (v[0] * n[0] + v[1] * n[1]) * e.length;
            }
            // boundary edges have sign +1, so the global dof is the flux
            assert!((flux - 1.0).abs() < 1e-13, "edge {l}: flux {flux}");
        }
    }

    /// Normal traces of every global RT dof agree from both sides of every
    /// interior edge.
    fn check_hdiv_conformity(mesh: &Mesh, space: SpaceKind, tol: f64) {
        let dm = DofMap::build(mesh, space);
        let seg = quadrature(QuadDomain::Segment, 7).unwrap();
        for e in mesh.edges.iter().filter(|e| !e.is_boundary()) {
            let [t1, t2] = [e.triangles[0].unwrap(), e.triangles[1].unwrap()];
            let pa = mesh.vertices[e.vertices[0]].pos();
            let pb = mesh.vertices[e.vertices[1]].pos();
            // global dofs with support on this edge
            let dofs: Vec<usize> = match space {
                SpaceKind::RT0 => vec![e.id],
                SpaceKind::RT1 => vec![2 * e.id, 2 * e.id + 1],
                _ => unreachable!(),
            };
            for &g in &dofs {
                let mut coeffs = vec![0.0; dm.n_global];
                coeffs[g] = 1.0;
                for (p, _) in seg.points.iter().zip(&seg.weights) {
                    let t = p[0];
                    let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                    let trace = |tri: usize| {
                        let coords = mesh.tri_coords(tri);
                        let (b, det) = tri_jacobian(&coords);
                        let binv = [
                            [b[1][1] / det, -b[0][1] / det],
                            [-b[1][0] / det, b[0][0] / det],
                        ];
                        let dx = [x[0] - coords[0][0], x[1] - coords[0][1]];
                        let xref = [
                            binv[0][0] * dx[0] + binv[0][1] * dx[1],
                            binv[1][0] * dx[0] + binv[1][1] * dx[1],
                        ];
                        let (vals, _) = eval_vector(mesh, &dm, &coeffs, tri, &[xref]);
                        vals[0][0] * e.unit_normal[0] + vals[0][1] * e.unit_normal[1]
                    };
                    let d = (trace(t1) - trace(t2)).abs();
                    assert!(d <= tol, "dof {g} jump {d} at edge {}", e.id);
                }
            }
        }
    }

    #[test]
    fn hdiv_normal_trace_continuity() {
        // includes a skewed pair, a structured mesh and a refined mesh
        let skew =
            build_mesh(&[[0.0, 0.0], [1.0, 0.0], [0.3, 1.2], [1.4, 0.9]], &[[0, 1, 2], [1, 3, 2]])
                .unwrap();
        check_hdiv_conformity(&skew, SpaceKind::RT0, 1e-11);
        check_hdiv_conformity(&skew, SpaceKind::RT1, 1e-11);
        let cc = criss_cross(2);
        let refined = cc.refine(&[0, 3, 5]).unwrap();
        check_hdiv_conformity(&refined, SpaceKind::RT0, 1e-11);
        check_hdiv_conformity(&refined, SpaceKind::RT1, 1e-11);
    }

    #[test]
    fn interpolate_constant_field_exact() {
        let mesh = criss_cross(2);
        for k in [0usize, 1] {
            let coeffs = interpolate_rt(&mesh, |_, _| [1.0, 0.0], k).unwrap();
            let dm = DofMap::build(&mesh, SpaceKind::rt(k).unwrap());
            let pts = [[0.25, 0.25], [0.1, 0.6], [0.3, 0.35]];
            for t in 0..mesh.n_triangles() {
                let (vals, divs) = eval_vector(&mesh, &dm, &coeffs, t, &pts);
                for (v, d) in vals.iter().zip(&divs) {
                    assert!((v[0] - 1.0).abs() <= 1e-12 && v[1].abs() <= 1e-12);
                    assert!(d.abs() <= 1e-11);
                }
            }
        }
    }

    #[test]
    fn commuting_diagram_per_element() {
        // div(I_rt tau) = pi_k(div tau) for polynomial tau of degree k+1
        let cases: [(usize, fn(f64, f64) -> [f64; 2], fn(f64, f64) -> f64); 2] =
            [(0, |x, y| [x, y], |_, _| 2.0), (1, |x, y| [x * x, x * y], |x, _| 3.0 * x)];
        for (k, field, divf) in cases {
            for mesh in [reference_mesh(), criss_cross(2)] {
                let coeffs = interpolate_rt(&mesh, field, k).unwrap();
                let proj = project_l2(&mesh, divf, k).unwrap();
                let rt = DofMap::build(&mesh, SpaceKind::rt(k).unwrap());
                let pk = DofMap::build(&mesh, SpaceKind::pk(k).unwrap());
                let pts = [[1.0 / 3.0, 1.0 / 3.0], [0.2, 0.5], [0.6, 0.1]];
                for t in 0..mesh.n_triangles() {
                    let (_, divs) = eval_vector(&mesh, &rt, &coeffs, t, &pts);
                    let pvals = eval_scalar(&mesh, &pk, &proj, t, &pts);
                    for (d, p) in divs.iter().zip(&pvals) {
                        assert!((d - p).abs() <= 1e-11, "k={k} t={t}: {d} vs {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn project_constant_and_linear() {
        let mesh = reference_mesh();
        let c = project_l2(&mesh, |_, _| 1.0, 0).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14);
        // mean of x over the reference triangle: (1/6) / (1/2) = 1/3
        let c = project_l2(&mesh, |x, _| x, 0).unwrap();
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-14, "{}", c[0]);
    }

    #[test]
    fn projection_idempotent() {
        let mesh = criss_cross(2);
        let field = |x: f64, y: f64| 0.3 - 1.7 * x + 0.4 * y;
        let coeffs = project_l2(&mesh, field, 1).unwrap();
        let dm = DofMap::build(&mesh, SpaceKind::P1dg);
        let pts = [[0.25, 0.3], [0.5, 0.2]];
        for t in 0..mesh.n_triangles() {
            let vals = eval_scalar(&mesh, &dm, &coeffs, t, &pts);
            for (q, v) in vals.iter().enumerate() {
                let x = map_point(&mesh.tri_coords(t), pts[q]);
                assert!((v - field(x[0], x[1])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_order_of_accuracy() {
        // ||tau - I_rt tau||_0 decays at order k+1 on uniform refinements
        let field = |x: f64, y: f64| [(x + y).sin(), (x - y).cos()];
        for k in [0usize, 1] {
            let mut mesh = criss_cross(2);
            let mut errs = Vec::new();
            let mut hs = Vec::new();
            for _ in 0..3 {
                mesh = mesh.uniform_refine().unwrap().uniform_refine().unwrap();
                let coeffs = interpolate_rt(&mesh, field, k).unwrap();
                let dm = DofMap::build(&mesh, SpaceKind::rt(k).unwrap());
                let rule = quadrature(QuadDomain::Triangle, 8).unwrap();
                let mut err2 = 0.0;
                for t in 0..mesh.n_triangles() {
                    let coords = mesh.tri_coords(t);
                    let area = mesh.triangles[t].area;
                    let (vals, _) = eval_vector(&mesh, &dm, &coeffs, t, &rule.points);
                    for (q, w) in rule.weights.iter().enumerate() {
                        let x = map_point(&coords, rule.points[q]);
                        let f = field(x[0], x[1]);
                        let dx = vals[q][0] - f[0];
                        let dy = vals[q][1] - f[1];
                        err2 += w * 2.0 * area * (dx * dx + dy * dy);
                    }
                }
                errs.push(err2.sqrt());
                hs.push(mesh.max_diameter());
            }
            for i in 1..errs.len() {
                let rate = (errs[i - 1] / errs[i]).ln() / (hs[i - 1] / hs[i]).ln();
                assert!(
                    (rate - (k as f64 + 1.0)).abs() <= 0.1,
                    "k={k}: rate {rate} (errors {errs:?})"
                );
            }
        }
    }

    #[test]
    fn unsupported_order_rejected() {
        let mesh = reference_mesh();
        assert!(interpolate_rt(&mesh, |_, _| [0.0, 0.0], 2).is_err());
        assert!(project_l2(&mesh, |_, _| 0.0, 2).is_err());
        assert!(SpaceKind::rt(2).is_err());
    }
}
