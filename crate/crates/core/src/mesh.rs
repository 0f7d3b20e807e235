//! Conforming 2D triangulations with longest-edge bisection refinement.
//!
//! Edges carry a global orientation (lower vertex id first); the sign stored
//! per triangle relates its outward normal on that edge to the global one and
//! fixes the Raviart-Thomas degree-of-freedom orientation. Boundary edges are
//! classified against the advection field into inflow / outflow /
//! characteristic parts.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Classification of an edge against the advection field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    Interior,
    Inflow,
    Outflow,
    Characteristic,
}

#[derive(Debug, Clone, Copy)]
pub struct Vertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn pos(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: usize,
    /// Endpoint vertex ids, lower id first (global orientation).
    pub vertices: [usize; 2],
    /// Adjacent triangles; boundary edges have exactly one.
    pub triangles: [Option<usize>; 2],
    pub length: f64,
    /// Unit normal: outward for boundary edges, else the right-hand normal
    /// of the global vertex-pair direction.
    pub unit_normal: [f64; 2],
    pub boundary_class: BoundaryClass,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }

    /// The triangle on the other side, if any.
    pub fn other_triangle(&self, tri: usize) -> Option<usize> {
        match self.triangles {
            [Some(a), b] if a == tri => b,
            [a, Some(b)] if b == tri => a,
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Triangle {
    pub id: usize,
    /// Vertex ids in counterclockwise order.
    pub vertices: [usize; 3],
    /// edges[i] is opposite vertices[i].
    pub edges: [usize; 3],
    /// +1 if the local outward normal on edges[i] equals the global edge
    /// normal, -1 otherwise.
    pub edge_signs: [f64; 3],
    pub area: f64,
    pub diameter: f64,
}

/// Maps new boundary vertices onto a curved true boundary.
#[derive(Clone)]
pub struct GeometryDescriptor {
    snap: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>,
}

impl GeometryDescriptor {
    pub fn new(snap: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self { snap: Arc::new(snap) }
    }

    pub fn snap(&self, p: [f64; 2]) -> [f64; 2] {
        (self.snap)(p)
    }

    /// Radial projection onto the unit circle for points off the x-axis;
    /// points on the axis (the straight part of a half-disk) are left alone.
    pub fn upper_unit_circle() -> Self {
        Self::new(|p| {
            if p[1] > 1e-12 {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                [p[0] / r, p[1] / r]
            } else {
                p
            }
        })
    }
}

impl fmt::Debug for GeometryDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GeometryDescriptor")
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub triangles: Vec<Triangle>,
    /// Refinement level counter.
    pub generation: u32,
    pub snapper: Option<GeometryDescriptor>,
    /// Set once classify_boundary has run.
    pub classified: bool,
    /// For refined meshes: ancestor triangle id (in the mesh refine was
    /// called on) of each triangle. Empty for freshly built meshes.
    pub parents: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshError {
    InvalidVertexRef { triangle: usize, vertex: usize },
    DuplicateTriangle { first: usize, second: usize },
    /// An edge shared by more than two triangles.
    NonConforming { vertices: [usize; 2], triangles: usize },
    DegenerateTriangle { triangle: usize, area: f64, diameter: f64 },
    VertexCapExceeded { vertices: usize, cap: usize },
    UnknownTriangle { id: usize },
    EmptyMarkedSet,
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::InvalidVertexRef { triangle, vertex } => {
                write!(f, "triangle {triangle} references unknown vertex {vertex}")
            }
            MeshError::DuplicateTriangle { first, second } => {
                write!(f, "triangles {first} and {second} have the same vertex set")
            }
            MeshError::NonConforming { vertices, triangles } => write!(
                f,
                "edge ({}, {}) is shared by {} triangles",
                vertices[0], vertices[1], triangles
            ),
            MeshError::DegenerateTriangle { triangle, area, diameter } => write!(
                f,
                "triangle {triangle} is degenerate (area {area:e}, diameter {diameter:e})"
            ),
            MeshError::VertexCapExceeded { vertices, cap } => {
                write!(f, "refinement produced {vertices} vertices, exceeding the cap {cap}")
            }
            MeshError::UnknownTriangle { id } => write!(f, "unknown triangle id {id}"),
            MeshError::EmptyMarkedSet => write!(f, "refine called with no marked triangles"),
        }
    }
}

impl std::error::Error for MeshError {}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Build a conforming mesh from vertex coordinates and triangle vertex
/// triples. Clockwise triangles are reoriented; edges, adjacency, normals
/// and signs are derived.
pub fn build_mesh(coords: &[[f64; 2]], tris: &[[usize; 3]]) -> Result<Mesh, MeshError> {
    let vertices: Vec<Vertex> = coords
        .iter()
        .enumerate()
        .map(|(id, c)| Vertex { id, x: c[0], y: c[1] })
        .collect();

    // Orient counterclockwise, reject degenerate triangles.
    let mut tri_verts: Vec<[usize; 3]> = Vec::with_capacity(tris.len());
    let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
    for (t, tv) in tris.iter().enumerate() {
        for &v in tv {
            if v >= vertices.len() {
                return Err(MeshError::InvalidVertexRef { triangle: t, vertex: v });
            }
        }
        let mut key = *tv;
        key.sort_unstable();
        if key[0] == key[1] || key[1] == key[2] {
            return Err(MeshError::DegenerateTriangle { triangle: t, area: 0.0, diameter: 0.0 });
        }
        if let Some(&first) = seen.get(&key) {
            return Err(MeshError::DuplicateTriangle { first, second: t });
        }
        seen.insert(key, t);

        let p = |i: usize| vertices[tv[i]].pos();
        let mut tv = *tv;
        let sa = signed_area(p(0), p(1), p(2));
        if sa < 0.0 {
            tv.swap(1, 2);
        }
        let q = |i: usize| vertices[tv[i]].pos();
        let area = signed_area(q(0), q(1), q(2));
        let diameter = dist(q(0), q(1)).max(dist(q(1), q(2))).max(dist(q(2), q(0)));
        if area <= 1e-14 * diameter * diameter {
            return Err(MeshError::DegenerateTriangle { triangle: t, area, diameter });
        }
        tri_verts.push(tv);
    }

    // Discover edges in deterministic (triangle, local-edge) order.
    let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut triangles: Vec<Triangle> = Vec::with_capacity(tri_verts.len());
    for (t, tv) in tri_verts.iter().enumerate() {
        let p = |i: usize| vertices[tv[i]].pos();
        let area = signed_area(p(0), p(1), p(2));
        let diameter = dist(p(0), p(1)).max(dist(p(1), p(2))).max(dist(p(2), p(0)));
        let mut tri = Triangle {
            id: t,
            vertices: *tv,
            edges: [0; 3],
            edge_signs: [1.0; 3],
            area,
            diameter,
        };
        for i in 0..3 {
            let a = tv[(i + 1) % 3];
            let b = tv[(i + 2) % 3];
            let key = (a.min(b), a.max(b));
            let eid = *edge_ids.entry(key).or_insert_with(|| {
                let id = edges.len();
                let pa = vertices[key.0].pos();
                let pb = vertices[key.1].pos();
                let length = dist(pa, pb);
                let dirx = (pb[0] - pa[0]) / length;
                let diry = (pb[1] - pa[1]) / length;
                edges.push(Edge {
                    id,
                    vertices: [key.0, key.1],
                    triangles: [None, None],
                    length,
                    // right-hand normal of the a -> b direction
                    unit_normal: [diry, -dirx],
                    boundary_class: BoundaryClass::Interior,
                });
                id
            });
            let e = &mut edges[eid];
            if e.triangles[0].is_none() {
                e.triangles[0] = Some(t);
            } else if e.triangles[1].is_none() {
                e.triangles[1] = Some(t);
            } else {
                return Err(MeshError::NonConforming { vertices: e.vertices, triangles: 3 });
            }
            tri.edges[i] = eid;
            // Local traversal a -> b is counterclockwise, so the local
            // outward normal matches the global normal iff a < b.
            tri.edge_signs[i] = if a < b { 1.0 } else { -1.0 };
        }
        triangles.push(tri);
    }

    // Boundary edges store the outward normal.
    for e in &mut edges {
        if e.triangles[1].is_none() {
            let t = e.triangles[0].expect("edge without adjacent triangle");
            let tri = &triangles[t];
            let loc = tri.edges.iter().position(|&x| x == e.id).unwrap();
            let s = tri.edge_signs[loc];
            e.unit_normal = [s * e.unit_normal[0], s * e.unit_normal[1]];
            e.boundary_class = BoundaryClass::Characteristic;
        }
    }
    // With the outward normal stored, a boundary edge's sign becomes +1 by
    // definition; rewrite so sign * unit_normal is always the local outward
    // normal.
    for tri in &mut triangles {
        for i in 0..3 {
            if edges[tri.edges[i]].is_boundary() {
                tri.edge_signs[i] = 1.0;
            }
        }
    }

    Ok(Mesh {
        vertices,
        edges,
        triangles,
        generation: 0,
        snapper: None,
        classified: false,
        parents: Vec::new(),
    })
}

pub const DEFAULT_VERTEX_CAP: usize = 10_000_000;

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn with_snapper(mut self, snapper: GeometryDescriptor) -> Self {
        self.snapper = Some(snapper);
        self
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    pub fn max_diameter(&self) -> f64 {
        self.triangles.iter().map(|t| t.diameter).fold(0.0, f64::max)
    }

    /// Corner coordinates of a triangle.
    pub fn tri_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let tv = self.triangles[t].vertices;
        [self.vertices[tv[0]].pos(), self.vertices[tv[1]].pos(), self.vertices[tv[2]].pos()]
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].vertices;
        let pa = self.vertices[a].pos();
        let pb = self.vertices[b].pos();
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in &self.triangles {
            let p = self.tri_coords(t.id);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cross = u[0] * v[1] - u[1] * v[0];
                let dot = u[0] * v[0] + u[1] * v[1];
                min = min.min(cross.atan2(dot).abs());
            }
        }
        min
    }

    /// Label boundary edges by the sign of beta . n at the edge midpoint.
    pub fn classify_boundary(&mut self, beta: impl Fn(f64, f64) -> [f64; 2]) {
        for e in 0..self.edges.len() {
            if !self.edges[e].is_boundary() {
                continue;
            }
            let m = self.edge_midpoint(e);
            let b = beta(m[0], m[1]);
            let n = self.edges[e].unit_normal;
            let bn = b[0] * n[0] + b[1] * n[1];
            let eps = 1e-12 * (b[0] * b[0] + b[1] * b[1]).sqrt();
            self.edges[e].boundary_class = if bn < -eps {
                BoundaryClass::Inflow
            } else if bn > eps {
                BoundaryClass::Outflow
            } else {
                BoundaryClass::Characteristic
            };
        }
        self.classified = true;
    }

    pub fn inflow_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.boundary_class == BoundaryClass::Inflow)
    }

    /// Longest-edge bisection of the marked triangles with recursive
    /// conformity closure, under the default vertex cap.
    pub fn refine(&self, marked: &[usize]) -> Result<Mesh, MeshError> {
        self.refine_capped(marked, DEFAULT_VERTEX_CAP)
    }

    /// One bisection pass over every triangle.
    pub fn uniform_refine(&self) -> Result<Mesh, MeshError> {
        let all: Vec<usize> = (0..self.triangles.len()).collect();
        self.refine(&all)
    }

    pub fn refine_capped(&self, marked: &[usize], cap: usize) -> Result<Mesh, MeshError> {
        if marked.is_empty() {
            return Err(MeshError::EmptyMarkedSet);
        }
        for &t in marked {
            if t >= self.triangles.len() {
                return Err(MeshError::UnknownTriangle { id: t });
            }
        }

        let mut scratch = Scratch::from_mesh(self);
        for &t in marked {
            scratch.refine_target(t, cap)?;
        }

        let (coords, tris, parents) = scratch.collect();
        let mut mesh = build_mesh(&coords, &tris)?;
        mesh.generation = self.generation + 1;
        mesh.snapper = self.snapper.clone();
        mesh.parents = parents;
        Ok(mesh)
    }

    /// Structural invariant check; cheap enough for tests and debugging.
    pub fn validate(&self) -> Result<(), String> {
        for t in &self.triangles {
            if t.area <= 0.0 {
                return Err(format!("triangle {} has non-positive area", t.id));
            }
            let p = self.tri_coords(t.id);
            if signed_area(p[0], p[1], p[2]) <= 0.0 {
                return Err(format!("triangle {} is not counterclockwise", t.id));
            }
        }
        for e in &self.edges {
            let pa = self.vertices[e.vertices[0]].pos();
            let pb = self.vertices[e.vertices[1]].pos();
            if (e.length - dist(pa, pb)).abs() > 1e-12 * e.length {
                return Err(format!("edge {} length mismatch", e.id));
            }
            let n = e.unit_normal;
            if ((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() > 1e-12 {
                return Err(format!("edge {} normal not unit", e.id));
            }
            // every adjacent triangle must list this edge
            for t in e.triangles.iter().flatten() {
                if !self.triangles[*t].edges.contains(&e.id) {
                    return Err(format!("edge {} adjacency inconsistent", e.id));
                }
            }
            if let [Some(t1), Some(t2)] = e.triangles {
                let s1 = self.triangles[t1].edge_signs
                    [self.triangles[t1].edges.iter().position(|&x| x == e.id).unwrap()];
                let s2 = self.triangles[t2].edge_signs
                    [self.triangles[t2].edges.iter().position(|&x| x == e.id).unwrap()];
                if s1 * s2 != -1.0 {
                    return Err(format!("edge {} signs not opposite", e.id));
                }
            }
        }
        // Euler relation for simply connected domains.
        let euler =
            self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64;
        if euler != 1 {
            return Err(format!("Euler relation violated: V - E + T = {euler}"));
        }
        Ok(())
    }
}

/// Mutable refinement state: triangles as vertex triples plus an edge ->
/// adjacent-triangles map kept current across bisections.
struct Scratch {
    coords: Vec<[f64; 2]>,
    on_boundary: Vec<bool>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    parent: Vec<usize>,
    adj: HashMap<(usize, usize), [Option<usize>; 2]>,
    snapper: Option<GeometryDescriptor>,
}

impl Scratch {
    fn from_mesh(mesh: &Mesh) -> Self {
        let coords: Vec<[f64; 2]> = mesh.vertices.iter().map(Vertex::pos).collect();
        let mut on_boundary = vec![false; coords.len()];
        let mut adj = HashMap::new();
        for e in &mesh.edges {
            let key = (e.vertices[0], e.vertices[1]);
            adj.insert(key, e.triangles);
            if e.is_boundary() {
                on_boundary[e.vertices[0]] = true;
                on_boundary[e.vertices[1]] = true;
            }
        }
        Scratch {
            coords,
            on_boundary,
            tris: mesh.triangles.iter().map(|t| t.vertices).collect(),
            alive: vec![true; mesh.triangles.len()],
            parent: (0..mesh.triangles.len()).collect(),
            adj,
            snapper: mesh.snapper.clone(),
        }
    }

    fn side_len(&self, a: usize, b: usize) -> f64 {
        dist(self.coords[a], self.coords[b])
    }

    /// Vertex pair of the longest edge of triangle `t` and the opposite
    /// local index. Deterministic: the first of the longest sides in local
    /// order wins.
    fn longest_edge(&self, t: usize) -> (usize, (usize, usize)) {
        let tv = self.tris[t];
        let mut best = 0;
        let mut best_len = -1.0;
        for i in 0..3 {
            let a = tv[(i + 1) % 3];
            let b = tv[(i + 2) % 3];
            let l = self.side_len(a, b);
            if l > best_len {
                best_len = l;
                best = i;
            }
        }
        let a = tv[(best + 1) % 3];
        let b = tv[(best + 2) % 3];
        (best, (a.min(b), a.max(b)))
    }

    fn neighbor_across(&self, t: usize, key: (usize, usize)) -> Option<usize> {
        match self.adj.get(&key) {
            Some([Some(a), b]) if *a == t => *b,
            Some([a, Some(b)]) if *b == t => *a,
            _ => None,
        }
    }

    fn adj_replace(&mut self, key: (usize, usize), old: usize, new: usize) {
        let entry = self.adj.get_mut(&key).expect("edge missing from adjacency");
        if entry[0] == Some(old) {
            entry[0] = Some(new);
        } else if entry[1] == Some(old) {
            entry[1] = Some(new);
        } else {
            panic!("triangle {old} not adjacent to edge {key:?}");
        }
    }

    fn adj_insert(&mut self, key: (usize, usize), t: usize) {
        let entry = self.adj.entry(key).or_insert([None, None]);
        if entry[0].is_none() {
            entry[0] = Some(t);
        } else {
            debug_assert!(entry[1].is_none());
            entry[1] = Some(t);
        }
    }

    /// Split triangle `t` by inserting vertex `m` on its edge `key`.
    fn split_one(&mut self, t: usize, key: (usize, usize), m: usize) {
        let tv = self.tris[t];
        let i = (0..3)
            .find(|&i| {
                let a = tv[(i + 1) % 3];
                let b = tv[(i + 2) % 3];
                (a.min(b), a.max(b)) == key
            })
            .expect("split edge not in triangle");
        let c = tv[i];
        let a = tv[(i + 1) % 3];
        let b = tv[(i + 2) % 3];

        self.alive[t] = false;
        let t1 = self.tris.len();
        self.tris.push([c, a, m]);
        self.alive.push(true);
        self.parent.push(self.parent[t]);
        let t2 = self.tris.len();
        self.tris.push([c, m, b]);
        self.alive.push(true);
        self.parent.push(self.parent[t]);

        self.adj_replace((c.min(a), c.max(a)), t, t1);
        self.adj_replace((c.min(b), c.max(b)), t, t2);
        self.adj_replace((a.min(m), a.max(m)), t, t1);
        self.adj_replace((m.min(b), m.max(b)), t, t2);
        self.adj_insert((c.min(m), c.max(m)), t1);
        self.adj_insert((c.min(m), c.max(m)), t2);
    }

    /// Bisect edge `key` together with all (one or two) adjacent triangles.
    fn bisect_edge(&mut self, key: (usize, usize), cap: usize) -> Result<(), MeshError> {
        let [ta, tb] = *self.adj.get(&key).expect("edge missing");
        let boundary = tb.is_none();
        let pa = self.coords[key.0];
        let pb = self.coords[key.1];
        let mut mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        if boundary {
            if let Some(s) = &self.snapper {
                mid = s.snap(mid);
            }
        }
        if self.coords.len() + 1 > cap {
            return Err(MeshError::VertexCapExceeded { vertices: self.coords.len() + 1, cap });
        }
        let m = self.coords.len();
        self.coords.push(mid);
        self.on_boundary.push(boundary);

        // Replace the split edge by its halves. Pre-register the adjacent
        // triangles on both halves; split_one swaps them for the children.
        self.adj.remove(&key);
        let half1 = (key.0.min(m), key.0.max(m));
        let half2 = (key.1.min(m), key.1.max(m));
        self.adj.insert(half1, [None, None]);
        self.adj.insert(half2, [None, None]);
        for t in [ta, tb].into_iter().flatten() {
            self.adj_insert(half1, t);
            self.adj_insert(half2, t);
        }
        for t in [ta, tb].into_iter().flatten() {
            self.split_one(t, key, m);
        }
        Ok(())
    }

    /// Refine target triangle `t` by longest-edge bisection, recursively
    /// bisecting neighbors first when their longest edge differs (LEPP).
    fn refine_target(&mut self, t: usize, cap: usize) -> Result<(), MeshError> {
        while self.alive[t] {
            // walk the longest-edge propagation path from t
            let mut cur = t;
            let mut seen = vec![t];
            loop {
                let (_, key) = self.longest_edge(cur);
                match self.neighbor_across(cur, key) {
                    None => {
                        self.bisect_edge(key, cap)?;
                        break;
                    }
                    Some(nb) => {
                        let (_, nb_key) = self.longest_edge(nb);
                        if nb_key == key || seen.contains(&nb) {
                            // terminal pair (or an exact-tie cycle: splitting
                            // the shared edge is still conforming)
                            self.bisect_edge(key, cap)?;
                            break;
                        }
                        seen.push(nb);
                        cur = nb;
                    }
                }
            }
        }
        Ok(())
    }

    fn collect(self) -> (Vec<[f64; 2]>, Vec<[usize; 3]>, Vec<usize>) {
        let mut tris = Vec::new();
        let mut parents = Vec::new();
        for (i, tv) in self.tris.iter().enumerate() {
            if self.alive[i] {
                tris.push(*tv);
                parents.push(self.parent[i]);
            }
        }
        (self.coords, tris, parents)
    }
}

/// n x n criss-cross triangulation of the unit square, all diagonals
/// parallel to (1,1).
pub fn criss_cross(n: usize) -> Mesh {
    assert!(n >= 1);
    let mut coords = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            coords.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let p00 = id(i, j);
            let p10 = id(i + 1, j);
            let p11 = id(i + 1, j + 1);
            let p01 = id(i, j + 1);
            tris.push([p00, p10, p11]);
            tris.push([p00, p11, p01]);
        }
    }
    build_mesh(&coords, &tris).expect("criss-cross mesh is valid")
}
