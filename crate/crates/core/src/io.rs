//! Mesh import/export: a plain-text vertex/triangle format and a legacy-VTK
//! ASCII unstructured-grid writer with cell data. Numbers are printed in
//! shortest round-trip form, so re-parsing recovers the exact values.

use crate::assembly::Solution;
use crate::mesh::{build_mesh, Mesh, MeshError};
use crate::quadrature::{quadrature, QuadDomain};
use crate::spaces::{self, DofMap, SpaceKind};
use std::io::{self, BufRead, Write};

#[derive(Debug)]
pub enum IoError {
    Io(io::Error),
    Parse { line: usize, message: String },
    Mesh(MeshError),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "i/o error: {e}"),
            IoError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            IoError::Mesh(e) => write!(f, "invalid mesh: {e}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<io::Error> for IoError {
    fn from(e: io::Error) -> Self {
        IoError::Io(e)
    }
}

/// Plain-text format: "VERTICES n", n lines "x y", "TRIANGLES m", m lines
/// "i j k" (0-based).
pub fn write_mesh_text(mesh: &Mesh, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "VERTICES {}", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {}", v.x, v.y)?;
    }
    writeln!(w, "TRIANGLES {}", mesh.n_triangles())?;
    for t in &mesh.triangles {
        writeln!(w, "{} {} {}", t.vertices[0], t.vertices[1], t.vertices[2])?;
    }
    Ok(())
}

pub fn read_mesh_text(r: impl BufRead) -> Result<Mesh, IoError> {
    let mut lines = r.lines().enumerate();
    let mut next_content = || -> Result<(usize, String), IoError> {
        for (i, line) in lines.by_ref() {
            let line = line?;
            let t = line.trim().to_string();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(IoError::Parse { line: 0, message: "unexpected end of file".into() })
    };

    let (ln, header) = next_content()?;
    let n_vertices: usize = match header.strip_prefix("VERTICES") {
        Some(rest) => rest.trim().parse().map_err(|_| IoError::Parse {
            line: ln,
            message: format!("bad vertex count in '{header}'"),
        })?,
        None => {
            return Err(IoError::Parse { line: ln, message: "expected 'VERTICES n'".into() })
        }
    };
    let mut coords = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (ln, line) = next_content()?;
        let mut it = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64, IoError> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| IoError::Parse {
                line: ln,
                message: format!("expected 'x y', got '{line}'"),
            })
        };
        coords.push([parse(it.next())?, parse(it.next())?]);
    }
    let (ln, header) = next_content()?;
    let n_triangles: usize = match header.strip_prefix("TRIANGLES") {
        Some(rest) => rest.trim().parse().map_err(|_| IoError::Parse {
            line: ln,
            message: format!("bad triangle count in '{header}'"),
        })?,
        None => {
            return Err(IoError::Parse { line: ln, message: "expected 'TRIANGLES m'".into() })
        }
    };
    let mut tris = Vec::with_capacity(n_triangles);
    for _ in 0..n_triangles {
        let (ln, line) = next_content()?;
        let mut it = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize, IoError> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| IoError::Parse {
                line: ln,
                message: format!("expected 'i j k', got '{line}'"),
            })
        };
        tris.push([parse(it.next())?, parse(it.next())?, parse(it.next())?]);
    }
    build_mesh(&coords, &tris).map_err(IoError::Mesh)
}

/// Element means of the solution: cell scalar u (the P0 coefficient for
/// k = 0) and the cell-averaged flux vector.
pub fn cell_averages(mesh: &Mesh, solution: &Solution) -> (Vec<f64>, Vec<[f64; 2]>) {
    let nt = mesh.n_triangles();
    match solution {
        Solution::Flux { k, sigma, u, .. } => {
            let rt = DofMap::build(mesh, SpaceKind::rt(*k).unwrap());
            let rule = quadrature(QuadDomain::Triangle, 2).unwrap();
            let mut us = Vec::with_capacity(nt);
            let mut ss = Vec::with_capacity(nt);
            for t in 0..nt {
                if *k == 0 {
                    us.push(u[t]);
                } else {
                    us.push((u[3 * t] + u[3 * t + 1] + u[3 * t + 2]) / 3.0);
                }
                let (vals, _) = spaces::eval_vector(mesh, &rt, sigma, t, &rule.points);
                let mut avg = [0.0, 0.0];
                for (v, w) in vals.iter().zip(&rule.weights) {
                    avg[0] += 2.0 * w * v[0];
                    avg[1] += 2.0 * w * v[1];
                }
                ss.push(avg);
            }
            (us, ss)
        }
        Solution::Continuous { u } => {
            let mut us = Vec::with_capacity(nt);
            for t in 0..nt {
                let tv = mesh.triangles[t].vertices;
                us.push((u[tv[0]] + u[tv[1]] + u[tv[2]]) / 3.0);
            }
            let ss = vec![[0.0, 0.0]; nt];
            (us, ss)
        }
    }
}

/// Legacy-VTK ASCII unstructured grid with optional cell data.
pub fn write_vtk(
    mesh: &Mesh,
    cell_u: Option<&[f64]>,
    cell_sigma: Option<&[[f64; 2]]>,
    mut w: impl Write,
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "fluxls transport solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} 0", v.x, v.y)?;
    }
    let m = mesh.n_triangles();
    writeln!(w, "CELLS {} {}", m, 4 * m)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t.vertices[0], t.vertices[1], t.vertices[2])?;
    }
    writeln!(w, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(w, "5")?;
    }
    if cell_u.is_some() || cell_sigma.is_some() {
        writeln!(w, "CELL_DATA {m}")?;
    }
    if let Some(u) = cell_u {
        writeln!(w, "SCALARS u double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in u {
            writeln!(w, "{v}")?;
        }
    }
    if let Some(s) = cell_sigma {
        writeln!(w, "VECTORS sigma_avg double")?;
        for v in s {
            writeln!(w, "{} {} 0", v[0], v[1])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::MethodKind;
    use crate::mesh::criss_cross;
    use proptest::prelude::*;

    #[test]
    fn mesh_text_round_trip_exact() {
        let mesh = criss_cross(3).refine(&[0, 4, 7]).unwrap();
        let mut buf = Vec::new();
        write_mesh_text(&mesh, &mut buf).unwrap();
        let back = read_mesh_text(buf.as_slice()).unwrap();
        assert_eq!(back.n_vertices(), mesh.n_vertices());
        assert_eq!(back.n_triangles(), mesh.n_triangles());
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
    }

    #[test]
    fn mesh_text_rejects_garbage() {
        let r = read_mesh_text("VERTICES two\n".as_bytes());
        assert!(matches!(r, Err(IoError::Parse { .. })));
        let r = read_mesh_text("VERTICES 1\n0.5\n".as_bytes());
        assert!(matches!(r, Err(IoError::Parse { .. })));
    }

    #[test]
    fn vtk_counts_and_cell_scalars() {
        let mesh = criss_cross(1);
        let u = vec![0.25, -1.5];
        let sigma = vec![[1.0, 2.0], [3.0, 4.0]];
        let mut buf = Vec::new();
        write_vtk(&mesh, Some(&u), Some(&sigma), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 4 double"));
        assert!(text.contains("CELLS 2 8"));
        // cell scalars are the P0 coefficients verbatim
        assert!(text.contains("\n0.25\n"));
        assert!(text.contains("\n-1.5\n"));
    }

    #[test]
    fn vtk_coordinates_reparse_exactly() {
        let mesh = criss_cross(2).refine(&[1, 3]).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mesh, None, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        while let Some(l) = lines.next() {
            if l.starts_with("POINTS") {
                break;
            }
        }
        for v in &mesh.vertices {
            let l = lines.next().unwrap();
            let mut it = l.split_whitespace();
            let x: f64 = it.next().unwrap().parse().unwrap();
            let y: f64 = it.next().unwrap().parse().unwrap();
            assert_eq!(x, v.x, "x of vertex {}", v.id);
            assert_eq!(y, v.y, "y of vertex {}", v.id);
        }
    }

    #[test]
    fn cell_averages_p0_are_coefficients() {
        let mesh = {
            let mut m = criss_cross(2);
            m.classify_boundary(|_, _| [1.0, 0.0]);
            m
        };
        let u: Vec<f64> = (0..mesh.n_triangles()).map(|t| t as f64).collect();
        let sigma = vec![0.0; mesh.n_edges()];
        let sol = Solution::Flux { method: MethodKind::Lsfem, k: 0, sigma, u: u.clone() };
        let (us, _) = cell_averages(&mesh, &sol);
        assert_eq!(us, u);
    }

    proptest! {
        /// write -> read -> write is a fixed point of the text format
        #[test]
        fn mesh_text_write_read_write_stable(seed in 0u64..1000) {
            let mesh = criss_cross(2);
            let marked: Vec<usize> = (0..mesh.n_triangles())
                .filter(|t| (t + seed as usize) % 3 == 0)
                .collect();
            let mesh = if marked.is_empty() { mesh } else { mesh.refine(&marked).unwrap() };
            let mut buf1 = Vec::new();
            write_mesh_text(&mesh, &mut buf1).unwrap();
            let back = read_mesh_text(buf1.as_slice()).unwrap();
            let mut buf2 = Vec::new();
            write_mesh_text(&back, &mut buf2).unwrap();
            prop_assert_eq!(buf1, buf2);
        }
    }
}
