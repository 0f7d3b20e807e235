//! Split quadrature for elements cut by a known discontinuity.
//!
//! Lines are clipped exactly; circle arcs are approximated by a short chord
//! fan per element. The split integral is assembled as (integral of the
//! positive branch over the whole element) plus (branch difference over the
//! negative-side polygon), so only one clipped region is ever needed.

use crate::mesh::Mesh;
use crate::problems::Interface;
use crate::quadrature::{quadrature, QuadDomain};
use crate::spaces::tri_jacobian;

/// Chords used to approximate a circle inside one element.
const CIRCLE_CHORDS: usize = 8;

/// Whether the interface passes through the interior of triangle `t`.
/// Elements merely touching the interface along an edge or vertex (aligned
/// meshes) are not cut.
pub fn is_cut(mesh: &Mesh, t: usize, iface: &Interface) -> bool {
    let coords = mesh.tri_coords(t);
    let tol = 1e-12 * mesh.triangles[t].diameter.max(1.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    // vertices, edge midpoints and the centroid: catches arcs that cross an
    // edge without separating the vertices
    let mut probe = |p: [f64; 2]| {
        let s = iface.side(p[0], p[1]);
        lo = lo.min(s);
        hi = hi.max(s);
    };
    for i in 0..3 {
        probe(coords[i]);
        let q = coords[(i + 1) % 3];
        probe([0.5 * (coords[i][0] + q[0]), 0.5 * (coords[i][1] + q[1])]);
    }
    probe([
        (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0,
        (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0,
    ]);
    lo < -tol && hi > tol
}

/// Sutherland-Hodgman clip of a polygon against the half-plane s(p) <= 0.
fn clip_halfplane(poly: &[[f64; 2]], s: impl Fn([f64; 2]) -> f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = s(p);
        let sq = s(q);
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Polygonal approximation of the negative side of the interface inside
/// triangle `t` (exact for lines).
fn negative_polygon(coords: &[[f64; 2]; 3], iface: &Interface) -> Vec<[f64; 2]> {
    let tri = coords.to_vec();
    match *iface {
        Interface::Line { a, b, c } => clip_halfplane(&tri, |p| a * p[0] + b * p[1] + c),
        Interface::Circle { cx, cy, r } => {
            // chord fan over the angular span of the element
            let theta0 = {
                let gx = (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0 - cx;
                let gy = (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0 - cy;
                gy.atan2(gx)
            };
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in coords {
                let mut d = (p[1] - cy).atan2(p[0] - cx) - theta0;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                while d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let mut poly = tri;
            for i in 0..CIRCLE_CHORDS {
                let t1 = theta0 + lo + (hi - lo) * i as f64 / CIRCLE_CHORDS as f64;
                let t2 = theta0 + lo + (hi - lo) * (i + 1) as f64 / CIRCLE_CHORDS as f64;
                let a = [cx + r * t1.cos(), cy + r * t1.sin()];
                let b = [cx + r * t2.cos(), cy + r * t2.sin()];
                // outward chord normal (away from the center)
                let mid = [0.5 * (a[0] + b[0]) - cx, 0.5 * (a[1] + b[1]) - cy];
                poly = clip_halfplane(&poly, |p| {
                    (p[0] - a[0]) * mid[0] + (p[1] - a[1]) * mid[1]
                });
                if poly.len() < 3 {
                    return Vec::new();
                }
            }
            poly
        }
    }
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Integrate `f(x, y, parent_ref_point, side)` over triangle `t`, evaluating
/// the branch selected by `side` (+1/-1 forced, independent of rounding at
/// the interface). Exact line splits; chord-approximated circles.
pub fn split_integral(
    mesh: &Mesh,
    t: usize,
    iface: &Interface,
    degree: usize,
    f: impl Fn(f64, f64, [f64; 2], f64) -> f64,
) -> f64 {
    let rule = quadrature(QuadDomain::Triangle, degree).unwrap();
    let coords = mesh.tri_coords(t);
    let area = mesh.triangles[t].area;
    let (b, det) = tri_jacobian(&coords);
    let binv = [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
    let to_ref = |x: f64, y: f64| {
        let dx = [x - coords[0][0], y - coords[0][1]];
        [binv[0][0] * dx[0] + binv[0][1] * dx[1], binv[1][0] * dx[0] + binv[1][1] * dx[1]]
    };

    // positive branch over the whole element
    let mut total = 0.0;
    for (q, w) in rule.points.iter().zip(&rule.weights) {
        let x = coords[0][0] + b[0][0] * q[0] + b[0][1] * q[1];
        let y = coords[0][1] + b[1][0] * q[0] + b[1][1] * q[1];
        total += w * 2.0 * area * f(x, y, *q, 1.0);
    }

    // branch difference over the negative-side polygon
    let poly = negative_polygon(&coords, iface);
    if poly.len() >= 3 {
        for i in 1..poly.len() - 1 {
            let sub = [poly[0], poly[i], poly[i + 1]];
            let sub_area = polygon_area(&sub);
            if sub_area.abs() < 1e-30 {
                continue;
            }
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let x = sub[0][0]
                    + (sub[1][0] - sub[0][0]) * q[0]
                    + (sub[2][0] - sub[0][0]) * q[1];
                let y = sub[0][1]
                    + (sub[1][1] - sub[0][1]) * q[0]
                    + (sub[2][1] - sub[0][1]) * q[1];
                let rq = to_ref(x, y);
                total += w * 2.0 * sub_area * (f(x, y, rq, -1.0) - f(x, y, rq, 1.0));
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, criss_cross};

    #[test]
    fn halfplane_clip_of_reference_triangle() {
        // clip by y - x <= 0: remaining polygon (0,0), (1,0), (1/2,1/2)
        let poly = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let c = clip_halfplane(&poly, |p| p[1] - p[0]);
        assert!((polygon_area(&c) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn line_split_indicator_area() {
        // integral of the negative-side indicator over the reference
        // triangle cut by y = x: area 1/4
        let mesh = build_mesh(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0, 1, 2]]).unwrap();
        let iface = Interface::Line { a: -1.0, b: 1.0, c: 0.0 };
        assert!(is_cut(&mesh, 0, &iface));
        let v = split_integral(&mesh, 0, &iface, 4, |_, _, _, side| {
            if side < 0.0 {
                1.0
            } else {
                0.0
            }
        });
        assert!((v - 0.25).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn aligned_elements_not_cut() {
        let mesh = criss_cross(2);
        let iface = Interface::Line { a: -1.0, b: 1.0, c: 0.0 };
        for t in 0..mesh.n_triangles() {
            assert!(!is_cut(&mesh, t, &iface), "triangle {t} flagged as cut");
        }
    }

    #[test]
    fn circle_split_disk_area() {
        // area of the quarter disk r < 1/2 inside the unit square: pi/16
        let mesh = criss_cross(8);
        let iface = Interface::Circle { cx: 0.0, cy: 0.0, r: 0.5 };
        let mut area = 0.0;
        for t in 0..mesh.n_triangles() {
            if is_cut(&mesh, t, &iface) {
                area += split_integral(&mesh, t, &iface, 4, |_, _, _, side| {
                    if side < 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                });
            } else {
                let c = mesh.tri_coords(t);
                let gx = (c[0][0] + c[1][0] + c[2][0]) / 3.0;
                let gy = (c[0][1] + c[1][1] + c[2][1]) / 3.0;
                if iface.side(gx, gy) < 0.0 {
                    area += mesh.triangles[t].area;
                }
            }
        }
        let exact = std::f64::consts::PI / 16.0;
        assert!((area - exact).abs() < 1e-4, "area {area} vs {exact}");
    }

    #[test]
    fn split_matches_plain_quadrature_for_smooth_integrand() {
        // when both branches are the same function the split integral must
        // reproduce the plain one
        let mesh = criss_cross(2);
        let iface = Interface::Line { a: 1.0, b: -0.3, c: -0.4 };
        let f = |x: f64, y: f64| (x * y).cos() + x;
        for t in 0..mesh.n_triangles() {
            let split = split_integral(&mesh, t, &iface, 8, |x, y, _, _| f(x, y));
            let rule = quadrature(QuadDomain::Triangle, 8).unwrap();
            let coords = mesh.tri_coords(t);
            let area = mesh.triangles[t].area;
            let mut plain = 0.0;
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let x = crate::spaces::map_point(&coords, *q);
                plain += w * 2.0 * area * f(x[0], x[1]);
            }
            assert!((split - plain).abs() < 1e-12, "t={t}: {split} vs {plain}");
        }
    }
}
