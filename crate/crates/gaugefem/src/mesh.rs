//! Oriented 2D simplicial meshes of the unit square, either with a boundary or
//! with periodic (flat torus) identification.
//!
//! Edges carry a global orientation (ascending identified vertex index); each
//! triangle stores, per edge, whether that direction agrees with its own
//! counterclockwise traversal. Periodic meshes keep unwrapped corner
//! coordinates per triangle so that every element sees contiguous geometry.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::io::Write;

/// One edge as seen from one triangle.
#[derive(Clone, Copy, Debug)]
pub struct TriEdge {
    /// Global edge index.
    pub edge: usize,
    /// Corner slot (0..3) where the global edge parametrization starts.
    pub from_slot: u8,
    /// Corner slot where it ends.
    pub to_slot: u8,
    /// Whether the global direction agrees with the triangle's CCW traversal.
    pub ccw: bool,
}

/// Affine map from the reference triangle (0,0), (1,0), (0,1) to an element.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry<S> {
    pub origin: [S; 2],
    /// Jacobian columns: (p1 - p0), (p2 - p0).
    pub jac: [[S; 2]; 2],
    pub inv_jac: [[S; 2]; 2],
    pub det: S,
}

impl<S: Real> ElementGeometry<S> {
    pub fn to_physical(&self, xr: S, yr: S) -> [S; 2] {
        [
            self.origin[0] + self.jac[0][0] * xr + self.jac[0][1] * yr,
            self.origin[1] + self.jac[1][0] * xr + self.jac[1][1] * yr,
        ]
    }

    pub fn to_reference(&self, x: S, y: S) -> [S; 2] {
        let dx = x - self.origin[0];
        let dy = y - self.origin[1];
        [
            self.inv_jac[0][0] * dx + self.inv_jac[0][1] * dy,
            self.inv_jac[1][0] * dx + self.inv_jac[1][1] * dy,
        ]
    }
}

/// Oriented triangulation of the unit square or flat torus.
#[derive(Clone, Debug)]
pub struct Mesh<S> {
    vertices: Vec<[S; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_corners: Vec<[[S; 2]; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[TriEdge; 3]>,
    boundary_edges: Vec<bool>,
    boundary_vertices: Vec<bool>,
    periodic: bool,
}

/// Triangulate the unit square `[0,1]^2` into `2 nx ny` triangles, splitting
/// each grid cell along its up-right diagonal. With `periodic`, opposite sides
/// are identified (flat torus); this needs `nx, ny >= 3` so that vertex pairs
/// identify edges uniquely.
pub fn structured_square<S: Real>(nx: usize, ny: usize, periodic: bool) -> Result<Mesh<S>> {
    let min = if periodic { 3 } else { 1 };
    if nx < min || ny < min {
        return Err(Error::InvalidParameter {
            name: "nx/ny",
            reason: format!(
                "need at least {min} subdivisions per side ({})",
                if periodic { "periodic" } else { "bounded" }
            ),
        });
    }
    let (nvx, nvy) = if periodic {
        (nx, ny)
    } else {
        (nx + 1, ny + 1)
    };
    let vid = |i: usize, j: usize| -> usize {
        if periodic {
            (j % ny) * nx + (i % nx)
        } else {
            j * (nx + 1) + i
        }
    };
    let hx = S::one() / S::of_usize(nx);
    let hy = S::one() / S::of_usize(ny);
    let mut vertices = vec![[S::zero(); 2]; nvx * nvy];
    for j in 0..nvy {
        for i in 0..nvx {
            vertices[vid(i, j)] = [S::of_usize(i) * hx, S::of_usize(j) * hy];
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let mut tri_corners = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = |di: usize, dj: usize| -> [S; 2] {
                [S::of_usize(i + di) * hx, S::of_usize(j + dj) * hy]
            };
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            tri_corners.push([p(0, 0), p(1, 0), p(1, 1)]);
            triangles.push([v00, v11, v01]);
            tri_corners.push([p(0, 0), p(1, 1), p(0, 1)]);
        }
    }

    // Edges keyed by the identified (lo, hi) vertex pair.
    let mut edge_index: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut tri_edges = Vec::with_capacity(triangles.len());
    for tri in &triangles {
        let mut tes = [TriEdge {
            edge: 0,
            from_slot: 0,
            to_slot: 0,
            ccw: false,
        }; 3];
        for (slot, (sa, sb)) in [(0usize, 1usize), (1, 2), (2, 0)].iter().enumerate() {
            let (a, b) = (tri[*sa], tri[*sb]);
            if a == b {
                return Err(Error::InvalidParameter {
                    name: "nx/ny",
                    reason: "degenerate periodic identification".into(),
                });
            }
            let key = (a.min(b), a.max(b));
            let e = *edge_index.entry(key).or_insert_with(|| {
                edges.push([key.0, key.1]);
                edges.len() - 1
            });
            let ascending = a < b;
            tes[slot] = TriEdge {
                edge: e,
                from_slot: if ascending { *sa as u8 } else { *sb as u8 },
                to_slot: if ascending { *sb as u8 } else { *sa as u8 },
                ccw: ascending,
            };
        }
        tri_edges.push(tes);
    }

    let mut adjacency = vec![0usize; edges.len()];
    for tes in &tri_edges {
        for te in tes {
            adjacency[te.edge] += 1;
        }
    }
    if adjacency.iter().any(|&c| c > 2) {
        return Err(Error::InvalidParameter {
            name: "nx/ny",
            reason: "edge shared by more than two triangles (identification clash)".into(),
        });
    }
    let boundary_edges: Vec<bool> = adjacency.iter().map(|&c| c == 1).collect();
    let mut boundary_vertices = vec![false; vertices.len()];
    for (e, bnd) in boundary_edges.iter().enumerate() {
        if *bnd {
            boundary_vertices[edges[e][0]] = true;
            boundary_vertices[edges[e][1]] = true;
        }
    }

    let mesh = Mesh {
        vertices,
        triangles,
        tri_corners,
        edges,
        tri_edges,
        boundary_edges,
        boundary_vertices,
        periodic,
    };
    debug_assert!(mesh.min_signed_area() > S::zero());
    Ok(mesh)
}

impl<S: Real> Mesh<S> {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn vertex(&self, v: usize) -> [S; 2] {
        self.vertices[v]
    }

    pub fn triangle(&self, k: usize) -> [usize; 3] {
        self.triangles[k]
    }

    /// Unwrapped corner coordinates of triangle `k`, counterclockwise.
    pub fn corners(&self, k: usize) -> [[S; 2]; 3] {
        self.tri_corners[k]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn tri_edges(&self, k: usize) -> &[TriEdge; 3] {
        &self.tri_edges[k]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edges[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertices[v]
    }

    /// Endpoints of edge `le` of triangle `k` in the global parametrization
    /// direction, as unwrapped coordinates.
    pub fn edge_endpoints(&self, k: usize, le: usize) -> ([S; 2], [S; 2]) {
        let te = self.tri_edges[k][le];
        (
            self.tri_corners[k][te.from_slot as usize],
            self.tri_corners[k][te.to_slot as usize],
        )
    }

    pub fn element_geometry(&self, k: usize) -> ElementGeometry<S> {
        let c = self.tri_corners[k];
        let jac = [
            [c[1][0] - c[0][0], c[2][0] - c[0][0]],
            [c[1][1] - c[0][1], c[2][1] - c[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_jac = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        ElementGeometry {
            origin: c[0],
            jac,
            inv_jac,
            det,
        }
    }

    pub fn area(&self, k: usize) -> S {
        self.element_geometry(k).det * S::lit(0.5)
    }

    pub fn min_signed_area(&self) -> S {
        (0..self.n_triangles())
            .map(|k| self.area(k))
            .fold(S::infinity(), |a, b| a.min(b))
    }

    pub fn min_edge_length(&self) -> S {
        let mut best = S::infinity();
        for k in 0..self.n_triangles() {
            for le in 0..3 {
                let (p, q) = self.edge_endpoints(k, le);
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                best = best.min((dx * dx + dy * dy).sqrt());
            }
        }
        best
    }

    /// Euler characteristic `V - E + T`.
    pub fn euler_characteristic(&self) -> isize {
        self.n_vertices() as isize - self.n_edges() as isize + self.n_triangles() as isize
    }

    /// Plain-text dump for debugging: one vertex per line, then one triangle
    /// per line (see the header comments in the output).
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# mesh: {} vertices, {} edges, {} triangles, periodic={}",
            self.n_vertices(),
            self.n_edges(),
            self.n_triangles(),
            self.periodic
        )?;
        writeln!(w, "# vertex lines: v <x> <y>")?;
        for v in &self.vertices {
            writeln!(w, "v {:.17e} {:.17e}", v[0], v[1])?;
        }
        writeln!(w, "# triangle lines: t <v0> <v1> <v2>")?;
        for t in &self.triangles {
            writeln!(w, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Test hook: flip the stored global direction of one edge inside one
    /// triangle. This breaks tangential-trace single-valuedness on purpose so
    /// that conformity and conservation diagnostics can be fault-tested.
    #[doc(hidden)]
    pub fn inject_orientation_fault(&mut self, k: usize, le: usize) {
        let te = &mut self.tri_edges[k][le];
        std::mem::swap(&mut te.from_slot, &mut te.to_slot);
        te.ccw = !te.ccw;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh_counts() {
        let m = structured_square::<f64>(1, 1, false).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn periodic_counts() {
        let m = structured_square::<f64>(4, 4, true).unwrap();
        assert_eq!(m.n_vertices(), 16);
        assert_eq!(m.n_edges(), 48);
        assert_eq!(m.n_triangles(), 32);
        assert_eq!(m.euler_characteristic(), 0);
        assert!((0..m.n_edges()).all(|e| !m.is_boundary_edge(e)));
    }

    #[test]
    fn total_area_is_one() {
        let m = structured_square::<f64>(2, 3, false).unwrap();
        let total: f64 = (0..m.n_triangles()).map(|k| m.area(k)).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(m.min_signed_area() > 0.0);
    }

    #[test]
    fn parameters_below_minimum_rejected() {
        assert!(structured_square::<f64>(0, 1, false).is_err());
        assert!(structured_square::<f64>(2, 2, true).is_err());
        assert!(structured_square::<f64>(3, 3, true).is_ok());
    }

    #[test]
    fn geometry_det_and_roundtrip() {
        for n in [1usize, 4] {
            let m = structured_square::<f64>(n, n, false).unwrap();
            for k in 0..m.n_triangles() {
                let g = m.element_geometry(k);
                assert!((g.det - 1.0 / (n as f64 * n as f64)).abs() < 1e-14);
                for (xr, yr) in [(0.0, 0.0), (0.25, 0.5), (0.1, 0.85)] {
                    let p = g.to_physical(xr, yr);
                    let r = g.to_reference(p[0], p[1]);
                    assert!((r[0] - xr).abs() < 1e-14 && (r[1] - yr).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn interior_edges_have_two_sides_with_opposite_traversal() {
        for periodic in [false, true] {
            let m = structured_square::<f64>(4, 4, periodic).unwrap();
            let mut seen: Vec<Vec<bool>> = vec![Vec::new(); m.n_edges()];
            for k in 0..m.n_triangles() {
                for te in m.tri_edges(k) {
                    seen[te.edge].push(te.ccw);
                }
            }
            for (e, ccws) in seen.iter().enumerate() {
                if m.is_boundary_edge(e) {
                    assert_eq!(ccws.len(), 1);
                } else {
                    assert_eq!(ccws.len(), 2);
                    // the two adjacent triangles induce opposite directions
                    assert_ne!(ccws[0], ccws[1], "edge {e}");
                }
            }
        }
    }

    #[test]
    fn periodic_edge_geometry_translates() {
        // both realizations of a shared edge are translates: same length and
        // same tangent direction under the global parametrization
        let m = structured_square::<f64>(4, 4, true).unwrap();
        let mut per_edge: Vec<Vec<[f64; 2]>> = vec![Vec::new(); m.n_edges()];
        for k in 0..m.n_triangles() {
            for le in 0..3 {
                let (p, q) = m.edge_endpoints(k, le);
                per_edge[m.tri_edges(k)[le].edge].push([q[0] - p[0], q[1] - p[1]]);
            }
        }
        for tans in per_edge {
            assert_eq!(tans.len(), 2);
            assert!((tans[0][0] - tans[1][0]).abs() < 1e-15);
            assert!((tans[0][1] - tans[1][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_canonicalization_idempotent() {
        let m = structured_square::<f64>(4, 4, true).unwrap();
        // wrapping columns/rows maps to the same representative as wrapping twice
        for t in 0..m.n_triangles() {
            for v in m.triangle(t) {
                assert!(v < m.n_vertices());
            }
        }
        // all vertex coordinates are inside [0,1)
        for v in 0..m.n_vertices() {
            let p = m.vertex(v);
            assert!(p[0] >= 0.0 && p[0] < 1.0 && p[1] >= 0.0 && p[1] < 1.0);
        }
    }

    #[test]
    fn dump_roundtrips_counts() {
        let m = structured_square::<f64>(2, 2, false).unwrap();
        let mut buf = Vec::new();
        m.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().filter(|l| l.starts_with("v ")).count(),
            m.n_vertices()
        );
        assert_eq!(
            text.lines().filter(|l| l.starts_with("t ")).count(),
            m.n_triangles()
        );
    }
}
