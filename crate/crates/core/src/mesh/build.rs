//! Assembly of the full primal/dual tables from a bare triangulation.

use std::collections::HashMap;

use super::{Cell, Companion, DualCell, Edge, Geometry, Mesh, Vec3};
use crate::error::MeshError;

/// Vertex positions plus triangles, with per-corner periodic image shifts on
/// the plane (`corner = vertex + (sx·lx, sy·ly)`).
#[derive(Clone, Debug)]
pub(super) struct RawTriangulation {
    pub geometry: Geometry,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// One entry per triangle; ignored on the sphere.
    pub shifts: Vec<[[i32; 2]; 3]>,
}

impl RawTriangulation {
    pub fn corner(&self, t: usize, k: usize) -> Vec3 {
        let v = self.vertices[self.triangles[t][k]];
        match self.geometry {
            Geometry::Plane { lx, ly } => {
                let s = self.shifts[t][k];
                v + Vec3::new(s[0] as f64 * lx, s[1] as f64 * ly, 0.0)
            }
            Geometry::Sphere { .. } => v,
        }
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        [self.corner(t, 0), self.corner(t, 1), self.corner(t, 2)]
    }

    /// Identifies an unordered edge including its periodic image offset, so
    /// that two distinct edges joining the same vertex pair stay distinct.
    fn edge_key(&self, t: usize, k: usize) -> (usize, usize, i32, i32) {
        let (a, b) = (self.triangles[t][k], self.triangles[t][(k + 1) % 3]);
        let (sa, sb) = if self.geometry.is_sphere() {
            ([0, 0], [0, 0])
        } else {
            (self.shifts[t][k], self.shifts[t][(k + 1) % 3])
        };
        if a < b {
            (a, b, sb[0] - sa[0], sb[1] - sa[1])
        } else {
            (b, a, sa[0] - sb[0], sa[1] - sb[1])
        }
    }
}

pub(super) fn signed_area(g: Geometry, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    match g {
        Geometry::Plane { .. } => 0.5 * (b - a).cross(&(c - a)).z,
        Geometry::Sphere { radius } => {
            let (a, b, c) = (a.normalize(), b.normalize(), c.normalize());
            let num = a.dot(&b.cross(&c));
            let den = 1.0 + a.dot(&b) + b.dot(&c) + c.dot(&a);
            2.0 * num.atan2(den) * radius * radius
        }
    }
}

pub(super) fn circumcenter(g: Geometry, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    match g {
        Geometry::Plane { .. } => {
            let (bx, by) = (b.x - a.x, b.y - a.y);
            let (cx, cy) = (c.x - a.x, c.y - a.y);
            let d = 2.0 * (bx * cy - by * cx);
            let b2 = bx * bx + by * by;
            let c2 = cx * cx + cy * cy;
            Vec3::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d, 0.0)
        }
        Geometry::Sphere { radius } => {
            let n = (b - a).cross(&(c - a));
            n.normalize() * radius
        }
    }
}

pub(super) fn midpoint(g: Geometry, a: &Vec3, b: &Vec3) -> Vec3 {
    match g {
        Geometry::Plane { .. } => 0.5 * (a + b),
        Geometry::Sphere { radius } => (a + b).normalize() * radius,
    }
}

pub(super) fn distance(g: Geometry, a: &Vec3, b: &Vec3) -> f64 {
    match g {
        Geometry::Plane { .. } => (b - a).norm(),
        Geometry::Sphere { radius } => radius * a.cross(b).norm().atan2(a.dot(b)),
    }
}

pub(super) fn wrap(g: Geometry, x: Vec3) -> Vec3 {
    match g {
        Geometry::Plane { lx, ly } => Vec3::new(x.x.rem_euclid(lx), x.y.rem_euclid(ly), 0.0),
        Geometry::Sphere { .. } => x,
    }
}

/// Orthonormal tangent basis at a point with vertical `up`.
fn tangent_basis(up: &Vec3) -> (Vec3, Vec3) {
    let seed = if up.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (seed - up * up.dot(&seed)).normalize();
    let e2 = up.cross(&e1);
    (e1, e2)
}

struct CellGeometry {
    corners: [Vec3; 3],
    circumcenter: Vec3,
    area: f64,
    kites: [f64; 3],
}

fn cell_geometry(g: Geometry, corners: [Vec3; 3]) -> CellGeometry {
    let [a, b, c] = corners;
    let area = signed_area(g, &a, &b, &c);
    let cc = circumcenter(g, &a, &b, &c);
    let mut kites = [0.0; 3];
    for k in 0..3 {
        let v = corners[k];
        let next = corners[(k + 1) % 3];
        let prev = corners[(k + 2) % 3];
        let m_next = midpoint(g, &v, &next);
        let m_prev = midpoint(g, &prev, &v);
        kites[k] = signed_area(g, &v, &m_next, &cc) + signed_area(g, &v, &cc, &m_prev);
    }
    CellGeometry { corners, circumcenter: cc, area, kites }
}

pub(super) fn assemble(raw: &RawTriangulation) -> Result<Mesh, MeshError> {
    let g = raw.geometry;
    let nt = raw.triangles.len();

    let geo: Vec<CellGeometry> = (0..nt).map(|t| cell_geometry(g, raw.corners(t))).collect();
    for (t, cg) in geo.iter().enumerate() {
        if !(cg.area > 0.0) {
            return Err(MeshError::InvertedTriangle { cell: t, area: cg.area });
        }
    }

    // Edge numbering follows first encounter so that construction is deterministic.
    let mut edge_ids: HashMap<(usize, usize, i32, i32), usize> = HashMap::with_capacity(3 * nt / 2);
    let mut occurrences: Vec<Vec<(usize, usize)>> = Vec::with_capacity(3 * nt / 2);
    let mut cell_edges = vec![[usize::MAX; 3]; nt];
    for t in 0..nt {
        for k in 0..3 {
            let key = raw.edge_key(t, k);
            let id = *edge_ids.entry(key).or_insert_with(|| {
                occurrences.push(Vec::with_capacity(2));
                occurrences.len() - 1
            });
            occurrences[id].push((t, k));
            cell_edges[t][k] = id;
        }
    }

    let mut edges = Vec::with_capacity(occurrences.len());
    for (id, occ) in occurrences.iter().enumerate() {
        if occ.len() != 2 {
            let (t, k) = occ[0];
            return Err(MeshError::NonManifoldEdge {
                a: raw.triangles[t][k],
                b: raw.triangles[t][(k + 1) % 3],
                count: occ.len(),
            });
        }
        let (ti, ki) = occ[0];
        let (tj, kj) = occ[1];
        let gi = &geo[ti];
        let gj = &geo[tj];
        let a = gi.corners[ki];
        let b = gi.corners[(ki + 1) % 3];
        let va = raw.triangles[ti][ki];
        let vb = raw.triangles[ti][(ki + 1) % 3];
        if raw.triangles[tj][kj] != vb || raw.triangles[tj][(kj + 1) % 3] != va {
            return Err(MeshError::NonManifoldEdge { a: va, b: vb, count: 2 });
        }

        let m = midpoint(g, &a, &b);
        let up = g.up(&m);
        let normal = match g {
            Geometry::Plane { .. } => {
                let d = b - a;
                Vec3::new(d.y, -d.x, 0.0).normalize()
            }
            Geometry::Sphere { .. } => (b - a).cross(&up).normalize(),
        };
        let tangent = up.cross(&normal);

        // Bring T_j's circumcenter into T_i's unwrapped frame through the shared vertex `a`.
        let shift = a - gj.corners[(kj + 1) % 3];
        let cc_i = gi.circumcenter;
        let cc_j = gj.circumcenter + shift;
        let dual_length = match g {
            Geometry::Plane { .. } => (cc_j - cc_i).dot(&normal),
            Geometry::Sphere { .. } => {
                distance(g, &cc_i, &cc_j) * (cc_j - cc_i).dot(&normal).signum()
            }
        };
        let length = distance(g, &a, &b);

        let companion = |t: usize, local: usize, corner: usize| Companion {
            edge: cell_edges[t][local],
            sign: 0.0,
            weight: geo[t].kites[corner] / (2.0 * geo[t].area),
        };
        let companions = [
            companion(ti, (ki + 1) % 3, (ki + 1) % 3),
            companion(tj, (kj + 2) % 3, kj),
            companion(ti, (ki + 2) % 3, ki),
            companion(tj, (kj + 1) % 3, (kj + 1) % 3),
        ];

        edges.push(Edge {
            cells: [ti, tj],
            vertices: [vb, va],
            local: [ki, kj],
            length,
            dual_length,
            normal,
            tangent,
            midpoint: wrap(g, m),
            companions,
        });
        debug_assert_eq!(edges.len() - 1, id);
    }

    let sign_of = |edges: &[Edge], t: usize, k: usize| -> f64 {
        let e = &edges[cell_edges[t][k]];
        if e.cells[0] == t && e.local[0] == k {
            1.0
        } else {
            -1.0
        }
    };

    let mut cells = Vec::with_capacity(nt);
    for t in 0..nt {
        let cg = &geo[t];
        let mut edge_signs = [0.0; 3];
        let mut neighbors = [0; 3];
        let mut edge_offsets = [Vec3::zeros(); 3];
        for k in 0..3 {
            edge_signs[k] = sign_of(&edges, t, k);
            let e = &edges[cell_edges[t][k]];
            neighbors[k] = if edge_signs[k] > 0.0 { e.cells[1] } else { e.cells[0] };
            let m = midpoint(g, &cg.corners[k], &cg.corners[(k + 1) % 3]);
            edge_offsets[k] = m - cg.circumcenter;
        }
        cells.push(Cell {
            vertices: raw.triangles[t],
            edges: cell_edges[t],
            edge_signs,
            neighbors,
            circumcenter: wrap(g, cg.circumcenter),
            area: cg.area,
            kites: cg.kites,
            edge_offsets,
        });
    }

    // Companion signs: outward from the triangle the companion shares with the edge.
    for id in 0..edges.len() {
        let [ti, tj] = edges[id].cells;
        let [ki, kj] = edges[id].local;
        let locals = [(ti, (ki + 1) % 3), (tj, (kj + 2) % 3), (ti, (ki + 2) % 3), (tj, (kj + 1) % 3)];
        for (slot, (t, local)) in locals.into_iter().enumerate() {
            edges[id].companions[slot].sign = cells[t].edge_signs[local];
        }
    }

    let duals = assemble_duals(raw, &geo, &cells, &edges);

    Ok(Mesh::from_parts(g, cells, edges, duals))
}

fn assemble_duals(raw: &RawTriangulation, geo: &[CellGeometry], cells: &[Cell], edges: &[Edge]) -> Vec<DualCell> {
    let g = raw.geometry;
    let nv = raw.vertices.len();
    // (angle, cell, kite) and (angle, edge) per vertex.
    let mut cell_incidence: Vec<Vec<(f64, usize, f64)>> = vec![Vec::new(); nv];
    let mut edge_incidence: Vec<Vec<(f64, usize)>> = vec![Vec::new(); nv];
    let bases: Vec<(Vec3, Vec3)> = raw.vertices.iter().map(|x| tangent_basis(&g.up(x))).collect();

    for (t, cell) in cells.iter().enumerate() {
        let cg = &geo[t];
        for k in 0..3 {
            let v = cell.vertices[k];
            let (e1, e2) = bases[v];
            let origin = cg.corners[k];
            let to_cc = cg.circumcenter - origin;
            cell_incidence[v].push((to_cc.dot(&e2).atan2(to_cc.dot(&e1)), t, cg.kites[k]));
            // The edge leaving this corner counterclockwise; each edge is seen once per endpoint.
            let m = midpoint(g, &cg.corners[k], &cg.corners[(k + 1) % 3]) - origin;
            edge_incidence[v].push((m.dot(&e2).atan2(m.dot(&e1)), cell.edges[k]));
        }
    }

    (0..nv)
        .map(|v| {
            let mut inc = std::mem::take(&mut cell_incidence[v]);
            inc.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut einc = std::mem::take(&mut edge_incidence[v]);
            einc.sort_by(|a, b| a.0.total_cmp(&b.0));
            let area: f64 = inc.iter().map(|x| x.2).sum();
            let edge_ids: Vec<usize> = einc.iter().map(|x| x.1).collect();
            let edge_signs = edge_ids
                .iter()
                .map(|&e| if edges[e].vertices[0] == v { 1.0 } else { -1.0 })
                .collect();
            DualCell {
                position: raw.vertices[v],
                up: g.up(&raw.vertices[v]),
                area,
                cells: inc.iter().map(|x| x.1).collect(),
                kites: inc.iter().map(|x| x.2).collect(),
                edges: edge_ids,
                edge_signs,
            }
        })
        .collect()
}
