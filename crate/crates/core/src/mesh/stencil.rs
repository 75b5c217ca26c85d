//! Flat index and coefficient tables for the hot loops of the operators.

use super::{Cell, DualCell, Edge, Geometry, Vec3};

#[derive(Clone, Debug, Default)]
pub(crate) struct Stencils {
    /// `[i, j]` per edge.
    pub edge_cells: Vec<[u32; 2]>,
    /// `[ζ−, ζ+]` per edge.
    pub edge_duals: Vec<[u32; 2]>,
    pub length: Vec<f64>,
    pub dual_length: Vec<f64>,
    pub inv_length: Vec<f64>,
    pub inv_dual_length: Vec<f64>,
    /// `|e| |ẽ|` per edge.
    pub edge_weight: Vec<f64>,
    pub cell_edges: Vec<[u32; 3]>,
    /// `sign |e| / Ω` per cell edge.
    pub div_coef: Vec<[f64; 3]>,
    /// Offsets into the per-dual arrays below.
    pub dual_ptr: Vec<u32>,
    pub dual_edges: Vec<u32>,
    /// `sign |ẽ| / |ζ|` per dual edge.
    pub curl_coef: Vec<f64>,
    pub dual_cells: Vec<u32>,
    /// `|ζ ∩ T| / |ζ|` per incident cell.
    pub kite_weight: Vec<f64>,
    /// Companion edge, `weight · sign · |e_c|`, and the cell across the
    /// companion from the triangle it shares with the edge.
    pub companions: Vec<[(u32, f64, u32); 4]>,
    /// Perot reconstruction at cells as `u_i = Σ_k coef · V_k` (tangent-projected).
    pub cell_recon: Vec<[Vec3; 3]>,
    /// Kite-averaged reconstruction at dual cells, merged per edge.
    pub dual_recon_ptr: Vec<u32>,
    pub dual_recon_edges: Vec<u32>,
    pub dual_recon_coef: Vec<Vec3>,
}

impl Stencils {
    pub fn new(geometry: Geometry, cells: &[Cell], edges: &[Edge], duals: &[DualCell]) -> Self {
        let mut s = Stencils::default();
        for e in edges {
            s.edge_cells.push([e.cells[0] as u32, e.cells[1] as u32]);
            s.edge_duals.push([e.vertices[0] as u32, e.vertices[1] as u32]);
            s.length.push(e.length);
            s.dual_length.push(e.dual_length);
            s.inv_length.push(1.0 / e.length);
            s.inv_dual_length.push(1.0 / e.dual_length);
            s.edge_weight.push(e.length * e.dual_length);
            let mut comp = [(0u32, 0.0, 0u32); 4];
            for (slot, c) in e.companions.iter().enumerate() {
                let t = e.cells[slot % 2];
                let ce = &edges[c.edge];
                let far = if ce.cells[0] == t { ce.cells[1] } else { ce.cells[0] };
                comp[slot] = (c.edge as u32, c.weight * c.sign * ce.length, far as u32);
            }
            s.companions.push(comp);
        }
        for c in cells {
            s.cell_edges.push([c.edges[0] as u32, c.edges[1] as u32, c.edges[2] as u32]);
            let coef = |k: usize| c.edge_signs[k] * edges[c.edges[k]].length / c.area;
            s.div_coef.push([coef(0), coef(1), coef(2)]);
            let recon = |k: usize| {
                let a = c.edge_offsets[k] * (c.edge_signs[k] * edges[c.edges[k]].length / c.area);
                match geometry {
                    Geometry::Plane { .. } => a,
                    Geometry::Sphere { .. } => {
                        let up = c.circumcenter.normalize();
                        a - up * up.dot(&a)
                    }
                }
            };
            s.cell_recon.push([recon(0), recon(1), recon(2)]);
        }
        s.dual_ptr.push(0);
        for d in duals {
            for (&e, &sign) in d.edges.iter().zip(&d.edge_signs) {
                s.dual_edges.push(e as u32);
                s.curl_coef.push(sign * edges[e].dual_length / d.area);
            }
            for (&t, &k) in d.cells.iter().zip(&d.kites) {
                s.dual_cells.push(t as u32);
                s.kite_weight.push(k / d.area);
            }
            debug_assert_eq!(d.edges.len(), d.cells.len());
            s.dual_ptr.push(s.dual_edges.len() as u32);
        }
        s.dual_recon_ptr.push(0);
        for d in duals {
            let mut merged: Vec<(u32, Vec3)> = Vec::new();
            for (&t, &k) in d.cells.iter().zip(&d.kites) {
                for j in 0..3 {
                    let e = cells[t].edges[j] as u32;
                    let mut a = s.cell_recon[t][j] * (k / d.area);
                    if geometry.is_sphere() {
                        a -= d.up * d.up.dot(&a);
                    }
                    match merged.iter_mut().find(|m| m.0 == e) {
                        Some(m) => m.1 += a,
                        None => merged.push((e, a)),
                    }
                }
            }
            for (e, a) in merged {
                s.dual_recon_edges.push(e);
                s.dual_recon_coef.push(a);
            }
            s.dual_recon_ptr.push(s.dual_recon_edges.len() as u32);
        }
        s
    }

    pub fn dual_range(&self, z: usize) -> std::ops::Range<usize> {
        self.dual_ptr[z] as usize..self.dual_ptr[z + 1] as usize
    }
}
