//! Primal triangle meshes with their circumcenter duals.
//!
//! Orientation conventions used by every operator:
//!
//! * Triangle vertices are stored counterclockwise with respect to the local
//!   vertical `k`.
//! * Edge `e` joins `cells[0]` (T_i) and `cells[1]` (T_j); its unit normal
//!   points from T_i to T_j and its tangent is `t = k × n`.
//! * `vertices[0]` is the dual vertex ζ− and lies in the `+t` direction from
//!   the edge midpoint; `vertices[1]` is ζ+ on the opposite side. Walking
//!   around ζ− counterclockwise crosses the edge along `+n`.
//! * Companion edges (the i−, i+, j−, j+ neighbours) are precomputed per edge.

mod build;
mod export;
mod plane;
mod sphere;
mod stencil;
pub mod validate;

use nalgebra::Vector3;
use sha2::{Digest, Sha256};
use stencil::Stencils;

pub use export::write_csv;
pub use plane::IrregularParams;
pub use validate::{CheckResult, ValidationReport};

pub type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    /// Doubly periodic rectangle `[0, lx) × [0, ly)`.
    Plane { lx: f64, ly: f64 },
    /// Sphere of the given radius centred at the origin.
    Sphere { radius: f64 },
}

impl Geometry {
    pub fn total_area(&self) -> f64 {
        match *self {
            Geometry::Plane { lx, ly } => lx * ly,
            Geometry::Sphere { radius } => 4.0 * std::f64::consts::PI * radius * radius,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Geometry::Sphere { .. })
    }

    /// Local vertical unit vector at `x`.
    pub fn up(&self, x: &Vec3) -> Vec3 {
        match self {
            Geometry::Plane { .. } => Vec3::z(),
            Geometry::Sphere { .. } => x.normalize(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    /// Counterclockwise vertex (dual cell) indices.
    pub vertices: [usize; 3],
    /// `edges[k]` joins `vertices[k]` and `vertices[(k + 1) % 3]`.
    pub edges: [usize; 3],
    /// +1 where the stored edge normal points out of this cell, -1 otherwise.
    pub edge_signs: [f64; 3],
    /// Cell across `edges[k]`.
    pub neighbors: [usize; 3],
    pub circumcenter: Vec3,
    /// Ω_ii.
    pub area: f64,
    /// |ζ ∩ T| for the dual cell of `vertices[k]`.
    pub kites: [f64; 3],
    /// `x_e − x_T` for `edges[k]` (chord vector on the sphere).
    pub edge_offsets: [Vec3; 3],
}

/// A companion edge of an edge's stencil, as used by the advection and
/// Lie-derivative terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Companion {
    pub edge: usize,
    /// Converts the companion's stored value to the outward normal of the
    /// triangle it is shared with.
    pub sign: f64,
    /// |ζ ∩ T| / (2 Ω_T).
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct Edge {
    /// `[i, j]`: the normal points from `cells[0]` to `cells[1]`.
    pub cells: [usize; 2],
    /// `[ζ−, ζ+]`.
    pub vertices: [usize; 2],
    /// Local index of this edge inside `cells[0]` and `cells[1]`.
    pub local: [usize; 2],
    /// |e_ij|.
    pub length: f64,
    /// |ẽ_ij|, signed: negative when the circumcenters are out of order.
    pub dual_length: f64,
    pub normal: Vec3,
    pub tangent: Vec3,
    pub midpoint: Vec3,
    /// `[i at ζ−, j at ζ−, i at ζ+, j at ζ+]`.
    pub companions: [Companion; 4],
}

impl Edge {
    pub fn minus(&self) -> usize {
        self.vertices[0]
    }

    pub fn plus(&self) -> usize {
        self.vertices[1]
    }
}

#[derive(Clone, Debug)]
pub struct DualCell {
    /// Position of the primal vertex at the centre of the dual cell.
    pub position: Vec3,
    /// Local vertical k̂_ζ.
    pub up: Vec3,
    /// |ζ|.
    pub area: f64,
    /// Incident triangles in counterclockwise order.
    pub cells: Vec<usize>,
    /// |ζ ∩ T| matching `cells`.
    pub kites: Vec<f64>,
    /// Incident primal edges (the dual cell's boundary edges), counterclockwise.
    pub edges: Vec<usize>,
    /// +1 when the counterclockwise circulation crosses the edge along its normal.
    pub edge_signs: Vec<f64>,
}

/// Immutable primal/dual mesh. Built by [`Mesh::plane_regular`],
/// [`Mesh::plane_irregular`] or [`Mesh::sphere`].
#[derive(Clone, Debug)]
pub struct Mesh {
    geometry: Geometry,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    duals: Vec<DualCell>,
    stencils: Stencils,
}

impl Mesh {
    pub(crate) fn from_parts(geometry: Geometry, cells: Vec<Cell>, edges: Vec<Edge>, duals: Vec<DualCell>) -> Mesh {
        let stencils = Stencils::new(geometry, &cells, &edges, &duals);
        Mesh { geometry, cells, edges, duals, stencils }
    }

    pub(crate) fn stencils(&self) -> &Stencils {
        &self.stencils
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn duals(&self) -> &[DualCell] {
        &self.duals
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_duals(&self) -> usize {
        self.duals.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn min_dual_length(&self) -> f64 {
        self.edges.iter().map(|e| e.dual_length).fold(f64::INFINITY, f64::min)
    }

    /// Validate every structural invariant; see [`ValidationReport`].
    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    /// SHA-256 over the topology and geometry tables, hex encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        match self.geometry {
            Geometry::Plane { lx, ly } => {
                hasher.update(b"plane");
                hasher.update(lx.to_le_bytes());
                hasher.update(ly.to_le_bytes());
            }
            Geometry::Sphere { radius } => {
                hasher.update(b"sphere");
                hasher.update(radius.to_le_bytes());
            }
        }
        for c in &self.cells {
            for v in c.vertices {
                hasher.update((v as u64).to_le_bytes());
            }
            hasher.update(c.area.to_le_bytes());
        }
        for e in &self.edges {
            for c in e.cells {
                hasher.update((c as u64).to_le_bytes());
            }
            hasher.update(e.length.to_le_bytes());
            hasher.update(e.dual_length.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Horizontal position of a point in the mesh's own coordinates:
    /// `(x, y)` for the plane, `(longitude, latitude)` in radians for the sphere,
    /// with longitude in `[0, 2π)`.
    pub fn coordinates(&self, x: &Vec3) -> (f64, f64) {
        match self.geometry {
            Geometry::Plane { .. } => (x.x, x.y),
            Geometry::Sphere { .. } => {
                let r = x.norm();
                let lat = (x.z / r).clamp(-1.0, 1.0).asin();
                let mut lon = x.y.atan2(x.x);
                if lon < 0.0 {
                    lon += 2.0 * std::f64::consts::PI;
                }
                (lon, lat)
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }
}
