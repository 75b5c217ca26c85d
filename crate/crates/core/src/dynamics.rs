//! Conservative shallow-water tendencies: advection/Coriolis, kinetic-energy
//! gradient, pressure gradient and the continuity flux.

use crate::error::NumericalError;
use crate::fields::{CellField, DualField, EdgeField};
use crate::mesh::Mesh;
use crate::operators::{cell_to_dual, curl, div, edge_average, grad_n};

/// Prognostic variables.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    /// Edge-normal velocity (m/s).
    pub v: EdgeField,
    /// Layer depth per triangle (m).
    pub h: CellField,
    /// Model time (s).
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coriolis {
    /// Constant `f` (1/s).
    FPlane(f64),
    /// `f = 2 Ω sin(latitude)` with rotation rate Ω (1/s).
    Sphere { rotation: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    pub coriolis: Coriolis,
    /// Bottom topography per triangle (m).
    pub eta_b: CellField,
}

impl PhysicalParams {
    pub fn flat_bottom(mesh: &Mesh, g: f64, coriolis: Coriolis) -> Self {
        PhysicalParams { g, coriolis, eta_b: CellField::zeros(mesh.num_cells()) }
    }
}

/// Coriolis parameter at dual cells.
pub fn coriolis_dual(mesh: &Mesh, coriolis: Coriolis) -> DualField {
    match coriolis {
        Coriolis::FPlane(f) => DualField::constant(mesh.num_duals(), f),
        Coriolis::Sphere { rotation } => DualField::from_fn(mesh.num_duals(), |z| {
            let (_, lat) = mesh.coordinates(&mesh.duals()[z].position);
            2.0 * rotation * lat.sin()
        }),
    }
}

/// Fails on the first non-positive (or NaN) cell depth.
pub fn check_depth(h: &CellField) -> Result<(), NumericalError> {
    match h.iter().position(|&x| !(x > 0.0)) {
        Some(i) => Err(NumericalError::NonPositiveDepth { location: format!("cell {i}"), value: h[i] }),
        None => Ok(()),
    }
}

fn check_edge_depth(hbar: &EdgeField) -> Result<(), NumericalError> {
    match hbar.iter().position(|&x| !(x > 0.0)) {
        Some(e) => Err(NumericalError::NonPositiveDepth { location: format!("edge {e}"), value: hbar[e] }),
        None => Ok(()),
    }
}

/// Kite-weighted companion mass fluxes `[B−, B+]` on each edge.
///
/// Each of the four companion edges contributes `|ζ∩T|/(2Ω_T) · h̃ |e| V`,
/// with `V` read outward from the triangle `T` it shares with the edge and
/// `h̃` the mean depth of the two cells flanking that corner of the stencil:
/// the far side of the companion and the far side of the edge itself.
pub fn companion_fluxes(mesh: &Mesh, v: &EdgeField, h: &CellField) -> Vec<[f64; 2]> {
    let s = mesh.stencils();
    let (v, h) = (v.values(), h.values());
    s.edge_cells
        .iter()
        .zip(&s.companions)
        .map(|(cells, comp)| {
            let mut b = [0.0; 2];
            for (slot, &(c, coef, far)) in comp.iter().enumerate() {
                let opposite = cells[1 - slot % 2] as usize;
                b[slot / 2] += coef * 0.5 * (h[opposite] + h[far as usize]) * v[c as usize];
            }
            b
        })
        .collect()
}

/// Combines a dual-cell field with the companion fluxes: `−a_ζ− B− + a_ζ+ B+`.
pub fn companion_pairing(mesh: &Mesh, a: &DualField, fluxes: &[[f64; 2]]) -> EdgeField {
    let s = mesh.stencils();
    EdgeField::from_fn(mesh.num_edges(), |e| {
        let [m, p] = s.edge_duals[e];
        -a[m as usize] * fluxes[e][0] + a[p as usize] * fluxes[e][1]
    })
}

/// Absolute vorticity `Curl V + f` at dual cells.
pub fn absolute_vorticity(mesh: &Mesh, v: &EdgeField, f: &DualField) -> DualField {
    curl(mesh, v).axpy(1.0, f)
}

/// Nonlinear advection and Coriolis term.
pub fn adv_term(mesh: &Mesh, v: &EdgeField, h: &CellField, f: &DualField) -> Result<EdgeField, NumericalError> {
    let hbar = edge_average(mesh, h);
    check_edge_depth(&hbar)?;
    let eta = absolute_vorticity(mesh, v, f);
    let fluxes = companion_fluxes(mesh, v, h);
    let mut out = companion_pairing(mesh, &eta, &fluxes);
    let s = mesh.stencils();
    for e in 0..mesh.num_edges() {
        out[e] *= s.inv_dual_length[e] / hbar[e];
    }
    Ok(out)
}

/// Cell kinetic-energy density `Σ_k |ẽ||e| V² / (2Ω_ii)`.
pub fn kinetic_density(mesh: &Mesh, v: &EdgeField) -> CellField {
    let s = mesh.stencils();
    let v = v.values();
    CellField::from_vec(
        s.cell_edges
            .iter()
            .zip(mesh.cells())
            .map(|(e, c)| {
                let mut sum = 0.0;
                for &k in e {
                    let k = k as usize;
                    sum += s.edge_weight[k] * v[k] * v[k];
                }
                sum / (2.0 * c.area)
            })
            .collect(),
    )
}

/// `½ Grad_n` of the kinetic-energy density.
pub fn kinetic_term(mesh: &Mesh, v: &EdgeField) -> EdgeField {
    grad_n(mesh, &kinetic_density(mesh, v)).scaled(0.5)
}

/// `g Grad_n (h + η_b)`.
pub fn gradient_term(mesh: &Mesh, h: &CellField, eta_b: &CellField, g: f64) -> EdgeField {
    grad_n(mesh, &h.axpy(1.0, eta_b)).scaled(g)
}

/// Mass flux `V h̄` on every edge.
pub fn mass_flux(mesh: &Mesh, v: &EdgeField, h: &CellField) -> EdgeField {
    let hbar = edge_average(mesh, h);
    EdgeField::from_fn(mesh.num_edges(), |e| v[e] * hbar[e])
}

/// Depth tendency `−Div(V h̄)`.
pub fn continuity_flux(mesh: &Mesh, v: &EdgeField, h: &CellField) -> CellField {
    div(mesh, &mass_flux(mesh, v, h)).scaled(-1.0)
}

/// Depth interpolated to dual cells with kite weights.
pub fn dual_depth(mesh: &Mesh, h: &CellField) -> Result<DualField, NumericalError> {
    let hz = cell_to_dual(mesh, h);
    match hz.iter().position(|&x| !(x > 0.0)) {
        Some(z) => Err(NumericalError::NonPositiveDepth { location: format!("dual cell {z}"), value: hz[z] }),
        None => Ok(hz),
    }
}

/// Potential vorticity `(Curl V + f) / h_ζ`.
pub fn potential_vorticity(
    mesh: &Mesh,
    v: &EdgeField,
    h: &CellField,
    f: &DualField,
) -> Result<DualField, NumericalError> {
    let hz = dual_depth(mesh, h)?;
    let eta = absolute_vorticity(mesh, v, f);
    Ok(DualField::from_fn(mesh.num_duals(), |z| eta[z] / hz[z]))
}
