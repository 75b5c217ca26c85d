//! Selective-decay (potential enstrophy Casimir) dissipation and the
//! biharmonic eddy-viscosity baseline.

use crate::dynamics::{companion_fluxes, mass_flux, potential_vorticity};
use crate::error::NumericalError;
use crate::fields::{CellField, DualField, EdgeField};
use crate::mesh::{Mesh, Vec3};
use crate::operators::{curl, div, edge_average, grad_n, grad_t, reconstruct_dual};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DissipationMode {
    None,
    Casimir,
    Biharmonic,
}

impl std::str::FromStr for DissipationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(DissipationMode::None),
            "casimir" => Ok(DissipationMode::Casimir),
            "biharmonic" => Ok(DissipationMode::Biharmonic),
            other => Err(format!("unknown dissipation mode '{other}' (expected none, casimir or biharmonic)")),
        }
    }
}

impl std::fmt::Display for DissipationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DissipationMode::None => "none",
            DissipationMode::Casimir => "casimir",
            DissipationMode::Biharmonic => "biharmonic",
        })
    }
}

/// Dissipation coefficients in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationConfig {
    pub mode: DissipationMode,
    /// Casimir coefficient θ (m⁴·s).
    pub theta: f64,
    /// Biharmonic viscosity ν (m⁴/s).
    pub nu: f64,
}

impl DissipationConfig {
    pub fn none() -> Self {
        DissipationConfig { mode: DissipationMode::None, theta: 0.0, nu: 0.0 }
    }
}

/// Sign of the Casimir tendency relative to `θ L / (|ẽ| h̄)`. Negative makes
/// potential enstrophy decay for θ > 0.
pub const CASIMIR_SIGN: f64 = -1.0;

/// Edge representative of the enstrophy gradient, `2 Grad_t q / h̄`.
pub fn casimir_gradient(mesh: &Mesh, q: &DualField, h: &CellField) -> Result<EdgeField, NumericalError> {
    let hbar = edge_average(mesh, h);
    let gq = grad_t(mesh, q);
    let mut out = EdgeField::zeros(mesh.num_edges());
    for e in 0..mesh.num_edges() {
        if !(hbar[e] > 0.0) {
            return Err(NumericalError::NonPositiveDepth { location: format!("edge {e}"), value: hbar[e] });
        }
        out[e] = 2.0 * gq[e] / hbar[e];
    }
    Ok(out)
}

/// A vector field with its divergence and dual reconstruction precomputed,
/// for repeated brackets against the same left argument.
pub struct BracketOperand {
    pub field: EdgeField,
    div: CellField,
    dual: Vec<Vec3>,
}

impl BracketOperand {
    pub fn new(mesh: &Mesh, field: EdgeField) -> Self {
        let div = div(mesh, &field);
        let dual = reconstruct_dual(mesh, &field);
        BracketOperand { field, div, dual }
    }
}

/// Edge-normal approximation of the vector-field bracket `[u, v]`, using
/// `[u, v] = u div v − v div u − curl(u × v)`.
pub fn discrete_commutator(mesh: &Mesh, u: &EdgeField, v: &EdgeField) -> EdgeField {
    commutator_with(mesh, &BracketOperand::new(mesh, u.clone()), v)
}

/// `[u, v]` for a precomputed left argument.
pub fn commutator_with(mesh: &Mesh, u: &BracketOperand, v: &EdgeField) -> EdgeField {
    let div_u = &u.div;
    let div_v = div(mesh, v);
    let uz = &u.dual;
    let vz = reconstruct_dual(mesh, v);
    let duals = mesh.duals();
    let cross = DualField::from_fn(mesh.num_duals(), |z| uz[z].cross(&vz[z]).dot(&duals[z].up));
    let gc = grad_t(mesh, &cross);
    let s = mesh.stencils();
    let u = &u.field;
    EdgeField::from_fn(mesh.num_edges(), |e| {
        let [i, j] = s.edge_cells[e].map(|c| c as usize);
        u[e] * 0.5 * (div_v[i] + div_v[j]) - v[e] * 0.5 * (div_u[i] + div_u[j]) - gc[e]
    })
}

/// Projected Lie derivative of the one-form `h W♭` along the velocity `V`,
/// with `W` given by its edge values `W̃`.
///
/// The result is the exact edge projection of the matrix Lie derivative; its
/// pairing `Σ |e| L V` vanishes identically.
pub fn lie_projection(mesh: &Mesh, v: &EdgeField, h: &CellField, w: &EdgeField) -> EdgeField {
    let s = mesh.stencils();
    let curl_w = curl(mesh, w);
    let fluxes = companion_fluxes(mesh, v, h);
    let hbar = edge_average(mesh, h);
    let div_flux = div(mesh, &mass_flux(mesh, v, h));
    // Σ_k |e||ẽ| V W̃ / Ω per triangle; the product is orientation independent.
    let pairing = CellField::from_fn(mesh.num_cells(), |i| {
        let mut sum = 0.0;
        for &e in &s.cell_edges[i] {
            let e = e as usize;
            sum += s.edge_weight[e] * v[e] * w[e];
        }
        sum / mesh.cells()[i].area
    });
    EdgeField::from_fn(mesh.num_edges(), |e| {
        let [i, j] = s.edge_cells[e].map(|c| c as usize);
        let [m, p] = s.edge_duals[e].map(|z| z as usize);
        let vorticity = -curl_w[m] * fluxes[e][0] + curl_w[p] * fluxes[e][1];
        let gradient = 0.5 * hbar[e] * (pairing[j] - pairing[i]);
        let stretching = 0.5 * (div_flux[i] + div_flux[j]) * s.dual_length[e] * w[e];
        vorticity + gradient + stretching
    })
}

/// Converts projected one-form values into a velocity tendency.
fn to_velocity(mesh: &Mesh, l: &EdgeField, h: &CellField, scale: f64) -> EdgeField {
    let hbar = edge_average(mesh, h);
    let s = mesh.stencils();
    EdgeField::from_fn(mesh.num_edges(), |e| scale * l[e] * s.inv_dual_length[e] / hbar[e])
}

/// Enstrophy gradient `D̃` of a state.
pub fn casimir_gradient_of_state(
    mesh: &Mesh,
    v: &EdgeField,
    h: &CellField,
    f: &DualField,
) -> Result<EdgeField, NumericalError> {
    let q = potential_vorticity(mesh, v, h, f)?;
    casimir_gradient(mesh, &q, h)
}

/// Casimir velocity tendency for a given (possibly frozen) enstrophy gradient `D̃`.
pub fn casimir_tendency_with_gradient(
    mesh: &Mesh,
    v: &EdgeField,
    h: &CellField,
    dtilde: &EdgeField,
    theta: f64,
) -> EdgeField {
    if theta == 0.0 {
        return EdgeField::zeros(mesh.num_edges());
    }
    casimir_tendency_frozen(mesh, v, h, &BracketOperand::new(mesh, dtilde.clone()), theta)
}

/// Casimir velocity tendency for a precomputed enstrophy gradient.
pub fn casimir_tendency_frozen(
    mesh: &Mesh,
    v: &EdgeField,
    h: &CellField,
    dtilde: &BracketOperand,
    theta: f64,
) -> EdgeField {
    if theta == 0.0 {
        return EdgeField::zeros(mesh.num_edges());
    }
    let w = commutator_with(mesh, dtilde, v);
    let l = lie_projection(mesh, v, h, &w);
    to_velocity(mesh, &l, h, CASIMIR_SIGN * theta)
}

/// Casimir velocity tendency `s θ L / (|ẽ| h̄)` evaluated entirely at `(V, h)`.
pub fn casimir_tendency(
    mesh: &Mesh,
    v: &EdgeField,
    h: &CellField,
    f: &DualField,
    theta: f64,
) -> Result<EdgeField, NumericalError> {
    let dtilde = casimir_gradient_of_state(mesh, v, h, f)?;
    Ok(casimir_tendency_with_gradient(mesh, v, h, &dtilde, theta))
}

/// `Grad_n Div V − Grad_t Curl V`.
pub fn vector_laplacian(mesh: &Mesh, v: &EdgeField) -> EdgeField {
    grad_n(mesh, &div(mesh, v)).axpy(-1.0, &grad_t(mesh, &curl(mesh, v)))
}

/// `−ν lap(lap V)`.
pub fn biharmonic_tendency(mesh: &Mesh, v: &EdgeField, nu: f64) -> EdgeField {
    vector_laplacian(mesh, &vector_laplacian(mesh, v)).scaled(-nu)
}
