//! Initial conditions and analytic reference fields for the benchmark runs.

use std::f64::consts::PI;

use crate::dynamics::{dual_depth, Coriolis, PhysicalParams, State};
use crate::error::{MeshError, NumericalError};
use crate::fields::{CellField, DualField, EdgeField};
use crate::mesh::{Geometry, Mesh, Vec3};
use crate::operators::{grad_t, sample_normal};

pub const KM: f64 = 1.0e3;
pub const DAY: f64 = 86_400.0;

/// Plane domain and f-plane constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneSetup {
    pub lx: f64,
    pub ly: f64,
    pub f: f64,
    pub g: f64,
}

impl Default for PlaneSetup {
    fn default() -> Self {
        PlaneSetup { lx: 5000.0 * KM, ly: 4330.0 * KM, f: 6.147e-5, g: 9.81 }
    }
}

/// Sphere radius, rotation rate and gravity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereSetup {
    pub radius: f64,
    pub rotation: f64,
    pub g: f64,
}

impl Default for SphereSetup {
    fn default() -> Self {
        SphereSetup { radius: 6.37122e6, rotation: 7.292e-5, g: 9.81 }
    }
}

/// `V = −(g/f) Grad_t h_ζ` with `h_ζ` the kite-weighted dual depth.
pub fn geostrophic_velocity(mesh: &Mesh, h: &CellField, f: f64, g: f64) -> Result<EdgeField, NumericalError> {
    let hz = dual_depth(mesh, h)?;
    Ok(grad_t(mesh, &hz).scaled(-g / f))
}

/// `V = −(g/f) Grad_t h` with `h` sampled analytically at the dual vertices.
pub fn geostrophic_velocity_sampled(mesh: &Mesh, h: impl Fn(&Vec3) -> f64, f: f64, g: f64) -> EdgeField {
    let hz = DualField::from_fn(mesh.num_duals(), |z| h(&mesh.duals()[z].position));
    grad_t(mesh, &hz).scaled(-g / f)
}

fn cell_samples(mesh: &Mesh, h: impl Fn(&Vec3) -> f64) -> CellField {
    CellField::from_fn(mesh.num_cells(), |i| h(&mesh.cells()[i].circumcenter))
}

fn plane_extent(mesh: &Mesh) -> Result<(f64, f64), MeshError> {
    match mesh.geometry() {
        Geometry::Plane { lx, ly } => Ok((lx, ly)),
        Geometry::Sphere { .. } => Err(MeshError::InvalidParameter("this case needs a plane mesh".into())),
    }
}

fn sphere_radius(mesh: &Mesh) -> Result<f64, MeshError> {
    match mesh.geometry() {
        Geometry::Sphere { radius } => Ok(radius),
        Geometry::Plane { .. } => Err(MeshError::InvalidParameter("this case needs a sphere mesh".into())),
    }
}

/// Failure while building an initial condition.
#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Numerical(#[from] NumericalError),
}

/// Two Gaussian depressions in geostrophic balance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VortexPair {
    /// Mean depth (m).
    pub h0: f64,
    /// Depression amplitude (m).
    pub hp: f64,
    /// Vortex centres as fractions of `(L_x, L_y)`.
    pub centres: [(f64, f64); 2],
    /// Widths `(s_x, s_y)` as fractions of `(L_x, L_y)`.
    pub width: (f64, f64),
}

impl Default for VortexPair {
    fn default() -> Self {
        VortexPair { h0: 750.0, hp: 75.0, centres: [(0.4, 0.4), (0.6, 0.6)], width: (3.0 / 40.0, 3.0 / 40.0) }
    }
}

impl VortexPair {
    pub fn depth(&self, lx: f64, ly: f64, x: f64, y: f64) -> f64 {
        let (sx, sy) = (self.width.0 * lx, self.width.1 * ly);
        let mut bumps = 0.0;
        for &(cx, cy) in &self.centres {
            let xp = lx / (PI * sx) * (PI / lx * (x - cx * lx)).sin();
            let yp = ly / (PI * sy) * (PI / ly * (y - cy * ly)).sin();
            bumps += (-(xp * xp + yp * yp) / 2.0).exp();
        }
        self.h0 - self.hp * (bumps - 4.0 * PI * sx * sy / (lx * ly))
    }
}

/// Zonal jet with a sinusoidal perturbation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearFlow {
    pub h0: f64,
    pub hp: f64,
    pub lambda_x: f64,
    pub sigma_y: f64,
    pub kappa: f64,
}

impl Default for ShearFlow {
    fn default() -> Self {
        ShearFlow { h0: 1.076 * KM, hp: 0.03 * KM, lambda_x: 0.5, sigma_y: 1.0 / 12.0, kappa: 0.1 }
    }
}

impl ShearFlow {
    pub fn depth(&self, lx: f64, ly: f64, x: f64, y: f64) -> f64 {
        let xp = x / lx;
        let yp = (PI / ly * (y - ly / 2.0)).sin() / PI;
        let ypp = (2.0 * PI / ly * (y - ly / 2.0)).sin() / (2.0 * PI);
        let envelope = (-yp * yp / (2.0 * self.sigma_y * self.sigma_y) + 0.5).exp();
        self.h0 - self.hp * ypp / self.sigma_y * envelope * (1.0 - self.kappa * (2.0 * PI * xp / self.lambda_x).sin())
    }
}

/// Zonal flow over a conical mountain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mountain {
    /// Zonal wind speed at the equator (m/s).
    pub u0: f64,
    /// Free-surface height at the poles (m).
    pub h0: f64,
    /// Mountain centre (longitude, latitude) in radians.
    pub centre: (f64, f64),
    /// Peak height (m).
    pub peak: f64,
    /// Angular radius of the cone (rad).
    pub radius: f64,
}

impl Default for Mountain {
    fn default() -> Self {
        Mountain { u0: 20.0, h0: 5960.0, centre: (1.5 * PI, PI / 6.0), peak: 2000.0, radius: PI / 9.0 }
    }
}

impl Mountain {
    /// Cone height at `(longitude, latitude)`.
    pub fn topography(&self, lon: f64, lat: f64) -> f64 {
        let r2 = (self.radius * self.radius).min((lon - self.centre.0).powi(2) + (lat - self.centre.1).powi(2));
        self.peak * (1.0 - r2.sqrt() / self.radius)
    }

    /// Free surface `h₀ − (RΩu₀ + u₀²/2) sin²Θ / g` in balance with the zonal flow.
    pub fn surface(&self, setup: &SphereSetup, lat: f64) -> f64 {
        let s = lat.sin();
        self.h0 - (setup.radius * setup.rotation * self.u0 + 0.5 * self.u0 * self.u0) * s * s / setup.g
    }
}

/// Vortex pair: depth sampled at circumcenters, geostrophic velocity.
pub fn init_vortex_pair(mesh: &Mesh, case: &VortexPair, setup: &PlaneSetup) -> Result<(State, PhysicalParams), CaseError> {
    let (lx, ly) = plane_extent(mesh)?;
    let h = cell_samples(mesh, |p| case.depth(lx, ly, p.x, p.y));
    let v = geostrophic_velocity(mesh, &h, setup.f, setup.g)?;
    let params = PhysicalParams::flat_bottom(mesh, setup.g, Coriolis::FPlane(setup.f));
    Ok((State { v, h, t: 0.0 }, params))
}

/// Shear flow: depth sampled at circumcenters, geostrophic velocity.
pub fn init_shear_flow(mesh: &Mesh, case: &ShearFlow, setup: &PlaneSetup) -> Result<(State, PhysicalParams), CaseError> {
    let (lx, ly) = plane_extent(mesh)?;
    let h = cell_samples(mesh, |p| case.depth(lx, ly, p.x, p.y));
    let v = geostrophic_velocity(mesh, &h, setup.f, setup.g)?;
    let params = PhysicalParams::flat_bottom(mesh, setup.g, Coriolis::FPlane(setup.f));
    Ok((State { v, h, t: 0.0 }, params))
}

fn mountain_topography(mesh: &Mesh, case: &Mountain) -> CellField {
    CellField::from_fn(mesh.num_cells(), |i| {
        let (lon, lat) = mesh.coordinates(&mesh.cells()[i].circumcenter);
        case.topography(lon, lat)
    })
}

/// Mountain case: zonal solid-body flow with the depth `surface − η_b`.
pub fn init_mountain(mesh: &Mesh, case: &Mountain, setup: &SphereSetup) -> Result<(State, PhysicalParams), CaseError> {
    let radius = sphere_radius(mesh)?;
    let eta_b = mountain_topography(mesh, case);
    let h = CellField::from_fn(mesh.num_cells(), |i| {
        let (_, lat) = mesh.coordinates(&mesh.cells()[i].circumcenter);
        case.surface(setup, lat) - eta_b[i]
    });
    // u₀ cosΘ in the eastward direction is u₀ (−y, x, 0) / R.
    let v = sample_normal(mesh, |p| Vec3::new(-p.y, p.x, 0.0) * (case.u0 / radius));
    let params = PhysicalParams { g: setup.g, coriolis: Coriolis::Sphere { rotation: setup.rotation }, eta_b };
    Ok((State { v, h, t: 0.0 }, params))
}

/// Lake at rest over the mountain: `h + η_b = surface`, `V = 0`.
pub fn mountain_rest_state(
    mesh: &Mesh,
    case: &Mountain,
    setup: &SphereSetup,
    surface: f64,
) -> Result<(State, PhysicalParams), CaseError> {
    sphere_radius(mesh)?;
    let eta_b = mountain_topography(mesh, case);
    let h = CellField::from_fn(mesh.num_cells(), |i| surface - eta_b[i]);
    let params = PhysicalParams { g: setup.g, coriolis: Coriolis::Sphere { rotation: setup.rotation }, eta_b };
    Ok((State { v: EdgeField::zeros(mesh.num_edges()), h, t: 0.0 }, params))
}

/// Fields `U`, `V` and the edge-normal bracket `[u, v] · n̂` at edge midpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorFields {
    pub u: EdgeField,
    pub v: EdgeField,
    pub exact: EdgeField,
}

/// Plane: `u = (sin 2πx/L_x, 0)`, `v = (cos 2πx/L_x, 0)`, `[u, v] = (−2π/L_x, 0)`.
/// Sphere: `u = (y, −x, 0)`, `v = (0, −z, y)`, `[u, v] = (z, 0, −x)`.
/// The bracket is `(u·∇)v − (v·∇)u`.
pub fn commutator_test_fields(mesh: &Mesh) -> CommutatorFields {
    match mesh.geometry() {
        Geometry::Plane { lx, .. } => {
            let k = 2.0 * PI / lx;
            CommutatorFields {
                u: sample_normal(mesh, |p| Vec3::new((k * p.x).sin(), 0.0, 0.0)),
                v: sample_normal(mesh, |p| Vec3::new((k * p.x).cos(), 0.0, 0.0)),
                exact: sample_normal(mesh, |_| Vec3::new(-k, 0.0, 0.0)),
            }
        }
        Geometry::Sphere { .. } => CommutatorFields {
            u: sample_normal(mesh, |p| Vec3::new(p.y, -p.x, 0.0)),
            v: sample_normal(mesh, |p| Vec3::new(0.0, -p.z, p.y)),
            exact: sample_normal(mesh, |p| Vec3::new(p.z, 0.0, -p.x)),
        },
    }
}
