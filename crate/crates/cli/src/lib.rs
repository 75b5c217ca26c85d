//! Scenario runs, convergence studies and spectra for the sdswe solver.

pub mod config;
pub mod run;
pub mod studies;

use thiserror::Error;

use sdswe::cases::{init_mountain, init_shear_flow, init_vortex_pair, CaseError};
use sdswe::integrator::{cfl_time_step, Model, TimeConfig};
use sdswe::mesh::IrregularParams;
use sdswe::{CheckpointError, Mesh, MeshError, NumericalError, State};

use config::{CaseSpec, ConfigError, MeshSpec, Resolved, StepSize};

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Checkpoint(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Mesh(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Mesh(e.to_string())
    }
}

impl From<NumericalError> for CliError {
    fn from(e: NumericalError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<CaseError> for CliError {
    fn from(e: CaseError) -> Self {
        match e {
            CaseError::Mesh(e) => e.into(),
            CaseError::Numerical(e) => e.into(),
        }
    }
}

/// Builds the mesh and rejects it unless every validation check passes.
pub fn build_mesh(spec: &MeshSpec) -> Result<Mesh, CliError> {
    let mesh = match *spec {
        MeshSpec::Plane { nx, ny, lx, ly } => Mesh::plane_regular(nx, ny, lx, ly)?,
        MeshSpec::PlaneIrregular { nx, ny, lx, ly, factor, seed } => {
            Mesh::plane_irregular(nx, ny, lx, ly, &IrregularParams::centered(lx, ly, factor, seed))?
        }
        MeshSpec::Sphere { level, radius } => Mesh::sphere(level, radius)?,
    };
    let report = mesh.validate();
    if !report.all_passed() {
        let failed: Vec<String> = report.failures().map(|c| format!("{} (worst {:e})", c.name, c.worst)).collect();
        return Err(CliError::Mesh(format!("validation failed: {}", failed.join(", "))));
    }
    Ok(mesh)
}

/// Initial state and physical parameters of a case.
pub fn initialize(mesh: &Mesh, case: &CaseSpec) -> Result<(State, sdswe::dynamics::PhysicalParams), CliError> {
    Ok(match case {
        CaseSpec::VortexPair(c, s) => init_vortex_pair(mesh, c, s)?,
        CaseSpec::ShearFlow(c, s) => init_shear_flow(mesh, c, s)?,
        CaseSpec::Mountain(c, s) => init_mountain(mesh, c, s)?,
    })
}

/// Everything needed to integrate a resolved configuration.
pub struct Prepared {
    pub model: Model,
    pub initial: State,
    pub time: TimeConfig,
    pub steps: u64,
}

/// Number of steps of size `dt` covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> u64 {
    (duration / dt - 1e-9).ceil().max(0.0) as u64
}

pub fn prepare(resolved: &Resolved) -> Result<Prepared, CliError> {
    let mesh = build_mesh(&resolved.mesh)?;
    let (initial, params) = initialize(&mesh, &resolved.case)?;
    let dt = match resolved.step_size {
        StepSize::Fixed(dt) => dt,
        StepSize::Cfl(c) => cfl_time_step(&mesh, &initial.h, &params.eta_b, params.g, c),
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Numerical(format!("time step {dt} is not positive")));
    }
    let time = TimeConfig { dt, ..resolved.time };
    let model = Model::new(mesh, params, resolved.dissipation);
    Ok(Prepared { model, initial, time, steps: step_count(resolved.duration, dt) })
}
