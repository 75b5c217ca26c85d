//! Convergence studies and spectra extraction.

use std::path::Path;

use sdswe::cases::{commutator_test_fields, PlaneSetup, SphereSetup, VortexPair};
use sdswe::diagnostics::{edge_error_norms, energy, relative_error, spectra, Spectrum};
use sdswe::dissipation::{discrete_commutator, DissipationConfig};
use sdswe::integrator::{run, Checkpoint, TimeConfig};
use sdswe::Mesh;

use crate::config::{CaseSpec, ConfigError, MeshSpec, SimConfig};
use crate::{build_mesh, initialize, step_count, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Domain {
    Plane,
    PlaneIrregular,
    Sphere,
}

/// Error of the discrete commutator on one mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorError {
    pub cells: usize,
    pub l2: f64,
    pub linf: f64,
}

/// Mesh of refinement `level` for a domain: plane meshes have
/// `2 · (32·2^level)²` triangles, sphere meshes are icosahedral level `3 + level`.
pub fn study_mesh(domain: Domain, level: u32) -> Result<Mesh, CliError> {
    let s = PlaneSetup::default();
    let n = 32usize << level;
    let spec = match domain {
        Domain::Plane => MeshSpec::Plane { nx: n, ny: n, lx: s.lx, ly: s.ly },
        Domain::PlaneIrregular => MeshSpec::PlaneIrregular { nx: n, ny: n, lx: s.lx, ly: s.ly, factor: 2.0, seed: 1 },
        Domain::Sphere => MeshSpec::Sphere { level: 3 + level, radius: SphereSetup::default().radius },
    };
    build_mesh(&spec)
}

pub fn commutator_error(mesh: &Mesh) -> CommutatorError {
    let fields = commutator_test_fields(mesh);
    let w = discrete_commutator(mesh, &fields.u, &fields.v);
    let (l2, linf) = edge_error_norms(mesh, &w, &fields.exact);
    CommutatorError { cells: mesh.num_cells(), l2, linf }
}

/// Commutator errors over `levels` successive refinements.
pub fn convergence_commutator(domain: Domain, levels: u32) -> Result<Vec<CommutatorError>, CliError> {
    (0..levels).map(|l| Ok(commutator_error(&study_mesh(domain, l)?))).collect()
}

/// Convergence order with respect to the mesh spacing `∝ N^{-1/2}` between
/// successive rows.
pub fn orders(cells: &[usize], errors: &[f64]) -> Vec<f64> {
    cells
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| -2.0 * (e[1] / e[0]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Relative energy error `|ΔH/H|` of the vortex case after `duration` seconds
/// without dissipation, for each time step in `dts`.
pub fn convergence_energy(nx: usize, duration: f64, dts: &[f64]) -> Result<Vec<(f64, f64)>, CliError> {
    let setup = PlaneSetup::default();
    let mesh = build_mesh(&MeshSpec::Plane { nx, ny: nx, lx: setup.lx, ly: setup.ly })?;
    let (initial, params) = initialize(&mesh, &CaseSpec::VortexPair(VortexPair::default(), setup))?;
    let h0 = energy(&mesh, &params, &initial);
    let model = sdswe::integrator::Model::new(mesh, params, DissipationConfig::none());
    dts.iter()
        .map(|&dt| {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ConfigError(format!("invalid time step {dt}")).into());
            }
            let time = TimeConfig::with_dt(dt);
            let last = run(&model, &time, initial.clone(), 0, step_count(duration, dt), |_, _, _| {})
                .map_err(|f| CliError::Numerical(format!("dt {dt} s, step {}: {}", f.step, f.error)))?;
            Ok((dt, relative_error(energy(&model.mesh, &model.params, &last), h0).abs()))
        })
        .collect()
}

/// Spectra of the states in the given checkpoints, averaged shell by shell.
/// The checkpoints must share one mesh, rebuilt from their stored configuration.
pub fn spectra_from_checkpoints(paths: &[&Path], grid: usize) -> Result<Spectrum, CliError> {
    let mut total: Option<Spectrum> = None;
    let mut mesh_cache: Option<(String, Mesh, sdswe::DualField)> = None;
    for path in paths {
        let cp = Checkpoint::read(path)?;
        if mesh_cache.as_ref().is_none_or(|(hash, _, _)| *hash != cp.mesh_hash) {
            let config = SimConfig::parse(&cp.descriptor)?;
            let resolved = config.resolve()?;
            let mesh = build_mesh(&resolved.mesh)?;
            let (_, params) = initialize(&mesh, &resolved.case)?;
            let f = sdswe::dynamics::coriolis_dual(&mesh, params.coriolis);
            mesh_cache = Some((mesh.hash(), mesh, f));
        }
        let (_, mesh, f) = mesh_cache.as_ref().unwrap();
        cp.verify(mesh)?;
        let s = spectra(mesh, f, &cp.state, grid)?;
        total = Some(match total {
            None => s,
            Some(mut t) => {
                for (a, b) in t.ke.iter_mut().zip(&s.ke) {
                    *a += b;
                }
                for (a, b) in t.enstrophy.iter_mut().zip(&s.enstrophy) {
                    *a += b;
                }
                t
            }
        });
    }
    let mut total = total.ok_or_else(|| ConfigError("no checkpoint given".into()))?;
    let n = paths.len() as f64;
    total.ke.iter_mut().for_each(|x| *x /= n);
    total.enstrophy.iter_mut().for_each(|x| *x /= n);
    Ok(total)
}

pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("k_rad_per_m,kinetic_energy,enstrophy\n");
    for i in 0..s.k.len() {
        out += &format!("{:.16e},{:.16e},{:.16e}\n", s.k[i], s.ke[i], s.enstrophy[i]);
    }
    out
}

pub fn commutator_csv(rows: &[CommutatorError]) -> String {
    let mut out = String::from("N,L2,Linf\n");
    for r in rows {
        out += &format!("{},{:.16e},{:.16e}\n", r.cells, r.l2, r.linf);
    }
    out
}

pub fn energy_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("dt_s,energy_rel_err\n");
    for (dt, e) in rows {
        out += &format!("{dt:.16e},{e:.16e}\n");
    }
    out
}
