//! The `run` command: integrates a configured case and writes its outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use sdswe::diagnostics::DiagnosticsRecord;
use sdswe::dissipation::DissipationMode;
use sdswe::dynamics::{dual_depth, potential_vorticity};
use sdswe::integrator::{step, Checkpoint, Model};
use sdswe::{Mesh, State};

use crate::config::{ConfigError, SimConfig};
use crate::{prepare, CliError};

pub const MANIFEST: &str = "manifest.json";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const CHECKPOINT: &str = "checkpoint.bin";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub mode: Option<DissipationMode>,
    pub resume: Option<PathBuf>,
    pub deterministic: bool,
}

/// Record of what a run was asked to do, written before the first step.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub config_path: String,
    /// Effective configuration, including command-line overrides.
    pub config: String,
    pub code_version: String,
    pub mesh_hash: String,
    pub output_dir: String,
    pub deterministic: bool,
    pub resumed_from: Option<String>,
    pub mode: String,
    pub dt_s: f64,
    pub first_step: u64,
    pub steps: u64,
    pub theta_m4_s: f64,
    pub nu_m4_per_s: f64,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub final_state: State,
    pub records: Vec<DiagnosticsRecord>,
}

/// Reads a configuration file, or the configuration stored in a run manifest
/// when the path ends in `.json`.
pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let manifest: RunManifest =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        return Ok(SimConfig::parse(&manifest.config)?);
    }
    Ok(SimConfig::read(path)?)
}

fn write_snapshot(dir: &Path, model: &Model, step: u64, state: &State) -> Result<(), CliError> {
    let mesh = &model.mesh;
    let dir = dir.join(format!("snapshot_{step:08}"));
    fs::create_dir_all(&dir)?;
    let mut w = BufWriter::new(File::create(dir.join("cells.csv"))?);
    writeln!(w, "id,x,y,z,h")?;
    for (i, c) in mesh.cells().iter().enumerate() {
        let p = c.circumcenter;
        writeln!(w, "{i},{:.16e},{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z, state.h[i])?;
    }
    w.flush()?;
    let q = potential_vorticity(mesh, &state.v, &state.h, &model.f)?;
    let hz = dual_depth(mesh, &state.h)?;
    let mut w = BufWriter::new(File::create(dir.join("duals.csv"))?);
    writeln!(w, "id,x,y,z,q,q_rel")?;
    for (z, d) in mesh.duals().iter().enumerate() {
        let p = d.position;
        writeln!(w, "{z},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z, q[z], q[z] - model.f[z] / hz[z])?;
    }
    w.flush()?;
    Ok(())
}

fn checkpoint(mesh: &Mesh, descriptor: &str, step: u64, state: &State) -> Checkpoint {
    Checkpoint { mesh_hash: mesh.hash(), descriptor: descriptor.to_string(), step, state: state.clone() }
}

/// Runs the case described by the configuration at `config_path`, writing
/// the manifest, diagnostics, snapshots and checkpoints into `out`.
pub fn cmd_run(config_path: &Path, out: &Path, options: &RunOptions) -> Result<RunSummary, CliError> {
    let mut config = load_config(config_path)?;
    if let Some(mode) = options.mode {
        config.dissipation.mode = Some(mode.to_string());
    }
    let descriptor = config.to_toml();
    let resolved = config.resolve()?;
    let prepared = prepare(&resolved)?;
    let model = &prepared.model;
    let mesh = &model.mesh;

    let (mut state, first_step) = match &options.resume {
        Some(path) => {
            let cp = Checkpoint::read(path)?;
            cp.verify(mesh)?;
            (cp.state, cp.step)
        }
        None => (prepared.initial.clone(), 0),
    };
    let remaining = prepared.steps.saturating_sub(first_step);

    fs::create_dir_all(out)?;
    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        config: descriptor.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        mesh_hash: mesh.hash(),
        output_dir: out.display().to_string(),
        deterministic: options.deterministic,
        resumed_from: options.resume.as_ref().map(|p| p.display().to_string()),
        mode: resolved.dissipation.mode.to_string(),
        dt_s: prepared.time.dt,
        first_step,
        steps: prepared.steps,
        theta_m4_s: resolved.dissipation.theta,
        nu_m4_per_s: resolved.dissipation.nu,
    };
    fs::write(out.join(MANIFEST), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;

    let params = &model.params;
    // Relative errors always refer to the case's initial state.
    let reference = DiagnosticsRecord::measure(mesh, params, &model.f, 0, &prepared.initial, 0, None)?;
    let mut diagnostics = BufWriter::new(File::create(out.join(DIAGNOSTICS))?);
    writeln!(diagnostics, "{}", DiagnosticsRecord::CSV_HEADER)?;
    let first = DiagnosticsRecord::measure(mesh, params, &model.f, first_step, &state, 0, Some(&reference))?;
    writeln!(diagnostics, "{}", first.csv_row())?;
    let mut records = vec![first];
    write_snapshot(out, model, first_step, &state)?;

    let last = first_step + remaining;
    for n in first_step + 1..=last {
        let report = match step(model, &prepared.time, &state) {
            Ok((next, report)) => {
                state = next;
                report
            }
            Err(e) => {
                diagnostics.flush()?;
                checkpoint(mesh, &descriptor, n - 1, &state).write(&out.join(CHECKPOINT))?;
                return Err(CliError::Numerical(format!("step {n}: {e}")));
            }
        };
        if n % resolved.diagnostics_every == 0 || n == last {
            let r = DiagnosticsRecord::measure(mesh, params, &model.f, n, &state, report.fp_iterations, Some(&reference))?;
            writeln!(diagnostics, "{}", r.csv_row())?;
            records.push(r);
        }
        if (resolved.snapshot_every > 0 && n % resolved.snapshot_every == 0) || n == last {
            write_snapshot(out, model, n, &state)?;
        }
        if resolved.checkpoint_every > 0 && n % resolved.checkpoint_every == 0 {
            let cp = checkpoint(mesh, &descriptor, n, &state);
            cp.write(&out.join(CHECKPOINT))?;
            if resolved.keep_checkpoints {
                cp.write(&out.join(format!("checkpoint_{n:08}.bin")))?;
            }
        }
    }
    diagnostics.flush()?;
    checkpoint(mesh, &descriptor, last, &state).write(&out.join(CHECKPOINT))?;
    Ok(RunSummary { steps: remaining, final_state: state, records })
}
