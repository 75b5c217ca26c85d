//! Time stepping: Cayley (Crank–Nicolson) continuity update followed by a
//! fixed-point Crank–Nicolson momentum update, plus binary checkpoints.

use std::io::{Read, Write};
use std::path::Path;

use crate::dissipation::{biharmonic_tendency, casimir_gradient_of_state, casimir_tendency_frozen, BracketOperand};
use crate::dissipation::{DissipationConfig, DissipationMode};
use crate::dynamics::{adv_term, check_depth, coriolis_dual, gradient_term, kinetic_term, PhysicalParams, State};
use crate::error::{CheckpointError, NumericalError};
use crate::fields::{CellField, DualField, EdgeField};
use crate::mesh::Mesh;

/// Default Courant number for the gravity-wave time step.
pub const DEFAULT_CFL: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeConfig {
    /// Time step (s).
    pub dt: f64,
    /// Stopping threshold on the max-norm velocity update (m/s).
    pub fp_tolerance: f64,
    pub fp_max_iterations: usize,
    /// Relative residual target of the continuity solve.
    pub linear_tolerance: f64,
    pub linear_max_iterations: usize,
}

impl TimeConfig {
    pub fn with_dt(dt: f64) -> Self {
        TimeConfig {
            dt,
            fp_tolerance: 1e-12,
            fp_max_iterations: 50,
            linear_tolerance: 1e-14,
            linear_max_iterations: 500,
        }
    }
}

/// `C · min|ẽ| / sqrt(g · max(h + η_b))`.
pub fn cfl_time_step(mesh: &Mesh, h: &CellField, eta_b: &CellField, g: f64, courant: f64) -> f64 {
    let depth = h.iter().zip(eta_b.iter()).fold(0.0f64, |m, (a, b)| m.max(a + b));
    courant * mesh.min_dual_length() / (g * depth).sqrt()
}

/// Everything a step needs besides the state.
#[derive(Clone, Debug)]
pub struct Model {
    pub mesh: Mesh,
    pub params: PhysicalParams,
    /// Coriolis parameter at dual cells.
    pub f: DualField,
    pub dissipation: DissipationConfig,
}

impl Model {
    pub fn new(mesh: Mesh, params: PhysicalParams, dissipation: DissipationConfig) -> Self {
        let f = coriolis_dual(&mesh, params.coriolis);
        Model { mesh, params, f, dissipation }
    }
}

/// One sparse row of the depth-advection generator.
#[derive(Clone, Copy, Debug, PartialEq)]
struct GeneratorRow {
    diag: f64,
    cols: [usize; 3],
    vals: [f64; 3],
}

/// Linear map `B` with `B h = −Div(V h̄)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdvectionGenerator {
    rows: Vec<GeneratorRow>,
}

impl AdvectionGenerator {
    pub fn apply(&self, h: &CellField) -> CellField {
        CellField::from_fn(self.rows.len(), |i| {
            let r = &self.rows[i];
            r.diag * h[i] + r.vals[0] * h[r.cols[0]] + r.vals[1] * h[r.cols[1]] + r.vals[2] * h[r.cols[2]]
        })
    }

    /// Entry `B_ij`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let r = &self.rows[i];
        let mut v = if i == j { r.diag } else { 0.0 };
        for k in 0..3 {
            if r.cols[k] == j {
                v += r.vals[k];
            }
        }
        v
    }

    /// Number of structurally and numerically nonzero entries.
    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| (r.diag != 0.0) as usize + r.vals.iter().filter(|v| **v != 0.0).count()).sum()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.diag.abs() + r.vals.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn assemble_advection_generator(mesh: &Mesh, v: &EdgeField) -> AdvectionGenerator {
    let edges = mesh.edges();
    let rows = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row = GeneratorRow { diag: 0.0, cols: c.neighbors, vals: [0.0; 3] };
            for k in 0..3 {
                let e = c.edges[k];
                let w = -edges[e].length * c.edge_signs[k] * v[e] / (2.0 * c.area);
                row.diag += w;
                row.vals[k] = w;
            }
            debug_assert!(c.neighbors.iter().all(|&n| n != i));
            row
        })
        .collect();
    AdvectionGenerator { rows }
}

/// Solves `(I − ½Δt B) h⁺ = (I + ½Δt B) h` by Jacobi iteration. Returns the
/// new depth and the iteration count.
pub fn continuity_step(
    b: &AdvectionGenerator,
    h: &CellField,
    dt: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(CellField, usize), NumericalError> {
    let half = 0.5 * dt;
    let rhs = h.axpy(half, &b.apply(h));
    let rhs_norm = rhs.max_abs().max(f64::MIN_POSITIVE);
    let diag: Vec<f64> = b.rows.iter().map(|r| 1.0 - half * r.diag).collect();
    let residual = |x: &CellField| {
        let bx = b.apply(x);
        (0..x.len()).map(|i| (rhs[i] - x[i] + half * bx[i]).abs()).fold(0.0, f64::max) / rhs_norm
    };
    let mut x = rhs.clone();
    let mut res = residual(&x);
    let mut it = 0;
    while res > tolerance {
        if it == max_iterations {
            return Err(NumericalError::LinearSolve { residual: res, iterations: it });
        }
        let next = CellField::from_fn(x.len(), |i| {
            let r = &b.rows[i];
            let off = r.vals[0] * x[r.cols[0]] + r.vals[1] * x[r.cols[1]] + r.vals[2] * x[r.cols[2]];
            (rhs[i] + half * off) / diag[i]
        });
        x = next;
        res = residual(&x);
        it += 1;
        if !res.is_finite() {
            return Err(NumericalError::NonFinite("continuity solve"));
        }
    }
    Ok((x, it))
}

/// Dissipative velocity tendency for the active mode. `dtilde` is the frozen
/// enstrophy gradient (used only in Casimir mode).
fn dissipation_tendency(model: &Model, v: &EdgeField, h: &CellField, dtilde: Option<&BracketOperand>) -> Option<EdgeField> {
    let d = &model.dissipation;
    match d.mode {
        DissipationMode::None => None,
        DissipationMode::Biharmonic => Some(biharmonic_tendency(&model.mesh, v, d.nu)),
        DissipationMode::Casimir => dtilde.map(|dt| casimir_tendency_frozen(&model.mesh, v, h, dt, d.theta)),
    }
}

/// `−½Adv − ½K + ½Diss` at one time level.
fn half_tendency(
    model: &Model,
    v: &EdgeField,
    h: &CellField,
    dtilde: Option<&BracketOperand>,
) -> Result<EdgeField, NumericalError> {
    let adv = adv_term(&model.mesh, v, h, &model.f)?;
    let k = kinetic_term(&model.mesh, v);
    let mut out = EdgeField::from_fn(v.len(), |e| -0.5 * (adv[e] + k[e]));
    if let Some(d) = dissipation_tendency(model, v, h, dtilde) {
        for e in 0..v.len() {
            out[e] += 0.5 * d[e];
        }
    }
    Ok(out)
}

/// Fixed-point iteration for the momentum update. Returns `V^{t+1}` and the
/// number of iterations taken.
pub fn momentum_fixed_point(
    model: &Model,
    time: &TimeConfig,
    v: &EdgeField,
    h: &CellField,
    h_new: &CellField,
) -> Result<(EdgeField, usize), NumericalError> {
    let dtilde = match model.dissipation.mode {
        DissipationMode::Casimir if model.dissipation.theta != 0.0 => {
            Some(BracketOperand::new(&model.mesh, casimir_gradient_of_state(&model.mesh, v, h, &model.f)?))
        }
        _ => None,
    };
    let dt = time.dt;
    let old = half_tendency(model, v, h, dtilde.as_ref())?;
    let grad = gradient_term(&model.mesh, h_new, &model.params.eta_b, model.params.g);
    // Part of the update that does not change between iterations.
    let base = EdgeField::from_fn(v.len(), |e| v[e] + dt * (old[e] - grad[e]));
    let mut current = v.clone();
    let mut update = f64::INFINITY;
    for k in 1..=time.fp_max_iterations {
        let new = half_tendency(model, &current, h_new, dtilde.as_ref())?;
        let next = EdgeField::from_fn(v.len(), |e| base[e] + dt * new[e]);
        update = (0..v.len()).map(|e| (next[e] - current[e]).abs()).fold(0.0, f64::max);
        if !update.is_finite() {
            return Err(NumericalError::NonFinite("momentum update"));
        }
        current = next;
        if update < time.fp_tolerance {
            return Ok((current, k));
        }
    }
    Err(NumericalError::FixedPoint { update, iterations: time.fp_max_iterations })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub fp_iterations: usize,
    pub linear_iterations: usize,
}

/// Advances the state by one time step.
pub fn step(model: &Model, time: &TimeConfig, state: &State) -> Result<(State, StepReport), NumericalError> {
    check_depth(&state.h)?;
    let b = assemble_advection_generator(&model.mesh, &state.v);
    let (h_new, linear_iterations) =
        continuity_step(&b, &state.h, time.dt, time.linear_tolerance, time.linear_max_iterations)?;
    check_depth(&h_new)?;
    let (v_new, fp_iterations) = momentum_fixed_point(model, time, &state.v, &state.h, &h_new)?;
    let next = State { v: v_new, h: h_new, t: state.t + time.dt };
    Ok((next, StepReport { fp_iterations, linear_iterations }))
}

/// A failed run: the error, the step that failed and the last good state.
#[derive(Debug)]
pub struct RunFailure {
    pub step: u64,
    pub error: NumericalError,
    pub last_good: State,
}

/// Takes `steps` steps starting at step index `first_step`, calling
/// `observer(step_index, state, report)` after each one.
pub fn run(
    model: &Model,
    time: &TimeConfig,
    initial: State,
    first_step: u64,
    steps: u64,
    mut observer: impl FnMut(u64, &State, &StepReport),
) -> Result<State, Box<RunFailure>> {
    let mut state = initial;
    for n in first_step..first_step + steps {
        match step(model, time, &state) {
            Ok((next, report)) => {
                state = next;
                observer(n + 1, &state, &report);
            }
            Err(error) => return Err(Box::new(RunFailure { step: n + 1, error, last_good: state })),
        }
    }
    Ok(state)
}

const MAGIC: &[u8; 8] = b"SDSWECKP";
const VERSION: u32 = 1;

/// Contents of a checkpoint file.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    /// SHA-256 hex digest of the mesh the state belongs to.
    pub mesh_hash: String,
    /// Free-form text describing how to rebuild the run (typically its configuration).
    pub descriptor: String,
    pub step: u64,
    pub state: State,
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(bytes);
}

impl Checkpoint {
    /// Little-endian layout: magic, version (u32), hash, descriptor (length-
    /// prefixed bytes), step (u64), time (f64), V and h (length-prefixed f64 arrays).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_bytes(&mut out, self.mesh_hash.as_bytes());
        put_bytes(&mut out, self.descriptor.as_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        out.extend_from_slice(&self.state.t.to_le_bytes());
        for values in [self.state.v.values(), self.state.h.values()] {
            out.extend_from_slice(&(values.len() as u64).to_le_bytes());
            for x in values {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if bytes.len() < MAGIC.len() {
            return Err(CheckpointError::Truncated);
        }
        if r.take(MAGIC.len())? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let mesh_hash = r.string()?;
        let descriptor = r.string()?;
        let step = r.u64()?;
        let t = r.f64()?;
        let v = EdgeField::from_vec(r.f64_array()?);
        let h = CellField::from_vec(r.f64_array()?);
        Ok(Checkpoint { mesh_hash, descriptor, step, state: State { v, h, t } })
    }

    pub fn write(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Checkpoint, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Checkpoint::from_bytes(&bytes)
    }

    /// Checks that the checkpoint belongs to `mesh`.
    pub fn verify(&self, mesh: &Mesh) -> Result<(), CheckpointError> {
        if self.mesh_hash != mesh.hash() {
            return Err(CheckpointError::MeshMismatch);
        }
        if self.state.v.len() != mesh.num_edges() || self.state.h.len() != mesh.num_cells() {
            return Err(CheckpointError::SizeMismatch { edges: self.state.v.len(), cells: self.state.h.len() });
        }
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let out = self.bytes.get(self.pos..end).ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let n = self.u64()? as usize;
        Ok(String::from_utf8_lossy(self.take(n)?).into_owned())
    }

    fn f64_array(&mut self) -> Result<Vec<f64>, CheckpointError> {
        let n = self.u64()? as usize;
        let raw = self.take(n.checked_mul(8).ok_or(CheckpointError::Truncated)?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{continuity_flux, Coriolis};
    use crate::mesh::test_meshes::{equilateral32, skewed_plane};
    use crate::operators::ip_cell;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(m: &Mesh, seed: u64, amp: f64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        State {
            v: EdgeField::from_fn(m.num_edges(), |_| amp * rng.gen_range(-1.0..1.0)),
            h: CellField::from_fn(m.num_cells(), |_| rng.gen_range(0.8..1.2)),
            t: 0.0,
        }
    }

    fn model(m: Mesh, f: f64, dissipation: DissipationConfig) -> Model {
        let params = PhysicalParams::flat_bottom(&m, 1.0, Coriolis::FPlane(f));
        Model::new(m, params, dissipation)
    }

    #[test]
    fn generator_matches_continuity_flux() {
        let m = skewed_plane();
        let s = random_state(&m, 1, 1.0);
        let b = assemble_advection_generator(&m, &s.v);
        let direct = continuity_flux(&m, &s.v, &s.h);
        assert!(b.apply(&s.h).axpy(-1.0, &direct).max_abs() < 1e-13 * direct.max_abs());
    }

    #[test]
    fn generator_columns_are_mass_neutral() {
        let m = skewed_plane();
        let s = random_state(&m, 2, 1.0);
        let b = assemble_advection_generator(&m, &s.v);
        for j in 0..m.num_cells() {
            let col: f64 = (0..m.num_cells()).map(|i| m.cells()[i].area * b.entry(i, j)).sum();
            assert!(col.abs() <= 1e-14 * b.norm_inf(), "column {j}: {col}");
        }
    }

    #[test]
    fn generator_stencil() {
        let m = equilateral32();
        assert_eq!(assemble_advection_generator(&m, &EdgeField::zeros(48)).nonzeros(), 0);
        let mut v = EdgeField::zeros(48);
        v[5] = 1.0;
        assert_eq!(assemble_advection_generator(&m, &v).nonzeros(), 4);
    }

    #[test]
    fn continuity_step_conserves_mass() {
        let m = skewed_plane();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_state(&m, rng.gen(), 1.0);
            let b = assemble_advection_generator(&m, &s.v);
            let (h, _) = continuity_step(&b, &s.h, 0.05, 1e-14, 500).unwrap();
            let ones = CellField::constant(m.num_cells(), 1.0);
            let before = ip_cell(&m, &ones, &s.h);
            assert!(((ip_cell(&m, &ones, &h) - before) / before).abs() <= 1e-12);
        }
    }

    #[test]
    fn continuity_step_trivial_cases() {
        let m = equilateral32();
        let h = CellField::from_fn(32, |i| 1.0 + 0.01 * i as f64);
        let zero = assemble_advection_generator(&m, &EdgeField::zeros(48));
        assert_eq!(continuity_step(&zero, &h, 1.0, 1e-14, 10).unwrap(), (h.clone(), 0));
        // A uniform flow is divergence free and leaves a constant depth unchanged.
        let v = crate::operators::sample_normal(&m, |_| crate::mesh::Vec3::new(0.3, -0.2, 0.0));
        let flat = CellField::constant(32, 2.0);
        let (out, _) = continuity_step(&assemble_advection_generator(&m, &v), &flat, 0.1, 1e-14, 100).unwrap();
        assert!(out.axpy(-1.0, &flat).max_abs() < 1e-13);
    }

    #[test]
    fn linear_solve_failure_is_reported() {
        let m = skewed_plane();
        let s = random_state(&m, 4, 1.0);
        let b = assemble_advection_generator(&m, &s.v);
        assert!(matches!(continuity_step(&b, &s.h, 0.05, 1e-14, 1), Err(NumericalError::LinearSolve { .. })));
    }

    #[test]
    fn lake_at_rest_is_fixed() {
        let m = skewed_plane();
        let mut params = PhysicalParams::flat_bottom(&m, 9.81, Coriolis::FPlane(1e-4));
        params.eta_b = CellField::from_fn(m.num_cells(), |i| 0.1 * (i % 5) as f64);
        let h = CellField::from_fn(m.num_cells(), |i| 10.0 - params.eta_b[i]);
        let model = Model::new(m, params, DissipationConfig::none());
        let s = State { v: EdgeField::zeros(model.mesh.num_edges()), h, t: 0.0 };
        let (next, report) = step(&model, &TimeConfig::with_dt(0.01), &s).unwrap();
        assert_eq!(report.fp_iterations, 1);
        assert_eq!(next.v.max_abs(), 0.0);
        assert_eq!(next.h, s.h);
    }

    #[test]
    fn update_shrinks_with_dt() {
        let model = model(skewed_plane(), 1.0, DissipationConfig::none());
        let s = random_state(&model.mesh, 5, 0.1);
        let change = |dt: f64| {
            let (n, _) = step(&model, &TimeConfig::with_dt(dt), &s).unwrap();
            n.v.axpy(-1.0, &s.v).max_abs()
        };
        let (a, b) = (change(0.002), change(0.001));
        assert!((a / b - 2.0).abs() < 0.1, "{a} {b}");
    }

    #[test]
    fn two_half_steps_match_one_step() {
        let model = model(skewed_plane(), 1.0, DissipationConfig::none());
        let s = random_state(&model.mesh, 6, 0.1);
        let local = |dt: f64| {
            let (full, _) = step(&model, &TimeConfig::with_dt(dt), &s).unwrap();
            let half = TimeConfig::with_dt(dt / 2.0);
            let (mid, _) = step(&model, &half, &s).unwrap();
            let (two, _) = step(&model, &half, &mid).unwrap();
            two.v.axpy(-1.0, &full.v).max_abs()
        };
        let (a, b) = (local(0.02), local(0.01));
        assert!(a / b > 3.0, "{a} {b}");
    }

    #[test]
    fn reversed_step_returns() {
        // Stepping (−V, f → −f) from the end state retraces the step up to O(Δt²).
        let m = skewed_plane();
        let s = random_state(&m, 7, 0.1);
        let forward = model(m.clone(), 0.5, DissipationConfig::none());
        let backward = model(m, -0.5, DissipationConfig::none());
        let defect = |dt: f64| {
            let time = TimeConfig::with_dt(dt);
            let (a, _) = step(&forward, &time, &s).unwrap();
            let (b, _) = step(&backward, &time, &State { v: a.v.scaled(-1.0), ..a }).unwrap();
            b.v.axpy(1.0, &s.v).max_abs().max(b.h.axpy(-1.0, &s.h).max_abs())
        };
        let (a, b) = (defect(0.004), defect(0.002));
        assert!(a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn zero_steps_is_identity() {
        let model = model(equilateral32(), 1.0, DissipationConfig::none());
        let s = random_state(&model.mesh, 8, 0.1);
        let out = run(&model, &TimeConfig::with_dt(0.1), s.clone(), 0, 0, |_, _, _| panic!()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn fixed_point_failure_is_reported() {
        let model = model(skewed_plane(), 1.0, DissipationConfig::none());
        let s = random_state(&model.mesh, 9, 1.0);
        let mut time = TimeConfig::with_dt(0.01);
        time.fp_max_iterations = 2;
        let err = step(&model, &time, &s).unwrap_err();
        assert!(matches!(err, NumericalError::FixedPoint { iterations: 2, .. }));
    }

    #[test]
    fn negative_depth_is_rejected() {
        let model = model(equilateral32(), 1.0, DissipationConfig::none());
        let mut s = random_state(&model.mesh, 10, 0.1);
        s.h[3] = -1.0;
        let failure = run(&model, &TimeConfig::with_dt(0.1), s, 0, 3, |_, _, _| {}).unwrap_err();
        assert_eq!(failure.step, 1);
        assert!(matches!(failure.error, NumericalError::NonPositiveDepth { .. }));
    }

    #[test]
    fn casimir_step_runs_and_differs() {
        let dis = DissipationConfig { mode: DissipationMode::Casimir, theta: 1e-3, nu: 0.0 };
        let plain = model(skewed_plane(), 1.0, DissipationConfig::none());
        let casimir = model(skewed_plane(), 1.0, dis);
        let s = random_state(&plain.mesh, 11, 0.1);
        let time = TimeConfig::with_dt(0.01);
        let (a, _) = step(&plain, &time, &s).unwrap();
        let (b, _) = step(&casimir, &time, &s).unwrap();
        assert_eq!(a.h, b.h);
        assert!(a.v != b.v);
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = equilateral32();
        let s = random_state(&m, 12, 1.0);
        let ck = Checkpoint { mesh_hash: m.hash(), descriptor: "case = \"x\"".into(), step: 42, state: s };
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ck);
        back.verify(&m).unwrap();
        assert!(matches!(back.verify(&skewed_plane()), Err(CheckpointError::MeshMismatch)));
        assert!(matches!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]), Err(CheckpointError::Truncated)));
        assert!(matches!(Checkpoint::from_bytes(b""), Err(CheckpointError::Truncated)));
        assert!(matches!(Checkpoint::from_bytes(b"NOTACHECKPOINT"), Err(CheckpointError::BadMagic)));
        let mut wrong = bytes.clone();
        wrong[8] = 9;
        assert!(matches!(Checkpoint::from_bytes(&wrong), Err(CheckpointError::Version(9))));
    }

    #[test]
    fn resume_is_bitwise_identical() {
        let dis = DissipationConfig { mode: DissipationMode::Casimir, theta: 1e-4, nu: 0.0 };
        let model = model(skewed_plane(), 1.0, dis);
        let s = random_state(&model.mesh, 13, 0.1);
        let time = TimeConfig::with_dt(0.01);
        let straight = run(&model, &time, s.clone(), 0, 6, |_, _, _| {}).unwrap();
        let mid = run(&model, &time, s, 0, 3, |_, _, _| {}).unwrap();
        let ck = Checkpoint { mesh_hash: model.mesh.hash(), descriptor: String::new(), step: 3, state: mid };
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        let resumed = run(&model, &time, back.state, back.step, 3, |_, _, _| {}).unwrap();
        assert_eq!(resumed, straight);
    }

    #[test]
    fn cfl_step() {
        let m = equilateral32();
        let h = CellField::constant(32, 4.0);
        let dt = cfl_time_step(&m, &h, &CellField::zeros(32), 1.0, 0.2);
        assert!((dt - 0.2 * m.min_dual_length() / 2.0).abs() < 1e-15);
    }
}
