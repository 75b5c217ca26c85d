//! Energy, potential enstrophy and mass functionals, edge error norms and
//! kinetic-energy / enstrophy spectra.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dynamics::{dual_depth, kinetic_density, potential_vorticity, PhysicalParams, State};
use crate::error::{MeshError, NumericalError};
use crate::fields::{DualField, EdgeField};
use crate::mesh::{Geometry, Mesh, Vec3};
use crate::operators::{curl, reconstruct_cell};

/// `Σ_i [ (g/2)(h_i + η_b,i)² Ω_ii + ½ h_i Σ_k |e||ẽ| V² / 2 ]`.
pub fn energy(mesh: &Mesh, params: &PhysicalParams, state: &State) -> f64 {
    let ke = kinetic_density(mesh, &state.v);
    mesh.cells()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let surface = state.h[i] + params.eta_b[i];
            (0.5 * params.g * surface * surface + 0.5 * state.h[i] * ke[i]) * c.area
        })
        .sum()
}

/// Potential enstrophy `½ Σ_ζ (Curl V + f)² / h_ζ · |ζ|`.
pub fn enstrophy(mesh: &Mesh, f: &DualField, state: &State) -> Result<f64, NumericalError> {
    let hz = dual_depth(mesh, &state.h)?;
    let c = curl(mesh, &state.v);
    Ok(mesh
        .duals()
        .iter()
        .enumerate()
        .map(|(z, d)| {
            let eta = c[z] + f[z];
            0.5 * eta * eta / hz[z] * d.area
        })
        .sum())
}

/// `Σ_i Ω_ii h_i`.
pub fn mass(mesh: &Mesh, state: &State) -> f64 {
    mesh.cells().iter().zip(state.h.iter()).map(|(c, h)| c.area * h).sum()
}

/// `(x − x₀) / x₀`, or the absolute change when `x₀` is zero.
pub fn relative_error(value: f64, initial: f64) -> f64 {
    if initial == 0.0 {
        value
    } else {
        (value - initial) / initial
    }
}

/// Conserved quantities at one output time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub mass: f64,
    pub energy_rel_err: f64,
    pub enstrophy_rel_err: f64,
    pub mass_rel_err: f64,
    pub fp_iters: usize,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str =
        "step,time_s,energy,enstrophy,mass,energy_rel_err,enstrophy_rel_err,mass_rel_err,fp_iters";

    /// Measures a state; `initial` supplies the reference for relative errors
    /// (the record itself when absent).
    pub fn measure(
        mesh: &Mesh,
        params: &PhysicalParams,
        f: &DualField,
        step: u64,
        state: &State,
        fp_iters: usize,
        initial: Option<&DiagnosticsRecord>,
    ) -> Result<DiagnosticsRecord, NumericalError> {
        let e = energy(mesh, params, state);
        let c = enstrophy(mesh, f, state)?;
        let m = mass(mesh, state);
        let (e0, c0, m0) = initial.map_or((e, c, m), |r| (r.energy, r.enstrophy, r.mass));
        Ok(DiagnosticsRecord {
            step,
            t: state.t,
            energy: e,
            enstrophy: c,
            mass: m,
            energy_rel_err: relative_error(e, e0),
            enstrophy_rel_err: relative_error(c, c0),
            mass_rel_err: relative_error(m, m0),
            fp_iters,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.step,
            self.t,
            self.energy,
            self.enstrophy,
            self.mass,
            self.energy_rel_err,
            self.enstrophy_rel_err,
            self.mass_rel_err,
            self.fp_iters
        )
    }
}

/// Relative errors of a series of values against its first entry.
pub fn relative_error_series(values: &[f64]) -> Vec<f64> {
    match values.first() {
        Some(&x0) => values.iter().map(|&x| relative_error(x, x0)).collect(),
        None => Vec::new(),
    }
}

/// Weighted L2 and L∞ relative errors of edge values, with weights `½|e||ẽ|`.
pub fn edge_error_norms(mesh: &Mesh, numeric: &EdgeField, reference: &EdgeField) -> (f64, f64) {
    let (mut num, mut den, mut max_err, mut max_ref) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (e, edge) in mesh.edges().iter().enumerate() {
        let w = 0.5 * edge.length * edge.dual_length;
        let d = numeric[e] - reference[e];
        num += w * d * d;
        den += w * reference[e] * reference[e];
        max_err = max_err.max(d.abs());
        max_ref = max_ref.max(reference[e].abs());
    }
    ((num / den).sqrt(), max_err / max_ref)
}

/// Shell-binned spectra on a plane mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Shell centre wavenumbers (rad/m); shell 0 holds the mean.
    pub k: Vec<f64>,
    /// Kinetic energy `½|u|²` per shell; the shells sum to the grid mean.
    pub ke: Vec<f64>,
    /// Enstrophy `½ h q²` per shell; the shells sum to the grid mean.
    pub enstrophy: Vec<f64>,
}

/// Nearest-point lookup on the periodic rectangle with a uniform bucket grid.
struct PeriodicLocator {
    lx: f64,
    ly: f64,
    nbx: usize,
    nby: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<(f64, f64)>,
}

impl PeriodicLocator {
    fn new(lx: f64, ly: f64, points: Vec<(f64, f64)>) -> Self {
        let n = (points.len() as f64).sqrt().max(1.0);
        let nbx = ((n * (lx / ly).sqrt()).ceil() as usize).max(1);
        let nby = ((n * (ly / lx).sqrt()).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nbx * nby];
        for (p, &(x, y)) in points.iter().enumerate() {
            let (bx, by) = Self::bucket_of(x, y, lx, ly, nbx, nby);
            buckets[by * nbx + bx].push(p);
        }
        PeriodicLocator { lx, ly, nbx, nby, buckets, points }
    }

    fn bucket_of(x: f64, y: f64, lx: f64, ly: f64, nbx: usize, nby: usize) -> (usize, usize) {
        let bx = ((x.rem_euclid(lx) / lx * nbx as f64) as usize).min(nbx - 1);
        let by = ((y.rem_euclid(ly) / ly * nby as f64) as usize).min(nby - 1);
        (bx, by)
    }

    fn distance2(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let mut dx = (a.0 - b.0).rem_euclid(self.lx);
        let mut dy = (a.1 - b.1).rem_euclid(self.ly);
        dx = dx.min(self.lx - dx);
        dy = dy.min(self.ly - dy);
        dx * dx + dy * dy
    }

    fn nearest(&self, x: f64, y: f64) -> usize {
        let (bx, by) = Self::bucket_of(x, y, self.lx, self.ly, self.nbx, self.nby);
        let cell = (self.lx / self.nbx as f64).min(self.ly / self.nby as f64);
        let mut best = (f64::INFINITY, usize::MAX);
        let max_ring = self.nbx.max(self.nby) as i64;
        let mut ring = 0i64;
        while ring <= max_ring {
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let cx = (bx as i64 + dx).rem_euclid(self.nbx as i64) as usize;
                    let cy = (by as i64 + dy).rem_euclid(self.nby as i64) as usize;
                    for &p in &self.buckets[cy * self.nbx + cx] {
                        let d = self.distance2((x, y), self.points[p]);
                        if d < best.0 || (d == best.0 && p < best.1) {
                            best = (d, p);
                        }
                    }
                }
            }
            // Points outside the searched rings are at least `ring · cell` away.
            let reach = ring as f64 * cell;
            if best.1 != usize::MAX && best.0 <= reach * reach {
                break;
            }
            ring += 1;
        }
        best.1
    }
}

fn fft2(data: &mut [Complex<f64>], n: usize) {
    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

/// Energy per shell of `½ Σ_fields |f̂|²`, normalised so that the shells sum
/// to the grid mean of `½ Σ_fields f²`.
fn shell_spectrum(fields: &[Vec<f64>], n: usize, lx: f64, ly: f64) -> (Vec<f64>, Vec<f64>) {
    let dk = 2.0 * std::f64::consts::PI / lx.max(ly);
    let kmax = 2.0 * std::f64::consts::PI * ((0.5 * n as f64 / lx).powi(2) + (0.5 * n as f64 / ly).powi(2)).sqrt();
    let shells = (kmax / dk).round() as usize + 1;
    let mut out = vec![0.0; shells];
    let norm = 1.0 / (n as f64).powi(4);
    for f in fields {
        let mut data: Vec<Complex<f64>> = f.iter().map(|&x| Complex::new(x, 0.0)).collect();
        fft2(&mut data, n);
        for r in 0..n {
            let my = if r <= n / 2 { r as f64 } else { r as f64 - n as f64 };
            for c in 0..n {
                let mx = if c <= n / 2 { c as f64 } else { c as f64 - n as f64 };
                let k = 2.0 * std::f64::consts::PI * ((mx / lx).powi(2) + (my / ly).powi(2)).sqrt();
                let s = ((k / dk).round() as usize).min(shells - 1);
                out[s] += 0.5 * data[r * n + c].norm_sqr() * norm;
            }
        }
    }
    let k = (0..shells).map(|s| s as f64 * dk).collect();
    (k, out)
}

/// Samples reconstructed velocity and `q √h_ζ` on an `n × n` grid by nearest
/// triangle / nearest vertex and bins their 2D Fourier power over annular
/// wavenumber shells.
pub fn spectra(mesh: &Mesh, f: &DualField, state: &State, n: usize) -> Result<Spectrum, MeshError> {
    let Geometry::Plane { lx, ly } = mesh.geometry() else {
        return Err(MeshError::InvalidParameter("spectra are only defined on the plane".into()));
    };
    if n < 2 {
        return Err(MeshError::InvalidParameter(format!("spectrum grid must be at least 2 (got {n})")));
    }
    let q = potential_vorticity(mesh, &state.v, &state.h, f)
        .map_err(|e| MeshError::InvalidParameter(format!("cannot form potential vorticity: {e}")))?;
    let hz = dual_depth(mesh, &state.h).map_err(|e| MeshError::InvalidParameter(e.to_string()))?;
    let u = reconstruct_cell(mesh, &state.v);
    let cells = PeriodicLocator::new(lx, ly, mesh.cells().iter().map(|c| (c.circumcenter.x, c.circumcenter.y)).collect());
    let duals = PeriodicLocator::new(lx, ly, mesh.duals().iter().map(|d| (d.position.x, d.position.y)).collect());
    let mut ux = vec![0.0; n * n];
    let mut uy = vec![0.0; n * n];
    let mut s = vec![0.0; n * n];
    for r in 0..n {
        let y = (r as f64 + 0.5) * ly / n as f64;
        for c in 0..n {
            let x = (c as f64 + 0.5) * lx / n as f64;
            let t = cells.nearest(x, y);
            ux[r * n + c] = u[t].x;
            uy[r * n + c] = u[t].y;
            let z = duals.nearest(x, y);
            s[r * n + c] = q[z] * hz[z].sqrt();
        }
    }
    let (k, ke) = shell_spectrum(&[ux, uy], n, lx, ly);
    let (_, enstrophy) = shell_spectrum(&[s], n, lx, ly);
    Ok(Spectrum { k, ke, enstrophy })
}

/// Least-squares slope of `log e` against `log k` over shells with `k` in
/// `[kmin, kmax]` and positive `e`.
pub fn power_law_slope(k: &[f64], e: &[f64], kmin: f64, kmax: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = k
        .iter()
        .zip(e)
        .filter(|(&k, &e)| k >= kmin && k <= kmax && k > 0.0 && e > 0.0)
        .map(|(&k, &e)| (k.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// The decade of wavenumbers centred geometrically in `(0, kmax]` of the
/// shells with nonzero wavenumber.
pub fn middle_decade(k: &[f64]) -> (f64, f64) {
    let kmin = k.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    let kmax = k.iter().copied().fold(0.0, f64::max);
    let centre = (kmin * kmax).sqrt();
    (centre / 10f64.sqrt(), centre * 10f64.sqrt())
}

/// Mean of `½|u|²` over triangles, weighted by area.
pub fn mean_kinetic_energy(mesh: &Mesh, v: &EdgeField) -> f64 {
    let u: Vec<Vec3> = reconstruct_cell(mesh, v);
    let total: f64 = mesh.cells().iter().zip(&u).map(|(c, u)| 0.5 * u.norm_squared() * c.area).sum();
    total / mesh.total_area()
}
