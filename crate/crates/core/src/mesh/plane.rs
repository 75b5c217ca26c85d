//! Doubly periodic triangulations of a rectangle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::build::{assemble, RawTriangulation};
use super::{Geometry, Mesh, Vec3};
use crate::error::MeshError;

/// Parameters of the graded, jittered plane mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct IrregularParams {
    /// Centre of the refined disk (m).
    pub refinement_center: (f64, f64),
    /// Radius of the graded region (m). Must stay clear of its periodic images.
    pub refinement_radius: f64,
    /// Ratio of the outer to the inner edge length, ≥ 1.
    pub refinement_factor: f64,
    /// Random vertex displacement as a fraction of the local spacing.
    pub jitter: f64,
    pub seed: u64,
}

impl IrregularParams {
    /// Central refinement by `factor` over a disk of radius 0.3·min(lx, ly).
    pub fn centered(lx: f64, ly: f64, factor: f64, seed: u64) -> Self {
        IrregularParams {
            refinement_center: (0.5 * lx, 0.5 * ly),
            refinement_radius: 0.3 * lx.min(ly),
            refinement_factor: factor,
            jitter: 0.15,
            seed,
        }
    }
}

const MAX_FLIP_PASSES: usize = 10_000;

fn check_lattice(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<(), MeshError> {
    if nx < 2 || ny < 2 {
        return Err(MeshError::InvalidParameter(format!("nx and ny must be at least 2 (got {nx}x{ny})")));
    }
    if ny % 2 != 0 {
        return Err(MeshError::InvalidParameter(format!("ny must be even for the alternating lattice (got {ny})")));
    }
    // With two rows every vertex is half a period from the opposite row, so
    // periodic offsets across horizontal edges are ambiguous.
    if ny < 4 {
        return Err(MeshError::InvalidParameter(format!("ny must be at least 4 (got {ny})")));
    }
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(MeshError::InvalidParameter(format!("domain size must be positive (got {lx} x {ly})")));
    }
    Ok(())
}

/// Rhombic lattice with alternate rows offset by half a cell.
fn lattice(nx: usize, ny: usize, lx: f64, ly: f64) -> RawTriangulation {
    let (dx, dy) = (lx / nx as f64, ly / ny as f64);
    let mut vertices = Vec::with_capacity(nx * ny);
    for b in 0..ny {
        for a in 0..nx {
            let offset = if b % 2 == 1 { 0.5 } else { 0.0 };
            vertices.push(Vec3::new((a as f64 + offset) * dx, b as f64 * dy, 0.0));
        }
    }
    let corner = |a: usize, b: usize| -> (usize, [i32; 2]) {
        ((b % ny) * nx + a % nx, [(a / nx) as i32, (b / ny) as i32])
    };
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let mut shifts = Vec::with_capacity(2 * nx * ny);
    let mut push = |c: [(usize, [i32; 2]); 3]| {
        triangles.push([c[0].0, c[1].0, c[2].0]);
        shifts.push([c[0].1, c[1].1, c[2].1]);
    };
    for b in 0..ny {
        for a in 0..nx {
            if b % 2 == 0 {
                push([corner(a, b), corner(a + 1, b), corner(a, b + 1)]);
                push([corner(a + 1, b), corner(a + 1, b + 1), corner(a, b + 1)]);
            } else {
                push([corner(a, b), corner(a + 1, b), corner(a + 1, b + 1)]);
                push([corner(a, b), corner(a + 1, b + 1), corner(a, b + 1)]);
            }
        }
    }
    RawTriangulation { geometry: Geometry::Plane { lx, ly }, vertices, triangles, shifts }
}

fn reject_degenerate(mesh: Mesh) -> Result<Mesh, MeshError> {
    for (id, e) in mesh.edges().iter().enumerate() {
        if !(e.dual_length > 1e-12 * e.length) {
            return Err(MeshError::DegenerateDualEdge { edge: id, length: e.dual_length });
        }
    }
    Ok(mesh)
}

impl Mesh {
    /// `2·nx·ny` congruent triangles on `[0, lx) × [0, ly)`. All triangles are
    /// equilateral when `ly / lx = √3/2 · ny / nx`. `ny` must be even.
    pub fn plane_regular(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh, MeshError> {
        check_lattice(nx, ny, lx, ly)?;
        reject_degenerate(assemble(&lattice(nx, ny, lx, ly))?)
    }

    /// Lattice graded towards a central disk, randomly perturbed, then made
    /// Delaunay by edge flips. Deterministic for a given seed.
    pub fn plane_irregular(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        params: &IrregularParams,
    ) -> Result<Mesh, MeshError> {
        check_lattice(nx, ny, lx, ly)?;
        let f = params.refinement_factor;
        if !(f >= 1.0 && f.is_finite()) {
            return Err(MeshError::InvalidParameter(format!("refinement_factor must be >= 1 (got {f})")));
        }
        let (cx, cy) = params.refinement_center;
        let r1 = params.refinement_radius;
        let clearance = (cx.min(lx - cx)).min(cy.min(ly - cy));
        if !(r1 >= 0.0 && r1 <= clearance) {
            return Err(MeshError::InvalidParameter(format!(
                "refinement disk of radius {r1} does not fit around ({cx}, {cy})"
            )));
        }
        if !(0.0..0.35).contains(&params.jitter) {
            return Err(MeshError::InvalidParameter(format!("jitter must lie in [0, 0.35) (got {})", params.jitter)));
        }

        let mut raw = lattice(nx, ny, lx, ly);
        let spacing = (lx / nx as f64).min(ly / ny as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let scale = |r: f64| -> f64 {
            if r1 == 0.0 || f == 1.0 {
                return 1.0;
            }
            let s = (r / r1).clamp(0.0, 1.0);
            let smooth = s * s * (3.0 - 2.0 * s);
            1.0 / f + (1.0 - 1.0 / f) * smooth
        };

        let mut wraps = vec![[0i32; 2]; raw.vertices.len()];
        for v in 0..raw.vertices.len() {
            let p = raw.vertices[v];
            let (dx, dy) = (p.x - cx, p.y - cy);
            let r = dx.hypot(dy);
            let g = scale(r);
            let mut q = Vec3::new(cx + g * dx, cy + g * dy, 0.0);
            // Uniform offset in the unit disk.
            let (mut jx, mut jy);
            loop {
                jx = rng.gen_range(-1.0..1.0);
                jy = rng.gen_range(-1.0..1.0);
                if jx * jx + jy * jy <= 1.0 {
                    break;
                }
            }
            let amp = params.jitter * spacing * g;
            q.x += amp * jx;
            q.y += amp * jy;
            let mx = q.x.div_euclid(lx);
            let my = q.y.div_euclid(ly);
            raw.vertices[v] = Vec3::new(q.x - mx * lx, q.y - my * ly, 0.0);
            wraps[v] = [mx as i32, my as i32];
        }
        for (tri, shift) in raw.triangles.iter().zip(raw.shifts.iter_mut()) {
            for k in 0..3 {
                shift[k][0] += wraps[tri[k]][0];
                shift[k][1] += wraps[tri[k]][1];
            }
        }

        for t in 0..raw.triangles.len() {
            let [a, b, c] = raw.corners(t);
            let area = 0.5 * (b - a).cross(&(c - a)).z;
            if !(area > 0.0) {
                return Err(MeshError::InvertedTriangle { cell: t, area });
            }
        }
        lawson_flips(&mut raw)?;
        reject_degenerate(assemble(&raw)?)
    }
}

/// `> 0` when `d` lies strictly inside the circumcircle of the ccw triangle `abc`.
fn in_circle(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let (ax, ay) = (a.x - d.x, a.y - d.y);
    let (bx, by) = (b.x - d.x, b.y - d.y);
    let (cx, cy) = (c.x - d.x, c.y - d.y);
    (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay)
        + (cx * cx + cy * cy) * (ax * by - bx * ay)
}

fn lawson_flips(raw: &mut RawTriangulation) -> Result<(), MeshError> {
    use std::collections::HashMap;

    let nt = raw.triangles.len();
    for _pass in 0..MAX_FLIP_PASSES {
        let mut owner: HashMap<(usize, usize, [i32; 2]), (usize, usize)> = HashMap::with_capacity(3 * nt);
        // Directed edge a→b keyed by endpoints and the relative image offset.
        for t in 0..nt {
            for k in 0..3 {
                let (a, b) = (raw.triangles[t][k], raw.triangles[t][(k + 1) % 3]);
                let (sa, sb) = (raw.shifts[t][k], raw.shifts[t][(k + 1) % 3]);
                owner.insert((a, b, [sb[0] - sa[0], sb[1] - sa[1]]), (t, k));
            }
        }
        let mut touched = vec![false; nt];
        let mut flips = 0;
        for t1 in 0..nt {
            for k1 in 0..3 {
                if touched[t1] {
                    break;
                }
                let (a, b) = (raw.triangles[t1][k1], raw.triangles[t1][(k1 + 1) % 3]);
                let (sa, sb) = (raw.shifts[t1][k1], raw.shifts[t1][(k1 + 1) % 3]);
                let Some(&(t2, k2)) = owner.get(&(b, a, [sa[0] - sb[0], sa[1] - sb[1]])) else {
                    continue;
                };
                if t2 == t1 || touched[t2] {
                    continue;
                }
                let p1 = raw.corners(t1);
                let p2 = raw.corners(t2);
                let (pa, pb, pc) = (p1[k1], p1[(k1 + 1) % 3], p1[(k1 + 2) % 3]);
                // Bring T2 into T1's frame through the shared vertex `a`.
                let offset = pa - p2[(k2 + 1) % 3];
                let pd = p2[(k2 + 2) % 3] + offset;
                let scale = (pb - pa).norm_squared().powi(2);
                if in_circle(&pa, &pb, &pc, &pd) <= 1e-10 * scale {
                    continue;
                }
                let c = raw.triangles[t1][(k1 + 2) % 3];
                let d = raw.triangles[t2][(k2 + 2) % 3];
                let sc = raw.shifts[t1][(k1 + 2) % 3];
                let lx_ly = match raw.geometry {
                    Geometry::Plane { lx, ly } => (lx, ly),
                    Geometry::Sphere { .. } => unreachable!("flips are only used on the plane"),
                };
                let sd_vec = pd - raw.vertices[d];
                let sd = [(sd_vec.x / lx_ly.0).round() as i32, (sd_vec.y / lx_ly.1).round() as i32];
                raw.triangles[t1] = [a, d, c];
                raw.shifts[t1] = [sa, sd, sc];
                raw.triangles[t2] = [d, b, c];
                raw.shifts[t2] = [sd, sb, sc];
                for t in [t1, t2] {
                    let [x, y, z] = raw.corners(t);
                    let area = 0.5 * (y - x).cross(&(z - x)).z;
                    if !(area > 0.0) {
                        return Err(MeshError::InvertedTriangle { cell: t, area });
                    }
                }
                touched[t1] = true;
                touched[t2] = true;
                flips += 1;
            }
        }
        if flips == 0 {
            return Ok(());
        }
    }
    Err(MeshError::DelaunayRepair(MAX_FLIP_PASSES))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_counts_and_area() {
        let m = Mesh::plane_regular(4, 4, 1.0, 3f64.sqrt() / 2.0).unwrap();
        assert_eq!((m.num_cells(), m.num_edges(), m.num_duals()), (32, 48, 16));
        assert!((m.total_area() - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn equilateral_dual_lengths() {
        let m = Mesh::plane_regular(4, 4, 1.0, 3f64.sqrt() / 2.0).unwrap();
        for e in m.edges() {
            assert!((e.length - 0.25).abs() < 1e-14);
            assert!((e.dual_length - 0.25 / 3f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Mesh::plane_regular(1, 4, 1.0, 1.0).is_err());
        assert!(Mesh::plane_regular(4, 3, 1.0, 1.0).is_err());
        assert!(Mesh::plane_regular(4, 2, 1.0, 1.0).is_err());
        assert!(Mesh::plane_regular(4, 4, -1.0, 1.0).is_err());
    }

    #[test]
    fn obtuse_lattice_fails_with_edge() {
        // Very flat triangles have an obtuse angle opposite the horizontal edges.
        match Mesh::plane_regular(4, 4, 1.0, 0.1) {
            Err(MeshError::DegenerateDualEdge { .. }) => {}
            other => panic!("expected a degenerate-dual error, got {other:?}"),
        }
    }

    #[test]
    fn irregular_without_grading_matches_regular() {
        let (lx, ly) = (1.0, 3f64.sqrt() / 2.0);
        let mut p = IrregularParams::centered(lx, ly, 1.0, 3);
        p.jitter = 0.0;
        let a = Mesh::plane_irregular(8, 8, lx, ly, &p).unwrap();
        let b = Mesh::plane_regular(8, 8, lx, ly).unwrap();
        assert_eq!(a.num_edges(), b.num_edges());
        for (ca, cb) in a.cells().iter().zip(b.cells()) {
            assert_eq!(ca.vertices, cb.vertices);
        }
    }

    #[test]
    fn irregular_is_deterministic_and_refined() {
        let (lx, ly) = (1.0, 3f64.sqrt() / 2.0);
        let p = IrregularParams::centered(lx, ly, 2.0, 11);
        let a = Mesh::plane_irregular(16, 16, lx, ly, &p).unwrap();
        let b = Mesh::plane_irregular(16, 16, lx, ly, &p).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert!(a.validate().all_passed(), "{}", a.validate());

        let (cx, cy) = p.refinement_center;
        let mut inside = f64::INFINITY;
        let mut outside = f64::INFINITY;
        for e in a.edges() {
            let r = (e.midpoint.x - cx).hypot(e.midpoint.y - cy);
            if r < 0.5 * p.refinement_radius {
                inside = inside.min(e.length);
            } else if r > p.refinement_radius {
                outside = outside.min(e.length);
            }
        }
        assert!(inside < outside, "inside {inside} outside {outside}");
    }

    #[test]
    fn lattice_translation_leaves_tables_unchanged() {
        // Shifting the lattice origin by whole cells only relabels vertices.
        let m = Mesh::plane_regular(6, 4, 1.0, 0.8).unwrap();
        let mut lengths: Vec<(u64, u64)> =
            m.edges().iter().map(|e| (e.length.to_bits(), e.dual_length.abs().to_bits())).collect();
        lengths.sort();
        let raw = lattice(6, 4, 1.0, 0.8);
        let mut moved = raw.clone();
        for v in moved.vertices.iter_mut() {
            *v = Vec3::new((v.x + 2.0 / 6.0).rem_euclid(1.0), (v.y + 0.4).rem_euclid(0.8), 0.0);
        }
        // Recompute shifts so every corner keeps its translated unwrapped position.
        for t in 0..raw.triangles.len() {
            for k in 0..3 {
                let target = raw.corner(t, k) + Vec3::new(2.0 / 6.0, 0.4, 0.0);
                let base = moved.vertices[raw.triangles[t][k]];
                let d = target - base;
                moved.shifts[t][k] = [d.x.round() as i32, (d.y / 0.8).round() as i32];
            }
        }
        let m2 = assemble(&moved).unwrap();
        let mut lengths2: Vec<(u64, u64)> = m2
            .edges()
            .iter()
            .map(|e| (e.length.to_bits(), e.dual_length.abs().to_bits()))
            .collect();
        lengths2.sort();
        for (a, b) in lengths.iter().zip(&lengths2) {
            let (la, lb) = (f64::from_bits(a.0), f64::from_bits(b.0));
            let (da, db) = (f64::from_bits(a.1), f64::from_bits(b.1));
            assert!((la - lb).abs() < 1e-13 && (da - db).abs() < 1e-13);
        }
        let total: f64 = m2.cells().iter().map(|c| c.area).sum();
        assert!((total - 0.8).abs() < 1e-13);
    }
}
