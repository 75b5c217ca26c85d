use std::fmt;

use super::build::signed_area;
use super::{Geometry, Mesh, Vec3};

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation measure found (0 when nothing to report).
    pub worst: f64,
    /// Index of the entity that produced `worst`, if any.
    pub offender: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{:<24} {} worst={:.3e}", c.name, if c.passed { "ok  " } else { "FAIL" }, c.worst)?;
            if let Some(o) = c.offender {
                write!(f, " at {o}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub const CELL_AREA_SUM: &str = "cell area sum";
pub const DUAL_AREA_SUM: &str = "dual area sum";
pub const CELL_KITES: &str = "cell kite partition";
pub const DUAL_KITES: &str = "dual kite partition";
pub const DUAL_LENGTH: &str = "|ẽ|>0";
pub const DISTINCT: &str = "distinct endpoints";
pub const ORIENTATION: &str = "orientation";
pub const TRIANGLE_AREA: &str = "positive triangle area";

/// Tracks the worst value of a violation measure.
struct Worst {
    value: f64,
    at: Option<usize>,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, at: None }
    }

    fn see(&mut self, value: f64, at: usize) {
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            self.value = value;
            self.at = Some(at);
        }
    }

    fn result(self, name: &'static str, tol: f64) -> CheckResult {
        CheckResult { name, passed: self.value <= tol, worst: self.value, offender: self.at }
    }
}

/// Displacement from `a` to `b`, using the nearest periodic image on the plane.
fn separation(g: Geometry, a: &Vec3, b: &Vec3) -> Vec3 {
    let mut d = b - a;
    if let Geometry::Plane { lx, ly } = g {
        d.x -= lx * (d.x / lx).round();
        d.y -= ly * (d.y / ly).round();
    }
    d
}

/// Area of the polygon spanned by the circumcenters around one vertex,
/// computed independently of the stored kites.
fn dual_polygon_area(mesh: &Mesh, v: usize) -> f64 {
    let g = mesh.geometry;
    let d = &mesh.duals[v];
    let n = d.cells.len();
    let mut area = 0.0;
    for k in 0..n {
        let p = mesh.cells[d.cells[k]].circumcenter;
        let q = mesh.cells[d.cells[(k + 1) % n]].circumcenter;
        area += match g {
            Geometry::Plane { .. } => {
                let (a, b) = (separation(g, &d.position, &p), separation(g, &d.position, &q));
                0.5 * a.cross(&b).z
            }
            Geometry::Sphere { .. } => signed_area(g, &d.position, &p, &q),
        };
    }
    area
}

pub(super) fn validate(mesh: &Mesh) -> ValidationReport {
    let g = mesh.geometry;
    let total = g.total_area();
    let area_tol = if g.is_sphere() { 1e-10 } else { 1e-12 };
    let mut checks = Vec::new();

    let cell_sum: f64 = mesh.cells.iter().map(|c| c.area).sum();
    checks.push(CheckResult {
        name: CELL_AREA_SUM,
        passed: ((cell_sum - total) / total).abs() <= area_tol,
        worst: ((cell_sum - total) / total).abs(),
        offender: None,
    });
    let dual_sum: f64 = mesh.duals.iter().map(|d| d.area).sum();
    checks.push(CheckResult {
        name: DUAL_AREA_SUM,
        passed: ((dual_sum - total) / total).abs() <= area_tol,
        worst: ((dual_sum - total) / total).abs(),
        offender: None,
    });

    let mut w = Worst::new();
    for (t, c) in mesh.cells.iter().enumerate() {
        w.see((c.kites.iter().sum::<f64>() - c.area).abs() / c.area, t);
    }
    checks.push(w.result(CELL_KITES, 1e-10));

    let mut w = Worst::new();
    for (v, d) in mesh.duals.iter().enumerate() {
        let stored: f64 = d.kites.iter().sum();
        let recomputed = dual_polygon_area(mesh, v);
        let err = (stored - d.area).abs().max((recomputed - d.area).abs()) / d.area.abs();
        w.see(err, v);
    }
    checks.push(w.result(DUAL_KITES, 1e-10));

    // Smallest relative dual length; anything at or below round-off fails.
    let min_ratio = mesh
        .edges
        .iter()
        .enumerate()
        .map(|(id, e)| (e.dual_length / e.length, id))
        .fold((f64::INFINITY, None), |acc, (r, id)| if r < acc.0 { (r, Some(id)) } else { acc });
    checks.push(CheckResult {
        name: DUAL_LENGTH,
        passed: min_ratio.0 > 1e-12,
        worst: if min_ratio.0 > 1e-12 { 0.0 } else { -min_ratio.0 },
        offender: if min_ratio.0 > 1e-12 { None } else { min_ratio.1 },
    });

    let mut w = Worst::new();
    for (id, e) in mesh.edges.iter().enumerate() {
        if e.cells[0] == e.cells[1] || e.vertices[0] == e.vertices[1] {
            w.see(1.0, id);
        }
    }
    checks.push(w.result(DISTINCT, 0.0));

    let mut w = Worst::new();
    for (id, e) in mesh.edges.iter().enumerate() {
        let up = g.up(&e.midpoint);
        let mut bad = (e.tangent - up.cross(&e.normal)).norm();
        let minus = separation(g, &e.midpoint, &mesh.duals[e.minus()].position);
        let plus = separation(g, &e.midpoint, &mesh.duals[e.plus()].position);
        if minus.dot(&e.tangent) <= 0.0 || plus.dot(&e.tangent) >= 0.0 {
            bad = bad.max(1.0);
        }
        // The vertex of T_i opposite the edge must lie behind the normal.
        let ci = &mesh.cells[e.cells[0]];
        let opposite = ci.vertices[(e.local[0] + 2) % 3];
        let back = separation(g, &e.midpoint, &mesh.duals[opposite].position);
        if back.dot(&e.normal) >= 0.0 {
            bad = bad.max(1.0);
        }
        w.see(bad, id);
    }
    checks.push(w.result(ORIENTATION, 1e-12));

    let mut w = Worst::new();
    for (t, c) in mesh.cells.iter().enumerate() {
        if !(c.area > 0.0) {
            w.see(-c.area, t);
        }
    }
    checks.push(w.result(TRIANGLE_AREA, 0.0));

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::test_meshes;

    #[test]
    fn regular_mesh_passes() {
        let m = test_meshes::equilateral32();
        let r = m.validate();
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn collapsed_dual_edge_is_named() {
        let mut m = test_meshes::equilateral32();
        m.edges_mut()[17].dual_length = 0.0;
        let r = m.validate();
        let c = r.get(DUAL_LENGTH).unwrap();
        assert!(!c.passed);
        assert_eq!(c.offender, Some(17));
    }

    #[test]
    fn sphere_kites_recompute() {
        let m = Mesh::sphere(3, 6.37122e6).unwrap();
        let r = m.validate();
        assert!(r.all_passed(), "{r}");
        assert!(r.get(DUAL_KITES).unwrap().worst < 1e-10);
    }

    #[test]
    fn skewed_plane_passes() {
        let r = test_meshes::skewed_plane().validate();
        assert!(r.all_passed(), "{r}");
    }
}
