//! Icosahedral sphere grids by recursive edge bisection.

use std::collections::HashMap;

use super::build::{assemble, RawTriangulation};
use super::{Geometry, Mesh, Vec3};
use crate::error::MeshError;

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut v = Vec::with_capacity(12);
    for &s1 in &[-1.0, 1.0] {
        for &s2 in &[-1.0, 1.0] {
            v.push(Vec3::new(0.0, s1, s2 * phi));
            v.push(Vec3::new(s1, s2 * phi, 0.0));
            v.push(Vec3::new(s2 * phi, 0.0, s1));
        }
    }
    // Faces are the triples of mutually adjacent vertices (distance 2 before normalising).
    let adjacent = |a: usize, b: usize| ((v[a] - v[b]).norm() - 2.0).abs() < 1e-9;
    let mut faces = Vec::with_capacity(20);
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if adjacent(a, b) && adjacent(b, c) && adjacent(c, a) {
                    let outward = (v[b] - v[a]).cross(&(v[c] - v[a])).dot(&(v[a] + v[b] + v[c])) > 0.0;
                    faces.push(if outward { [a, b, c] } else { [a, c, b] });
                }
            }
        }
    }
    debug_assert_eq!(faces.len(), 20);
    (v.into_iter().map(|x| x.normalize()).collect(), faces)
}

fn bisect(vertices: &mut Vec<Vec3>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3 / 2);
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            vertices.push((vertices[a] + vertices[b]).normalize());
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * faces.len());
    for &[a, b, c] in faces {
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        out.push([a, ab, ca]);
        out.push([ab, b, bc]);
        out.push([ca, bc, c]);
        out.push([ab, bc, ca]);
    }
    out
}

impl Mesh {
    /// Icosahedron refined `level` times by 4-way bisection and projected to
    /// the sphere of radius `radius`: `20·4^level` triangles.
    pub fn sphere(level: u32, radius: f64) -> Result<Mesh, MeshError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(MeshError::InvalidParameter(format!("radius must be positive (got {radius})")));
        }
        if level > 10 {
            return Err(MeshError::InvalidParameter(format!("refinement level {level} is too large")));
        }
        let (mut vertices, mut faces) = icosahedron();
        for _ in 0..level {
            faces = bisect(&mut vertices, &faces);
        }
        let raw = RawTriangulation {
            geometry: Geometry::Sphere { radius },
            vertices: vertices.into_iter().map(|x| x * radius).collect(),
            triangles: faces,
            shifts: Vec::new(),
        };
        let mesh = assemble(&raw)?;
        for (id, e) in mesh.edges().iter().enumerate() {
            if !(e.dual_length > 0.0) {
                return Err(MeshError::DegenerateDualEdge { edge: id, length: e.dual_length });
            }
        }
        Ok(mesh)
    }
}
