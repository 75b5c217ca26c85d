//! Discrete gradient, divergence and curl on the primal/dual pair, together
//! with averaging, Perot reconstruction and the weighted inner products.
//!
//! Every reduction runs in a fixed order, so results are bitwise reproducible.

use crate::fields::{CellField, DualField, EdgeField};
use crate::mesh::{Mesh, Vec3};

/// `(F_j − F_i) / |ẽ|` on every edge.
pub fn grad_n(mesh: &Mesh, f: &CellField) -> EdgeField {
    let s = mesh.stencils();
    let f = f.values();
    EdgeField::from_vec(
        s.edge_cells
            .iter()
            .zip(&s.inv_dual_length)
            .map(|(&[i, j], &w)| (f[j as usize] - f[i as usize]) * w)
            .collect(),
    )
}

/// `(G_ζ− − G_ζ+) / |e|` on every edge.
pub fn grad_t(mesh: &Mesh, g: &DualField) -> EdgeField {
    let s = mesh.stencils();
    let g = g.values();
    EdgeField::from_vec(
        s.edge_duals
            .iter()
            .zip(&s.inv_length)
            .map(|(&[m, p], &w)| (g[m as usize] - g[p as usize]) * w)
            .collect(),
    )
}

/// Outward flux per unit area of each triangle.
pub fn div(mesh: &Mesh, v: &EdgeField) -> CellField {
    let s = mesh.stencils();
    let v = v.values();
    CellField::from_vec(
        s.cell_edges
            .iter()
            .zip(&s.div_coef)
            .map(|(e, c)| c[0] * v[e[0] as usize] + c[1] * v[e[1] as usize] + c[2] * v[e[2] as usize])
            .collect(),
    )
}

/// Counterclockwise circulation along the dual cell boundary per unit area.
pub fn curl(mesh: &Mesh, v: &EdgeField) -> DualField {
    let s = mesh.stencils();
    let v = v.values();
    DualField::from_fn(mesh.num_duals(), |z| {
        let mut sum = 0.0;
        for k in s.dual_range(z) {
            sum += s.curl_coef[k] * v[s.dual_edges[k] as usize];
        }
        sum
    })
}

/// `h̄ = (h_i + h_j) / 2`.
pub fn edge_average(mesh: &Mesh, h: &CellField) -> EdgeField {
    let h = h.values();
    EdgeField::from_vec(mesh.stencils().edge_cells.iter().map(|&[i, j]| 0.5 * (h[i as usize] + h[j as usize])).collect())
}

/// Mean of the two cell values adjacent to each edge.
pub fn cell_to_edge(mesh: &Mesh, f: &CellField) -> EdgeField {
    edge_average(mesh, f)
}

/// Kite-weighted average of cell values onto dual cells.
pub fn cell_to_dual(mesh: &Mesh, f: &CellField) -> DualField {
    let s = mesh.stencils();
    let f = f.values();
    DualField::from_fn(mesh.num_duals(), |z| {
        let mut sum = 0.0;
        for k in s.dual_range(z) {
            sum += s.kite_weight[k] * f[s.dual_cells[k] as usize];
        }
        sum
    })
}

/// One-form values `−|ẽ| V` of the adjacent-cell flat.
pub fn flat(mesh: &Mesh, v: &EdgeField) -> EdgeField {
    EdgeField::from_fn(mesh.num_edges(), |e| -mesh.edges()[e].dual_length * v[e])
}

/// Perot reconstruction of a full vector in each triangle. On the sphere the
/// result is projected onto the tangent plane at the circumcenter.
pub fn reconstruct_cell(mesh: &Mesh, v: &EdgeField) -> Vec<Vec3> {
    let s = mesh.stencils();
    let v = v.values();
    s.cell_edges
        .iter()
        .zip(&s.cell_recon)
        .map(|(e, c)| c[0] * v[e[0] as usize] + c[1] * v[e[1] as usize] + c[2] * v[e[2] as usize])
        .collect()
}

/// Kite-weighted average of the cell reconstructions around each dual cell,
/// projected onto the dual tangent plane.
pub fn reconstruct_dual(mesh: &Mesh, v: &EdgeField) -> Vec<Vec3> {
    let s = mesh.stencils();
    let v = v.values();
    (0..mesh.num_duals())
        .map(|z| {
            let mut u = Vec3::zeros();
            for k in s.dual_recon_ptr[z] as usize..s.dual_recon_ptr[z + 1] as usize {
                u += s.dual_recon_coef[k] * v[s.dual_recon_edges[k] as usize];
            }
            u
        })
        .collect()
}

/// Kite-weighted average of per-cell vectors, projected onto the dual tangent plane.
pub fn dual_average_vectors(mesh: &Mesh, cell_vectors: &[Vec3]) -> Vec<Vec3> {
    let sphere = mesh.geometry().is_sphere();
    mesh.duals()
        .iter()
        .map(|d| {
            let mut u = Vec3::zeros();
            for (&t, &w) in d.cells.iter().zip(&d.kites) {
                u += cell_vectors[t] * w;
            }
            u /= d.area;
            if sphere {
                u -= d.up * d.up.dot(&u);
            }
            u
        })
        .collect()
}

/// Normal components `u(x_e) · n̂_e` of an analytic vector field sampled at edge midpoints.
pub fn sample_normal(mesh: &Mesh, u: impl Fn(&Vec3) -> Vec3) -> EdgeField {
    EdgeField::from_fn(mesh.num_edges(), |e| {
        let edge = &mesh.edges()[e];
        u(&edge.midpoint).dot(&edge.normal)
    })
}

/// `Σ_e |e| |ẽ| a_e b_e`.
pub fn ip_edge(mesh: &Mesh, a: &EdgeField, b: &EdgeField) -> f64 {
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| edge.length * edge.dual_length * a[e] * b[e])
        .sum()
}

/// `Σ_i Ω_ii F_i G_i`.
pub fn ip_cell(mesh: &Mesh, f: &CellField, g: &CellField) -> f64 {
    mesh.cells().iter().enumerate().map(|(i, c)| c.area * f[i] * g[i]).sum()
}

/// `Σ_ζ |ζ| P_ζ Q_ζ`.
pub fn ip_dual(mesh: &Mesh, p: &DualField, q: &DualField) -> f64 {
    mesh.duals().iter().enumerate().map(|(z, d)| d.area * p[z] * q[z]).sum()
}

/// Edge-wise product of two edge fields.
pub fn edge_product(a: &EdgeField, b: &EdgeField) -> EdgeField {
    assert_eq!(a.len(), b.len(), "field length mismatch");
    EdgeField::from_fn(a.len(), |e| a[e] * b[e])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::test_meshes::{equilateral32, skewed_plane};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_fields_are_annihilated() {
        for m in [equilateral32(), skewed_plane(), Mesh::sphere(2, 1.0).unwrap()] {
            assert!(grad_n(&m, &CellField::constant(m.num_cells(), 3.0)).max_abs() == 0.0);
            assert!(grad_t(&m, &DualField::constant(m.num_duals(), 3.0)).max_abs() == 0.0);
        }
        for m in [equilateral32(), skewed_plane()] {
            let v = sample_normal(&m, |_| Vec3::new(0.7, -1.3, 0.0));
            assert!(div(&m, &v).max_abs() < 1e-12);
            assert!(curl(&m, &v).max_abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge_divergence() {
        let m = equilateral32();
        let mut v = EdgeField::zeros(m.num_edges());
        v[5] = 2.0;
        let d = div(&m, &v);
        let e = &m.edges()[5];
        let expected = e.length * 2.0 / m.cells()[e.cells[0]].area;
        assert_abs_diff_eq!(d[e.cells[0]], expected, epsilon = 1e-12);
        assert_abs_diff_eq!(d[e.cells[1]], -expected, epsilon = 1e-12);
        let others: f64 = (0..m.num_cells()).filter(|&i| i != e.cells[0] && i != e.cells[1]).map(|i| d[i].abs()).sum();
        assert_eq!(others, 0.0);
    }

    #[test]
    fn linear_divergence_and_rotation() {
        let m = Mesh::plane_regular(16, 16, 1.0, 3f64.sqrt() / 2.0).unwrap();
        // u = (x, 0) is not periodic, so compare away from the seam.
        let v = EdgeField::from_fn(m.num_edges(), |e| {
            let edge = &m.edges()[e];
            let c = m.cells()[edge.cells[0]].circumcenter;
            // Unwrap the midpoint next to T_i before evaluating x.
            let mut x = edge.midpoint.x;
            if (x - c.x).abs() > 0.5 {
                x += if x < c.x { 1.0 } else { -1.0 };
            }
            x * edge.normal.x
        });
        let d = div(&m, &v);
        for (i, c) in m.cells().iter().enumerate() {
            if c.circumcenter.x > 0.1 && c.circumcenter.x < 0.9 {
                assert_abs_diff_eq!(d[i], 1.0, epsilon = 1e-10);
            }
        }

        let centre = Vec3::new(0.5, 0.43, 0.0);
        let rot = sample_normal(&m, |x| {
            let r = x - centre;
            Vec3::new(-r.y, r.x, 0.0)
        });
        let w = curl(&m, &rot);
        for (z, d) in m.duals().iter().enumerate() {
            if (d.position - centre).norm() < 0.3 {
                assert_abs_diff_eq!(w[z], 2.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn gradients_match_analytic_slopes() {
        let m = Mesh::plane_regular(32, 32, 1.0, 3f64.sqrt() / 2.0).unwrap();
        let k = 2.0 * std::f64::consts::PI;
        let f = CellField::from_fn(m.num_cells(), |i| (k * m.cells()[i].circumcenter.x).sin());
        let gn = grad_n(&m, &f);
        let g = DualField::from_fn(m.num_duals(), |z| (k * m.duals()[z].position.x).sin());
        let gt = grad_t(&m, &g);
        for (e, edge) in m.edges().iter().enumerate() {
            let slope = k * (k * edge.midpoint.x).cos();
            assert!((gn[e] - slope * edge.normal.x).abs() < 0.05 * k);
            assert!((gt[e] - slope * edge.tangent.x).abs() < 0.05 * k);
        }
    }

    #[test]
    fn two_cell_gradient_flips_with_orientation() {
        let m = equilateral32();
        let e = &m.edges()[0];
        let mut f = CellField::zeros(m.num_cells());
        f[e.cells[1]] = 1.0;
        let g = grad_n(&m, &f);
        assert_abs_diff_eq!(g[0], 1.0 / e.dual_length, epsilon = 1e-12);
        // Read from T_j the same edge has the opposite sign.
        assert_abs_diff_eq!(g.oriented(&m, 0, e.cells[1]), -1.0 / e.dual_length, epsilon = 1e-12);
    }

    #[test]
    fn perot_is_exact_for_constant_fields() {
        let u0 = Vec3::new(0.3, -2.0, 0.0);
        for m in [equilateral32(), skewed_plane()] {
            let v = sample_normal(&m, |_| u0);
            for u in reconstruct_cell(&m, &v) {
                assert!((u - u0).norm() < 1e-13);
            }
            for u in reconstruct_dual(&m, &v) {
                assert!((u - u0).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn reconstruction_of_rotation_is_first_order() {
        let mut errs = Vec::new();
        for n in [8, 16, 32] {
            let m = Mesh::plane_regular(n, n, 1.0, 3f64.sqrt() / 2.0).unwrap();
            let u = |x: &Vec3| {
                let k = 2.0 * std::f64::consts::PI;
                Vec3::new((k * x.y / (3f64.sqrt() / 2.0)).sin(), (k * x.x).cos(), 0.0)
            };
            let v = sample_normal(&m, u);
            let rec = reconstruct_cell(&m, &v);
            let err = m.cells().iter().zip(&rec).map(|(c, r)| (r - u(&c.circumcenter)).norm()).fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[1] < 0.6 * errs[0] && errs[2] < 0.6 * errs[1], "{errs:?}");
    }

    #[test]
    fn flat_single_edge() {
        let m = equilateral32();
        let mut v = EdgeField::zeros(m.num_edges());
        v[3] = 1.0;
        let f = flat(&m, &v);
        assert_abs_diff_eq!(f[3], -m.edges()[3].dual_length, epsilon = 1e-15);
        assert_eq!(flat(&m, &v.scaled(2.5))[3], 2.5 * f[3]);
    }

    #[test]
    fn averages() {
        let m = equilateral32();
        let mut h = CellField::constant(m.num_cells(), 4.0);
        assert!(edge_average(&m, &h).iter().all(|&x| x == 4.0));
        let e = &m.edges()[7];
        h[e.cells[0]] = 1.0;
        h[e.cells[1]] = 3.0;
        assert_eq!(edge_average(&m, &h)[7], 2.0);
        for d in m.duals() {
            let s: f64 = d.kites.iter().sum::<f64>() / d.area;
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(
            ip_cell(&m, &CellField::constant(32, 1.0), &CellField::constant(32, 1.0)),
            3f64.sqrt() / 2.0,
            epsilon = 1e-14
        );
    }

    fn random_fields(m: &Mesh, seed: u64) -> (CellField, DualField, EdgeField) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (
            CellField::from_fn(m.num_cells(), |_| rng.gen_range(-1.0..1.0)),
            DualField::from_fn(m.num_duals(), |_| rng.gen_range(-1.0..1.0)),
            EdgeField::from_fn(m.num_edges(), |_| rng.gen_range(-1.0..1.0)),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn adjointness_holds(seed in any::<u64>()) {
            for m in [equilateral32(), skewed_plane(), Mesh::sphere(1, 2.0).unwrap()] {
                let (f, g, v) = random_fields(&m, seed);
                let lhs = ip_edge(&m, &grad_n(&m, &f), &v);
                let rhs = -ip_cell(&m, &f, &div(&m, &v));
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs() + m.total_area()));
                let lhs = ip_edge(&m, &grad_t(&m, &g), &v);
                let rhs = ip_dual(&m, &g, &curl(&m, &v));
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs() + m.total_area()));
            }
        }

        #[test]
        fn operators_are_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
            let m = skewed_plane();
            let (f, g, v) = random_fields(&m, seed);
            let (f2, g2, v2) = random_fields(&m, seed.wrapping_add(1));
            let lin = grad_n(&m, &f.axpy(a, &f2));
            let sep = grad_n(&m, &f).axpy(a, &grad_n(&m, &f2));
            prop_assert!(lin.axpy(-1.0, &sep).max_abs() < 1e-12);
            let lin = grad_t(&m, &g.axpy(a, &g2));
            let sep = grad_t(&m, &g).axpy(a, &grad_t(&m, &g2));
            prop_assert!(lin.axpy(-1.0, &sep).max_abs() < 1e-12);
            let lin = div(&m, &v.axpy(a, &v2));
            let sep = div(&m, &v).axpy(a, &div(&m, &v2));
            prop_assert!(lin.axpy(-1.0, &sep).max_abs() < 1e-10);
            let lin = curl(&m, &v.axpy(a, &v2));
            let sep = curl(&m, &v).axpy(a, &curl(&m, &v2));
            prop_assert!(lin.axpy(-1.0, &sep).max_abs() < 1e-10);
        }

        #[test]
        fn orientation_reversal_round_trips(seed in any::<u64>()) {
            let m = equilateral32();
            let (_, _, v) = random_fields(&m, seed);
            prop_assert_eq!(v.reversed().reversed(), v.clone());
            for e in 0..m.num_edges() {
                let [i, j] = m.edges()[e].cells;
                prop_assert_eq!(v.oriented(&m, e, i), -v.oriented(&m, e, j));
            }
        }
    }
}
