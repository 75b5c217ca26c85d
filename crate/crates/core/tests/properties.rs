use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdswe::cases::{init_vortex_pair, mountain_rest_state, Mountain, PlaneSetup, SphereSetup, VortexPair};
use sdswe::diagnostics::{mass, DiagnosticsRecord};
use sdswe::dissipation::{biharmonic_tendency, casimir_tendency, DissipationConfig, DissipationMode};
use sdswe::dynamics::coriolis_dual;
use sdswe::integrator::{cfl_time_step, step, Checkpoint, Model, TimeConfig};
use sdswe::mesh::IrregularParams;
use sdswe::operators::edge_average;
use sdswe::{CellField, EdgeField, Mesh, State};

fn mesh_strategy() -> impl Strategy<Value = Mesh> {
    prop_oneof![
        (2usize..10, 2usize..5, 0.5f64..5.0, 0.8f64..1.2).prop_map(|(nx, half, a, stretch)| {
            let ny = 2 * half;
            let ly = a * 3f64.sqrt() / 2.0 * stretch * ny as f64;
            Mesh::plane_regular(nx, ny, a * nx as f64, ly).unwrap()
        }),
        (any::<u64>(), 1.0f64..2.0).prop_map(|(seed, factor)| {
            let (lx, ly) = (16.0, 8.0 * 3f64.sqrt());
            Mesh::plane_irregular(16, 16, lx, ly, &IrregularParams::centered(lx, ly, factor, seed)).unwrap()
        }),
        (0u32..3, 0.5f64..3.0).prop_map(|(level, r)| Mesh::sphere(level, r).unwrap()),
    ]
}

fn perturbed_vortex(seed: u64, amplitude: f64) -> (Mesh, State, sdswe::dynamics::PhysicalParams) {
    let s = PlaneSetup::default();
    let m = Mesh::plane_regular(12, 12, s.lx, s.ly).unwrap();
    let (mut st, p) = init_vortex_pair(&m, &VortexPair::default(), &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    st.v = st.v.axpy(amplitude, &EdgeField::from_fn(m.num_edges(), |_| rng.gen_range(-1.0..1.0)));
    st.h = st.h.axpy(amplitude, &CellField::from_fn(m.num_cells(), |_| rng.gen_range(-5.0..5.0)));
    (m, st, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mesh_areas_and_orientation(m in mesh_strategy()) {
        let total = m.total_area();
        let cells: f64 = m.cells().iter().map(|c| c.area).sum();
        let duals: f64 = m.duals().iter().map(|d| d.area).sum();
        prop_assert!((cells - total).abs() <= 1e-10 * total);
        prop_assert!((duals - total).abs() <= 1e-10 * total);
        for c in m.cells() {
            prop_assert!((c.kites.iter().sum::<f64>() - c.area).abs() <= 1e-10 * c.area);
        }
        for d in m.duals() {
            prop_assert!((d.kites.iter().sum::<f64>() - d.area).abs() <= 1e-10 * d.area);
        }
        for e in m.edges() {
            prop_assert!(e.dual_length > 0.0 && e.length > 0.0);
            prop_assert!(e.cells[0] != e.cells[1] && e.vertices[0] != e.vertices[1]);
            let k = m.geometry().up(&e.midpoint);
            prop_assert!((k.cross(&e.normal) - e.tangent).norm() < 1e-12);
        }
        prop_assert!(m.validate().all_passed());
    }

    #[test]
    fn flattened_lattices_are_rejected(nx in 2usize..10, half in 2usize..5, stretch in 0.05f64..0.4) {
        let ny = 2 * half;
        let ly = 3f64.sqrt() / 2.0 * stretch * ny as f64;
        prop_assert!(Mesh::plane_regular(nx, ny, nx as f64, ly).is_err());
    }

    #[test]
    fn one_step_conserves_mass(seed in any::<u64>(), amp in 0.0f64..1.0, mode in 0usize..3) {
        let (m, st, p) = perturbed_vortex(seed, amp);
        let diss = [
            DissipationConfig::none(),
            DissipationConfig { mode: DissipationMode::Casimir, theta: 1.728e17, nu: 0.0 },
            DissipationConfig { mode: DissipationMode::Biharmonic, theta: 0.0, nu: 1.4727e12 },
        ][mode];
        let dt = cfl_time_step(&m, &st.h, &p.eta_b, p.g, 0.2);
        let model = Model::new(m, p, diss);
        let (next, report) = step(&model, &TimeConfig::with_dt(dt), &st).unwrap();
        let (m0, m1) = (mass(&model.mesh, &st), mass(&model.mesh, &next));
        prop_assert!((m1 / m0 - 1.0).abs() <= 1e-13);
        prop_assert!(report.fp_iterations >= 1);
        prop_assert!((next.t - st.t - dt).abs() <= 1e-9 * dt);
    }

    #[test]
    fn lake_at_rest_stays_at_rest(surface in 5200.0f64..8000.0, rotation in 0.0f64..1e-4) {
        let m = Mesh::sphere(2, 6.371e6).unwrap();
        let setup = SphereSetup { rotation, ..SphereSetup::default() };
        let (st, p) = mountain_rest_state(&m, &Mountain::default(), &setup, surface).unwrap();
        let dt = cfl_time_step(&m, &st.h, &p.eta_b, p.g, 0.2);
        let model = Model::new(m, p, DissipationConfig { mode: DissipationMode::Casimir, theta: 1.728e17, nu: 0.0 });
        let (next, _) = step(&model, &TimeConfig::with_dt(dt), &st).unwrap();
        prop_assert!(next.v.max_abs() <= 1e-10);
    }

    #[test]
    fn casimir_tendency_does_no_work(seed in any::<u64>(), amp in 0.0f64..1.0) {
        let (m, st, p) = perturbed_vortex(seed, amp);
        let f = coriolis_dual(&m, p.coriolis);
        let t = casimir_tendency(&m, &st.v, &st.h, &f, 1.728e17).unwrap();
        let hbar = edge_average(&m, &st.h);
        let (mut work, mut scale) = (0.0, 0.0);
        for (e, edge) in m.edges().iter().enumerate() {
            let w = edge.length * edge.dual_length * hbar[e] * st.v[e] * t[e];
            work += w;
            scale += w.abs();
        }
        prop_assert!(work.abs() <= 1e-10 * scale);
    }

    #[test]
    fn biharmonic_tendency_removes_energy(seed in any::<u64>()) {
        let m = Mesh::plane_regular(8, 8, 8.0, 4.0 * 3f64.sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = EdgeField::from_fn(m.num_edges(), |_| rng.gen_range(-1.0..1.0));
        let t = biharmonic_tendency(&m, &v, 1.0);
        let work: f64 = m.edges().iter().enumerate().map(|(e, edge)| edge.length * edge.dual_length * v[e] * t[e]).sum();
        prop_assert!(work <= 1e-12);
    }

    #[test]
    fn checkpoint_round_trips(seed in any::<u64>(), step_index in any::<u64>(), cut in 0usize..64) {
        let (m, st, _) = perturbed_vortex(seed, 1.0);
        let cp = Checkpoint { mesh_hash: m.hash(), descriptor: format!("seed {seed}"), step: step_index, state: st };
        let bytes = cp.to_bytes();
        prop_assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), cp.clone());
        prop_assert!(Checkpoint::from_bytes(&bytes[..bytes.len().saturating_sub(cut + 1)]).is_err());
        prop_assert!(cp.verify(&m).is_ok());
    }

    #[test]
    fn initial_relative_errors_are_zero(seed in any::<u64>(), amp in 0.0f64..1.0) {
        let (m, st, p) = perturbed_vortex(seed, amp);
        let f = coriolis_dual(&m, p.coriolis);
        let r = DiagnosticsRecord::measure(&m, &p, &f, 0, &st, 0, None).unwrap();
        prop_assert_eq!((r.energy_rel_err, r.enstrophy_rel_err, r.mass_rel_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn cfl_step_scales_with_courant(c in 0.01f64..1.0) {
        let (m, st, p) = perturbed_vortex(0, 0.0);
        let a = cfl_time_step(&m, &st.h, &p.eta_b, p.g, c);
        let b = cfl_time_step(&m, &st.h, &p.eta_b, p.g, 2.0 * c);
        prop_assert!(a > 0.0 && ((b / a) - 2.0).abs() < 1e-12);
    }
}
