use proptest::prelude::*;

use tensornet::decomp::TruncationSpec;
use tensornet::mpo::energy;
use tensornet::mps::mps_from_state_vector;
use tensornet::tebd::{self, GroundStateOptions, TimeMode};
use tensornet::{ed, oracle, random, trg, Model, Mps, SweepDirection, C64};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_of_any_state_bounds_e0(n in 2usize..7, j in -1.5f64..1.5, h in -1.0f64..1.0, seed in any::<u64>()) {
        let model = Model::IsingNn { n, j, h };
        let mpo = model.mpo().unwrap();
        let e0 = ed::solve_dense(&mpo).unwrap().e0();
        let m = Mps::random(n, 2, 3, &mut random::stream(seed, 0)).unwrap();
        prop_assert!(energy(&m, &mpo).unwrap() >= e0 - 1e-12);
    }

    #[test]
    fn ground_energy_is_lipschitz_in_couplings(n in 2usize..7, j in -1.0f64..1.0, eps in -0.05f64..0.05) {
        let e = |j: f64| ed::solve_dense(&Model::Heisenberg { n, j }.mpo().unwrap()).unwrap().e0();
        let bound = 0.75 * (n - 1) as f64 * eps.abs();
        prop_assert!((e(j + eps) - e(j)).abs() <= bound + 1e-12);
    }
}

#[test]
fn lanczos_residual_on_sixteen_sites() {
    let h = Model::Heisenberg { n: 16, j: -1.0 }.mpo().unwrap();
    let r = ed::solve_iterative(&h, 400, 1e-9).unwrap();
    assert!(r.residual < 1e-6, "residual {}", r.residual);
    // open boundaries sit just above the bulk value 1/4 - ln 2 per site
    let per_site = r.e0() / 16.0;
    let bulk = 0.25 - 2f64.ln();
    assert!(per_site > bulk && per_site < bulk + 0.02, "{per_site}");
}

#[test]
fn real_time_step_error_is_second_order() {
    let model = Model::IsingNn { n: 4, j: 1.0, h: 0.6 };
    let psi = random::state_vector(16, &mut random::stream(3, 0));
    let m = mps_from_state_vector(&psi, 2, 4, &TruncationSpec::unlimited()).unwrap();
    let h = oracle::model_dense(&model);
    let err = |tau: f64| {
        let sched = tebd::build_gates(&model, tau, TimeMode::Real).unwrap();
        let (out, _) = tebd::sweep(&m, &sched, &TruncationSpec::unlimited(), SweepDirection::Forward).unwrap();
        let exact = oracle::matvec(&oracle::expm(&h.scale(C64::new(0.0, -tau))), &psi);
        out.to_state_vector().unwrap().sub(&exact).unwrap().frobenius_norm()
    };
    let (a, b) = (err(0.04), err(0.02));
    assert!((3.5..4.5).contains(&(a / b)), "{}", a / b);
}

#[test]
fn no_truncation_when_bond_cap_covers_the_chain() {
    let model = Model::Heisenberg { n: 6, j: 1.0 };
    let opts = GroundStateOptions {
        chi_max: 8,
        tau_schedule: vec![0.1],
        max_sweeps: 10,
        ..GroundStateOptions::default()
    };
    let report = tebd::find_ground_state(&model, &opts).unwrap();
    assert!(report.discarded_weight_trace.iter().all(|&w| w < 1e-14));
}

#[test]
fn real_time_evolution_preserves_norm_and_energy() {
    let model = Model::Heisenberg { n: 6, j: 1.0 };
    let neel: Vec<Vec<C64>> = (0..6)
        .map(|k| if k % 2 == 0 { vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)] } else { vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)] })
        .collect();
    let start = Mps::product_state(&neel).unwrap();
    let report = tebd::evolve_real_time(&start, &model, 1.0, 0.01, &TruncationSpec::unlimited()).unwrap();
    let e_start = energy(&start, &model.mpo().unwrap()).unwrap();
    assert!(report.norm_trace.iter().all(|n| (n - 1.0).abs() < 1e-10));
    assert!((report.final_energy - e_start).abs() < 1e-2);
}

#[test]
fn exact_trg_steps_match_enumeration() {
    for steps in 0..=2 {
        let (p1, p2) = trg::closure_torus(steps);
        for beta in [0.3, 0.6] {
            let state = trg::run(trg::ising_plaquette_tensor(beta, 1.0).unwrap(), steps, &TruncationSpec::unlimited()).unwrap();
            let ln_z = state.ln_z_per_site().unwrap() * state.torus_sites();
            let exact = trg::brute_force_partition_lattice(beta, 1.0, p1, p2).unwrap();
            assert!((ln_z - exact).abs() < 1e-10, "steps {steps} beta {beta}");
        }
    }
}

#[test]
fn trg_free_energy_converges_monotonically_in_chi() {
    let f = |chi| trg::free_energy_per_site(0.3, 1.0, 10, &TruncationSpec::with_chi(chi)).unwrap();
    let values: Vec<f64> = [2, 4, 8, 16].into_iter().map(f).collect();
    let reference = f(32);
    let gaps: Vec<f64> = values.iter().map(|v| (v - reference).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{gaps:?}");
    assert!(gaps[3] < 1e-6);
}
