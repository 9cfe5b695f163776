//! Independent full-Hilbert-space oracles for the sector reduction.

mod common;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use proptest::prelude::*;

use common::{overlap, sector, Full, RK4_STEPS};
use revanneal::dynamics::{evolve, EvolveOptions};
use revanneal::ira::{single_cycle, CycleSpec, IraModel};
use revanneal::schedule::Schedule;
use revanneal::sector::transverse_ground_state;
use revanneal::spectrum::eigensystem;
use revanneal::state::StateVector;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sector_spectrum_is_contained_in_full_spectrum(
        n in prop::sample::select(vec![6usize, 8]),
        up_frac in 0.0f64..=1.0,
        p in 3u32..=5,
        s in 0.0f64..=1.0,
        lambda in 0.0f64..=1.0,
        gamma in 0.1f64..3.0,
    ) {
        let n_up = (up_frac * n as f64).round() as usize;
        let (_, terms) = sector(p, n, n_up, gamma);
        let full = Full::new(p, n, n_up);
        let full_eigs = SymmetricEigen::new(full.dense(s, lambda, gamma)).eigenvalues;
        let sec = eigensystem(&terms.assemble(s, lambda, gamma), terms.dim(), false).unwrap();
        for e in &sec.values {
            let d = full_eigs.iter().map(|f| (f - e).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-10, "sector eigenvalue {e} is {d} from the full spectrum");
        }
    }

    #[test]
    fn sector_action_commutes_with_embedding(
        n in prop::sample::select(vec![6usize, 8]),
        n_up in 0usize..=8,
        s in 0.0f64..=1.0,
        lambda in 0.0f64..=1.0,
        seed_re in prop::collection::vec(-1.0f64..1.0, 81),
    ) {
        let n_up = n_up.min(n);
        let (basis, terms) = sector(3, n, n_up, 1.3);
        let full = Full::new(3, n, n_up);
        let v: Vec<Complex64> = (0..basis.dim()).map(|i| Complex64::new(seed_re[i], seed_re[80 - i])).collect();
        let mut hv = vec![Complex64::new(0.0, 0.0); basis.dim()];
        terms.apply(s, lambda, 1.3, &v, &mut hv);
        let mut full_hv = vec![Complex64::new(0.0, 0.0); full.dim()];
        full.apply(s, lambda, 1.3, &full.embed(&basis, &v), &mut full_hv);
        let want = full.embed(&basis, &hv);
        for (a, b) in full_hv.iter().zip(&want) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn lambda_one_ground_energy_matches_full_space() {
    for n in [6usize, 8] {
        for s in [0.0, 0.3, 0.45, 0.8, 1.0] {
            let (_, terms) = sector(3, n, n, 1.0);
            let full = Full::new(3, n, n);
            let lo = SymmetricEigen::new(full.dense(s, 1.0, 1.0)).eigenvalues.min();
            let sec = eigensystem(&terms.assemble(s, 1.0, 1.0), 1, false).unwrap();
            assert!((sec.values[0] - lo).abs() < 1e-10, "N={n} s={s}: {} vs {lo}", sec.values[0]);
        }
    }
}

#[test]
fn transverse_ground_state_is_uniform_superposition() {
    let (basis, _) = sector(3, 8, 5, 1.0);
    let full = Full::new(3, 8, 5);
    let psi: StateVector<f64> = transverse_ground_state(&basis);
    let emb = full.embed(&basis, psi.amplitudes());
    let amp = 1.0 / (full.dim() as f64).sqrt();
    for a in emb {
        assert!((a.re - amp).abs() < 1e-14 && a.im.abs() < 1e-14);
    }
}

fn check_evolution(n: usize, n_up: usize, gamma: f64, schedule: Schedule<f64>, psi0: StateVector<f64>) {
    let (basis, terms) = sector(3, n, n_up, gamma);
    let full = Full::new(3, n, n_up);
    let opts = EvolveOptions { tol: 1e-11, ..Default::default() };
    let res = evolve(&terms, gamma, &schedule, &psi0, &opts).unwrap();
    let reference = full.rk4(&schedule, gamma, full.embed(&basis, psi0.amplitudes()), RK4_STEPS);
    let ov = overlap(&full.embed(&basis, res.final_state.amplitudes()), &reference);
    assert!(ov >= 1.0 - 1e-8, "overlap {ov}");
}

#[test]
fn ara_linear_evolution_matches_full_space() {
    for (n, n_up) in [(6, 4), (8, 6)] {
        let (basis, _) = sector(3, n, n_up, 1.5);
        let psi0 = StateVector::basis(basis.dim(), basis.initial_index());
        check_evolution(n, n_up, 1.5, Schedule::ara_linear(6.0).unwrap(), psi0);
    }
}

#[test]
fn qa_evolution_matches_full_space() {
    for n in [6, 8] {
        let (basis, _) = sector(3, n, n, 2.0);
        check_evolution(n, n, 2.0, Schedule::qa(6.0).unwrap(), transverse_ground_state(&basis));
    }
}

#[test]
fn ira_cycle_evolution_matches_full_space() {
    for (n, n_up) in [(6, 3), (8, 5)] {
        let (basis, _) = sector(3, n, n_up, 1.0);
        let psi0 = StateVector::basis(basis.dim(), basis.initial_index());
        check_evolution(n, n_up, 1.0, Schedule::ira_quadratic(6.0, 0.3).unwrap(), psi0);
    }
}

/// A cycle from any bitstring, however its up spins are placed, gives the
/// same up-count distribution as the block-ordered representative.
#[test]
fn ira_outcome_depends_only_on_up_count() {
    let n = 8;
    let spec = CycleSpec::new(6.0, 0.3, 1).unwrap();
    let model = IraModel::new(3, n, 1.0).unwrap();
    let full = Full::new(3, n, n);
    let schedule = spec.schedule().unwrap();
    // down-spin masks with 3, 1 and 6 down spins at scattered positions
    for mask in [0b1010_0100usize, 0b0001_0000, 0b1101_1011] {
        let up = n - (mask as u32).count_ones() as usize;
        let mut psi0 = vec![Complex64::new(0.0, 0.0); full.dim()];
        psi0[mask] = Complex64::new(1.0, 0.0);
        let psi = full.rk4(&schedule, 1.0, psi0, RK4_STEPS);
        let mut by_up = vec![0.0; n + 1];
        for (x, a) in psi.iter().enumerate() {
            by_up[model.index_of_up(n - (x as u32).count_ones() as usize)] += a.norm_sqr();
        }
        let opts = EvolveOptions { tol: 1e-11, ..Default::default() };
        let chain = single_cycle(&model, up, &spec, &opts).unwrap();
        for (a, b) in by_up.iter().zip(&chain.entries) {
            assert!((a - b).abs() < 1e-8, "mask {mask:b}: {a} vs {b}");
        }
    }
}
