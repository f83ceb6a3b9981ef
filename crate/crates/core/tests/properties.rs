use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qslkit::engine::{energy_moments, right_invariant_evaluate};
use qslkit::oracle::overlap_trace;
use qslkit::random::{random_antihermitian, random_hermitian, random_special_unitary, random_state, rng_for};
use qslkit::search::{minimize_with_options, SearchOptions};
use qslkit::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn kappa(v: f64) -> ConstraintLevel {
    ConstraintLevel::new(v).unwrap()
}

fn functionals(psi: &StateVector) -> Vec<PHFunctional> {
    let mut out: Vec<PHFunctional> =
        [0.5, 1.0, 2.0, 3.0].iter().map(|&p| PHFunctional::central_moment(p, psi.clone()).unwrap()).collect();
    out.push(PHFunctional::operator_norm());
    out
}

fn swap_optimal_time(p: f64, k: f64, n: usize, theta: f64, seed: u64) -> f64 {
    let mut rng = rng_for(seed, 0);
    let v = random_special_unitary(&mut rng, n);
    let psi = StateVector::normalized(v.column(0)).unwrap();
    let gate = GatePlan::conjugated_swap(v, theta).unwrap();
    let f = PHFunctional::central_moment(p, psi).unwrap();
    optimal_time(&f, &gate.matrix, kappa(k)).unwrap().expect_value()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn positive_homogeneity(seed in any::<u64>(), n in 2usize..6, log_lambda in -4.0f64..4.0) {
        let mut rng = rng_for(seed, 0);
        let psi = random_state(&mut rng, n);
        let a = random_antihermitian(&mut rng, n);
        let lambda = log_lambda.exp();
        for f in functionals(&psi) {
            let base = f.evaluate(&a).unwrap();
            let scaled = f.evaluate(&a.scale_real(lambda)).unwrap();
            prop_assert!((scaled - lambda * base).abs() <= 1e-9 * (lambda * base).max(1.0), "{}", f.label());
        }
    }

    #[test]
    fn unitary_co_invariance(seed in any::<u64>(), n in 2usize..6, p in 0.3f64..4.0) {
        let mut rng = rng_for(seed, 0);
        let psi = random_state(&mut rng, n);
        let a = random_antihermitian(&mut rng, n);
        let v = random_special_unitary(&mut rng, n);
        let moved = v.conjugate(&a);
        let moved_psi = StateVector::normalized(v.apply(&psi)).unwrap();
        prop_assert!((eval_gop(&moved).unwrap() - eval_gop(&a).unwrap()).abs() < 1e-9);
        prop_assert!((eval_gp(&moved, p, &moved_psi).unwrap() - eval_gp(&a, p, &psi).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn first_moment_is_mean_energy_gap(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_for(seed, 0);
        let psi = random_state(&mut rng, n);
        let h = random_hermitian(&mut rng, n);
        let (mean, e0, _) = energy_moments(&h, &psi).unwrap();
        let g1 = eval_gp(&h.scale(-I), 1.0, &psi).unwrap();
        prop_assert!((g1 - (mean - e0)).abs() < 1e-10);
    }

    #[test]
    fn right_extension_is_invariant(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = rng_for(seed, 0);
        let psi = random_state(&mut rng, n);
        let a = random_antihermitian(&mut rng, n);
        let u = random_special_unitary(&mut rng, n);
        let tangent = &a * &u;
        for f in functionals(&psi) {
            let direct = f.evaluate(&a).unwrap();
            let extended = right_invariant_evaluate(&f, &u, &tangent).unwrap();
            prop_assert!((direct - extended).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn swap_time_is_theta_independent(seed in any::<u64>(), n in 2usize..5, p in 0.3f64..4.0, k in 0.2f64..5.0) {
        let times: Vec<f64> = [0.0, PI / 7.0, PI / 3.0, 9.0 * PI / 5.0]
            .iter()
            .map(|&theta| swap_optimal_time(p, k, n, theta, seed))
            .collect();
        for t in &times {
            prop_assert!((t - times[0]).abs() < 1e-9);
        }
        let closed = swap_time_closed_form(p, kappa(k)).unwrap();
        prop_assert!((times[0] - closed).abs() < 1e-8 * closed);
    }

    #[test]
    fn swap_time_is_v_independent(seeds in prop::collection::vec(any::<u64>(), 5), p in 0.3f64..4.0) {
        let first = swap_optimal_time(p, 1.0, 3, 0.4, seeds[0]);
        for &s in &seeds[1..] {
            prop_assert!((swap_optimal_time(p, 1.0, 3, 0.4, s) - first).abs() < 1e-8);
        }
    }

    #[test]
    fn exp_log_round_trip(seed in any::<u64>(), n in 2usize..6, radius in 0.05f64..0.99) {
        let mut rng = rng_for(seed, 0);
        let h = random_hermitian(&mut rng, n);
        let top = eig_hermitian(&h).unwrap().eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let h = h.scale_real(radius * PI / top);
        let back = log_unitary_principal(&exp_antihermitian(&h, 1.0).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&h.scale(-I)) < 1e-8);
    }

    #[test]
    fn exp_group_law(seed in any::<u64>(), n in 2usize..6, s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let mut rng = rng_for(seed, 0);
        let h = random_hermitian(&mut rng, n);
        let product = &exp_antihermitian(&h, s).unwrap() * &exp_antihermitian(&h, t).unwrap();
        prop_assert!(product.max_abs_diff(&exp_antihermitian(&h, s + t).unwrap()) < 1e-9);
    }

    #[test]
    fn spectrum_is_conjugation_invariant(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = rng_for(seed, 0);
        let h = random_hermitian(&mut rng, n);
        let v = random_special_unitary(&mut rng, n);
        let a = eig_hermitian(&h).unwrap().eigenvalues;
        let b = eig_hermitian(&v.conjugate(&h)).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn gate_log_is_conjugation_covariant(seed in any::<u64>(), n in 2usize..6, theta in 0.0f64..TAU) {
        let mut rng = rng_for(seed, 0);
        let gate = GatePlan::conjugated_swap(random_special_unitary(&mut rng, n), theta).unwrap();
        let v = random_special_unitary(&mut rng, n);
        let moved = GatePlan::from_matrix(v.conjugate(&gate.matrix)).unwrap();
        let lhs = gate_log(&moved).unwrap();
        let rhs = v.conjugate(&gate_log(&gate).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        let rebuilt = exp_antihermitian(&gate_log(&gate).unwrap().scale(I), 1.0).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&gate.matrix) < 1e-9);
    }

    #[test]
    fn swap_squares_to_reflection(seed in any::<u64>(), n in 2usize..6, theta in 0.0f64..TAU) {
        let mut rng = rng_for(seed, 0);
        let v = random_special_unitary(&mut rng, n);
        let gate = GatePlan::conjugated_swap(v.clone(), theta).unwrap();
        let mut signs = vec![1.0; n];
        signs[0] = -1.0;
        signs[1] = -1.0;
        let reflection = v.conjugate(&ComplexMatrix::from_real_diagonal(&signs).unwrap());
        prop_assert!((&gate.matrix * &gate.matrix).max_abs_diff(&reflection) < 1e-10);
    }

    #[test]
    fn propagation_is_unitary(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_for(seed, 0);
        let h = random_hermitian(&mut rng, n);
        let psi = random_state(&mut rng, n);
        for k in 0..16 {
            let u = exp_antihermitian(&h, 0.7 * k as f64).unwrap();
            prop_assert!(u.unitary_deviation() < 1e-10);
            prop_assert!((u.apply(&psi).norm() - 1.0).abs() < 1e-10);
        }
        let times: Vec<f64> = (0..32).map(|k| 0.3 * k as f64).collect();
        let trace = overlap_trace(&h, &psi, &times).unwrap();
        prop_assert!(trace.overlaps.iter().all(|a| a.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn optimal_trajectory_orthogonalizes(seed in any::<u64>(), n in 2usize..6, p in 0.3f64..4.0, k in 0.2f64..5.0) {
        let mut rng = rng_for(seed, 0);
        let v = random_special_unitary(&mut rng, n);
        let psi = StateVector::normalized(v.column(0)).unwrap();
        let gate = GatePlan::conjugated_swap(v, 1.3).unwrap();
        let f = PHFunctional::central_moment(p, psi.clone()).unwrap();
        let t_star = optimal_time(&f, &gate.matrix, kappa(k)).unwrap().expect_value();
        let h = gate_log(&gate).unwrap().scale(I / t_star);
        prop_assert!(survival_amplitude(&h, &psi, t_star).unwrap().norm() < 1e-8);
    }
}

#[test]
fn closed_form_increases_with_p() {
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    for k in [0.5, 1.0, 3.0] {
        let times: Vec<f64> = grid.iter().map(|&p| swap_time_closed_form(p, kappa(k)).unwrap()).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]), "{times:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn search_respects_constraint_and_bound(seed in any::<u64>(), p in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let psi = StateVector::uniform(2);
        let f = PHFunctional::central_moment(p, psi.clone()).unwrap();
        let mut options = SearchOptions::new(3, 300, seed);
        options.record_trace = true;
        let report = minimize_with_options(&psi, &f, kappa(1.0), &options).unwrap();
        prop_assert!(report.trace.iter().all(|row| row.constraint_residual < 1e-9));
        let bound = swap_time_closed_form(p, kappa(1.0)).unwrap();
        if let Some(t) = report.best.t_perp {
            prop_assert!(t >= bound * (1.0 - 1e-6));
        }
    }

    #[test]
    fn search_is_deterministic(seed in any::<u64>()) {
        let psi = StateVector::uniform(2);
        let f = PHFunctional::central_moment(1.0, psi.clone()).unwrap();
        let a = minimize_orthogonality_time(&psi, &f, kappa(1.0), 2, 200, seed).unwrap();
        let b = minimize_orthogonality_time(&psi, &f, kappa(1.0), 2, 200, seed).unwrap();
        prop_assert_eq!(qslkit::json::to_string(&a).unwrap(), qslkit::json::to_string(&b).unwrap());
    }
}

#[test]
fn doubling_kappa_halves_best_time() {
    let psi = StateVector::uniform(2);
    let f = PHFunctional::central_moment(1.0, psi.clone()).unwrap();
    for seed in 0..3 {
        let slow = minimize_orthogonality_time(&psi, &f, kappa(1.0), 4, 400, seed).unwrap();
        let fast = minimize_orthogonality_time(&psi, &f, kappa(2.0), 4, 400, seed).unwrap();
        let ratio = slow.best.t_perp.unwrap() / fast.best.t_perp.unwrap();
        assert!((ratio - 2.0).abs() < 0.04, "seed {seed}: ratio {ratio}");
    }
}

#[test]
fn qutrit_search_stays_above_bound() {
    let psi = StateVector::uniform(3);
    let f = PHFunctional::central_moment(1.0, psi.clone()).unwrap();
    let report = minimize_orthogonality_time(&psi, &f, kappa(1.0), 4, 600, 11).unwrap();
    let t = report.best.t_perp.expect("qutrit search should orthogonalize");
    assert!(t >= PI / 2.0 * (1.0 - 1e-6));
    assert!(t < PI, "best {t}");
}
