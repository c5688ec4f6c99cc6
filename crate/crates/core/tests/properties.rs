//! Invariants checked over randomly drawn models.

use lindblad_core::algebra::{default_rounds, generated_algebra_dim, spans_antihermitian, GeneratorSet};
use lindblad_core::certificates::{pair_rate_directed, pair_rate_symmetric, rate_mu2, ZERO_RATE_TOL};
use lindblad_core::evolution::{propagate, trajectory, PropagatorOptions, Scheme};
use lindblad_core::frames::PairSearch;
use lindblad_core::linalg::{self, CMat, SeededRng, C64};
use lindblad_core::operators::{
    dissipator_apply, is_psd, lindbladian_apply, normalize_jumps, trace_norm, HamiltonianSchedule, JumpSet,
    LindbladModel,
};
use lindblad_core::perturbation::{perturbed_rate, slow_drive_rate, BaseContraction};
use lindblad_core::superop::{build_superoperator, fixed_points, FIXED_POINT_TOL};
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng(seed: u64) -> SeededRng {
    linalg::rng_from_seed(seed)
}

fn jumps(d: usize, m: usize, r: &mut SeededRng) -> JumpSet {
    JumpSet::new(d, (0..m).map(|_| linalg::random_complex(d, r) * c(0.5)).collect()).unwrap()
}

fn piecewise_model(d: usize, m: usize, r: &mut SeededRng) -> LindbladModel {
    let segments = (0..3).map(|_| linalg::random_hermitian(d, r) * c(2.0)).collect();
    let h = HamiltonianSchedule::PiecewiseConstant { breakpoints: vec![0.0, 0.3, 0.7], segments };
    LindbladModel::new(jumps(d, m, r), h).unwrap()
}

fn dist(a: &CMat, b: &CMat) -> f64 {
    trace_norm(&linalg::hermitian_part(&(a - b)))
}

const SEARCH: PairSearch = PairSearch { restarts: 24, seed: 0, max_iter: 2000 };

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn evolution_is_trace_preserving_positive_and_contractive(seed in any::<u64>(), d in 2usize..=4, m in 1usize..=3) {
        let mut r = rng(seed);
        let model = piecewise_model(d, m, &mut r);
        let rho = linalg::random_density(d, &mut r);
        let sigma = linalg::random_density(d, &mut r);
        let grid = [0.0, 0.2, 0.5, 1.0];
        let opts = PropagatorOptions::default();
        let a = trajectory(&model, &rho, &grid, opts).unwrap();
        let b = trajectory(&model, &sigma, &grid, opts).unwrap();
        let mut prev = dist(&rho, &sigma);
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!((linalg::trace(x) - c(1.0)).norm() < 1e-9);
            prop_assert!(is_psd(&linalg::hermitian_part(x), 1e-9));
            let now = dist(x, y);
            prop_assert!(now <= prev + 1e-9, "distance grew from {} to {}", prev, now);
            prev = now;
        }
    }

    #[test]
    fn integrators_agree(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let model = piecewise_model(d, 2, &mut r);
        let rho = linalg::random_density(d, &mut r);
        let exp = propagate(&model, 0.0, 1.0, &rho, PropagatorOptions::default()).unwrap();
        let rk = PropagatorOptions { scheme: Scheme::Rk4, dt: 1e-3, ..Default::default() };
        let rk = propagate(&model, 0.0, 1.0, &rho, rk).unwrap();
        prop_assert!(linalg::max_abs_diff(&exp, &rk) < 1e-7);
    }

    #[test]
    fn superoperator_matches_direct_action(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let model = piecewise_model(d, 2, &mut r);
        let x = linalg::random_complex(d, &mut r);
        for t in [0.1, 0.5, 2.0] {
            let s = build_superoperator(&model, t).unwrap();
            let direct = lindbladian_apply(&model, t, &x).unwrap();
            prop_assert!(linalg::max_abs_diff(&s.apply(&x), &direct) < 1e-11);
        }
    }

    #[test]
    fn hermitian_jumps_give_r_equal_2r(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let js = JumpSet::new(d, (0..2).map(|_| linalg::random_hermitian(d, &mut r)).collect()).unwrap();
        let big = pair_rate_symmetric(&js, SEARCH).value;
        let small = pair_rate_directed(&js, SEARCH).value;
        prop_assert!((big - 2.0 * small).abs() <= 1e-6 * big.max(1e-9), "R = {}, r = {}", big, small);
    }

    #[test]
    fn spanning_sets_have_positive_pair_rate(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let js = jumps(d, d * d - 1, &mut r);
        prop_assume!(spans_antihermitian(&js).spans);
        prop_assert!(pair_rate_symmetric(&js, SEARCH).value > ZERO_RATE_TOL);
    }

    #[test]
    fn unique_fixed_point_needs_full_algebra(seed in any::<u64>(), d in 2usize..=4, block in any::<bool>()) {
        let mut r = rng(seed);
        let mut js = jumps(d, 1, &mut r).jumps().to_vec();
        if block {
            for l in &mut js {
                for i in 0..d {
                    for j in 0..d {
                        if (i == 0) != (j == 0) {
                            l[(i, j)] = c(0.0);
                        }
                    }
                }
            }
        }
        let js = JumpSet::new(d, js).unwrap();
        let s = build_superoperator(&LindbladModel::dissipative(js.clone()), 0.0).unwrap();
        let unique = fixed_points(&s, FIXED_POINT_TOL).unwrap().fixed_points.len() == 1;
        let full = generated_algebra_dim(&GeneratorSet::with_adjoints(&js).unwrap(), default_rounds(d)).unwrap() == d * d;
        prop_assert!(!unique || full);
    }

    #[test]
    fn rates_scale_quadratically(seed in any::<u64>(), d in 2usize..=3, scale in 0.2f64..3.0) {
        let mut r = rng(seed);
        let (js, _) = normalize_jumps(&jumps(d, 2, &mut r), &linalg::zeros(d)).unwrap();
        let scaled = js.scaled(C64::from_polar(scale, 0.7));
        let s2 = scale * scale;
        let mu = rate_mu2(&js).unwrap().mu2;
        let mu_s = rate_mu2(&scaled).unwrap().mu2;
        prop_assert!((mu_s - s2 * mu).abs() < 1e-9 * s2.max(1.0));
        let big = pair_rate_symmetric(&js, SEARCH).value;
        let big_s = pair_rate_symmetric(&scaled, SEARCH).value;
        prop_assert!((big_s - s2 * big).abs() <= 1e-6 * (s2 * big).max(1e-9));
    }

    #[test]
    fn rates_are_unitarily_invariant(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let (js, _) = normalize_jumps(&jumps(d, 2, &mut r), &linalg::zeros(d)).unwrap();
        let u = linalg::random_unitary(d, &mut r);
        let rotated = js.conjugated(&u);
        let mu = rate_mu2(&js).unwrap().mu2;
        prop_assert!((rate_mu2(&rotated).unwrap().mu2 - mu).abs() < 1e-10);
        let small = pair_rate_directed(&js, SEARCH).value;
        let small_r = pair_rate_directed(&rotated, SEARCH).value;
        prop_assert!((small - small_r).abs() <= 1e-6 * small.max(1e-9));
    }

    #[test]
    fn trace_shift_does_not_change_the_dissipator_up_to_a_drive(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let js = jumps(d, 2, &mut r);
        let h = linalg::random_hermitian(d, &mut r);
        let (shifted, h2) = normalize_jumps(&js, &h).unwrap();
        let x = linalg::random_complex(d, &mut r);
        let lhs = dissipator_apply(&js, &x).unwrap() - linalg::commutator(&h, &x) * linalg::I;
        let rhs = dissipator_apply(&shifted, &x).unwrap() - linalg::commutator(&h2, &x) * linalg::I;
        prop_assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn perturbed_rate_decreases_with_the_perturbation(k in 1.0f64..8.0, gamma in 0.1f64..4.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let base = BaseContraction::new(k, gamma).unwrap();
        let edge = gamma / (1.0 + k.ln());
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        let a = perturbed_rate(base, lo * edge).unwrap();
        let b = perturbed_rate(base, hi * edge).unwrap();
        prop_assert!(a.gamma_tilde >= b.gamma_tilde - 1e-9 * gamma);
        prop_assert!(a.gamma_tilde <= gamma * (1.0 + 1e-12));
        prop_assert!(a.k_tilde >= 1.0 - 1e-12);
    }

    #[test]
    fn slow_drive_rate_decreases_with_the_speed(k in 1.0f64..8.0, gamma in 0.1f64..4.0, l1 in 0.0f64..0.05, l2 in 0.0f64..0.05) {
        let base = BaseContraction::new(k, gamma).unwrap();
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let a = slow_drive_rate(base, lo * gamma * gamma).unwrap();
        let b = slow_drive_rate(base, hi * gamma * gamma).unwrap();
        prop_assert!(a.gamma_tilde >= b.gamma_tilde - 1e-9 * gamma);
    }
}
