//! Randomized invariants of the metric, sequence and ladder layers.

use cqms::inductive::{self, sample_tower, tower_from_state};
use cqms::ladder::{estimate_ratio_constant, Ladder};
use cqms::mk::{kantorovich_duality_gap, mk_distance};
use cqms::sampling::{self, rng};
use cqms::{AlgElement, AlgState, Complex, FiniteDimAlgebra, InductiveSequence, LipSeminorm, SolverConfig, UnitalHom};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn euclidean_space(r: &mut ChaCha8Rng, n: usize) -> (Arc<FiniteDimAlgebra>, LipSeminorm<f64>) {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (r.random::<f64>(), r.random::<f64>())).collect();
    let d = DMatrix::from_fn(n, n, |i, j| ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt());
    let alg = FiniteDimAlgebra::commutative(n, "X").unwrap();
    let l = LipSeminorm::finite_metric(&alg, d).unwrap();
    (alg, l)
}

fn m2_default() -> LipSeminorm<f64> {
    InductiveSequence::<f64>::constant_matrix(2, 1, None).unwrap().stage(1).unwrap().seminorm.clone()
}

fn mixed_algebra() -> Arc<FiniteDimAlgebra> {
    FiniteDimAlgebra::new(vec![1, 2, 3], "C + M2 + M3").unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn metric_distances_are_symmetric_and_satisfy_triangle(seed in any::<u64>(), n in 3usize..=6) {
        let mut r = rng(seed);
        let (alg, l) = euclidean_space(&mut r, n);
        let cfg = SolverConfig::default();
        let s: Vec<AlgState<f64>> = (0..3).map(|_| sampling::state(&mut r, &alg)).collect();
        let ab = mk_distance(&l, &s[0], &s[1], &cfg).unwrap().value;
        let ba = mk_distance(&l, &s[1], &s[0], &cfg).unwrap().value;
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        let bc = mk_distance(&l, &s[1], &s[2], &cfg).unwrap().value;
        let ac = mk_distance(&l, &s[0], &s[2], &cfg).unwrap().value;
        prop_assert!(ac <= ab + bc + 3.0 * cfg.tol);
    }

    #[test]
    fn matrix_distances_satisfy_triangle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = m2_default();
        let cfg = SolverConfig::default();
        let s: Vec<AlgState<f64>> = (0..3).map(|_| sampling::state(&mut r, l.algebra())).collect();
        let d = |i: usize, j: usize| mk_distance(&l, &s[i], &s[j], &cfg).unwrap();
        let (ab, bc, ac) = (d(0, 1), d(1, 2), d(0, 2));
        prop_assert_eq!(ab.value.to_bits(), d(1, 0).value.to_bits());
        prop_assert!(ac.value <= ab.value + bc.value + 3.0 * cfg.tol, "{} > {} + {}", ac.value, ab.value, bc.value);
    }

    #[test]
    fn witnesses_are_feasible(seed in any::<u64>(), matrix in any::<bool>()) {
        let mut r = rng(seed);
        let l = if matrix { m2_default() } else { euclidean_space(&mut r, 5).1 };
        let cfg = SolverConfig::default();
        let mu = sampling::state(&mut r, l.algebra());
        let nu = sampling::state(&mut r, l.algebra());
        let res = mk_distance(&l, &mu, &nu, &cfg).unwrap();
        let w = res.witness.expect("finite distances carry a witness");
        prop_assert!(w.is_self_adjoint(1e-12));
        prop_assert!(l.evaluate(&w).unwrap() <= 1.0 + cfg.tol);
        prop_assert!(mu.evaluate(&w).unwrap().norm() <= 1e-10);
        prop_assert!((nu.evaluate(&w).unwrap().norm() - res.lower_bound).abs() <= 1e-9 * (1.0 + res.lower_bound));
        prop_assert!(res.lower_bound <= res.upper_bound + 1e-12);
    }

    #[test]
    fn kantorovich_dual_matches_primal(seed in any::<u64>(), n in 3usize..=8) {
        let mut r = rng(seed);
        let (alg, l) = euclidean_space(&mut r, n);
        let mu = sampling::state::<f64, _>(&mut r, &alg).probabilities();
        let nu = sampling::state::<f64, _>(&mut r, &alg).probabilities();
        let g = kantorovich_duality_gap(l.metric_table().unwrap(), &mu, &nu, &SolverConfig::default()).unwrap();
        prop_assert!(g.gap <= 1e-8, "gap {}", g.gap);
    }

    #[test]
    fn states_are_contractive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = mixed_algebra();
        let mu = sampling::state::<f64, _>(&mut r, &alg);
        let a = sampling::self_adjoint(&mut r, &alg);
        prop_assert!(mu.evaluate(&a).unwrap().norm() <= a.operator_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn hom_composition_matches_sequential_application(seed in any::<u64>()) {
        let mut r = rng(seed);
        let seq = InductiveSequence::<f64>::uhf_like(3, None).unwrap();
        let a = sampling::element(&mut r, seq.stage(1).unwrap().algebra());
        let direct = seq.composite(1, 3).unwrap().apply(&a).unwrap();
        let stepwise = seq.hom(2).unwrap().apply(&seq.hom(1).unwrap().apply(&a).unwrap()).unwrap();
        prop_assert!(direct.max_abs_diff(&stepwise).unwrap() <= 1e-12 * (1.0 + a.operator_norm()));
    }

    #[test]
    fn pushforward_is_affine(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let src = mixed_algebra();
        let tgt = FiniteDimAlgebra::new(vec![3, 5], "M3 + M5").unwrap();
        let u = vec![sampling::unitary(&mut r, 3), sampling::unitary(&mut r, 5)];
        let h = UnitalHom::new(Arc::clone(&src), Arc::clone(&tgt), vec![vec![1, 0], vec![1, 1], vec![0, 1]], Some(u)).unwrap();
        let mu = sampling::state(&mut r, &tgt);
        let nu = sampling::state(&mut r, &tgt);
        let lhs = h.dual_pushforward(&mu.convex_combination(t, &nu).unwrap()).unwrap();
        let rhs = h.dual_pushforward(&mu).unwrap().convex_combination(t, &h.dual_pushforward(&nu).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn commutator_seminorm_satisfies_leibniz(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = InductiveSequence::<f64>::constant_matrix(3, 1, None).unwrap().stage(1).unwrap().seminorm.clone();
        let a = sampling::element(&mut r, l.algebra());
        let b = sampling::element(&mut r, l.algebra());
        let lhs = l.evaluate(&a.mul(&b).unwrap()).unwrap();
        let rhs = a.operator_norm() * l.evaluate(&b).unwrap() + l.evaluate(&a).unwrap() * b.operator_norm();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn seminorms_ignore_scalar_shifts(seed in any::<u64>(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let mut r = rng(seed);
        let alg = FiniteDimAlgebra::commutative(4, "C(Z4)").unwrap();
        let shifts: Vec<_> = (1..4).map(|k| cqms::seminorm::permutation_unitary::<f64>(&(0..4).map(|i| (i + k) % 4).collect::<Vec<_>>())).collect();
        let lengths = vec![1.0, 2.0, 1.0];
        let variants = [
            LipSeminorm::group_action(&alg, shifts, lengths).unwrap(),
            LipSeminorm::on_line(&alg, &[0.0, 0.3, 0.7, 1.0]).unwrap(),
            m2_default(),
        ];
        for l in &variants {
            let a = sampling::element(&mut r, l.algebra());
            let base = l.evaluate(&a).unwrap();
            let shifted = l.evaluate(&a.shift(Complex::new(re, im))).unwrap();
            prop_assert!((base - shifted).abs() <= 1e-12 * (1.0 + base));
        }
    }

    #[test]
    fn towers_agree_with_composite_pullbacks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let seq = InductiveSequence::<f64>::uhf_like(3, None).unwrap();
        let mu = sampling::state(&mut r, seq.stage(3).unwrap().algebra());
        let tower = tower_from_state(&seq, 3, mu.clone()).unwrap();
        prop_assert!(tower.consistency_residual() <= 1e-12);
        for m in 1..3 {
            let direct = seq.composite(m, 3).unwrap().dual_pushforward(&mu).unwrap();
            prop_assert!(tower.state(m).unwrap().max_abs_diff(&direct).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn truncations_are_nested(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let seq = InductiveSequence::<f64>::interval_example(12, 3).unwrap();
        let cfg = SolverConfig::default();
        let t = sample_tower(&seq, &mut r, 12).unwrap();
        let s = sample_tower(&seq, &mut r, 12).unwrap();
        let rho = inductive::product_metric(&seq, &t, &s, 12, &cfg).unwrap();
        let pn = rho.partial_through(n);
        for m in n + 1..=12 {
            let pm = rho.partial_through(m);
            prop_assert!(pn <= pm);
            prop_assert!(pm <= pn + 0.5f64.powi(n as i32));
        }
    }

    #[test]
    fn limit_bounds_are_consistent_and_gauge_invariant(seed in any::<u64>(), shift in -3.0f64..3.0) {
        let mut r = rng(seed);
        let seq = InductiveSequence::<f64>::interval_example(3, 5).unwrap();
        let cfg = SolverConfig::default();
        let towers = (0..12).map(|_| (sample_tower(&seq, &mut r, 3).unwrap(), sample_tower(&seq, &mut r, 3).unwrap())).collect();
        let pairs = inductive::measure_pairs(&seq, towers, 3, &cfg).unwrap();
        let diams = inductive::stage_diameters(&seq, &cfg).unwrap();
        for a in inductive::sample_elements(&seq, &mut r, 1..=3, 3).unwrap() {
            let lower = inductive::limit_seminorm_lower_bound(&a, &pairs).unwrap().value;
            let upper = inductive::limit_upper_bound(&seq, &a, &diams).unwrap();
            prop_assert!(lower <= upper + cfg.tol);
            let moved = inductive::limit_seminorm_lower_bound(&a.shift(Complex::new(shift, 0.0)), &pairs).unwrap().value;
            prop_assert!((moved - lower).abs() <= 1e-12 * (1.0 + lower));
        }
    }

    #[test]
    fn ratio_estimates_scale_with_the_target(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let l = m2_default();
        let psi = UnitalHom::inner(l.algebra(), vec![sampling::unitary(&mut r, 2)]).unwrap();
        let samples: Vec<AlgElement<f64>> = (0..10).map(|_| sampling::element(&mut r, l.algebra())).collect();
        let base = estimate_ratio_constant(&psi, &l, &l, &samples).unwrap();
        let scaled = estimate_ratio_constant(&psi, &l, &l.scaled(c).unwrap(), &samples).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-12 * c * base);
    }

    #[test]
    fn ladder_residuals_are_conjugation_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let seq = InductiveSequence::<f64>::constant_matrix(2, 3, None).unwrap();
        let alg = Arc::clone(seq.stage(1).unwrap().algebra());
        let twists: Vec<UnitalHom<f64>> = (0..3).map(|_| UnitalHom::inner(&alg, vec![sampling::unitary(&mut r, 2)]).unwrap()).collect();
        let base = Ladder::new(seq.clone(), seq.clone(), twists.clone(), None).unwrap().square_residual().unwrap();
        let v = UnitalHom::inner(&alg, vec![sampling::unitary(&mut r, 2)]).unwrap();
        let post: Vec<_> = twists.iter().map(|t| t.compose(&v).unwrap()).collect();
        let moved = Ladder::new(seq.clone(), seq.clone(), post, None).unwrap().square_residual().unwrap();
        prop_assert!((moved - base).abs() <= 1e-10);

        let fixed = vec![twists[0].clone(); 3];
        let pre: Vec<_> = fixed.iter().map(|t| v.compose(t).unwrap()).collect();
        let ladder = Ladder::new(seq.clone(), seq, pre, None).unwrap();
        prop_assert!(ladder.square_residual().unwrap() <= 1e-10);
    }
}
