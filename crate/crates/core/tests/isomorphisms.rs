//! Lipschitz-isomorphism checks on ladders with known constants.

use cqms::inductive::{self, sample_tower, TowerPair};
use cqms::ladder::{self, compose_constant_sequences, verify_iso_bounds, verify_universal_bound, Provenance, SideData};
use cqms::mk::DiameterResult;
use cqms::sampling::{self, rng};
use cqms::{AlgElement, BoundSequences, InductiveSequence, Ladder, LimitElement, SolverConfig, UnitalHom};

struct Side {
    pairs: Vec<TowerPair<f64>>,
    diameters: Vec<DiameterResult<f64>>,
}

impl Side {
    fn measure(seq: &InductiveSequence<f64>, count: usize, seed: u64) -> Self {
        let cfg = SolverConfig::default();
        let mut r = rng(seed);
        let n = seq.depth();
        let towers = (0..count)
            .map(|_| (sample_tower(seq, &mut r, n).unwrap(), sample_tower(seq, &mut r, n).unwrap()))
            .collect();
        Side {
            pairs: inductive::measure_pairs(seq, towers, n, &cfg).unwrap(),
            diameters: inductive::stage_diameters(seq, &cfg).unwrap(),
        }
    }

    fn data(&self) -> SideData<'_, f64> {
        SideData {
            pairs: &self.pairs,
            diameters: &self.diameters,
        }
    }
}

fn run_both_ways(l: &Ladder<f64>, forward: f64, backward: f64) -> ladder::IsoReport<f64> {
    let a = Side::measure(&l.seq_a, 40, 1);
    let b = Side::measure(&l.seq_b, 40, 2);
    let mut r = rng(3);
    let depth = l.depth();
    let ea = inductive::sample_elements(&l.seq_a, &mut r, 1..=depth, 20).unwrap();
    let eb = inductive::sample_elements(&l.seq_b, &mut r, 1..=depth - 1, 25).unwrap();
    verify_iso_bounds(l, forward, backward, Provenance::Analytic, &ea, &eb, &a.data(), &b.data(), 1e-7).unwrap()
}

#[test]
fn scaled_ladder_has_no_violations() {
    let seq = InductiveSequence::interval_example(3, 9).unwrap();
    let report = run_both_ways(&Ladder::scaled(seq, 3.0).unwrap(), 3.0, 1.0 / 3.0);
    assert!(report.forward.rows.len() >= 50 && report.backward.rows.len() >= 50);
    assert_eq!(report.violations(), 0);
}

#[test]
fn dilated_ladder_has_no_violations() {
    let seq = InductiveSequence::interval_example(3, 9).unwrap();
    let report = run_both_ways(&Ladder::dilated(seq, 2.0).unwrap(), 0.5, 2.0);
    assert_eq!(report.violations(), 0);
}

#[test]
fn identity_ladder_leaves_slack_of_two() {
    let seq = InductiveSequence::interval_example(3, 5).unwrap();
    let report = run_both_ways(&Ladder::identity(seq).unwrap(), 1.0, 1.0);
    assert_eq!(report.violations(), 0);
    for r in report.forward.rows.iter().chain(&report.backward.rows) {
        assert!(r.lhs_lower * 2.0 <= r.rhs + 1e-12, "{r:?}");
    }
}

#[test]
fn conjugated_dirac_sequences_are_isomorphic() {
    let mut r = rng(9);
    let u = sampling::unitary::<f64, _>(&mut r, 2);
    let a = InductiveSequence::constant_matrix(2, 3, None).unwrap();
    let diracs: Vec<_> = match a.stage(1).unwrap().seminorm.kind() {
        cqms::SeminormKind::Commutator { diracs } => diracs.iter().map(|d| &u * d * u.adjoint()).collect(),
        _ => unreachable!(),
    };
    let b = InductiveSequence::constant_matrix(2, 3, Some(diracs)).unwrap();
    let alg = a.stage(1).unwrap().algebra().clone();
    let psi = UnitalHom::inner(&alg, vec![u]).unwrap();
    let l = Ladder::from_stagewise_isomorphisms(a, b, vec![psi; 3]).unwrap();
    l.check(1e-10).unwrap();
    let sampled = ladder::sample_bounds(&l, 20, 4).unwrap();
    for c in sampled.lambda.unwrap().iter().chain(&sampled.gamma.unwrap()) {
        assert!((c - 1.0).abs() < 1e-10);
    }
    assert_eq!(run_both_ways(&l, 1.0, 1.0).violations(), 0);
}

#[test]
fn identity_element_has_zero_on_both_sides() {
    let seq = InductiveSequence::interval_example(2, 5).unwrap();
    let l = Ladder::identity(seq.clone()).unwrap();
    let side = Side::measure(&seq, 10, 0);
    let one = LimitElement::new(&seq, 1, AlgElement::identity(seq.stage(1).unwrap().algebra())).unwrap();
    let rep = verify_universal_bound(&l, &[1.0], Provenance::Analytic, &[one], &side.data(), &side.diameters, 1e-9).unwrap();
    assert!(rep.rows[0].lhs_lower <= 1e-12);
    assert_eq!(rep.rows[0].rhs, 0.0);
    assert_eq!(rep.violations(), 0);
}

#[test]
fn missing_diagonals_are_refused() {
    let seq = InductiveSequence::<f64>::two_point(2).unwrap();
    let ids: Vec<_> = seq.stages().iter().map(|s| UnitalHom::identity(s.algebra())).collect();
    let l = Ladder::new(seq.clone(), seq, ids, None).unwrap();
    let err = verify_iso_bounds(&l, 1.0, 1.0, Provenance::Analytic, &[], &[], &SideData { pairs: &[], diameters: &[] }, &SideData { pairs: &[], diameters: &[] }, 1e-9);
    assert!(matches!(err, Err(cqms::CqmsError::InconsistentLadder(_))));
}

#[test]
fn composite_constants_feed_the_verifier() {
    let seq = InductiveSequence::interval_example(3, 5).unwrap();
    let l = Ladder::scaled(seq, 3.0).unwrap();
    let c = compose_constant_sequences(&BoundSequences::analytic(vec![3.0; 3], vec![1.0; 3])).unwrap();
    let side = Side::measure(&l.seq_b, 20, 6);
    let a_diams = inductive::stage_diameters(&l.seq_a, &SolverConfig::default()).unwrap();
    let elems = inductive::sample_elements(&l.seq_a, &mut rng(7), 1..=3, 5).unwrap();
    let rep = verify_universal_bound(&l, c.lambda_gamma.as_ref().unwrap(), Provenance::Analytic, &elems, &side.data(), &a_diams, 1e-7).unwrap();
    assert_eq!(rep.constant, 3.0);
    assert_eq!(rep.violations(), 0);
}
