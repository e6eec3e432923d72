//! Acceptance criteria 1-9. Runs as a plain binary so that one PASS/FAIL
//! line per criterion is always printed; exits nonzero if any fails.

use cqms::inductive::{self, sample_tower};
use cqms::linalg::CMatrix;
use cqms::mk::{self, kantorovich_duality_gap, SolverConfig, SolverMethod};
use cqms::sampling::{self, rng};
use cqms::{AlgElement, AlgState, Complex, DMatrix, FiniteDimAlgebra, InductiveSequence, LipSeminorm};
use cqms_cli::{parse_config, run_job};
use rand::Rng;
use std::panic;
use std::sync::Arc;
use std::time::Instant;

const LIMIT_BOUND: &str = include_str!("../../../configs/verify_prop36.toml");
const SCALED: &str = include_str!("../../../configs/verify_section4_scaled.toml");
const DILATED: &str = include_str!("../../../configs/verify_section4_dilated.toml");
const METRIC_M2: &str = include_str!("../../../configs/metric_m2.toml");

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn random_metric_space<R: Rng>(r: &mut R, n: usize) -> (Arc<FiniteDimAlgebra>, LipSeminorm<f64>) {
    let pts: Vec<[f64; 3]> = (0..n).map(|_| [r.random(), r.random(), r.random()]).collect();
    let d = DMatrix::from_fn(n, n, |i, j| {
        // l1 distances keep the table exactly symmetric and metric
        (0..3).map(|k| (pts[i][k] - pts[j][k]).abs()).sum::<f64>()
    });
    let alg = FiniteDimAlgebra::commutative(n, "X").unwrap();
    let l = LipSeminorm::finite_metric(&alg, d).unwrap();
    (alg, l)
}

fn duality() -> Verdict {
    let start = Instant::now();
    let mut r = rng(101);
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(3..=8);
        let (alg, l) = random_metric_space(&mut r, n);
        let mu = sampling::state::<f64, _>(&mut r, &alg).probabilities();
        let nu = sampling::state::<f64, _>(&mut r, &alg).probabilities();
        let g = kantorovich_duality_gap(l.metric_table().unwrap(), &mu, &nu, &cfg).unwrap();
        worst = worst.max(g.gap);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-8 && secs < 10.0, format!("max |dual - primal| = {worst:e} over 100 spaces in {secs:.2} s"))
}

fn interval_fidelity() -> Verdict {
    let mut worst = 0.0f64;
    let mut sizes = Vec::new();
    let mut r = rng(202);
    for p in [9, 17, 33] {
        let seq = InductiveSequence::<f64>::interval_example(5, p).unwrap();
        sizes.push(format!("{}..{}", p, seq.stage(5).unwrap().algebra().num_blocks()));
        for n in 1..5 {
            let st = seq.stage(n).unwrap();
            let next = seq.stage(n + 1).unwrap();
            let pts = st.points.as_ref().unwrap();
            for _ in 0..100 {
                let knots = r.random_range(1..=8);
                let f = AlgElement::from_function(st.algebra(), &sampling::piecewise_linear(&mut r, pts, knots)).unwrap();
                let before = st.seminorm.evaluate(&f).unwrap();
                let after = next.seminorm.evaluate(&seq.hom(n).unwrap().apply(&f).unwrap()).unwrap();
                worst = worst.max((after - before).abs());
            }
        }
    }
    verdict(
        worst <= 1e-12,
        format!("max |L_(n+1)(phi_n f) - L_n(f)| = {worst:e} (grid sizes {})", sizes.join(", ")),
    )
}

fn limit_bound() -> Verdict {
    let cfg = parse_config(LIMIT_BOUND).unwrap();
    let start = Instant::now();
    let out = run_job(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let enough = cfg.pairs >= 200 && cfg.elements_per_stage >= 20 && cfg.sequence.depth() == 4;
    verdict(
        enough && out.violations == 0 && secs < 60.0,
        format!(
            "{} violations over {} pairs x {} elements per stage, depth {}, {secs:.2} s",
            out.violations,
            cfg.pairs,
            cfg.elements_per_stage,
            cfg.sequence.depth()
        ),
    )
}

fn metric_axioms() -> Verdict {
    let cfg = SolverConfig::default();
    let slack = 3.0 * cfg.tol;
    let mut r = rng(404);
    let mut asym = 0;
    let mut tri = 0;
    let mut worst = f64::NEG_INFINITY;
    let m2 = InductiveSequence::<f64>::constant_matrix(2, 1, None).unwrap().stage(1).unwrap().seminorm.clone();
    for k in 0..200 {
        let n = r.random_range(3..=8);
        let l = if k < 100 { random_metric_space(&mut r, n).1 } else { m2.clone() };
        let s: Vec<AlgState<f64>> = (0..3).map(|_| sampling::state(&mut r, l.algebra())).collect();
        let d = |i: usize, j: usize| mk::mk_distance(&l, &s[i], &s[j], &cfg).unwrap().value;
        let (ab, ba, bc, ac) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        asym += usize::from(ab.to_bits() != ba.to_bits());
        worst = worst.max(ac - ab - bc);
        tri += usize::from(ac > ab + bc + slack);
    }
    let seq = InductiveSequence::<f64>::interval_example(4, 9).unwrap();
    for _ in 0..100 {
        let t: Vec<_> = (0..3).map(|_| sample_tower(&seq, &mut r, 4).unwrap()).collect();
        let rho = |i: usize, j: usize| inductive::product_metric(&seq, &t[i], &t[j], 4, &cfg).unwrap().partial;
        let (ab, ba, bc, ac) = (rho(0, 1), rho(1, 0), rho(1, 2), rho(0, 2));
        asym += usize::from(ab.to_bits() != ba.to_bits());
        worst = worst.max(ac - ab - bc);
        tri += usize::from(ac > ab + bc + slack);
    }
    verdict(
        asym == 0 && tri == 0,
        format!("300 triples: {asym} asymmetric, {tri} triangle violations, worst excess {worst:e}"),
    )
}

fn truncation_tail() -> Verdict {
    let cfg = SolverConfig::default();
    let mut r = rng(505);
    let mut bad = 0;
    let mut checked = 0;
    for seq in [
        InductiveSequence::<f64>::interval_example(12, 5).unwrap(),
        InductiveSequence::<f64>::constant_matrix(2, 12, None).unwrap(),
    ] {
        for _ in 0..25 {
            let t = sample_tower(&seq, &mut r, 12).unwrap();
            let s = sample_tower(&seq, &mut r, 12).unwrap();
            let rho = inductive::product_metric(&seq, &t, &s, 12, &cfg).unwrap();
            for n in 1..12 {
                let pn = rho.partial_through(n);
                for m in n + 1..=12 {
                    let pm = rho.partial_through(m);
                    checked += 1;
                    bad += usize::from(!(pn <= pm && pm <= pn + 0.5f64.powi(n as i32)));
                }
            }
        }
    }
    verdict(bad == 0, format!("{bad} failures over {checked} (pair, N, M) comparisons"))
}

fn isomorphism() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, text) in [("scaled c=3", SCALED), ("dilated 2x", DILATED)] {
        let out = run_job(&parse_config(text).unwrap()).unwrap();
        let count = |dir: &str| out.csv.lines().filter(|l| l.starts_with(dir)).count();
        let (f, b) = (count("forward,"), count("backward,"));
        pass &= out.violations == 0 && f >= 50 && b >= 50;
        parts.push(format!("{name}: {} violations ({f} forward, {b} backward)", out.violations));
        for line in out.summary.lines().filter(|l| l.starts_with("forward:") || l.starts_with("backward:")) {
            parts.push(format!("  {line}"));
        }
    }
    verdict(pass, parts.join("\n    "))
}

fn bloch_state(alg: &Arc<FiniteDimAlgebra>, v: [f64; 3]) -> AlgState<f64> {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let rho = CMatrix::from_row_slice(
        2,
        2,
        &[c((1.0 + v[2]) / 2.0, 0.0), c(v[0] / 2.0, -v[1] / 2.0), c(v[0] / 2.0, v[1] / 2.0), c((1.0 - v[2]) / 2.0, 0.0)],
    );
    AlgState::from_blocks(alg, vec![rho]).unwrap()
}

fn oracle_equivalence() -> Verdict {
    let alg = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
    let c = |re: f64| Complex::new(re, 0.0);
    let sigma_x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let l = LipSeminorm::commutator(&alg, vec![sigma_x]).unwrap();
    let base = SolverConfig::default();
    let sg = base.clone().with_method(SolverMethod::Supergradient);
    let grid = base.with_method(SolverMethod::BruteForceGrid);
    let mut r = rng(707);
    let (mut bad, mut worst_oracle, mut worst_err) = (0, 0.0f64, 0.0f64);
    for _ in 0..24 {
        // shared sigma_x component keeps the distance finite
        let x: f64 = r.random_range(-0.8..0.8);
        let rad = (1.0 - x * x).sqrt();
        let mut yz = || {
            let (t, s): (f64, f64) = (r.random_range(0.0..std::f64::consts::TAU), r.random::<f64>().sqrt());
            [rad * s * t.cos(), rad * s * t.sin()]
        };
        let (p, q) = (yz(), yz());
        let mu = bloch_state(&alg, [x, p[0], p[1]]);
        let nu = bloch_state(&alg, [x, q[0], q[1]]);
        let a = mk::mk_distance(&l, &mu, &nu, &sg).unwrap();
        let g = mk::mk_distance(&l, &mu, &nu, &grid).unwrap();
        let err = g.upper_bound - g.lower_bound;
        worst_err = worst_err.max(err);
        bad += usize::from((a.value - g.value).abs() > 2.0 * err);
        // L(y sy + z sz) = 2|(y, z)| and (mu - nu)(a) is linear in (y, z)
        let exact = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() / 2.0;
        worst_oracle = worst_oracle.max((a.value - exact).abs());
    }
    verdict(
        bad == 0 && worst_oracle <= 1e-6,
        format!("24 pairs: {bad} outside 2x grid error (max grid error {worst_err:e}); max |sg - closed form| = {worst_oracle:e}"),
    )
}

fn seminorm_axioms() -> Verdict {
    let mut r = rng(808);
    let (_, metric) = random_metric_space(&mut r, 6);
    let commutator = InductiveSequence::<f64>::constant_matrix(3, 1, None).unwrap().stage(1).unwrap().seminorm.clone();
    let z5 = FiniteDimAlgebra::commutative(5, "C(Z5)").unwrap();
    let shifts = (1..5)
        .map(|k| cqms::seminorm::permutation_unitary::<f64>(&(0..5).map(|i| (i + k) % 5).collect::<Vec<_>>()))
        .collect();
    let group = LipSeminorm::group_action(&z5, shifts, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for l in [&metric, &commutator, &group] {
        let samples: Vec<_> = (0..50).map(|_| sampling::element(&mut r, l.algebra())).collect();
        let v = l.check_axioms(&samples).unwrap().max_violation();
        pass &= v <= 1e-10;
        parts.push(format!("{} {v:e}", l.kind_name()));
    }
    verdict(pass, format!("max violation per variant: {}", parts.join(", ")))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (name, text) in [("verify_prop36", LIMIT_BOUND), ("verify_section4", SCALED), ("metric", METRIC_M2)] {
        let cfg = parse_config(text).unwrap();
        let mut bytes = Vec::new();
        for run in 0..2 {
            let out = run_job(&cfg).unwrap();
            let path = dir.path().join(format!("{name}-{run}"));
            out.write(&path).unwrap();
            bytes.push(std::fs::read(path.join(format!("{name}.csv"))).unwrap());
        }
        if bytes[0] != bytes[1] {
            differing.push(name);
        }
    }
    verdict(differing.is_empty(), format!("3 jobs run twice; differing CSVs: {differing:?}"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("Kantorovich dual/primal agreement", duality),
        ("interval sequence Lipschitz preservation", interval_fidelity),
        ("limit seminorm upper bound", limit_bound),
        ("metric axioms for stage and truncated metrics", metric_axioms),
        ("truncation tail", truncation_tail),
        ("Lipschitz isomorphism verifiers", isomorphism),
        ("supergradient vs grid oracle on M2", oracle_equivalence),
        ("seminorm axioms", seminorm_axioms),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += usize::from(!v.pass);
        println!("criterion {} {}: {}\n    {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
