//! Job execution. Each job produces one CSV report, one two-column plot
//! file and a short summary; nothing touches the disk until
//! [`JobOutcome::write`].

use crate::config::{ConstantSource, JobConfig, JobKind};
use crate::report::{num, Table};
use cqms::inductive::{self, sample_tower, StateTower, TowerPair};
use cqms::ladder::{self, Provenance, SideData};
use cqms::mk::{self, DiameterResult, SolverConfig, SolverMethod};
use cqms::sampling::{self, rng};
use cqms::{AlgElement, AlgState, InductiveSequence};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error(transparent)]
    Library(#[from] cqms::CqmsError),
    #[error("cannot write outputs: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobOutcome {
    pub kind: JobKind,
    pub csv: String,
    pub plot: String,
    pub summary: String,
    pub rows: usize,
    pub violations: usize,
    pub warnings: Vec<String>,
}

impl JobOutcome {
    /// Writes `<job>.csv`, `<job>.tsv` and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.kind)), &self.csv)?;
        std::fs::write(dir.join(format!("{}.tsv", self.kind)), &self.plot)?;
        std::fs::write(dir.join("summary.txt"), &self.summary)
    }

    /// 0 without violations (and, under `strict`, without warnings).
    pub fn exit_code(&self, strict: bool) -> i32 {
        i32::from(self.violations > 0 || (strict && !self.warnings.is_empty()))
    }
}

struct Draft {
    table: Table,
    plot: Vec<(f64, f64)>,
    plot_labels: (&'static str, &'static str),
    notes: Vec<String>,
    violations: usize,
    warnings: Vec<String>,
}

impl Draft {
    fn new(header: &[&str], plot_labels: (&'static str, &'static str)) -> Self {
        Self {
            table: Table::new(header),
            plot: Vec::new(),
            plot_labels,
            notes: Vec::new(),
            violations: 0,
            warnings: Vec::new(),
        }
    }

    fn status(&mut self, ok: bool) -> &'static str {
        if ok {
            "PASS"
        } else {
            self.violations += 1;
            "FAIL"
        }
    }
}

pub fn run_job(cfg: &JobConfig) -> Result<JobOutcome, JobError> {
    let seq = cfg.sequence.build()?;
    let solver = SolverConfig { seed: cfg.seed, ..cfg.solver.clone() };
    let draft = match cfg.kind {
        JobKind::Validate => validate(cfg, &seq)?,
        JobKind::Metric => metric(cfg, &seq, &solver)?,
        JobKind::DistanceMatrix => distance_matrix(cfg, &seq, &solver)?,
        JobKind::LimitSeminorm => limit_seminorm(cfg, &seq, &solver)?,
        JobKind::VerifyLimitBound => verify_limit_bound(cfg, &seq, &solver)?,
        JobKind::VerifyIsomorphism => verify_isomorphism(cfg, seq.clone(), &solver)?,
        JobKind::ProbeTotalBoundedness => probe(cfg, &seq, &solver)?,
    };
    let mut summary = String::new();
    let _ = writeln!(summary, "job: {}", cfg.kind);
    let _ = writeln!(summary, "sequence: {} (depth {})", seq.name(), seq.depth());
    let _ = writeln!(summary, "seed: {}", cfg.seed);
    let _ = writeln!(summary, "solver: {} (tol {:e})", solver.method, solver.tol);
    let _ = writeln!(summary, "rows: {}", draft.table.len());
    let _ = writeln!(summary, "violations: {}", draft.violations);
    for n in &draft.notes {
        let _ = writeln!(summary, "{n}");
    }
    for w in &draft.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    let _ = writeln!(summary, "status: {}", if draft.violations == 0 { "PASS" } else { "FAIL" });
    let mut plot = format!("{}\t{}\n", draft.plot_labels.0, draft.plot_labels.1);
    for (x, y) in &draft.plot {
        let _ = writeln!(plot, "{}\t{}", num(*x), num(*y));
    }
    Ok(JobOutcome {
        kind: cfg.kind,
        rows: draft.table.len(),
        csv: draft.table.finish(),
        plot,
        summary,
        violations: draft.violations,
        warnings: draft.warnings,
    })
}

fn validate(cfg: &JobConfig, seq: &InductiveSequence<f64>) -> Result<Draft, JobError> {
    let mut d = Draft::new(&["check", "stage", "value", "status", "detail"], ("stage", "axiom_violation"));
    let report = inductive::validate_sequence(seq, cfg.samples, cfg.seed)?;
    for issue in &report.issues {
        let s = d.status(false);
        d.table.row(["structure", "", "", s, issue]);
    }
    if let Some(err) = report.preservation_error {
        let s = d.status(err <= 1e-12);
        let detail = format!("{} functions", report.functions_checked);
        d.table.row(["lipschitz_preservation", "all", &num(err), s, &detail]);
        d.notes.push(format!("lipschitz preservation error: {err:e}"));
    }
    let mut r = rng(cfg.seed ^ 0x5eed);
    for (k, st) in seq.stages().iter().enumerate() {
        let samples: Vec<AlgElement<f64>> = (0..50).map(|_| sampling::element(&mut r, st.algebra())).collect();
        let ax = st.seminorm.check_axioms(&samples)?.max_violation();
        let s = d.status(ax <= 1e-10);
        d.table.row(["seminorm_axioms", &(k + 1).to_string(), &num(ax), s, st.seminorm.kind_name()]);
        d.plot.push(((k + 1) as f64, ax));
        if !st.seminorm.kernel_is_scalars() {
            d.warnings.push(format!("stage {}: kernel is larger than the scalars", k + 1));
        }
    }
    Ok(d)
}

fn stage_states(seq: &InductiveSequence<f64>, stage: usize, count: usize, seed: u64) -> cqms::Result<Vec<AlgState<f64>>> {
    let alg = seq.stage(stage)?.algebra();
    let mut r = rng(seed);
    Ok((0..count).map(|_| sampling::state(&mut r, alg)).collect())
}

fn metric(cfg: &JobConfig, seq: &InductiveSequence<f64>, solver: &SolverConfig<f64>) -> Result<Draft, JobError> {
    let mut d = Draft::new(
        &["pair_id", "method", "value", "lower", "upper", "converged", "status"],
        ("pair_id", "value"),
    );
    let l = &seq.stage(cfg.stage)?.seminorm;
    let states = stage_states(seq, cfg.stage, 2 * cfg.states, cfg.seed)?;
    let metric_case = l.metric_table().is_some();
    let grid_ok = !metric_case && l.geometry().reduced_dim() <= 4;
    let methods: Vec<SolverMethod> = match (cfg.solver.method, metric_case) {
        (SolverMethod::Auto, true) => vec![SolverMethod::DualLp, SolverMethod::PrimalTransport],
        (SolverMethod::Auto, false) if grid_ok => vec![SolverMethod::Supergradient, SolverMethod::BruteForceGrid],
        (SolverMethod::Auto, false) => vec![SolverMethod::Supergradient],
        (m, _) => vec![m],
    };
    let mut worst_gap = 0.0f64;
    for (p, pair) in states.chunks(2).enumerate() {
        let mut values = Vec::new();
        for &m in &methods {
            let res = mk::mk_distance(l, &pair[0], &pair[1], &solver.clone().with_method(m))?;
            let ok = res.lower_bound <= res.upper_bound + solver.tol * (1.0 + res.upper_bound.abs());
            let s = d.status(ok);
            if !res.converged {
                d.warnings.push(format!("pair {p}: {m} did not converge"));
            }
            d.table.row([
                &p.to_string(),
                m.name(),
                &num(res.value),
                &num(res.lower_bound),
                &num(res.upper_bound),
                &res.converged.to_string(),
                s,
            ]);
            values.push(res);
        }
        if values.len() == 2 && !values[0].unbounded {
            let diff = (values[0].value - values[1].value).abs();
            let allowed = if metric_case { 1e-8 } else { 2.0 * values[1].gap() + solver.tol };
            worst_gap = worst_gap.max(diff);
            let s = d.status(diff <= allowed);
            d.table.row([&p.to_string(), "agreement", &num(diff), &num(0.0), &num(allowed), "true", s]);
        }
        d.plot.push((p as f64, values[0].value));
    }
    if methods.len() == 2 {
        d.notes.push(format!("largest disagreement between {} and {}: {worst_gap:e}", methods[0], methods[1]));
    }
    Ok(d)
}

fn distance_matrix(cfg: &JobConfig, seq: &InductiveSequence<f64>, solver: &SolverConfig<f64>) -> Result<Draft, JobError> {
    let mut d = Draft::new(&["i", "j", "value", "lower", "upper"], ("j", "distance_to_state_0"));
    let l = &seq.stage(cfg.stage)?.seminorm;
    let states = stage_states(seq, cfg.stage, cfg.states, cfg.seed)?;
    let m = mk::distance_matrix(l, &states, solver)?;
    let n = states.len();
    for (i, row) in m.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            d.table.row([&i.to_string(), &j.to_string(), &num(r.value), &num(r.lower_bound), &num(r.upper_bound)]);
        }
    }
    let mut bad = 0;
    for i in 0..n {
        for j in 0..n {
            if m[i][j].value.to_bits() != m[j][i].value.to_bits() {
                bad += 1;
            }
            for k in 0..n {
                if m[i][k].value > m[i][j].value + m[j][k].value + 3.0 * solver.tol {
                    bad += 1;
                }
            }
        }
    }
    d.violations += bad;
    d.notes.push(format!("metric axiom violations: {bad}"));
    d.plot = (0..n).map(|j| (j as f64, m[0][j].value)).collect();
    Ok(d)
}

fn tower_pairs(
    seq: &InductiveSequence<f64>,
    count: usize,
    n: usize,
    seed: u64,
    solver: &SolverConfig<f64>,
) -> cqms::Result<Vec<TowerPair<f64>>> {
    let mut r = rng(seed);
    let towers: Vec<(StateTower<f64>, StateTower<f64>)> = (0..count)
        .map(|_| Ok((sample_tower(seq, &mut r, n)?, sample_tower(seq, &mut r, n)?)))
        .collect::<cqms::Result<_>>()?;
    inductive::measure_pairs(seq, towers, n, solver)
}

struct Bounds {
    rows: Vec<(usize, usize, f64, f64, usize)>,
}

fn limit_bounds(cfg: &JobConfig, seq: &InductiveSequence<f64>, solver: &SolverConfig<f64>) -> cqms::Result<(Bounds, Vec<DiameterResult<f64>>)> {
    let n = cfg.truncation;
    let pairs = tower_pairs(seq, cfg.pairs, n, cfg.seed, solver)?;
    let diameters = inductive::stage_diameters(seq, solver)?;
    let mut r = rng(cfg.seed.wrapping_add(1));
    let elements = inductive::sample_elements(seq, &mut r, 1..=n, cfg.elements_per_stage)?;
    let mut rows = Vec::with_capacity(elements.len());
    let mut counters = vec![0usize; n + 1];
    for a in &elements {
        let lb = inductive::limit_seminorm_lower_bound(a, &pairs)?;
        let ub = inductive::limit_upper_bound(seq, a, &diameters)?;
        let id = counters[a.stage];
        counters[a.stage] += 1;
        rows.push((a.stage, id, lb.value, ub, lb.skipped));
    }
    Ok((Bounds { rows }, diameters))
}

fn limit_seminorm(cfg: &JobConfig, seq: &InductiveSequence<f64>, solver: &SolverConfig<f64>) -> Result<Draft, JobError> {
    let mut d = Draft::new(&["stage", "element_id", "lower", "upper", "skipped_pairs", "status"], ("stage", "max_lower_over_upper"));
    let (bounds, _) = limit_bounds(cfg, seq, solver)?;
    let mut best = vec![0.0f64; cfg.truncation + 1];
    for &(stage, id, lo, hi, skipped) in &bounds.rows {
        let s = d.status(lo <= hi + solver.tol * (1.0 + hi));
        if hi.is_finite() && hi > 0.0 {
            best[stage] = best[stage].max(lo / hi);
        }
        d.table.row([&stage.to_string(), &id.to_string(), &num(lo), &num(hi), &skipped.to_string(), s]);
    }
    d.plot = (1..=cfg.truncation).map(|n| (n as f64, best[n])).collect();
    Ok(d)
}

fn verify_limit_bound(cfg: &JobConfig, seq: &InductiveSequence<f64>, solver: &SolverConfig<f64>) -> Result<Draft, JobError> {
    let mut d = Draft::new(&["stage", "element_id", "lhs_lower", "rhs", "margin", "status"], ("stage", "min_margin"));
    let (bounds, diameters) = limit_bounds(cfg, seq, solver)?;
    if diameters.iter().any(|x| x.infinite) {
        d.warnings.push("a stage has infinite diameter; its bound is vacuous".into());
    }
    let mut min_margin = vec![f64::INFINITY; cfg.truncation + 1];
    for &(stage, id, lhs, rhs, _) in &bounds.rows {
        let margin = rhs - lhs;
        min_margin[stage] = min_margin[stage].min(margin);
        let s = d.status(lhs <= rhs + solver.tol * (1.0 + rhs));
        d.table.row([&stage.to_string(), &id.to_string(), &num(lhs), &num(rhs), &num(margin), s]);
    }
    d.notes.push(format!("pairs: {}, elements per stage: {}", cfg.pairs, cfg.elements_per_stage));
    d.plot = (1..=cfg.truncation).map(|n| (n as f64, min_margin[n])).collect();
    Ok(d)
}

fn verify_isomorphism(cfg: &JobConfig, seq: InductiveSequence<f64>, solver: &SolverConfig<f64>) -> Result<Draft, JobError> {
    let spec = cfg.ladder.as_ref().expect("validated configs carry a ladder");
    let l = spec.build(seq)?;
    let depth = l.depth();
    let mut d = Draft::new(
        &["direction", "stage", "element_id", "lhs_lower", "rhs", "margin", "status"],
        ("stage", "tightest_ratio"),
    );
    let (forward, backward, provenance) = match &spec.constants {
        ConstantSource::Derived => {
            let (f, b) = spec.derived_constants();
            (f, b, Provenance::Analytic)
        }
        ConstantSource::Supplied { lambda, gamma } => (
            lambda.iter().copied().fold(0.0, f64::max),
            gamma.iter().copied().fold(0.0, f64::max),
            Provenance::Analytic,
        ),
        ConstantSource::Sampled => {
            let b = ladder::sample_bounds(&l, cfg.samples, cfg.seed)?;
            let sup = |v: Option<Vec<f64>>| v.unwrap_or_default().into_iter().fold(0.0, f64::max);
            d.warnings.push("sampled constants are lower bounds; passing checks are necessary, not sufficient".into());
            (sup(b.lambda), sup(b.gamma), Provenance::Sampled)
        }
    };
    let pairs_a = tower_pairs(&l.seq_a, cfg.pairs, depth, cfg.seed, solver)?;
    let pairs_b = tower_pairs(&l.seq_b, cfg.pairs, depth, cfg.seed.wrapping_add(7), solver)?;
    let diam_a = inductive::stage_diameters(&l.seq_a, solver)?;
    let diam_b = inductive::stage_diameters(&l.seq_b, solver)?;
    let mut r = rng(cfg.seed.wrapping_add(1));
    let elems_a = inductive::sample_elements(&l.seq_a, &mut r, 1..=depth, cfg.elements_per_stage)?;
    let elems_b = if depth > 1 {
        inductive::sample_elements(&l.seq_b, &mut r, 1..=depth - 1, cfg.elements_per_stage)?
    } else {
        Vec::new()
    };
    let report = ladder::verify_iso_bounds(
        &l,
        forward,
        backward,
        provenance,
        &elems_a,
        &elems_b,
        &SideData { pairs: &pairs_a, diameters: &diam_a },
        &SideData { pairs: &pairs_b, diameters: &diam_b },
        solver.tol,
    )?;
    for side in [&report.forward, &report.backward] {
        let mut tight = vec![0.0f64; depth + 1];
        for row in &side.rows {
            let s = d.status(!row.violated);
            if row.rhs > 0.0 && row.rhs.is_finite() {
                tight[row.stage] = tight[row.stage].max(row.lhs_lower / row.rhs);
            }
            d.table.row([
                &row.direction.to_string(),
                &row.stage.to_string(),
                &row.element_id.to_string(),
                &num(row.lhs_lower),
                &num(row.rhs),
                &num(row.margin),
                s,
            ]);
        }
        let min_margin = side.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let dir = side.rows.first().map_or("none".to_string(), |r| r.direction.to_string());
        d.notes.push(format!(
            "{dir}: constant {} ({}), tightest lhs/rhs {:.6}, smallest margin {min_margin:e}",
            side.constant,
            side.provenance,
            side.tightest_ratio()
        ));
        if dir == "forward" {
            d.plot = (1..=depth).map(|n| (n as f64, tight[n])).collect();
        }
    }
    Ok(d)
}

fn probe(cfg: &JobConfig, seq: &InductiveSequence<f64>, solver: &SolverConfig<f64>) -> Result<Draft, JobError> {
    let mut d = Draft::new(&["epsilon", "samples", "net_size", "max_norm"], ("epsilon", "net_size"));
    let mut r = rng(cfg.seed);
    let mu = sample_tower(seq, &mut r, cfg.truncation)?;
    let reports = inductive::total_boundedness_probe(seq, &mu, &cfg.epsilons, cfg.samples, solver)?;
    for c in &reports {
        d.table.row([&num(c.epsilon), &c.samples.to_string(), &c.net_size.to_string(), &num(c.max_norm)]);
        d.plot.push((c.epsilon, c.net_size as f64));
    }
    Ok(d)
}
