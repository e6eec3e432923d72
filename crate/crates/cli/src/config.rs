//! Job configuration: TOML text with `[job]`, `[sequence]`, `[seminorm]`,
//! `[ladder]` and `[solver]` sections. Unknown keys are rejected and every
//! problem is reported with the line it comes from.

use cqms::linalg::CMatrix;
use cqms::mk::{SolverConfig, SolverMethod};
use cqms::{Complex, DMatrix, FiniteDimAlgebra, InductiveSequence, Ladder, LipSeminorm};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JobKind {
    Validate,
    Metric,
    DistanceMatrix,
    LimitSeminorm,
    VerifyLimitBound,
    VerifyIsomorphism,
    ProbeTotalBoundedness,
}

impl JobKind {
    pub const ALL: [JobKind; 7] = [
        JobKind::Validate,
        JobKind::Metric,
        JobKind::DistanceMatrix,
        JobKind::LimitSeminorm,
        JobKind::VerifyLimitBound,
        JobKind::VerifyIsomorphism,
        JobKind::ProbeTotalBoundedness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JobKind::Validate => "validate",
            JobKind::Metric => "metric",
            JobKind::DistanceMatrix => "distance_matrix",
            JobKind::LimitSeminorm => "limit_seminorm",
            JobKind::VerifyLimitBound => "verify_prop36",
            JobKind::VerifyIsomorphism => "verify_section4",
            JobKind::ProbeTotalBoundedness => "probe_total_boundedness",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Seminorm given inline; the sequence repeats it with identity maps.
#[derive(Clone, Debug, PartialEq)]
pub enum SeminormSpec {
    Metric(Vec<Vec<f64>>),
    /// Dirac operators on the direct sum of `blocks`, entries row-major.
    Commutator {
        blocks: Vec<usize>,
        diracs: Vec<Vec<Vec<[f64; 2]>>>,
    },
    /// Cyclic shifts of `lengths.len() + 1` points; `lengths[k]` belongs to
    /// the shift by `k + 1`.
    CyclicGroup { lengths: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceSpec {
    IntervalExample { depth: usize, points_per_stage: usize },
    TwoPoint { depth: usize },
    ConstantMatrix { k: usize, depth: usize },
    UhfLike { depth: usize },
    Inline { depth: usize, seminorm: SeminormSpec },
}

impl SequenceSpec {
    pub fn depth(&self) -> usize {
        match *self {
            SequenceSpec::IntervalExample { depth, .. }
            | SequenceSpec::TwoPoint { depth }
            | SequenceSpec::ConstantMatrix { depth, .. }
            | SequenceSpec::UhfLike { depth }
            | SequenceSpec::Inline { depth, .. } => depth,
        }
    }

    pub fn build(&self) -> cqms::Result<InductiveSequence<f64>> {
        match self {
            SequenceSpec::IntervalExample { depth, points_per_stage } => {
                InductiveSequence::interval_example(*depth, *points_per_stage)
            }
            SequenceSpec::TwoPoint { depth } => InductiveSequence::two_point(*depth),
            SequenceSpec::ConstantMatrix { k, depth } => InductiveSequence::constant_matrix(*k, *depth, None),
            SequenceSpec::UhfLike { depth } => InductiveSequence::uhf_like(*depth, None),
            SequenceSpec::Inline { depth, seminorm } => {
                InductiveSequence::constant("inline", build_seminorm(seminorm)?, *depth)
            }
        }
    }
}

fn build_seminorm(spec: &SeminormSpec) -> cqms::Result<LipSeminorm<f64>> {
    match spec {
        SeminormSpec::Metric(rows) => {
            let d = square_table(rows)?;
            let alg = FiniteDimAlgebra::commutative(rows.len(), "C(X)")?;
            LipSeminorm::finite_metric(&alg, d)
        }
        SeminormSpec::Commutator { blocks, diracs } => {
            let alg = FiniteDimAlgebra::new(blocks.clone(), "A")?;
            let n = alg.rep_dim();
            let mats = diracs
                .iter()
                .enumerate()
                .map(|(k, rows)| {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(cqms::CqmsError::Shape(format!("Dirac operator {k} must be {n}x{n}")));
                    }
                    Ok(CMatrix::from_fn(n, n, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
                })
                .collect::<cqms::Result<Vec<_>>>()?;
            LipSeminorm::commutator(&alg, mats)
        }
        SeminormSpec::CyclicGroup { lengths } => {
            let n = lengths.len() + 1;
            let alg = FiniteDimAlgebra::commutative(n, format!("C(Z{n})"))?;
            let actions = (1..n)
                .map(|k| cqms::seminorm::permutation_unitary((0..n).map(|i| (i + k) % n).collect::<Vec<_>>().as_slice()))
                .collect();
            LipSeminorm::group_action(&alg, actions, lengths.clone())
        }
    }
}

fn square_table(rows: &[Vec<f64>]) -> cqms::Result<DMatrix<f64>> {
    let n = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(cqms::CqmsError::Shape(format!(
                "metric table row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LadderKind {
    Identity,
    /// Target seminorms multiplied by the factor.
    Scaled(f64),
    /// Target distances multiplied by the factor.
    Dilated(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstantSource {
    /// Known constants of the ladder kind.
    Derived,
    Sampled,
    Supplied { lambda: Vec<f64>, gamma: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderSpec {
    pub kind: LadderKind,
    pub constants: ConstantSource,
}

impl LadderSpec {
    pub fn build(&self, seq: InductiveSequence<f64>) -> cqms::Result<Ladder<f64>> {
        match self.kind {
            LadderKind::Identity => Ladder::identity(seq),
            LadderKind::Scaled(c) => Ladder::scaled(seq, c),
            LadderKind::Dilated(c) => Ladder::dilated(seq, c),
        }
    }

    /// Forward and backward constants implied by the construction.
    pub fn derived_constants(&self) -> (f64, f64) {
        match self.kind {
            LadderKind::Identity => (1.0, 1.0),
            LadderKind::Scaled(c) => (c, 1.0 / c),
            LadderKind::Dilated(c) => (1.0 / c, c),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub kind: JobKind,
    pub seed: u64,
    /// Truncation level of the product metric.
    pub truncation: usize,
    /// Tower pairs (or state pairs) to sample.
    pub pairs: usize,
    pub elements_per_stage: usize,
    /// States for metric and distance-matrix jobs.
    pub states: usize,
    /// Stage used by metric and distance-matrix jobs.
    pub stage: usize,
    /// Random samples for validation and covering probes.
    pub samples: usize,
    pub epsilons: Vec<f64>,
    pub output: Option<PathBuf>,
    pub sequence: SequenceSpec,
    pub ladder: Option<LadderSpec>,
    pub solver: SolverConfig<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    /// 1-based; 0 when no single line is to blame.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    job: RawJob,
    sequence: RawSequence,
    #[serde(skip_serializing_if = "Option::is_none")]
    seminorm: Option<RawSeminorm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: Option<RawLadder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<RawSeed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elements_per_stage: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilons: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

// TOML integers are signed 64-bit, so seeds above i64::MAX are written as decimal strings.
#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum RawSeed {
    Int(i64),
    Text(String),
}

impl RawSeed {
    fn from_u64(seed: u64) -> Self {
        i64::try_from(seed).map_or_else(|_| RawSeed::Text(seed.to_string()), RawSeed::Int)
    }

    fn to_u64(&self) -> Option<u64> {
        match self {
            RawSeed::Int(v) => u64::try_from(*v).ok(),
            RawSeed::Text(t) => t.parse().ok(),
        }
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    builtin: String,
    depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    points_per_stage: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSeminorm {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diracs: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lengths: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawLadder {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constants: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter_samples: Option<usize>,
}

/// Locates `key` inside `[section]`, falling back to the section header.
struct Lines<'a> {
    text: &'a str,
}

impl Lines<'_> {
    fn find(&self, section: &str, key: &str) -> usize {
        let mut current = String::new();
        let mut header = 0;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
                if current == section {
                    header = i + 1;
                }
                continue;
            }
            if current == section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return i + 1;
                    }
                }
            }
        }
        header
    }

    fn of_offset(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }
}

struct Issues<'a> {
    lines: Lines<'a>,
    list: Vec<ConfigIssue>,
}

impl Issues<'_> {
    fn at(&mut self, section: &str, key: &str, message: impl Into<String>) {
        let line = self.lines.find(section, key);
        self.list.push(ConfigIssue {
            line,
            message: format!("[{section}] {key}: {}", message.into()),
        });
    }

    fn positive(&mut self, section: &str, key: &str, v: Option<usize>, default: usize) -> usize {
        match v {
            Some(0) => {
                self.at(section, key, "must be at least 1");
                default
            }
            Some(x) => x,
            None => default,
        }
    }
}

pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    let lines = Lines { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        issues: vec![ConfigIssue {
            line: e.span().map_or(0, |s| lines.of_offset(s.start)),
            message: e.message().trim().to_string(),
        }],
    })?;
    let mut is = Issues { lines, list: Vec::new() };
    let cfg = interpret(raw, &mut is);
    if is.list.is_empty() {
        Ok(cfg.expect("no issues means a complete config"))
    } else {
        Err(ConfigError { issues: is.list })
    }
}

fn interpret(raw: RawConfig, is: &mut Issues<'_>) -> Option<JobConfig> {
    let kind = JobKind::parse(&raw.job.kind);
    if kind.is_none() {
        let names: Vec<&str> = JobKind::ALL.iter().map(|k| k.name()).collect();
        is.at("job", "kind", format!("unknown job `{}`; expected one of {}", raw.job.kind, names.join(", ")));
    }
    let sequence = interpret_sequence(&raw.sequence, raw.seminorm.as_ref(), is);
    let depth = raw.sequence.depth.max(1);
    let j = &raw.job;
    let truncation = is.positive("job", "truncation", j.truncation, depth);
    if truncation > depth {
        is.at("job", "truncation", format!("{truncation} exceeds the sequence depth {depth}"));
    }
    let stage = is.positive("job", "stage", j.stage, 1);
    if stage > depth {
        is.at("job", "stage", format!("{stage} exceeds the sequence depth {depth}"));
    }
    let pairs = is.positive("job", "pairs", j.pairs, 200);
    let elements_per_stage = is.positive("job", "elements_per_stage", j.elements_per_stage, 20);
    let states = is.positive("job", "states", j.states, 8);
    let samples = is.positive("job", "samples", j.samples, 100);
    let epsilons = j.epsilons.clone().unwrap_or_else(|| vec![0.5, 0.25, 0.125]);
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        is.at("job", "epsilons", "need a nonempty list of positive numbers");
    }
    let ladder = raw.ladder.as_ref().and_then(|l| interpret_ladder(l, is));
    if kind == Some(JobKind::VerifyIsomorphism) && raw.ladder.is_none() {
        is.list.push(ConfigIssue {
            line: 0,
            message: "verify_section4 needs a [ladder] section".into(),
        });
    }
    let seed = match &j.seed {
        None => 0,
        Some(s) => s.to_u64().unwrap_or_else(|| {
            is.at("job", "seed", "need an integer in 0..=18446744073709551615");
            0
        }),
    };
    let solver = interpret_solver(raw.solver.as_ref(), is);
    if let (Some(seq), true) = (&sequence, is.list.is_empty()) {
        if let Err(e) = seq.build() {
            let (section, key) = match (seq, raw.seminorm.as_ref()) {
                (SequenceSpec::Inline { .. }, Some(s)) => ("seminorm", seminorm_key(&s.kind)),
                _ => ("sequence", "builtin"),
            };
            is.at(section, key, e.to_string());
        }
    }
    Some(JobConfig {
        kind: kind?,
        seed,
        truncation,
        pairs,
        elements_per_stage,
        states,
        stage,
        samples,
        epsilons,
        output: j.output.as_ref().map(PathBuf::from),
        sequence: sequence?,
        ladder,
        solver: solver?,
    })
}

fn seminorm_key(kind: &str) -> &'static str {
    match kind {
        "metric" => "metric",
        "commutator" => "diracs",
        _ => "lengths",
    }
}

fn interpret_sequence(s: &RawSequence, sn: Option<&RawSeminorm>, is: &mut Issues<'_>) -> Option<SequenceSpec> {
    let depth = s.depth;
    if depth == 0 {
        is.at("sequence", "depth", "must be at least 1");
        return None;
    }
    let unused = |is: &mut Issues<'_>, key: &str, present: bool| {
        if present {
            is.at("sequence", key, format!("not used by `{}`", s.builtin));
        }
    };
    if s.builtin != "inline" && sn.is_some() {
        is.at("seminorm", "kind", "a [seminorm] section is only read for inline sequences");
    }
    match s.builtin.as_str() {
        "interval_example" => {
            unused(is, "k", s.k.is_some());
            match s.points_per_stage {
                Some(p) if p >= 2 => Some(SequenceSpec::IntervalExample { depth, points_per_stage: p }),
                _ => {
                    is.at("sequence", "points_per_stage", "interval_example needs at least 2 points per stage");
                    None
                }
            }
        }
        "two_point" => {
            unused(is, "k", s.k.is_some());
            unused(is, "points_per_stage", s.points_per_stage.is_some());
            Some(SequenceSpec::TwoPoint { depth })
        }
        "constant_matrix" => {
            unused(is, "points_per_stage", s.points_per_stage.is_some());
            match s.k {
                Some(k) if k >= 1 => Some(SequenceSpec::ConstantMatrix { k, depth }),
                _ => {
                    is.at("sequence", "k", "constant_matrix needs a matrix size k ≥ 1");
                    None
                }
            }
        }
        "uhf_like" => {
            unused(is, "k", s.k.is_some());
            unused(is, "points_per_stage", s.points_per_stage.is_some());
            if depth > 4 {
                is.at("sequence", "depth", "uhf_like supports depth 1 to 4");
                return None;
            }
            Some(SequenceSpec::UhfLike { depth })
        }
        "inline" => {
            unused(is, "k", s.k.is_some());
            unused(is, "points_per_stage", s.points_per_stage.is_some());
            let Some(sn) = sn else {
                is.at("sequence", "builtin", "inline sequences need a [seminorm] section");
                return None;
            };
            interpret_seminorm(sn, is).map(|seminorm| SequenceSpec::Inline { depth, seminorm })
        }
        other => {
            is.at(
                "sequence",
                "builtin",
                format!("unknown builtin `{other}`; expected interval_example, two_point, constant_matrix, uhf_like or inline"),
            );
            None
        }
    }
}

fn interpret_seminorm(s: &RawSeminorm, is: &mut Issues<'_>) -> Option<SeminormSpec> {
    let mut extra = |key: &str, present: bool| {
        if present {
            is.at("seminorm", key, format!("not used by kind `{}`", s.kind));
        }
    };
    match s.kind.as_str() {
        "metric" => {
            extra("blocks", s.blocks.is_some());
            extra("diracs", s.diracs.is_some());
            extra("lengths", s.lengths.is_some());
            match &s.metric {
                Some(m) => match square_table(m).and_then(|d| cqms::seminorm::validate_metric_table(&d)) {
                    Ok(()) => Some(SeminormSpec::Metric(m.clone())),
                    Err(e) => {
                        is.at("seminorm", "metric", e.to_string());
                        None
                    }
                },
                None => {
                    is.at("seminorm", "metric", "missing metric table");
                    None
                }
            }
        }
        "commutator" => {
            extra("metric", s.metric.is_some());
            extra("lengths", s.lengths.is_some());
            match (&s.blocks, &s.diracs) {
                (Some(b), Some(d)) if !b.is_empty() && !d.is_empty() => Some(SeminormSpec::Commutator {
                    blocks: b.clone(),
                    diracs: d.clone(),
                }),
                _ => {
                    is.at("seminorm", "diracs", "commutator seminorms need `blocks` and at least one Dirac operator");
                    None
                }
            }
        }
        "group_action" => {
            extra("metric", s.metric.is_some());
            extra("blocks", s.blocks.is_some());
            extra("diracs", s.diracs.is_some());
            match &s.lengths {
                Some(l) if !l.is_empty() => Some(SeminormSpec::CyclicGroup { lengths: l.clone() }),
                _ => {
                    is.at("seminorm", "lengths", "need one length per non-identity shift");
                    None
                }
            }
        }
        other => {
            is.at("seminorm", "kind", format!("unknown seminorm `{other}`; expected metric, commutator or group_action"));
            None
        }
    }
}

fn interpret_ladder(l: &RawLadder, is: &mut Issues<'_>) -> Option<LadderSpec> {
    let factor = |is: &mut Issues<'_>| match l.factor {
        Some(c) if c > 0.0 && c.is_finite() => Some(c),
        _ => {
            is.at("ladder", "factor", "need a positive factor");
            None
        }
    };
    let kind = match l.kind.as_str() {
        "identity" => {
            if l.factor.is_some() {
                is.at("ladder", "factor", "not used by the identity ladder");
            }
            Some(LadderKind::Identity)
        }
        "scaled" => factor(is).map(LadderKind::Scaled),
        "dilated" => factor(is).map(LadderKind::Dilated),
        other => {
            is.at("ladder", "kind", format!("unknown ladder `{other}`; expected identity, scaled or dilated"));
            None
        }
    };
    let constants = match (l.constants.as_deref(), &l.lambda, &l.gamma) {
        (None | Some("analytic"), None, None) => Some(ConstantSource::Derived),
        (Some("sampled"), None, None) => Some(ConstantSource::Sampled),
        (None | Some("analytic"), Some(lam), Some(gam)) => {
            let bad = |v: &[f64]| v.is_empty() || v.iter().any(|&x| !(x > 0.0) || !x.is_finite());
            if bad(lam) {
                is.at("ladder", "lambda", "need a nonempty list of positive finite numbers");
            }
            if bad(gam) {
                is.at("ladder", "gamma", "need a nonempty list of positive finite numbers");
            }
            Some(ConstantSource::Supplied {
                lambda: lam.clone(),
                gamma: gam.clone(),
            })
        }
        (Some("sampled"), _, _) => {
            is.at("ladder", "constants", "sampled constants cannot be combined with lambda or gamma");
            None
        }
        (Some(other), _, _) if other != "analytic" => {
            is.at("ladder", "constants", format!("expected analytic or sampled, got `{other}`"));
            None
        }
        _ => {
            is.at("ladder", "lambda", "lambda and gamma must be given together");
            None
        }
    };
    Some(LadderSpec {
        kind: kind?,
        constants: constants?,
    })
}

fn interpret_solver(s: Option<&RawSolver>, is: &mut Issues<'_>) -> Option<SolverConfig<f64>> {
    let mut cfg = SolverConfig::<f64>::default();
    let Some(s) = s else { return Some(cfg) };
    if let Some(m) = &s.method {
        match SolverMethod::parse(m) {
            Some(method) => cfg.method = method,
            None => {
                let names: Vec<&str> = SolverMethod::ALL.iter().map(|m| m.name()).collect();
                is.at("solver", "method", format!("unknown method `{m}`; expected one of {}", names.join(", ")));
            }
        }
    }
    cfg.max_iters = is.positive("solver", "max_iters", s.max_iters, cfg.max_iters);
    if let Some(t) = s.tol {
        if t > 0.0 && t.is_finite() {
            cfg.tol = t;
        } else {
            is.at("solver", "tol", "must be positive");
        }
    }
    if let Some(g) = s.grid_resolution {
        if g >= 2 {
            cfg.grid_resolution = g;
        } else {
            is.at("solver", "grid_resolution", "must be at least 2");
        }
    }
    cfg.diameter_samples = is.positive("solver", "diameter_samples", s.diameter_samples, cfg.diameter_samples);
    Some(cfg)
}

/// Canonical text for `cfg`; every field is written explicitly so the result
/// parses back to an equal config.
pub fn serialize_config(cfg: &JobConfig) -> String {
    let (builtin, points_per_stage, k, seminorm) = match &cfg.sequence {
        SequenceSpec::IntervalExample { points_per_stage, .. } => ("interval_example", Some(*points_per_stage), None, None),
        SequenceSpec::TwoPoint { .. } => ("two_point", None, None, None),
        SequenceSpec::ConstantMatrix { k, .. } => ("constant_matrix", None, Some(*k), None),
        SequenceSpec::UhfLike { .. } => ("uhf_like", None, None, None),
        SequenceSpec::Inline { seminorm, .. } => ("inline", None, None, Some(raw_seminorm(seminorm))),
    };
    let ladder = cfg.ladder.as_ref().map(|l| {
        let (kind, factor) = match l.kind {
            LadderKind::Identity => ("identity", None),
            LadderKind::Scaled(c) => ("scaled", Some(c)),
            LadderKind::Dilated(c) => ("dilated", Some(c)),
        };
        let (constants, lambda, gamma) = match &l.constants {
            ConstantSource::Derived => ("analytic", None, None),
            ConstantSource::Sampled => ("sampled", None, None),
            ConstantSource::Supplied { lambda, gamma } => ("analytic", Some(lambda.clone()), Some(gamma.clone())),
        };
        RawLadder {
            kind: kind.into(),
            factor,
            constants: Some(constants.into()),
            lambda,
            gamma,
        }
    });
    let raw = RawConfig {
        job: RawJob {
            kind: cfg.kind.name().into(),
            seed: Some(RawSeed::from_u64(cfg.seed)),
            truncation: Some(cfg.truncation),
            pairs: Some(cfg.pairs),
            elements_per_stage: Some(cfg.elements_per_stage),
            states: Some(cfg.states),
            stage: Some(cfg.stage),
            samples: Some(cfg.samples),
            epsilons: Some(cfg.epsilons.clone()),
            output: cfg.output.as_ref().map(|p| p.display().to_string()),
        },
        sequence: RawSequence {
            builtin: builtin.into(),
            depth: cfg.sequence.depth(),
            points_per_stage,
            k,
        },
        seminorm,
        ladder,
        solver: Some(RawSolver {
            method: Some(cfg.solver.method.name().into()),
            max_iters: Some(cfg.solver.max_iters),
            tol: Some(cfg.solver.tol),
            grid_resolution: Some(cfg.solver.grid_resolution),
            diameter_samples: Some(cfg.solver.diameter_samples),
        }),
    };
    toml::to_string(&raw).expect("config values are representable in TOML")
}

fn raw_seminorm(s: &SeminormSpec) -> RawSeminorm {
    match s {
        SeminormSpec::Metric(m) => RawSeminorm {
            kind: "metric".into(),
            metric: Some(m.clone()),
            ..Default::default()
        },
        SeminormSpec::Commutator { blocks, diracs } => RawSeminorm {
            kind: "commutator".into(),
            blocks: Some(blocks.clone()),
            diracs: Some(diracs.clone()),
            ..Default::default()
        },
        SeminormSpec::CyclicGroup { lengths } => RawSeminorm {
            kind: "group_action".into(),
            lengths: Some(lengths.clone()),
            ..Default::default()
        },
    }
}
