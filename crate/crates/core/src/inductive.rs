//! Inductive sequences of finite-dimensional compact quantum metric spaces,
//! truncated points of the inverse limit of their state spaces, the product
//! metric on those points, and two-sided estimates of the limit seminorm.
//!
//! Stage indices are 1-based throughout the public API, so stage `n`
//! contributes weight `2^-n` to the product metric.

use crate::algebra::{AlgElement, AlgState, FiniteDimAlgebra};
use crate::error::{CqmsError, Result};
use crate::hom::UnitalHom;
use crate::linalg::CMatrix;
use crate::mk::{self, DiameterResult, MetricResult, SolverConfig};
use crate::sampling;
use crate::scalar::{cabs, creal, Scalar};
use crate::seminorm::LipSeminorm;
use rand::Rng;
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct Stage<T: Scalar> {
    pub seminorm: LipSeminorm<T>,
    /// Positions on the line for interval stages.
    pub points: Option<Vec<T>>,
}

impl<T: Scalar> Stage<T> {
    pub fn new(seminorm: LipSeminorm<T>) -> Self {
        Self { seminorm, points: None }
    }

    pub fn algebra(&self) -> &Arc<FiniteDimAlgebra> {
        self.seminorm.algebra()
    }
}

#[derive(Clone, Debug)]
pub struct InductiveSequence<T: Scalar> {
    name: String,
    stages: Vec<Stage<T>>,
    homs: Vec<UnitalHom<T>>,
    isometric: bool,
}

fn interval_grids(depth: usize, points_per_stage: usize) -> Vec<Vec<f64>> {
    let p = points_per_stage;
    let h1 = 0.5 / (p - 1) as f64;
    let mut grids = vec![(0..p).map(|k| if k + 1 == p { 0.5 } else { k as f64 * h1 }).collect::<Vec<_>>()];
    for n in 1..depth {
        let a = n as f64 / (n + 1) as f64;
        let b = (n + 1) as f64 / (n + 2) as f64;
        let q = (((b - a) / h1).ceil() as usize).max(1);
        let mut next = grids[n - 1].clone();
        next.extend((1..=q).map(|k| if k == q { b } else { a + (b - a) * k as f64 / q as f64 }));
        grids.push(next);
    }
    grids
}

impl<T: Scalar> InductiveSequence<T> {
    /// Checks that consecutive stages and homomorphisms chain together;
    /// unitality and domain preservation are left to [`validate_sequence`].
    pub fn new(name: impl Into<String>, stages: Vec<Stage<T>>, homs: Vec<UnitalHom<T>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(CqmsError::InvalidArgument("a sequence needs at least one stage".into()));
        }
        if homs.len() + 1 != stages.len() {
            return Err(CqmsError::InvalidArgument(format!(
                "{} stages need {} connecting maps, got {}",
                stages.len(),
                stages.len() - 1,
                homs.len()
            )));
        }
        for (n, h) in homs.iter().enumerate() {
            if **h.source() != **stages[n].algebra() || **h.target() != **stages[n + 1].algebra() {
                return Err(CqmsError::InvalidHom(format!(
                    "map {} does not connect stage {} to stage {}",
                    n + 1,
                    n + 1,
                    n + 2
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            stages,
            homs,
            isometric: false,
        })
    }

    /// Declares that every connecting map preserves the seminorm exactly, so
    /// [`validate_sequence`] measures the preservation error.
    pub fn with_isometric_maps(mut self, isometric: bool) -> Self {
        self.isometric = isometric;
        self
    }

    /// Nested grids `X_1 ⊂ X_2 ⊂ …` with `X_n ⊂ [0, 1 − 1/(n+1)]`, the
    /// Euclidean Lipschitz seminorm on each, and maps extending a function by
    /// its value at the right endpoint of the previous grid.
    ///
    /// `X_1` has `points_per_stage` equally spaced points on `[0, 1/2]`;
    /// each later stage fills `(n/(n+1), (n+1)/(n+2)]` with the coarsest
    /// uniform spacing not exceeding that of `X_1`.
    pub fn interval_example(depth: usize, points_per_stage: usize) -> Result<Self> {
        if depth == 0 || points_per_stage < 2 {
            return Err(CqmsError::InvalidArgument(
                "interval example needs depth ≥ 1 and at least 2 points per stage".into(),
            ));
        }
        let grids = interval_grids(depth, points_per_stage);
        let mut stages = Vec::with_capacity(depth);
        for (n, g) in grids.iter().enumerate() {
            let alg = FiniteDimAlgebra::commutative(g.len(), format!("C(X_{})", n + 1))?;
            let pts: Vec<T> = g.iter().map(|&x| T::of(x)).collect();
            let l = LipSeminorm::on_line(&alg, &pts)?;
            stages.push(Stage {
                seminorm: l,
                points: Some(pts),
            });
        }
        let mut homs = Vec::with_capacity(depth - 1);
        for n in 0..depth - 1 {
            let src = grids[n].len();
            let assignment: Vec<usize> = (0..grids[n + 1].len()).map(|j| j.min(src - 1)).collect();
            homs.push(UnitalHom::from_point_map(stages[n].algebra(), stages[n + 1].algebra(), &assignment)?);
        }
        Ok(Self::new("interval_example", stages, homs)?.with_isometric_maps(true))
    }

    /// The same stage `depth` times with identity maps.
    pub fn constant(name: impl Into<String>, seminorm: LipSeminorm<T>, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(CqmsError::InvalidArgument("depth must be at least 1".into()));
        }
        let id = UnitalHom::identity(seminorm.algebra());
        let stages = vec![Stage::new(seminorm); depth];
        Ok(Self::new(name, stages, vec![id; depth - 1])?.with_isometric_maps(true))
    }

    /// Two points at distance 1, repeated with identity maps.
    pub fn two_point(depth: usize) -> Result<Self> {
        let alg = FiniteDimAlgebra::commutative(2, "C({x,y})")?;
        Self::constant("two_point", LipSeminorm::on_line(&alg, &[T::zero(), T::one()])?, depth)
    }

    /// `M_k` with a commutator seminorm, repeated with identity maps. Without
    /// explicit Dirac operators, `diag(0, 1/k, …, (k−1)/k)` and the path
    /// adjacency matrix are used; together their commutant is the scalars.
    pub fn constant_matrix(k: usize, depth: usize, diracs: Option<Vec<CMatrix<T>>>) -> Result<Self> {
        let alg = FiniteDimAlgebra::full_matrix(k, format!("M_{k}"))?;
        let diracs = diracs.unwrap_or_else(|| default_diracs(k));
        Self::constant("constant_matrix", LipSeminorm::commutator(&alg, diracs)?, depth)
    }

    /// `M_2 → M_4 → … → M_{2^depth}` with `a ↦ a ⊕ a` and commutator
    /// seminorms; `diracs[n]` lists the Dirac operators of stage `n + 1`.
    pub fn uhf_like(depth: usize, diracs: Option<Vec<Vec<CMatrix<T>>>>) -> Result<Self> {
        if depth == 0 || depth > 4 {
            return Err(CqmsError::InvalidArgument("uhf_like supports depth 1 to 4".into()));
        }
        if let Some(d) = &diracs {
            if d.len() != depth {
                return Err(CqmsError::InvalidArgument(format!(
                    "need Dirac operators for {depth} stages, got {}",
                    d.len()
                )));
            }
        }
        let mut stages = Vec::with_capacity(depth);
        for n in 1..=depth {
            let k = 1usize << n;
            let alg = FiniteDimAlgebra::full_matrix(k, format!("M_{k}"))?;
            let ds = match &diracs {
                Some(d) => d[n - 1].clone(),
                None => default_diracs(k),
            };
            stages.push(Stage::new(LipSeminorm::commutator(&alg, ds)?));
        }
        let homs = (0..depth - 1)
            .map(|n| UnitalHom::new(Arc::clone(stages[n].algebra()), Arc::clone(stages[n + 1].algebra()), vec![vec![2]], None))
            .collect::<Result<Vec<_>>>()?;
        Self::new("uhf_like", stages, homs)
    }

    /// Every stage seminorm multiplied by `c`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        let stages = self
            .stages
            .iter()
            .map(|s| {
                Ok(Stage {
                    seminorm: s.seminorm.scaled(c)?,
                    points: s.points.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: format!("{}_scaled", self.name),
            stages,
            homs: self.homs.clone(),
            isometric: self.isometric,
        })
    }

    /// Every distance multiplied by `c`, i.e. every seminorm divided by `c`.
    pub fn dilated(&self, c: T) -> Result<Self> {
        if c <= T::zero() {
            return Err(CqmsError::InvalidArgument("dilation factor must be positive".into()));
        }
        let mut s = self.scaled(T::one() / c)?;
        s.name = format!("{}_dilated", self.name);
        for st in &mut s.stages {
            if let Some(p) = &mut st.points {
                p.iter_mut().for_each(|x| *x *= c);
            }
        }
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn is_isometric(&self) -> bool {
        self.isometric
    }

    fn check_stage(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.depth() {
            Err(CqmsError::StageOutOfRange {
                stage: n,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    pub fn stage(&self, n: usize) -> Result<&Stage<T>> {
        self.check_stage(n)?;
        Ok(&self.stages[n - 1])
    }

    pub fn stages(&self) -> &[Stage<T>] {
        &self.stages
    }

    /// `φ_n` from stage `n` to stage `n + 1`.
    pub fn hom(&self, n: usize) -> Result<&UnitalHom<T>> {
        if n == 0 || n >= self.depth() {
            return Err(CqmsError::StageOutOfRange {
                stage: n,
                depth: self.depth().saturating_sub(1),
            });
        }
        Ok(&self.homs[n - 1])
    }

    pub fn homs(&self) -> &[UnitalHom<T>] {
        &self.homs
    }

    /// Image of `a` (at stage `from`) at stage `to ≥ from`.
    pub fn push_forward(&self, a: &AlgElement<T>, from: usize, to: usize) -> Result<AlgElement<T>> {
        self.check_stage(from)?;
        self.check_stage(to)?;
        if to < from {
            return Err(CqmsError::InvalidArgument(format!("cannot push stage {from} down to {to}")));
        }
        self.stages[from - 1].algebra().check_same(a.algebra())?;
        let mut cur = a.clone();
        for n in from..to {
            cur = self.homs[n - 1].apply(&cur)?;
        }
        Ok(cur)
    }

    /// Composite map from stage `from` to stage `to`.
    pub fn composite(&self, from: usize, to: usize) -> Result<UnitalHom<T>> {
        self.check_stage(from)?;
        self.check_stage(to)?;
        let mut h = UnitalHom::identity(self.stages[from - 1].algebra());
        for n in from..to {
            h = h.compose(&self.homs[n - 1])?;
        }
        Ok(h)
    }
}

fn default_diracs<T: Scalar>(k: usize) -> Vec<CMatrix<T>> {
    let kk = T::of(k as f64);
    let diag = CMatrix::from_fn(k, k, |i, j| if i == j { creal(T::of(i as f64) / kk) } else { creal(T::zero()) });
    let path = CMatrix::from_fn(k, k, |i, j| if i.abs_diff(j) == 1 { creal(T::one()) } else { creal(T::zero()) });
    if k == 1 {
        vec![diag]
    } else {
        vec![diag, path]
    }
}

/// `(μ_1, …, μ_N)` with `μ_n = φ̂_n(μ_{n+1})`.
#[derive(Clone, Debug)]
pub struct StateTower<T: Scalar> {
    states: Vec<AlgState<T>>,
    consistency_residual: T,
}

impl<T: Scalar> StateTower<T> {
    pub fn depth(&self) -> usize {
        self.states.len()
    }

    /// State at stage `n` (1-based).
    pub fn state(&self, n: usize) -> Result<&AlgState<T>> {
        if n == 0 || n > self.depth() {
            return Err(CqmsError::StageOutOfRange {
                stage: n,
                depth: self.depth(),
            });
        }
        Ok(&self.states[n - 1])
    }

    pub fn states(&self) -> &[AlgState<T>] {
        &self.states
    }

    pub fn consistency_residual(&self) -> T {
        self.consistency_residual
    }

    /// `μ(a)` for a limit element, read off at the element's own stage.
    pub fn evaluate(&self, a: &LimitElement<T>) -> Result<nalgebra::Complex<T>> {
        self.state(a.stage)?.evaluate(&a.representative)
    }
}

/// Tower generated by a state at stage `n`: `μ_m = μ ∘ φ_{m,n}` for `m ≤ n`.
pub fn tower_from_state<T: Scalar>(seq: &InductiveSequence<T>, n: usize, mu: AlgState<T>) -> Result<StateTower<T>> {
    seq.check_stage(n)?;
    seq.stages[n - 1].algebra().check_same(mu.algebra())?;
    let mut states = vec![mu];
    for m in (1..n).rev() {
        let next = seq.homs[m - 1].dual_pushforward(states.last().expect("nonempty"))?;
        states.push(next);
    }
    states.reverse();
    let consistency_residual = tower_residual(seq, &states)?;
    Ok(StateTower {
        states,
        consistency_residual,
    })
}

/// `max |μ_m(b) − μ_{m+1}(φ_m(b))|` over the self-adjoint basis `b` of each stage.
pub fn tower_residual<T: Scalar>(seq: &InductiveSequence<T>, states: &[AlgState<T>]) -> Result<T> {
    let mut worst = T::zero();
    for m in 1..states.len() {
        let h = &seq.homs[m - 1];
        for b in seq.stages[m - 1].algebra().sa_basis::<T>() {
            let lhs = states[m - 1].evaluate(&b)?;
            let rhs = states[m].evaluate(&h.apply(&b)?)?;
            worst = worst.max(cabs(lhs - rhs));
        }
    }
    Ok(worst)
}

/// Random tower generated from a random state at stage `top`.
pub fn sample_tower<T: Scalar, R: Rng>(seq: &InductiveSequence<T>, rng: &mut R, top: usize) -> Result<StateTower<T>> {
    seq.check_stage(top)?;
    let mu = sampling::state(rng, seq.stages[top - 1].algebra());
    tower_from_state(seq, top, mu)
}

/// `per_stage` random elements at each stage in `stages`: piecewise-linear
/// functions on interval stages, complex Gaussian elements otherwise.
pub fn sample_elements<T: Scalar, R: Rng>(
    seq: &InductiveSequence<T>,
    rng: &mut R,
    stages: std::ops::RangeInclusive<usize>,
    per_stage: usize,
) -> Result<Vec<LimitElement<T>>> {
    let mut out = Vec::with_capacity(per_stage * stages.clone().count());
    for n in stages {
        let st = seq.stage(n)?;
        for _ in 0..per_stage {
            let representative = match &st.points {
                Some(pts) => {
                    let knots = rng.random_range(1..=6);
                    AlgElement::from_function(st.algebra(), &sampling::piecewise_linear(rng, pts, knots))?
                }
                None => sampling::element(rng, st.algebra()),
            };
            out.push(LimitElement { stage: n, representative });
        }
    }
    Ok(out)
}

/// Element of the algebraic inductive limit, represented at a finite stage.
#[derive(Clone, Debug)]
pub struct LimitElement<T: Scalar> {
    pub stage: usize,
    pub representative: AlgElement<T>,
}

impl<T: Scalar> LimitElement<T> {
    pub fn new(seq: &InductiveSequence<T>, stage: usize, representative: AlgElement<T>) -> Result<Self> {
        seq.stage(stage)?.algebra().check_same(representative.algebra())?;
        Ok(Self { stage, representative })
    }

    /// Representative at stage `m ≥ self.stage`.
    pub fn at_stage(&self, seq: &InductiveSequence<T>, m: usize) -> Result<Self> {
        Ok(Self {
            stage: m,
            representative: seq.push_forward(&self.representative, self.stage, m)?,
        })
    }

    /// Equality in the limit: the images at a common stage agree within `tol`.
    pub fn approx_eq(&self, other: &Self, seq: &InductiveSequence<T>, tol: T) -> Result<bool> {
        let m = self.stage.max(other.stage);
        let a = self.at_stage(seq, m)?;
        let b = other.at_stage(seq, m)?;
        Ok(a.representative.max_abs_diff(&b.representative)? <= tol)
    }

    pub fn shift(&self, lambda: nalgebra::Complex<T>) -> Self {
        Self {
            stage: self.stage,
            representative: self.representative.shift(lambda),
        }
    }
}

/// Truncated product metric `Σ_{n ≤ N} 2^-n t_n/(1 + t_n)` with its
/// certified enclosure of the full series.
#[derive(Clone, Debug)]
pub struct ProductMetric<T: Scalar> {
    /// Partial sum from the solvers' point values.
    pub partial: T,
    /// Partial sum from the stagewise lower bounds.
    pub partial_lower: T,
    /// Partial sum from the stagewise upper bounds.
    pub partial_upper: T,
    /// `2^-N`, bounding the omitted terms.
    pub tail: T,
    pub stages: Vec<MetricResult<T>>,
}

impl<T: Scalar> ProductMetric<T> {
    pub fn lower(&self) -> T {
        self.partial_lower
    }

    pub fn upper(&self) -> T {
        self.partial_upper + self.tail
    }

    pub fn truncation(&self) -> usize {
        self.stages.len()
    }

    /// Partial sum over the first `n` stages, accumulated in stage order.
    pub fn partial_through(&self, n: usize) -> T {
        partial_sum(self.stages.iter().take(n).map(|r| r.value))
    }
}

fn saturate<T: Scalar>(t: T) -> T {
    if t.is_finite_value() {
        t / (T::one() + t)
    } else {
        T::one()
    }
}

fn partial_sum<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let mut w = T::one();
    let mut s = T::zero();
    for v in values {
        w *= T::of(0.5);
        s += w * saturate(v);
    }
    s
}

pub fn product_metric<T: Scalar>(
    seq: &InductiveSequence<T>,
    t: &StateTower<T>,
    s: &StateTower<T>,
    n: usize,
    cfg: &SolverConfig<T>,
) -> Result<ProductMetric<T>> {
    if n == 0 {
        return Err(CqmsError::InvalidArgument("truncation must be at least 1".into()));
    }
    if t.depth() < n || s.depth() < n || seq.depth() < n {
        return Err(CqmsError::StageOutOfRange {
            stage: n,
            depth: t.depth().min(s.depth()).min(seq.depth()),
        });
    }
    let stages = (0..n)
        .into_par_iter()
        .map(|k| mk::mk_distance(&seq.stages[k].seminorm, &t.states[k], &s.states[k], cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductMetric {
        partial: partial_sum(stages.iter().map(|r| r.value)),
        partial_lower: partial_sum(stages.iter().map(|r| r.lower_bound)),
        partial_upper: partial_sum(stages.iter().map(|r| r.upper_bound)),
        tail: T::of(0.5f64.powi(n as i32)),
        stages,
    })
}

/// Two towers with their product-metric enclosure.
#[derive(Clone, Debug)]
pub struct TowerPair<T: Scalar> {
    pub first: StateTower<T>,
    pub second: StateTower<T>,
    pub rho: ProductMetric<T>,
}

pub fn measure_pairs<T: Scalar>(
    seq: &InductiveSequence<T>,
    pairs: Vec<(StateTower<T>, StateTower<T>)>,
    n: usize,
    cfg: &SolverConfig<T>,
) -> Result<Vec<TowerPair<T>>> {
    pairs
        .into_par_iter()
        .map(|(first, second)| {
            let rho = product_metric(seq, &first, &second, n, cfg)?;
            Ok(TowerPair { first, second, rho })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitBound<T: Scalar> {
    pub value: T,
    /// Index of the pair attaining `value`.
    pub best_pair: Option<usize>,
    /// Pairs whose distance enclosure contains 0.
    pub skipped: usize,
}

/// `max |μ(a) − ν(a)| / ρ_upper(μ, ν)` over measured pairs, a certified lower
/// bound for the limit seminorm of `a`.
pub fn limit_seminorm_lower_bound<T: Scalar>(a: &LimitElement<T>, pairs: &[TowerPair<T>]) -> Result<LimitBound<T>> {
    let mut out = LimitBound {
        value: T::zero(),
        best_pair: None,
        skipped: 0,
    };
    for (i, p) in pairs.iter().enumerate() {
        if p.rho.lower() <= T::zero() {
            out.skipped += 1;
            continue;
        }
        let num = cabs(p.first.evaluate(a)? - p.second.evaluate(a)?);
        let q = num / p.rho.upper();
        if q > out.value || out.best_pair.is_none() {
            out.value = out.value.max(q);
            out.best_pair = Some(i);
        }
    }
    Ok(out)
}

/// Convenience wrapper measuring the pairs first.
pub fn limit_seminorm_lower_bound_from_towers<T: Scalar>(
    seq: &InductiveSequence<T>,
    a: &LimitElement<T>,
    towers: Vec<(StateTower<T>, StateTower<T>)>,
    n: usize,
    cfg: &SolverConfig<T>,
) -> Result<LimitBound<T>> {
    if a.stage > n {
        return Err(CqmsError::InvalidArgument(format!(
            "element lives at stage {} beyond truncation {n}",
            a.stage
        )));
    }
    limit_seminorm_lower_bound(a, &measure_pairs(seq, towers, n, cfg)?)
}

pub fn stage_diameters<T: Scalar>(seq: &InductiveSequence<T>, cfg: &SolverConfig<T>) -> Result<Vec<DiameterResult<T>>> {
    seq.stages
        .par_iter()
        .map(|s| mk::diameter(&s.seminorm, cfg))
        .collect()
}

/// `2^n · L_n(a) · (1 + diam_n)`, an upper bound for the limit seminorm.
pub fn limit_upper_bound<T: Scalar>(
    seq: &InductiveSequence<T>,
    a: &LimitElement<T>,
    diameters: &[DiameterResult<T>],
) -> Result<T> {
    let stage = seq.stage(a.stage)?;
    let ln = stage.seminorm.evaluate(&a.representative)?;
    if ln == T::zero() {
        return Ok(T::zero());
    }
    let d = diameters
        .get(a.stage - 1)
        .ok_or_else(|| CqmsError::InvalidArgument("missing stage diameter".into()))?;
    if d.infinite {
        return Ok(T::infinity());
    }
    Ok(T::of(2f64.powi(a.stage as i32)) * ln * (T::one() + d.upper))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringReport<T: Scalar> {
    pub epsilon: T,
    pub samples: usize,
    pub net_size: usize,
    /// Largest operator norm among the gauge-fixed samples.
    pub max_norm: T,
}

/// Samples the set `{a : L(a) ≤ 1, μ(a) = 0}` and greedily covers the sample
/// by operator-norm balls of radius `epsilon`.
///
/// Each sample is a random self-adjoint element of a random stage, scaled so
/// that its certified upper bound is at most 1, gauge-shifted against `mu`
/// and compared at the top stage. The zero element is always included.
pub fn total_boundedness_probe<T: Scalar>(
    seq: &InductiveSequence<T>,
    mu: &StateTower<T>,
    epsilons: &[T],
    sample_size: usize,
    cfg: &SolverConfig<T>,
) -> Result<Vec<CoveringReport<T>>> {
    if epsilons.iter().any(|&e| e <= T::zero()) {
        return Err(CqmsError::InvalidArgument("epsilon must be positive".into()));
    }
    let top = mu.depth().min(seq.depth());
    let diameters = stage_diameters(seq, cfg)?;
    let mut rng = sampling::rng(cfg.seed);
    let mut samples = vec![AlgElement::zero(seq.stages[top - 1].algebra())];
    for _ in 0..sample_size {
        let n = rng.random_range(1..=top);
        let a = sampling::self_adjoint::<T, _>(&mut rng, seq.stages[n - 1].algebra());
        let le = LimitElement { stage: n, representative: a };
        let bound = limit_upper_bound(seq, &le, &diameters)?;
        if !(bound > T::zero()) || !bound.is_finite_value() {
            continue;
        }
        let r = T::of(rng.random::<f64>());
        let scaled = le.representative.scale_real(r / bound);
        let shift = mu.state(n)?.evaluate(&scaled)?;
        let gauged = scaled.shift(-nalgebra::Complex::new(shift.re, T::zero()));
        samples.push(seq.push_forward(&gauged, n, top)?);
    }
    let max_norm = samples.iter().map(|a| a.operator_norm()).fold(T::zero(), |a, b| a.max(b));
    epsilons
        .iter()
        .map(|&eps| {
            let mut centers: Vec<&AlgElement<T>> = Vec::new();
            for s in &samples {
                let mut covered = false;
                for c in &centers {
                    if s.sub(c)?.operator_norm() <= eps {
                        covered = true;
                        break;
                    }
                }
                if !covered {
                    centers.push(s);
                }
            }
            Ok(CoveringReport {
                epsilon: eps,
                samples: samples.len(),
                net_size: centers.len(),
                max_norm,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Each failed check, itemized.
    pub issues: Vec<String>,
    /// `max |L_{n+1}(φ_n(f)) − L_n(f)|` for sequences declared isometric.
    pub preservation_error: Option<f64>,
    pub functions_checked: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks chaining, unitality and domain preservation of every map; for
/// isometric sequences also measures how exactly the maps preserve the
/// seminorm on the basis and on `samples_per_stage` random functions
/// (piecewise linear on interval stages, Gaussian otherwise).
pub fn validate_sequence<T: Scalar>(seq: &InductiveSequence<T>, samples_per_stage: usize, seed: u64) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut rng = sampling::rng(seed);
    let mut worst = T::zero();
    for (k, h) in seq.homs.iter().enumerate() {
        let n = k + 1;
        let (src, tgt) = (&seq.stages[k], &seq.stages[k + 1]);
        if **h.source() != **src.algebra() || **h.target() != **tgt.algebra() {
            report.issues.push(format!("map {n}: does not connect stage {n} to stage {}", n + 1));
            continue;
        }
        for issue in h.issues() {
            report.issues.push(format!("map {n}: {issue}"));
        }
        if !h.is_unital() {
            continue;
        }
        let mut tests: Vec<AlgElement<T>> = src.algebra().sa_basis();
        for _ in 0..samples_per_stage {
            let f = match &src.points {
                Some(pts) => {
                    let knots = rng.random_range(1..=6);
                    let v = sampling::piecewise_linear(&mut rng, pts, knots);
                    AlgElement::from_function(src.algebra(), &v)?
                }
                None => sampling::element(&mut rng, src.algebra()),
            };
            tests.push(f);
        }
        for (i, b) in tests.iter().enumerate() {
            let lb = src.seminorm.evaluate(b)?;
            let img = h.apply(b)?;
            let li = tgt.seminorm.evaluate(&img)?;
            if lb.is_finite_value() && !li.is_finite_value() {
                report.issues.push(format!("map {n}: test element {i} leaves the domain"));
            }
            if seq.isometric {
                worst = worst.max((li - lb).abs());
            }
            report.functions_checked += 1;
        }
    }
    if seq.isometric {
        report.preservation_error = Some(worst.as_f64());
        if worst > T::exact_tol() {
            report
                .issues
                .push(format!("seminorm preservation error {:e} exceeds tolerance", worst.as_f64()));
        }
    }
    Ok(report)
}
