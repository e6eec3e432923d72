//! Ladders of homomorphisms between two inductive sequences and one-sided
//! checks of the Lipschitz bounds they induce on the limits.
//!
//! Every check compares a sampled lower bound of the left side (which can
//! only underestimate the true value) with a certified upper bound of the
//! right side, so a reported violation is a genuine contradiction up to the
//! stated tolerance.

use crate::algebra::AlgElement;
use crate::error::{CqmsError, Result};
use crate::hom::UnitalHom;
use crate::inductive::{self, InductiveSequence, LimitElement, TowerPair};
use crate::mk::DiameterResult;
use crate::scalar::Scalar;
use crate::seminorm::LipSeminorm;
use rayon::prelude::*;
use std::fmt;

#[derive(Clone, Debug)]
pub struct Ladder<T: Scalar> {
    pub seq_a: InductiveSequence<T>,
    pub seq_b: InductiveSequence<T>,
    /// `ψ_n : A_n → B_n`.
    pub verticals: Vec<UnitalHom<T>>,
    /// `Ψ_n : B_n → A_{n+1}`.
    pub diagonals: Option<Vec<UnitalHom<T>>>,
}

fn max_basis_residual<T: Scalar>(
    basis: &[AlgElement<T>],
    lhs: impl Fn(&AlgElement<T>) -> Result<AlgElement<T>>,
    rhs: impl Fn(&AlgElement<T>) -> Result<AlgElement<T>>,
) -> Result<T> {
    let mut worst = T::zero();
    for b in basis {
        worst = worst.max(lhs(b)?.sub(&rhs(b)?)?.operator_norm());
    }
    Ok(worst)
}

impl<T: Scalar> Ladder<T> {
    pub fn new(
        seq_a: InductiveSequence<T>,
        seq_b: InductiveSequence<T>,
        verticals: Vec<UnitalHom<T>>,
        diagonals: Option<Vec<UnitalHom<T>>>,
    ) -> Result<Self> {
        let n = seq_a.depth();
        if seq_b.depth() != n || verticals.len() != n {
            return Err(CqmsError::InconsistentLadder(format!(
                "depths differ: A has {n}, B has {}, {} vertical maps",
                seq_b.depth(),
                verticals.len()
            )));
        }
        for (k, v) in verticals.iter().enumerate() {
            if **v.source() != **seq_a.stage(k + 1)?.algebra() || **v.target() != **seq_b.stage(k + 1)?.algebra() {
                return Err(CqmsError::InconsistentLadder(format!("vertical map {} has the wrong ends", k + 1)));
            }
        }
        if let Some(ds) = &diagonals {
            if ds.len() + 1 != n {
                return Err(CqmsError::InconsistentLadder(format!(
                    "need {} diagonal maps, got {}",
                    n - 1,
                    ds.len()
                )));
            }
            for (k, d) in ds.iter().enumerate() {
                if **d.source() != **seq_b.stage(k + 1)?.algebra() || **d.target() != **seq_a.stage(k + 2)?.algebra() {
                    return Err(CqmsError::InconsistentLadder(format!("diagonal map {} has the wrong ends", k + 1)));
                }
            }
        }
        Ok(Self {
            seq_a,
            seq_b,
            verticals,
            diagonals,
        })
    }

    /// `A = B` with identity verticals and `Ψ_n = φ_n`.
    pub fn identity(seq: InductiveSequence<T>) -> Result<Self> {
        Self::over_same_algebras(seq.clone(), seq)
    }

    /// `B` carries `c` times the seminorms of `A`.
    pub fn scaled(seq: InductiveSequence<T>, c: T) -> Result<Self> {
        let b = seq.scaled(c)?;
        Self::over_same_algebras(seq, b)
    }

    /// `B` carries the metrics of `A` multiplied by `c`.
    pub fn dilated(seq: InductiveSequence<T>, c: T) -> Result<Self> {
        let b = seq.dilated(c)?;
        Self::over_same_algebras(seq, b)
    }

    fn over_same_algebras(a: InductiveSequence<T>, b: InductiveSequence<T>) -> Result<Self> {
        let verticals = a.stages().iter().map(|s| UnitalHom::identity(s.algebra())).collect();
        let diagonals = a.homs().to_vec();
        Self::new(a, b, verticals, Some(diagonals))
    }

    /// Two sequences on the same algebras and maps with stagewise
    /// isomorphisms `ψ_n`; the diagonals are `Ψ_n = ψ_{n+1}^{-1} ∘ φ_n`.
    pub fn from_stagewise_isomorphisms(
        seq_a: InductiveSequence<T>,
        seq_b: InductiveSequence<T>,
        isos: Vec<UnitalHom<T>>,
    ) -> Result<Self> {
        if isos.iter().any(|h| !h.is_isomorphism()) {
            return Err(CqmsError::InconsistentLadder("every vertical map must be an isomorphism".into()));
        }
        let mut diagonals = Vec::with_capacity(isos.len().saturating_sub(1));
        for (n, iso) in isos.iter().enumerate().skip(1) {
            let inv = iso.inverse()?;
            diagonals.push(seq_b.hom(n)?.compose(&inv)?);
        }
        Self::new(seq_a, seq_b, isos, Some(diagonals))
    }

    pub fn depth(&self) -> usize {
        self.seq_a.depth()
    }

    /// `max ‖φ^B_n(ψ_n(b)) − ψ_{n+1}(φ^A_n(b))‖` over basis elements.
    pub fn square_residual(&self) -> Result<T> {
        let mut worst = T::zero();
        for n in 1..self.depth() {
            let basis = self.seq_a.stage(n)?.algebra().sa_basis::<T>();
            let r = max_basis_residual(
                &basis,
                |b| self.seq_b.hom(n)?.apply(&self.verticals[n - 1].apply(b)?),
                |b| self.verticals[n].apply(&self.seq_a.hom(n)?.apply(b)?),
            )?;
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// Residuals of `Ψ_n ∘ ψ_n = φ^A_n` and `ψ_{n+1} ∘ Ψ_n = φ^B_n`.
    pub fn triangle_residual(&self) -> Result<Option<T>> {
        let Some(ds) = &self.diagonals else { return Ok(None) };
        let mut worst = T::zero();
        for n in 1..self.depth() {
            let d = &ds[n - 1];
            let basis_a = self.seq_a.stage(n)?.algebra().sa_basis::<T>();
            worst = worst.max(max_basis_residual(
                &basis_a,
                |a| d.apply(&self.verticals[n - 1].apply(a)?),
                |a| self.seq_a.hom(n)?.apply(a),
            )?);
            let basis_b = self.seq_b.stage(n)?.algebra().sa_basis::<T>();
            worst = worst.max(max_basis_residual(
                &basis_b,
                |b| self.verticals[n].apply(&d.apply(b)?),
                |b| self.seq_b.hom(n)?.apply(b),
            )?);
        }
        Ok(Some(worst))
    }

    /// Refuses ladders whose diagrams do not commute within `tol`.
    pub fn check(&self, tol: T) -> Result<()> {
        let sq = self.square_residual()?;
        if sq > tol {
            return Err(CqmsError::InconsistentLadder(format!("squares commute only to {:e}", sq.as_f64())));
        }
        if let Some(tr) = self.triangle_residual()? {
            if tr > tol {
                return Err(CqmsError::InconsistentLadder(format!("triangles commute only to {:e}", tr.as_f64())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    /// Maxima of sampled ratios; lower bounds of the true constants.
    Sampled,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Analytic => "analytic",
            Provenance::Sampled => "sampled",
        })
    }
}

/// Stagewise constants, indexed from stage 1:
///
/// * `lambda`: `L_{B_n}(ψ_n(a)) ≤ λ_n L_{A_n}(a)`
/// * `gamma`: `L_B(φ^n(b)) ≤ γ_n L_{B_n}(b)` in the composite form, or the
///   backward constant `L_{A_{n+1}}(Ψ_n(b)) ≤ γ_n L_{B_n}(b)` when paired
///   with `lambda` alone
/// * `alpha`: `L_{A_{n+1}}(Ψ_n(b)) ≤ α_n L_{B_n}(b)`
/// * `beta`: `L_A(φ^n(a)) ≤ β_n L_{A_n}(a)`
/// * `theta`: `L'_{n+1}(φ_n(a)) ≤ θ_n L'_n(a)`
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSequences<T: Scalar> {
    pub lambda: Option<Vec<T>>,
    pub gamma: Option<Vec<T>>,
    pub alpha: Option<Vec<T>>,
    pub beta: Option<Vec<T>>,
    pub theta: Option<Vec<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> BoundSequences<T> {
    pub fn analytic(lambda: Vec<T>, gamma: Vec<T>) -> Self {
        Self {
            lambda: Some(lambda),
            gamma: Some(gamma),
            alpha: None,
            beta: None,
            theta: None,
            provenance: Provenance::Analytic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("lambda", &self.lambda),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("theta", &self.theta),
        ] {
            if let Some(v) = s {
                if v.is_empty() {
                    return Err(CqmsError::InvalidArgument(format!("{name} is empty")));
                }
                if v.iter().any(|&x| !(x > T::zero()) || !x.is_finite_value()) {
                    return Err(CqmsError::InvalidArgument(format!("{name} must be positive and finite")));
                }
            }
        }
        Ok(())
    }
}

fn sup<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a.max(b))
}

/// Largest observed `L_tgt(ψ(a)) / L_src(a)`; a lower bound for the least
/// admissible constant.
pub fn estimate_ratio_constant<T: Scalar>(
    psi: &UnitalHom<T>,
    l_src: &LipSeminorm<T>,
    l_tgt: &LipSeminorm<T>,
    samples: &[AlgElement<T>],
) -> Result<T> {
    let mut best: Option<T> = None;
    for a in samples {
        let ls = l_src.evaluate(a)?;
        if ls <= T::exact_tol() {
            continue;
        }
        let r = l_tgt.evaluate(&psi.apply(a)?)? / ls;
        best = Some(best.map_or(r, |b| b.max(r)));
    }
    best.ok_or_else(|| CqmsError::Undefined("every sample lies in the kernel of the source seminorm".into()))
}

/// Sampled `λ_n` (verticals) and backward `γ_n` (diagonals).
pub fn sample_bounds<T: Scalar>(ladder: &Ladder<T>, per_stage: usize, seed: u64) -> Result<BoundSequences<T>> {
    let mut rng = crate::sampling::rng(seed);
    let mut lambda = Vec::new();
    for n in 1..=ladder.depth() {
        let sa = ladder.seq_a.stage(n)?;
        let samples: Vec<AlgElement<T>> = (0..per_stage).map(|_| crate::sampling::element(&mut rng, sa.algebra())).collect();
        lambda.push(estimate_ratio_constant(&ladder.verticals[n - 1], &sa.seminorm, &ladder.seq_b.stage(n)?.seminorm, &samples)?);
    }
    let gamma = match &ladder.diagonals {
        Some(ds) => {
            let mut g = Vec::new();
            for n in 1..ladder.depth() {
                let sb = ladder.seq_b.stage(n)?;
                let samples: Vec<AlgElement<T>> =
                    (0..per_stage).map(|_| crate::sampling::element(&mut rng, sb.algebra())).collect();
                g.push(estimate_ratio_constant(&ds[n - 1], &sb.seminorm, &ladder.seq_a.stage(n + 1)?.seminorm, &samples)?);
            }
            Some(g)
        }
        None => None,
    };
    Ok(BoundSequences {
        lambda: Some(lambda),
        gamma,
        alpha: None,
        beta: None,
        theta: None,
        provenance: Provenance::Sampled,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeConstants<T: Scalar> {
    /// `λ_n γ_n`.
    pub lambda_gamma: Option<Vec<T>>,
    /// `α_n β_{n+1}`.
    pub alpha_beta: Option<Vec<T>>,
    /// `θ_n α_{n+1} β_{n+1}`.
    pub theta_alpha_beta: Option<Vec<T>>,
    /// Every `sup(xy) ≤ sup(x)·sup(y)` comparison held.
    pub sup_inequalities_hold: bool,
}

impl<T: Scalar> CompositeConstants<T> {
    pub fn sup_lambda_gamma(&self) -> Option<T> {
        self.lambda_gamma.as_deref().map(sup)
    }

    pub fn sup_alpha_beta(&self) -> Option<T> {
        self.alpha_beta.as_deref().map(sup)
    }

    pub fn sup_theta_alpha_beta(&self) -> Option<T> {
        self.theta_alpha_beta.as_deref().map(sup)
    }
}

/// Elementwise products `λ_n γ_n`, shifted products `α_n β_{n+1}` and
/// `θ_n α_{n+1} β_{n+1}`, checking each against the product of sups.
pub fn compose_constant_sequences<T: Scalar>(b: &BoundSequences<T>) -> Result<CompositeConstants<T>> {
    b.validate()?;
    let mut ok = true;
    let lambda_gamma = match (&b.lambda, &b.gamma) {
        (Some(l), Some(g)) => {
            if l.len() != g.len() {
                return Err(CqmsError::InvalidArgument(format!(
                    "lambda has {} entries, gamma {}",
                    l.len(),
                    g.len()
                )));
            }
            let p: Vec<T> = l.iter().zip(g).map(|(&x, &y)| x * y).collect();
            ok &= sup(&p) <= sup(l) * sup(g);
            Some(p)
        }
        _ => None,
    };
    let alpha_beta = match (&b.alpha, &b.beta) {
        (Some(a), Some(be)) => {
            if be.len() != a.len() + 1 && be.len() != a.len() {
                return Err(CqmsError::InvalidArgument(format!(
                    "beta needs {} or {} entries for {} alphas",
                    a.len(),
                    a.len() + 1,
                    a.len()
                )));
            }
            let p: Vec<T> = a.iter().zip(&be[1..]).map(|(&x, &y)| x * y).collect();
            ok &= sup(&p) <= sup(a) * sup(be);
            Some(p)
        }
        _ => None,
    };
    let theta_alpha_beta = match (&b.theta, &b.alpha, &b.beta) {
        (Some(t), Some(a), Some(be)) => {
            let m = t.len().min(a.len().saturating_sub(1)).min(be.len().saturating_sub(1));
            if m == 0 {
                return Err(CqmsError::InvalidArgument("theta needs alpha and beta one stage longer".into()));
            }
            let p: Vec<T> = (0..m).map(|n| t[n] * a[n + 1] * be[n + 1]).collect();
            ok &= sup(&p) <= sup(t) * sup(a) * sup(be);
            Some(p)
        }
        _ => None,
    };
    Ok(CompositeConstants {
        lambda_gamma,
        alpha_beta,
        theta_alpha_beta,
        sup_inequalities_hold: ok,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow<T: Scalar> {
    pub direction: Direction,
    pub stage: usize,
    pub element_id: usize,
    pub lhs_lower: T,
    pub rhs: T,
    /// `rhs − lhs_lower`.
    pub margin: T,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport<T: Scalar> {
    pub constant: T,
    pub provenance: Provenance,
    /// Sorted by direction, stage, then element index.
    pub rows: Vec<CheckRow<T>>,
}

impl<T: Scalar> BoundReport<T> {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violated).count()
    }

    /// Largest `lhs_lower / rhs` over rows with a positive right side.
    pub fn tightest_ratio(&self) -> T {
        self.rows
            .iter()
            .filter(|r| r.rhs > T::zero() && r.rhs.is_finite_value())
            .map(|r| r.lhs_lower / r.rhs)
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Data needed to bound the limit seminorm of one side from both ends.
pub struct SideData<'a, T: Scalar> {
    pub pairs: &'a [TowerPair<T>],
    pub diameters: &'a [DiameterResult<T>],
}

#[allow(clippy::too_many_arguments)]
fn check_direction<T: Scalar>(
    direction: Direction,
    src: &InductiveSequence<T>,
    map: impl Fn(&LimitElement<T>) -> Result<LimitElement<T>> + Sync,
    elements: &[LimitElement<T>],
    target_pairs: &[TowerPair<T>],
    source_diameters: &[DiameterResult<T>],
    constant: T,
    tol: T,
) -> Result<Vec<CheckRow<T>>> {
    let mut rows = elements
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let image = map(a)?;
            let lhs = inductive::limit_seminorm_lower_bound(&image, target_pairs)?.value;
            let upper = inductive::limit_upper_bound(src, a, source_diameters)?;
            let rhs = if upper == T::zero() { T::zero() } else { T::of(2.0) * constant * upper };
            Ok(CheckRow {
                direction,
                stage: a.stage,
                element_id: i,
                lhs_lower: lhs,
                rhs,
                margin: rhs - lhs,
                violated: lhs > rhs + tol * (T::one() + rhs),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.direction, r.stage, r.element_id));
    Ok(rows)
}

/// Checks `L_B(ψ(a)) ≤ 2·sup λ·L_A(a)` on elements of `A`, with the left
/// side bounded below from `B`'s tower pairs and `L_A(a)` bounded above by
/// `2^n L_n(a)(1 + diam_n)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_universal_bound<T: Scalar>(
    ladder: &Ladder<T>,
    lambda: &[T],
    provenance: Provenance,
    elements: &[LimitElement<T>],
    b_side: &SideData<'_, T>,
    a_diameters: &[DiameterResult<T>],
    tol: T,
) -> Result<BoundReport<T>> {
    ladder.check(T::of(1e-10))?;
    if lambda.is_empty() || lambda.iter().any(|&x| !x.is_finite_value() || x < T::zero()) {
        return Err(CqmsError::InvalidArgument("lambda must be a finite nonnegative list".into()));
    }
    let constant = sup(lambda);
    let rows = check_direction(
        Direction::Forward,
        &ladder.seq_a,
        |a| {
            Ok(LimitElement {
                stage: a.stage,
                representative: ladder.verticals[a.stage - 1].apply(&a.representative)?,
            })
        },
        elements,
        b_side.pairs,
        a_diameters,
        constant,
        tol,
    )?;
    Ok(BoundReport {
        constant,
        provenance,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoReport<T: Scalar> {
    pub forward: BoundReport<T>,
    pub backward: BoundReport<T>,
}

impl<T: Scalar> IsoReport<T> {
    pub fn violations(&self) -> usize {
        self.forward.violations() + self.backward.violations()
    }
}

/// Both directions: `L_B(ψ(a)) ≤ 2·forward·L_A(a)` on `elements_a` and
/// `L_A(Ψ(b)) ≤ 2·backward·L_B(b)` on `elements_b` (which must sit below
/// the top stage so that `Ψ_n` exists).
#[allow(clippy::too_many_arguments)]
pub fn verify_iso_bounds<T: Scalar>(
    ladder: &Ladder<T>,
    forward: T,
    backward: T,
    provenance: Provenance,
    elements_a: &[LimitElement<T>],
    elements_b: &[LimitElement<T>],
    a_side: &SideData<'_, T>,
    b_side: &SideData<'_, T>,
    tol: T,
) -> Result<IsoReport<T>> {
    let Some(diagonals) = &ladder.diagonals else {
        return Err(CqmsError::InconsistentLadder("diagonal maps are required".into()));
    };
    for c in [forward, backward] {
        if !c.is_finite_value() || c < T::zero() {
            return Err(CqmsError::InvalidArgument("constants must be finite and nonnegative".into()));
        }
    }
    let fwd = verify_universal_bound(ladder, &[forward], provenance, elements_a, b_side, a_side.diameters, tol)?;
    if let Some(b) = elements_b.iter().find(|b| b.stage >= ladder.depth()) {
        return Err(CqmsError::StageOutOfRange {
            stage: b.stage,
            depth: ladder.depth() - 1,
        });
    }
    let rows = check_direction(
        Direction::Backward,
        &ladder.seq_b,
        |b| {
            Ok(LimitElement {
                stage: b.stage + 1,
                representative: diagonals[b.stage - 1].apply(&b.representative)?,
            })
        },
        elements_b,
        a_side.pairs,
        b_side.diameters,
        backward,
        tol,
    )?;
    Ok(IsoReport {
        forward: fwd,
        backward: BoundReport {
            constant: backward,
            provenance,
            rows,
        },
    })
}
