//! Monge-Kantorovich distances `ρ_L(μ, ν) = sup{|μ(a) − ν(a)| : L(a) ≤ 1}`
//! and state-space diameters.
//!
//! The supremum is taken over self-adjoint `a` orthogonal to the kernel of
//! `L`; any kernel component in `μ − ν` makes the distance infinite. Every
//! result carries a certified interval `[lower_bound, upper_bound]`: the
//! lower end is attained by the returned witness, the upper end comes from a
//! dual certificate (a coupling in the commutative case, a conic combination
//! of subgradients otherwise).

use crate::algebra::{AlgElement, AlgState};
use crate::error::{CqmsError, Result};
use crate::lp;
use crate::sampling;
use crate::scalar::Scalar;
use crate::seminorm::LipSeminorm;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverMethod {
    /// Transport for metric seminorms, cutting-plane supergradient otherwise.
    Auto,
    DualLp,
    PrimalTransport,
    Supergradient,
    BruteForceGrid,
}

impl SolverMethod {
    pub const ALL: [SolverMethod; 5] = [
        SolverMethod::Auto,
        SolverMethod::DualLp,
        SolverMethod::PrimalTransport,
        SolverMethod::Supergradient,
        SolverMethod::BruteForceGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverMethod::Auto => "auto",
            SolverMethod::DualLp => "dual_lp",
            SolverMethod::PrimalTransport => "primal_transport_lp",
            SolverMethod::Supergradient => "supergradient",
            SolverMethod::BruteForceGrid => "brute_force_grid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T: Scalar> {
    pub method: SolverMethod,
    pub max_iters: usize,
    pub tol: T,
    /// Grid points per axis minus one, for [`SolverMethod::BruteForceGrid`].
    pub grid_resolution: usize,
    pub seed: u64,
    /// Pure-state pairs sampled for matrix-case diameter lower bounds.
    pub diameter_samples: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            max_iters: 5000,
            tol: T::of(1e-7),
            grid_resolution: 64,
            seed: 0,
            diameter_samples: 6,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(CqmsError::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(CqmsError::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.grid_resolution < 2 {
            return Err(CqmsError::InvalidArgument("grid_resolution must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MetricResult<T: Scalar> {
    pub value: T,
    pub lower_bound: T,
    pub upper_bound: T,
    /// Self-adjoint element with `L ≤ 1`, `μ(w) = 0` and `|ν(w)| = lower_bound`.
    pub witness: Option<AlgElement<T>>,
    pub iterations: usize,
    /// False when the bounds did not meet within tolerance.
    pub converged: bool,
    /// The difference of the states sees the kernel of `L`; distance is `+∞`.
    pub unbounded: bool,
    pub method: SolverMethod,
}

impl<T: Scalar> MetricResult<T> {
    fn zero(method: SolverMethod, witness: AlgElement<T>) -> Self {
        Self {
            value: T::zero(),
            lower_bound: T::zero(),
            upper_bound: T::zero(),
            witness: Some(witness),
            iterations: 0,
            converged: true,
            unbounded: false,
            method,
        }
    }

    fn infinite(method: SolverMethod) -> Self {
        Self {
            value: T::infinity(),
            lower_bound: T::infinity(),
            upper_bound: T::infinity(),
            witness: None,
            iterations: 0,
            converged: true,
            unbounded: true,
            method,
        }
    }

    pub fn gap(&self) -> T {
        if self.unbounded {
            T::zero()
        } else {
            self.upper_bound - self.lower_bound
        }
    }
}

fn resolve<T: Scalar>(l: &LipSeminorm<T>, method: SolverMethod) -> Result<SolverMethod> {
    let metric = l.metric_table().is_some();
    match method {
        SolverMethod::Auto if metric => Ok(SolverMethod::PrimalTransport),
        SolverMethod::Auto => Ok(SolverMethod::Supergradient),
        SolverMethod::DualLp | SolverMethod::PrimalTransport if !metric => Err(CqmsError::IncompatibleMethod {
            method: method.name(),
            seminorm: l.kind_name(),
        }),
        m => Ok(m),
    }
}

fn lex_cmp<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Monge-Kantorovich distance between two states.
///
/// The computation is symmetric by construction: the pair is put in a
/// canonical order before solving, so swapping `mu` and `nu` returns the
/// same numbers.
pub fn mk_distance<T: Scalar>(
    l: &LipSeminorm<T>,
    mu: &AlgState<T>,
    nu: &AlgState<T>,
    cfg: &SolverConfig<T>,
) -> Result<MetricResult<T>> {
    cfg.validate()?;
    let alg = l.algebra();
    alg.check_same(mu.algebra())?;
    alg.check_same(nu.algebra())?;
    let method = resolve(l, cfg.method)?;

    let (cm, cn) = (mu.sa_coords(), nu.sa_coords());
    let (first, second) = if lex_cmp(&cm, &cn) == Ordering::Greater {
        (nu, mu)
    } else {
        (mu, nu)
    };
    let c = first.sa_coords() - second.sa_coords();
    if c.amax() <= T::exact_tol() {
        return Ok(MetricResult::zero(method, AlgElement::zero(alg)));
    }

    let mut result = match method {
        SolverMethod::DualLp => {
            let (p, q) = (first.probabilities(), second.probabilities());
            let d = l.metric_table().expect("resolved to a metric method");
            let (value, f, pivots) = dual_optimum(d, &p, &q, cfg.max_iters)?;
            let witness = AlgElement::from_function(alg, &f)?;
            let mut r = certify_witness(l, first, second, witness, method)?;
            r.value = value;
            r.upper_bound = value.max(r.lower_bound);
            r.iterations = pivots;
            r
        }
        SolverMethod::PrimalTransport => {
            let (p, q) = (first.probabilities(), second.probabilities());
            let d = l.metric_table().expect("resolved to a metric method");
            let plan = lp::transport(d, &p, &q)?;
            let f = lp::kantorovich_potential(d, &plan.plan);
            let witness = AlgElement::from_function(alg, &f)?;
            let mut r = certify_witness(l, first, second, witness, method)?;
            r.value = plan.cost;
            r.upper_bound = plan.cost.max(r.lower_bound);
            r.iterations = plan.augmentations;
            r
        }
        SolverMethod::Supergradient => cutting_plane(l, first, second, &c, cfg)?,
        SolverMethod::BruteForceGrid => grid_search(l, first, second, &c, cfg)?,
        SolverMethod::Auto => unreachable!("auto is resolved above"),
    };
    if let Some(w) = result.witness.take() {
        result.witness = Some(gauge(mu, w)?);
    }
    Ok(result)
}

fn gauge<T: Scalar>(mu: &AlgState<T>, w: AlgElement<T>) -> Result<AlgElement<T>> {
    let m = mu.evaluate(&w)?;
    Ok(w.shift(-nalgebra::Complex::new(m.re, T::zero())))
}

/// Lower bound from a candidate element, rescaled into the unit ball.
fn certify_witness<T: Scalar>(
    l: &LipSeminorm<T>,
    mu: &AlgState<T>,
    nu: &AlgState<T>,
    w: AlgElement<T>,
    method: SolverMethod,
) -> Result<MetricResult<T>> {
    let lw = l.evaluate(&w)?;
    let w = if lw > T::one() { w.scale_real(T::one() / lw) } else { w };
    let gap = (mu.evaluate(&w)? - nu.evaluate(&w)?).re;
    let (w, gap) = if gap < T::zero() { (w.scale_real(-T::one()), -gap) } else { (w, gap) };
    Ok(MetricResult {
        value: gap,
        lower_bound: gap,
        upper_bound: gap,
        witness: Some(w),
        iterations: 0,
        converged: true,
        unbounded: false,
        method,
    })
}

/// Kantorovich dual `max Σ (p − q)·f` over 1-Lipschitz `f`, as an LP in
/// `g = f + d(·, 0) ≥ 0` with `g(0) = 0` so that the origin is feasible.
fn dual_optimum<T: Scalar>(d: &DMatrix<T>, p: &[T], q: &[T], max_iters: usize) -> Result<(T, Vec<T>, usize)> {
    let n = p.len();
    if n == 1 {
        return Ok((T::zero(), vec![T::zero()], 0));
    }
    let rows = n * (n - 1);
    let mut a = DMatrix::<T>::zeros(rows, n - 1);
    let mut b = Vec::with_capacity(rows);
    let mut r = 0;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            if x > 0 {
                a[(r, x - 1)] = T::one();
            }
            if y > 0 {
                a[(r, y - 1)] = -T::one();
            }
            b.push(d[(x, y)] + d[(x, 0)] - d[(y, 0)]);
            r += 1;
        }
    }
    let c: Vec<T> = (1..n).map(|x| p[x] - q[x]).collect();
    let shift = (0..n).fold(T::zero(), |acc, x| acc + (p[x] - q[x]) * d[(x, 0)]);
    let sol = lp::maximize(&a, &b, &c, max_iters.max(50 * (rows + n)))?;
    let mut f = vec![T::zero(); n];
    for x in 1..n {
        f[x] = sol.x[x - 1] - d[(x, 0)];
    }
    Ok((sol.objective - shift, f, sol.pivots))
}

/// Primal and dual transport optima on a finite metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityGap<T: Scalar> {
    pub dual: T,
    pub primal: T,
    pub gap: T,
}

pub fn kantorovich_duality_gap<T: Scalar>(
    d: &DMatrix<T>,
    mu: &[T],
    nu: &[T],
    cfg: &SolverConfig<T>,
) -> Result<DualityGap<T>> {
    crate::seminorm::validate_metric_table(d)?;
    if mu.len() != d.nrows() || nu.len() != d.nrows() {
        return Err(CqmsError::Shape("marginals do not match the metric table".into()));
    }
    let (dual, _, _) = dual_optimum(d, mu, nu, cfg.max_iters)?;
    let primal = lp::transport(d, mu, nu)?.cost;
    Ok(DualityGap {
        dual,
        primal,
        gap: (dual - primal).abs(),
    })
}

struct Reduced<'a, T: Scalar> {
    l: &'a LipSeminorm<T>,
    q: &'a DMatrix<T>,
}

impl<T: Scalar> Reduced<'_, T> {
    fn element(&self, z: &DVector<T>) -> Result<AlgElement<T>> {
        self.l.algebra().from_sa_coords(&(self.q * z))
    }

    fn value(&self, z: &DVector<T>) -> Result<T> {
        self.l.evaluate(&self.element(z)?)
    }

    fn value_and_cuts(&self, z: &DVector<T>) -> Result<(T, Vec<DVector<T>>)> {
        let a = self.element(z)?;
        let (v, grads) = self.l.value_and_subgradients(&a, T::of(1e-3));
        Ok((v, grads.into_iter().map(|g| self.q.transpose() * g).collect()))
    }
}

fn kernel_component<T: Scalar>(l: &LipSeminorm<T>, c: &DVector<T>) -> bool {
    let k = &l.geometry().kernel;
    k.ncols() > 0 && (k.transpose() * c).norm() > T::rank_tol() * (T::one() + c.norm())
}

fn finish_witness<T: Scalar>(
    l: &LipSeminorm<T>,
    mu: &AlgState<T>,
    nu: &AlgState<T>,
    red: &Reduced<'_, T>,
    z: &DVector<T>,
    method: SolverMethod,
) -> Result<MetricResult<T>> {
    certify_witness(l, mu, nu, red.element(z)?, method)
}

/// Kelley cutting planes interleaved with Polyak-step projected supergradient
/// moves on `{z : c·z = 1}`; stops once the certified interval is within
/// `tol`.
fn cutting_plane<T: Scalar>(
    l: &LipSeminorm<T>,
    mu: &AlgState<T>,
    nu: &AlgState<T>,
    c: &DVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<MetricResult<T>> {
    let method = SolverMethod::Supergradient;
    if kernel_component(l, c) {
        return Ok(MetricResult::infinite(method));
    }
    let geo = l.geometry();
    let red = Reduced { l, q: &geo.complement };
    let cr = geo.complement.transpose() * c;
    let r = cr.len();
    if r == 0 || cr.amax() <= T::exact_tol() {
        return Ok(MetricResult::zero(method, AlgElement::zero(l.algebra())));
    }
    let radius = geo.radius;
    let cr_sq = cr.norm_squared();

    let mut cuts: Vec<DVector<T>> = Vec::new();
    let (l0, g0) = red.value_and_cuts(&cr)?;
    cuts.extend(g0);
    let mut best_z = &cr / l0;
    let mut lb = cr_sq / l0;
    let mut ub = cr.norm() * radius;
    let cap = 40 * r + 200;
    let mut iterations = 0;
    let mut converged = false;

    let consider = |z: &DVector<T>, val: T, best_z: &mut DVector<T>, lb: &mut T| {
        if val > T::zero() {
            let q = cr.dot(z) / val;
            if q > *lb {
                *lb = q;
                *best_z = z / val;
            }
        }
    };

    while iterations < cfg.max_iters {
        iterations += 1;

        // Kelley step: max c·z subject to the cuts and the radius box.
        let k = cuts.len();
        let rows = k + 2 * r;
        let mut a = DMatrix::<T>::zeros(rows, 2 * r);
        let mut b = vec![T::one(); rows];
        for (i, g) in cuts.iter().enumerate() {
            for j in 0..r {
                a[(i, j)] = g[j];
                a[(i, r + j)] = -g[j];
            }
        }
        for j in 0..2 * r {
            a[(k + j, j)] = T::one();
            b[k + j] = radius;
        }
        let obj: Vec<T> = cr.iter().copied().chain(cr.iter().map(|&v| -v)).collect();
        let sol = match lp::maximize(&a, &b, &obj, 200 * rows + 1000) {
            Ok(s) => s,
            Err(_) => break,
        };
        let w: Vec<T> = sol.duals[..k].iter().map(|&y| y.max(T::zero())).collect();
        let mut resid = cr.clone();
        let mut wsum = T::zero();
        for (g, &wk) in cuts.iter().zip(&w) {
            if wk > T::zero() {
                resid.axpy(-wk, g, T::one());
                wsum += wk;
            }
        }
        let cert = wsum + radius * resid.lp_norm(1);
        if cert < ub {
            ub = cert;
        }
        if ub - lb <= cfg.tol * T::one().max(ub) {
            converged = true;
            break;
        }

        let zk = DVector::from_fn(r, |j, _| sol.x[j] - sol.x[r + j]);
        if zk.amax() > T::zero() {
            let (v, g) = red.value_and_cuts(&zk)?;
            consider(&zk, v, &mut best_z, &mut lb);
            cuts.extend(g);
        }

        // Polyak steps toward the level 1/ub on the hyperplane c·z = 1.
        let mut p = &best_z / cr.dot(&best_z);
        for _ in 0..3 {
            let (v, g) = red.value_and_cuts(&p)?;
            consider(&p, v, &mut best_z, &mut lb);
            let Some(g0) = g.first() else { break };
            let pg = g0 - &cr * (g0.dot(&cr) / cr_sq);
            let pn = pg.norm_squared();
            cuts.extend(g);
            if pn <= T::exact_tol() * T::exact_tol() {
                break;
            }
            let target = T::one() / ub;
            let step = (v - target).max(T::zero()) / pn;
            p -= pg * step;
        }

        if ub - lb <= cfg.tol * T::one().max(ub) {
            converged = true;
            break;
        }
        if cuts.len() > cap {
            let keep: Vec<DVector<T>> = cuts
                .iter()
                .enumerate()
                .filter(|&(i, _)| (i < k && w[i] > T::zero()) || i + cap / 2 >= cuts.len())
                .map(|(_, g)| g.clone())
                .collect();
            cuts = keep;
        }
    }

    let mut res = finish_witness(l, mu, nu, &red, &best_z, method)?;
    res.upper_bound = ub.max(res.lower_bound);
    res.value = res.lower_bound;
    res.iterations = iterations;
    res.converged = converged || res.upper_bound - res.lower_bound <= cfg.tol * T::one().max(res.upper_bound);
    Ok(res)
}

/// Exhaustive search over a grid on the boundary of the cube `[-1, 1]^r` in
/// reduced coordinates. Every direction is a positive multiple of a boundary
/// point, so the quotient `c·z / L(z)` is maximized there; the Lipschitz
/// continuity of `L` turns the grid into a certified upper bound.
fn grid_search<T: Scalar>(
    l: &LipSeminorm<T>,
    mu: &AlgState<T>,
    nu: &AlgState<T>,
    c: &DVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<MetricResult<T>> {
    let method = SolverMethod::BruteForceGrid;
    if kernel_component(l, c) {
        return Ok(MetricResult::infinite(method));
    }
    let geo = l.geometry();
    let red = Reduced { l, q: &geo.complement };
    let cr = geo.complement.transpose() * c;
    let r = cr.len();
    if r == 0 || cr.amax() <= T::exact_tol() {
        return Ok(MetricResult::zero(method, AlgElement::zero(l.algebra())));
    }
    if r > 4 {
        return Err(CqmsError::InvalidArgument(format!(
            "grid search needs at most 4 reduced dimensions, got {r}"
        )));
    }
    let res = cfg.grid_resolution;
    let h = T::of(2.0) / T::of(res as f64);
    let axis_sum = (0..r)
        .map(|i| red.value(&DVector::from_fn(r, |j, _| if i == j { T::one() } else { T::zero() })))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::zero(), |a, b| a + b);
    let slack_num = cr.lp_norm(1) * h / T::of(2.0);
    let slack_den = axis_sum * h / T::of(2.0);

    let side = res + 1;
    let total = side.pow(r as u32);
    let points: Vec<Vec<usize>> = (0..total)
        .map(|mut idx| {
            (0..r)
                .map(|_| {
                    let k = idx % side;
                    idx /= side;
                    k
                })
                .collect::<Vec<usize>>()
        })
        .filter(|p| p.iter().any(|&k| k == 0 || k == res))
        .collect();
    let evals: Vec<(T, T, T)> = points
        .par_iter()
        .map(|p| {
            let z = DVector::from_fn(r, |j, _| -T::one() + h * T::of(p[j] as f64));
            let v = red.value(&z).unwrap_or_else(|_| T::infinity());
            let num = cr.dot(&z);
            let lower = if v > T::zero() { num / v } else { T::zero() };
            let upper_num = num + slack_num;
            let den = v - slack_den;
            let upper = if upper_num <= T::zero() {
                T::zero()
            } else if den > T::zero() {
                upper_num / den
            } else {
                T::infinity()
            };
            (lower, upper, v)
        })
        .collect();
    let mut best = 0;
    let mut ub = T::zero();
    for (i, e) in evals.iter().enumerate() {
        if e.0 > evals[best].0 {
            best = i;
        }
        if e.1 > ub {
            ub = e.1;
        }
    }
    let zb = DVector::from_fn(r, |j, _| -T::one() + h * T::of(points[best][j] as f64));
    let mut out = finish_witness(l, mu, nu, &red, &(zb / evals[best].2), method)?;
    out.upper_bound = ub.max(out.lower_bound);
    out.value = out.lower_bound;
    out.iterations = points.len();
    out.converged = ub.is_finite_value();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiameterResult<T: Scalar> {
    pub lower: T,
    pub upper: T,
    /// True when the kernel of `L` is larger than the scalars.
    pub infinite: bool,
    /// True when `lower == upper` by construction.
    pub exact: bool,
}

/// Diameter of the state space for `ρ_L`.
///
/// For metric seminorms this is the largest pairwise distance (Dirac states
/// are the extreme points and `ρ_L` is jointly convex). Otherwise the lower
/// end comes from sampled pure-state pairs and the upper end from
/// `|μ(a) − ν(a)| ≤ λ_max(a) − λ_min(a) ≤ √2‖a‖₂ ≤ √2·radius`.
pub fn diameter<T: Scalar>(l: &LipSeminorm<T>, cfg: &SolverConfig<T>) -> Result<DiameterResult<T>> {
    cfg.validate()?;
    if let Some(d) = l.metric_table() {
        let m = d.iter().fold(T::zero(), |a, &b| a.max(b));
        return Ok(DiameterResult {
            lower: m,
            upper: m,
            infinite: false,
            exact: true,
        });
    }
    let geo = l.geometry();
    if geo.kernel_dim() > 1 {
        return Ok(DiameterResult {
            lower: T::infinity(),
            upper: T::infinity(),
            infinite: true,
            exact: true,
        });
    }
    if geo.reduced_dim() == 0 {
        return Ok(DiameterResult {
            lower: T::zero(),
            upper: T::zero(),
            infinite: false,
            exact: true,
        });
    }
    let upper = T::of(std::f64::consts::SQRT_2) * geo.radius;
    let mut rng = sampling::rng(cfg.seed);
    let pairs: Vec<(AlgState<T>, AlgState<T>)> = (0..cfg.diameter_samples)
        .map(|_| {
            (
                sampling::pure_state(&mut rng, l.algebra()),
                sampling::pure_state(&mut rng, l.algebra()),
            )
        })
        .collect();
    let sub = cfg.clone().with_method(SolverMethod::Supergradient);
    let lows = pairs
        .par_iter()
        .map(|(a, b)| mk_distance(l, a, b, &sub).map(|r| r.lower_bound))
        .collect::<Result<Vec<T>>>()?;
    let lower = lows.into_iter().fold(T::zero(), |a, b| a.max(b)).min(upper);
    Ok(DiameterResult {
        lower,
        upper,
        infinite: false,
        exact: false,
    })
}

/// All pairwise distances; row `i`, column `j` is `ρ(states[i], states[j])`.
pub fn distance_matrix<T: Scalar>(
    l: &LipSeminorm<T>,
    states: &[AlgState<T>],
    cfg: &SolverConfig<T>,
) -> Result<Vec<Vec<MetricResult<T>>>> {
    let n = states.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j)| mk_distance(l, &states[i], &states[j], cfg))
        .collect::<Result<Vec<_>>>()?;
    let zero = |i: usize| MetricResult::zero(resolve(l, cfg.method).unwrap_or(cfg.method), AlgElement::zero(states[i].algebra()));
    let mut out: Vec<Vec<Option<MetricResult<T>>>> = (0..n).map(|_| vec![None; n]).collect();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Some(zero(i));
    }
    for ((i, j), r) in pairs.into_iter().zip(results) {
        out[j][i] = Some(r.clone());
        out[i][j] = Some(r);
    }
    Ok(out
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.expect("every entry filled")).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteDimAlgebra;
    use crate::linalg::CMatrix;
    use nalgebra::Complex;

    fn two_point() -> LipSeminorm<f64> {
        let alg = FiniteDimAlgebra::commutative(2, "xy").unwrap();
        LipSeminorm::on_line(&alg, &[0.0, 1.0]).unwrap()
    }

    fn m2_sigma_x() -> LipSeminorm<f64> {
        let m2 = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
        let c = |x: f64| Complex::new(x, 0.0);
        let d = CMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(1.), c(0.)]);
        LipSeminorm::commutator(&m2, vec![d]).unwrap()
    }

    fn basis_state(k: usize) -> AlgState<f64> {
        let m2 = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
        let mut v = vec![Complex::new(0.0, 0.0); 2];
        v[k] = Complex::new(1.0, 0.0);
        AlgState::pure(&m2, 0, &v).unwrap()
    }

    #[test]
    fn equal_states_are_at_distance_zero() {
        let l = two_point();
        let mu = AlgState::from_probabilities(l.algebra(), &[0.4, 0.6]).unwrap();
        for m in [SolverMethod::DualLp, SolverMethod::PrimalTransport, SolverMethod::Supergradient] {
            let r = mk_distance(&l, &mu, &mu, &SolverConfig::default().with_method(m)).unwrap();
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn two_point_diracs_and_mixtures() {
        let l = two_point();
        let x = AlgState::dirac(l.algebra(), 0).unwrap();
        let y = AlgState::dirac(l.algebra(), 1).unwrap();
        for m in SolverMethod::ALL {
            let r = mk_distance(&l, &x, &y, &SolverConfig::default().with_method(m)).unwrap();
            assert!(r.lower_bound <= 1.0 + 1e-12 && r.upper_bound >= 1.0 - 1e-12, "{m}");
            assert!((r.value - 1.0).abs() < 1e-6, "{m}: {}", r.value);
        }
        let (p, q) = (0.3, 0.85);
        let mu = AlgState::from_probabilities(l.algebra(), &[p, 1.0 - p]).unwrap();
        let nu = AlgState::from_probabilities(l.algebra(), &[q, 1.0 - q]).unwrap();
        let r = mk_distance(&l, &mu, &nu, &SolverConfig::default()).unwrap();
        assert!((r.value - (p - q).abs()).abs() < 1e-12);
    }

    #[test]
    fn line_of_three_points() {
        let d = DMatrix::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs());
        let g = kantorovich_duality_gap(&d, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &SolverConfig::default()).unwrap();
        assert!((g.dual - 2.0).abs() < 1e-12 && (g.primal - 2.0).abs() < 1e-12);
        let g = kantorovich_duality_gap(&d, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!((g.dual, g.primal, g.gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn dual_lp_rejects_matrix_seminorms() {
        let l = m2_sigma_x();
        let err = mk_distance(&l, &basis_state(0), &basis_state(1), &SolverConfig::default().with_method(SolverMethod::DualLp));
        assert!(matches!(err, Err(CqmsError::IncompatibleMethod { .. })));
    }

    #[test]
    fn m2_sigma_x_basis_states() {
        // In Pauli coordinates L(yσy + zσz) = 2‖(y, z)‖ and (μ − ν)(a) = 2z,
        // so the supremum is 1.
        let l = m2_sigma_x();
        let (mu, nu) = (basis_state(0), basis_state(1));
        let grid = mk_distance(&l, &mu, &nu, &SolverConfig::default().with_method(SolverMethod::BruteForceGrid)).unwrap();
        assert!(grid.lower_bound <= 1.0 && grid.upper_bound >= 1.0);
        let sg = mk_distance(&l, &mu, &nu, &SolverConfig::default().with_method(SolverMethod::Supergradient)).unwrap();
        assert!(sg.converged);
        assert!((sg.value - 1.0).abs() < 1e-6);
        let w = sg.witness.unwrap();
        assert!(l.evaluate(&w).unwrap() <= 1.0 + 1e-9);
        assert!(mu.evaluate(&w).unwrap().norm() < 1e-12);
    }

    #[test]
    fn m2_sigma_x_sees_kernel() {
        // |+⟩ and |−⟩ differ on σx, which commutes with D.
        let l = m2_sigma_x();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m2 = l.algebra().clone();
        let plus = AlgState::pure(&m2, 0, &[Complex::new(s, 0.0), Complex::new(s, 0.0)]).unwrap();
        let minus = AlgState::pure(&m2, 0, &[Complex::new(s, 0.0), Complex::new(-s, 0.0)]).unwrap();
        let r = mk_distance(&l, &plus, &minus, &SolverConfig::default()).unwrap();
        assert!(r.unbounded && r.value.is_infinite());
        assert!(diameter(&l, &SolverConfig::default()).unwrap().infinite);
    }

    #[test]
    fn symmetric_by_construction() {
        let l = m2_sigma_x();
        let m2 = l.algebra().clone();
        let mu = AlgState::pure(&m2, 0, &[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]).unwrap();
        let nu = basis_state(1);
        let cfg = SolverConfig::default();
        let a = mk_distance(&l, &mu, &nu, &cfg).unwrap();
        let b = mk_distance(&l, &nu, &mu, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.upper_bound, b.upper_bound);
    }

    #[test]
    fn metric_diameters() {
        assert_eq!(diameter(&two_point(), &SolverConfig::default()).unwrap().upper, 1.0);
        let one = FiniteDimAlgebra::commutative(1, "pt").unwrap();
        let l = LipSeminorm::<f64>::on_line(&one, &[0.0]).unwrap();
        assert_eq!(diameter(&l, &SolverConfig::default()).unwrap().upper, 0.0);
        let alg = FiniteDimAlgebra::commutative(11, "grid").unwrap();
        let pts: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let l = LipSeminorm::on_line(&alg, &pts).unwrap();
        assert!((diameter(&l, &SolverConfig::default()).unwrap().upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matrix_diameter_brackets() {
        let m3 = FiniteDimAlgebra::full_matrix(3, "M3").unwrap();
        let d1 = CMatrix::from_fn(3, 3, |i, j| if i == j { Complex::new(i as f64, 0.) } else { Complex::new(0., 0.) });
        let d2 = CMatrix::from_fn(3, 3, |i, j| if i.abs_diff(j) == 1 { Complex::new(1., 0.) } else { Complex::new(0., 0.) });
        let l = LipSeminorm::commutator(&m3, vec![d1, d2]).unwrap();
        let d = diameter(&l, &SolverConfig::default()).unwrap();
        assert!(!d.infinite && d.lower > 0.0 && d.lower <= d.upper);
    }
}
