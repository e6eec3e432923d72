//! Lipschitz seminorms on finite-dimensional algebras.
//!
//! Every variant is a maximum of weighted operator norms of real-linear maps
//! `a ↦ T_j(a)`:
//!
//! * metric Lipschitz constant: `T_{xy}(f) = f(x) − f(y)`, weight `1/d(x,y)`;
//! * commutator seminorm: `T_D(a) = Da − aD` on the block-diagonal
//!   representation, one term per Dirac operator;
//! * group-action seminorm: `T_g(a) = U_g a U_g* − a`, weight `1/ℓ(g)`.
//!
//! This shared shape gives the optimizers in [`crate::mk`] a kernel, a
//! norm-equivalence radius and dual certificates without special cases.

use crate::algebra::{AlgElement, FiniteDimAlgebra};
use crate::error::{CqmsError, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{cabs, creal, Scalar};
use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use std::sync::{Arc, OnceLock};

#[derive(Clone, Debug)]
pub enum SeminormKind<T: Scalar> {
    /// `max |f(x) − f(y)| / d(x, y)` on a commutative algebra.
    FiniteMetricLipschitz { metric: DMatrix<T> },
    /// `max_D ‖[D, a]‖`; several Dirac operators act like their direct sum on
    /// the amplified representation.
    Commutator { diracs: Vec<CMatrix<T>> },
    /// `max_g ‖α_g(a) − a‖ / ℓ(g)` over the non-identity group elements, with
    /// `α_g = Ad(U_g)` on the representation space.
    GroupAction { actions: Vec<CMatrix<T>>, lengths: Vec<T> },
}

/// Kernel and norm-equivalence data of a seminorm on the self-adjoint part.
#[derive(Clone, Debug)]
pub struct Geometry<T: Scalar> {
    /// Orthonormal basis (columns) of `{a = a*: L(a) = 0}` in basis coordinates.
    pub kernel: DMatrix<T>,
    /// Orthonormal basis of the orthogonal complement of the kernel.
    pub complement: DMatrix<T>,
    /// `L(y) ≥ ‖y‖ / radius` for `y` in the complement.
    pub radius: T,
}

impl<T: Scalar> Geometry<T> {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    pub fn reduced_dim(&self) -> usize {
        self.complement.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct LipSeminorm<T: Scalar> {
    algebra: Arc<FiniteDimAlgebra>,
    kind: SeminormKind<T>,
    geometry: OnceLock<Geometry<T>>,
}

/// Checks symmetry, zero diagonal, positivity and the triangle inequality,
/// naming the first offending pair or triple.
pub fn validate_metric_table<T: Scalar>(d: &DMatrix<T>) -> Result<()> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(CqmsError::InvalidSeminorm(format!(
            "metric table must be square, got {}x{}",
            n,
            d.ncols()
        )));
    }
    let scale = d.iter().fold(T::zero(), |a, &b| if b.abs() > a { b.abs() } else { a });
    let tol = T::exact_tol() * (T::one() + scale);
    for x in 0..n {
        if d[(x, x)].abs() > tol {
            return Err(CqmsError::InvalidSeminorm(format!("d({x},{x}) = {} is not zero", d[(x, x)])));
        }
        for y in 0..n {
            if (d[(x, y)] - d[(y, x)]).abs() > tol {
                return Err(CqmsError::InvalidSeminorm(format!(
                    "d({x},{y}) = {} differs from d({y},{x}) = {}",
                    d[(x, y)],
                    d[(y, x)]
                )));
            }
            if x != y && d[(x, y)] <= T::zero() {
                return Err(CqmsError::InvalidSeminorm(format!("d({x},{y}) must be positive")));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if d[(x, z)] > d[(x, y)] + d[(y, z)] + tol {
                    return Err(CqmsError::InvalidSeminorm(format!(
                        "triangle inequality fails: d({x},{z}) > d({x},{y}) + d({y},{z})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Permutation matrix sending basis vector `i` to `perm[i]`.
pub fn permutation_unitary<T: Scalar>(perm: &[usize]) -> CMatrix<T> {
    let n = perm.len();
    let mut u = CMatrix::<T>::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        u[(j, i)] = creal(T::one());
    }
    u
}

impl<T: Scalar> LipSeminorm<T> {
    pub fn finite_metric(algebra: &Arc<FiniteDimAlgebra>, metric: DMatrix<T>) -> Result<Self> {
        if !algebra.is_commutative() {
            return Err(CqmsError::InvalidSeminorm(
                "a metric Lipschitz seminorm needs a commutative algebra".into(),
            ));
        }
        if metric.nrows() != algebra.num_blocks() {
            return Err(CqmsError::InvalidSeminorm(format!(
                "metric table has {} points, algebra has {}",
                metric.nrows(),
                algebra.num_blocks()
            )));
        }
        validate_metric_table(&metric)?;
        Ok(Self::from_kind(algebra, SeminormKind::FiniteMetricLipschitz { metric }))
    }

    /// Metric Lipschitz seminorm for points on the real line.
    pub fn on_line(algebra: &Arc<FiniteDimAlgebra>, points: &[T]) -> Result<Self> {
        let n = points.len();
        let d = DMatrix::from_fn(n, n, |i, j| (points[i] - points[j]).abs());
        Self::finite_metric(algebra, d)
    }

    pub fn commutator(algebra: &Arc<FiniteDimAlgebra>, diracs: Vec<CMatrix<T>>) -> Result<Self> {
        if diracs.is_empty() {
            return Err(CqmsError::InvalidSeminorm("at least one Dirac operator is required".into()));
        }
        let n = algebra.rep_dim();
        for (k, d) in diracs.iter().enumerate() {
            if d.nrows() != n || d.ncols() != n {
                return Err(CqmsError::InvalidSeminorm(format!(
                    "Dirac operator {k} must be {n}x{n}"
                )));
            }
            if linalg::hermitian_residual(d) > T::of(1e-10) * (T::one() + linalg::frobenius(d)) {
                return Err(CqmsError::InvalidSeminorm(format!("Dirac operator {k} is not Hermitian")));
            }
        }
        Ok(Self::from_kind(algebra, SeminormKind::Commutator { diracs }))
    }

    pub fn group_action(
        algebra: &Arc<FiniteDimAlgebra>,
        actions: Vec<CMatrix<T>>,
        lengths: Vec<T>,
    ) -> Result<Self> {
        if actions.is_empty() || actions.len() != lengths.len() {
            return Err(CqmsError::InvalidSeminorm(
                "need one length per non-identity group element".into(),
            ));
        }
        let n = algebra.rep_dim();
        let basis = algebra.sa_basis::<T>();
        for (g, (u, &l)) in actions.iter().zip(&lengths).enumerate() {
            if u.nrows() != n || u.ncols() != n {
                return Err(CqmsError::InvalidSeminorm(format!("action {g} must be {n}x{n}")));
            }
            if linalg::unitary_residual(u) > T::of(1e-10) {
                return Err(CqmsError::InvalidSeminorm(format!("action {g} is not unitary")));
            }
            if l <= T::zero() {
                return Err(CqmsError::InvalidSeminorm(format!("length of element {g} must be positive")));
            }
            for b in &basis {
                let rep = b.to_rep_matrix();
                let moved = u * &rep * u.adjoint();
                let back = AlgElement::from_rep_matrix(algebra, &moved)?.to_rep_matrix();
                if linalg::max_abs_diff(&moved, &back) > T::of(1e-10) {
                    return Err(CqmsError::InvalidSeminorm(format!(
                        "action {g} does not preserve the algebra"
                    )));
                }
            }
        }
        Ok(Self::from_kind(algebra, SeminormKind::GroupAction { actions, lengths }))
    }

    fn from_kind(algebra: &Arc<FiniteDimAlgebra>, kind: SeminormKind<T>) -> Self {
        Self {
            algebra: Arc::clone(algebra),
            kind,
            geometry: OnceLock::new(),
        }
    }

    /// The seminorm `c·L` for `c > 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if c <= T::zero() {
            return Err(CqmsError::InvalidArgument("scale factor must be positive".into()));
        }
        let kind = match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => SeminormKind::FiniteMetricLipschitz {
                metric: metric / c,
            },
            SeminormKind::Commutator { diracs } => SeminormKind::Commutator {
                diracs: diracs.iter().map(|d| d * creal(c)).collect(),
            },
            SeminormKind::GroupAction { actions, lengths } => SeminormKind::GroupAction {
                actions: actions.clone(),
                lengths: lengths.iter().map(|&l| l / c).collect(),
            },
        };
        Ok(Self::from_kind(&self.algebra, kind))
    }

    pub fn algebra(&self) -> &Arc<FiniteDimAlgebra> {
        &self.algebra
    }

    pub fn kind(&self) -> &SeminormKind<T> {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SeminormKind::FiniteMetricLipschitz { .. } => "metric-lipschitz",
            SeminormKind::Commutator { .. } => "commutator",
            SeminormKind::GroupAction { .. } => "group-action",
        }
    }

    pub fn metric_table(&self) -> Option<&DMatrix<T>> {
        match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => Some(metric),
            _ => None,
        }
    }

    /// `L(a)`; the finite variants never return `+∞`.
    pub fn evaluate(&self, a: &AlgElement<T>) -> Result<T> {
        self.algebra.check_same(a.algebra())?;
        Ok(match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => {
                let v = a.values();
                let mut best = T::zero();
                for i in 0..v.len() {
                    for j in (i + 1)..v.len() {
                        let q = cabs(v[i] - v[j]) / metric[(i, j)];
                        if q > best {
                            best = q;
                        }
                    }
                }
                best
            }
            _ => {
                let rep = a.to_rep_matrix();
                (0..self.term_count())
                    .map(|t| {
                        let (m, w) = self.term_matrix(t, &rep);
                        linalg::op_norm(&m) * w
                    })
                    .fold(T::zero(), |x, y| if y > x { y } else { x })
            }
        })
    }

    pub(crate) fn term_count(&self) -> usize {
        match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => {
                let n = metric.nrows();
                n * (n.saturating_sub(1)) / 2
            }
            SeminormKind::Commutator { diracs } => diracs.len(),
            SeminormKind::GroupAction { actions, .. } => actions.len(),
        }
    }

    fn pair_of(n: usize, mut t: usize) -> (usize, usize) {
        for i in 0..n {
            let row = n - i - 1;
            if t < row {
                return (i, i + 1 + t);
            }
            t -= row;
        }
        unreachable!("term index out of range")
    }

    /// Unweighted term matrix and its weight, for `a` in representation form.
    pub(crate) fn term_matrix(&self, t: usize, rep: &CMatrix<T>) -> (CMatrix<T>, T) {
        match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => {
                let (i, j) = Self::pair_of(metric.nrows(), t);
                (
                    CMatrix::from_element(1, 1, rep[(i, i)] - rep[(j, j)]),
                    T::one() / metric[(i, j)],
                )
            }
            SeminormKind::Commutator { diracs } => {
                let d = &diracs[t];
                (d * rep - rep * d, T::one())
            }
            SeminormKind::GroupAction { actions, lengths } => {
                let u = &actions[t];
                (u * rep * u.adjoint() - rep, T::one() / lengths[t])
            }
        }
    }

    /// Blocks `X` with `w·Re(u* T_t(a) v) = Re tr(a X)` for every `a`.
    fn term_pullback(&self, t: usize, u: &linalg::CVector<T>, v: &linalg::CVector<T>) -> Vec<CMatrix<T>> {
        match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => {
                let n = metric.nrows();
                let (i, j) = Self::pair_of(n, t);
                let w = creal(T::one() / metric[(i, j)]);
                let z = v[0] * u[0].conj() * w;
                let mut blocks: Vec<CMatrix<T>> = (0..n).map(|_| CMatrix::zeros(1, 1)).collect();
                blocks[i][(0, 0)] = z;
                blocks[j][(0, 0)] = -z;
                blocks
            }
            SeminormKind::Commutator { diracs } => {
                let d = &diracs[t];
                let vu = v * u.adjoint();
                let x = &vu * d - d * &vu;
                compress(&self.algebra, &x)
            }
            SeminormKind::GroupAction { actions, lengths } => {
                let g = &actions[t];
                let vu = v * u.adjoint();
                let x = (g.adjoint() * &vu * g - vu) * creal(T::one() / lengths[t]);
                compress(&self.algebra, &x)
            }
        }
    }

    /// `L(a)` together with dual certificates: vectors `g` in basis
    /// coordinates with `g·y ≤ L(y)` for every self-adjoint `y`, drawn from
    /// terms within `active_rel` of the maximum.
    pub(crate) fn value_and_subgradients(&self, a: &AlgElement<T>, active_rel: T) -> (T, Vec<DVector<T>>) {
        let rep = a.to_rep_matrix();
        let mut values = Vec::with_capacity(self.term_count());
        let mut mats = Vec::with_capacity(self.term_count());
        for t in 0..self.term_count() {
            let (m, w) = self.term_matrix(t, &rep);
            values.push(linalg::op_norm(&m) * w);
            mats.push(m);
        }
        let lmax = values.iter().fold(T::zero(), |x, &y| if y > x { y } else { x });
        let mut grads = Vec::new();
        for (t, m) in mats.iter().enumerate() {
            if values[t] + active_rel * lmax < lmax {
                continue;
            }
            let (_, pairs) = linalg::top_singular_pairs(m, T::of(1e-6));
            for p in pairs {
                let x = self.term_pullback(t, &p.u, &p.v);
                grads.push(self.algebra.pair_with_basis(&x));
            }
        }
        (lmax, grads)
    }

    /// Kernel, complement and radius of the seminorm on the self-adjoint part.
    pub fn geometry(&self) -> &Geometry<T> {
        self.geometry.get_or_init(|| self.compute_geometry())
    }

    fn compute_geometry(&self) -> Geometry<T> {
        let m = self.algebra.total_dim();
        let mut gram = DMatrix::<T>::zeros(m, m);
        match &self.kind {
            SeminormKind::FiniteMetricLipschitz { metric } => {
                let n = metric.nrows();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let w = T::one() / metric[(i, j)];
                        let w2 = w * w;
                        gram[(i, i)] += w2;
                        gram[(j, j)] += w2;
                        gram[(i, j)] -= w2;
                        gram[(j, i)] -= w2;
                    }
                }
            }
            _ => {
                let basis = self.algebra.sa_basis::<T>();
                for t in 0..self.term_count() {
                    let images: Vec<(CMatrix<T>, T)> = basis
                        .iter()
                        .map(|b| self.term_matrix(t, &b.to_rep_matrix()))
                        .collect();
                    for i in 0..m {
                        for k in i..m {
                            let (ref mi, w) = images[i];
                            let mk = &images[k].0;
                            let n_out = T::of(mi.nrows() as f64);
                            let ip = mi
                                .iter()
                                .zip(mk.iter())
                                .fold(T::zero(), |acc, (x, y)| acc + x.re * y.re + x.im * y.im);
                            let val = ip * w * w / n_out;
                            gram[(i, k)] += val;
                            if i != k {
                                gram[(k, i)] += val;
                            }
                        }
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(gram);
        let lmax = eig
            .eigenvalues
            .iter()
            .fold(T::zero(), |a, &b| if b > a { b } else { a });
        let thresh = lmax * T::rank_tol();
        let mut kernel_cols = Vec::new();
        let mut comp_cols = Vec::new();
        let mut lmin = T::infinity();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            let col = eig.eigenvectors.column(k).into_owned();
            if lam <= thresh {
                kernel_cols.push(col);
            } else {
                if lam < lmin {
                    lmin = lam;
                }
                comp_cols.push(col);
            }
        }
        let terms = T::of(self.term_count().max(1) as f64);
        let radius = if comp_cols.is_empty() {
            T::zero()
        } else {
            (terms / lmin).sqrt()
        };
        let to_mat = |cols: Vec<DVector<T>>| {
            if cols.is_empty() {
                DMatrix::<T>::zeros(m, 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        };
        Geometry {
            kernel: to_mat(kernel_cols),
            complement: to_mat(comp_cols),
            radius,
        }
    }

    /// True when the kernel is exactly the scalars, i.e. the metric it induces
    /// on the state space is finite.
    pub fn kernel_is_scalars(&self) -> bool {
        self.geometry().kernel_dim() == 1
    }

    pub fn check_axioms(&self, samples: &[AlgElement<T>]) -> Result<AxiomReport<T>> {
        if samples.is_empty() {
            return Err(CqmsError::InvalidArgument("axiom check needs at least one sample".into()));
        }
        let one = AlgElement::identity(&self.algebra);
        let unit = self.evaluate(&one)?;
        let values: Vec<T> = samples.iter().map(|a| self.evaluate(a)).collect::<Result<_>>()?;
        let mut report = AxiomReport {
            samples: samples.len(),
            unit_violation: unit.abs(),
            adjoint_violation: T::zero(),
            subadditivity_violation: T::zero(),
            homogeneity_violation: T::zero(),
        };
        let lambdas = [
            Complex::new(T::of(-2.5), T::zero()),
            Complex::new(T::of(0.3), T::zero()),
            Complex::new(T::of(0.6), T::of(0.8)),
            Complex::new(T::of(-1.7), T::of(0.2)),
        ];
        for (a, &la) in samples.iter().zip(&values) {
            let adj = (self.evaluate(&a.adjoint())? - la).abs();
            report.adjoint_violation = max(report.adjoint_violation, adj);
            for &z in &lambdas {
                let lz = self.evaluate(&a.scale(z))?;
                report.homogeneity_violation = max(report.homogeneity_violation, (lz - cabs(z) * la).abs());
            }
        }
        let n = samples.len();
        let pairs: Vec<(usize, usize)> = if n <= 64 {
            (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
        } else {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        };
        for (i, j) in pairs {
            let sum = self.evaluate(&samples[i].add(&samples[j])?)?;
            let excess = sum - values[i] - values[j];
            report.subadditivity_violation = max(report.subadditivity_violation, excess);
        }
        Ok(report)
    }

    /// `L(a) ≤ 1 + tol`.
    pub fn unit_ball_membership(&self, a: &AlgElement<T>, tol: T) -> Result<bool> {
        Ok(self.evaluate(a)? <= T::one() + tol)
    }
}

fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

fn compress<T: Scalar>(algebra: &Arc<FiniteDimAlgebra>, x: &CMatrix<T>) -> Vec<CMatrix<T>> {
    algebra
        .rep_offsets()
        .into_iter()
        .zip(algebra.block_dims())
        .map(|(o, &d)| x.view((o, o), (d, d)).into_owned())
        .collect()
}

/// Largest observed violation of each seminorm axiom over a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport<T: Scalar> {
    pub samples: usize,
    /// `L(1)`.
    pub unit_violation: T,
    /// `max |L(a*) − L(a)|`.
    pub adjoint_violation: T,
    /// `max (L(a+b) − L(a) − L(b))⁺`.
    pub subadditivity_violation: T,
    /// `max |L(λa) − |λ|L(a)|`.
    pub homogeneity_violation: T,
}

impl<T: Scalar> AxiomReport<T> {
    pub fn max_violation(&self) -> T {
        [
            self.unit_violation,
            self.adjoint_violation,
            self.subadditivity_violation,
            self.homogeneity_violation,
        ]
        .into_iter()
        .fold(T::zero(), max)
    }
}
