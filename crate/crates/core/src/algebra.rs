//! Finite-dimensional C*-algebras as direct sums of full matrix blocks,
//! together with their elements and states.

use crate::error::{CqmsError, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{czero, creal, Scalar};
use nalgebra::{Complex, DVector};
use std::fmt;
use std::sync::Arc;

/// `M_{d_1} ⊕ … ⊕ M_{d_k}`; the commutative case has every `d_i = 1`.
///
/// Equality compares block dimensions only; the label is descriptive.
#[derive(Clone, Debug)]
pub struct FiniteDimAlgebra {
    block_dims: Vec<usize>,
    label: String,
}

impl PartialEq for FiniteDimAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.block_dims == other.block_dims
    }
}

impl Eq for FiniteDimAlgebra {}

impl fmt::Display for FiniteDimAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.label, self.block_dims)
    }
}

impl FiniteDimAlgebra {
    pub fn new(block_dims: Vec<usize>, label: impl Into<String>) -> Result<Arc<Self>> {
        if block_dims.is_empty() {
            return Err(CqmsError::Shape("an algebra needs at least one block".into()));
        }
        if block_dims.contains(&0) {
            return Err(CqmsError::Shape(format!(
                "block dimensions must be positive, got {block_dims:?}"
            )));
        }
        Ok(Arc::new(Self {
            block_dims,
            label: label.into(),
        }))
    }

    /// `C(X)` for a set of `n` points.
    pub fn commutative(n: usize, label: impl Into<String>) -> Result<Arc<Self>> {
        Self::new(vec![1; n], label)
    }

    /// The full matrix algebra `M_k`.
    pub fn full_matrix(k: usize, label: impl Into<String>) -> Result<Arc<Self>> {
        Self::new(vec![k], label)
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&d| d == 1)
    }

    /// `Σ d_i²`, the complex dimension and the real dimension of the self-adjoint part.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }

    /// `Σ d_i`, the size of the block-diagonal representation.
    pub fn rep_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn rep_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.block_dims
            .iter()
            .map(|d| {
                let o = off;
                off += d;
                o
            })
            .collect()
    }

    pub(crate) fn check_same(&self, other: &FiniteDimAlgebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(CqmsError::AlgebraMismatch {
                expected: self.block_dims.clone(),
                found: other.block_dims.clone(),
            })
        }
    }

    /// Coordinates `Re tr(b_i X)` against the orthonormal self-adjoint basis.
    ///
    /// Per block the basis is `E_jj`, then for each `j < k` the pair
    /// `(E_jk + E_kj)/√2` and `i(E_jk − E_kj)/√2`.
    pub fn pair_with_basis<T: Scalar>(&self, blocks: &[CMatrix<T>]) -> DVector<T> {
        let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
        let mut out = Vec::with_capacity(self.total_dim());
        for (b, &d) in blocks.iter().zip(&self.block_dims) {
            for j in 0..d {
                out.push(b[(j, j)].re);
            }
            for j in 0..d {
                for k in (j + 1)..d {
                    out.push((b[(k, j)].re + b[(j, k)].re) * s);
                    out.push((b[(j, k)].im - b[(k, j)].im) * s);
                }
            }
        }
        DVector::from_vec(out)
    }

    /// Self-adjoint element with the given basis coordinates.
    pub fn from_sa_coords<T: Scalar>(self: &Arc<Self>, coords: &DVector<T>) -> Result<AlgElement<T>> {
        if coords.len() != self.total_dim() {
            return Err(CqmsError::Shape(format!(
                "expected {} coordinates, got {}",
                self.total_dim(),
                coords.len()
            )));
        }
        let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
        let mut idx = 0;
        let mut blocks = Vec::with_capacity(self.num_blocks());
        for &d in &self.block_dims {
            let mut m = CMatrix::<T>::zeros(d, d);
            for j in 0..d {
                m[(j, j)] = creal(coords[idx]);
                idx += 1;
            }
            for j in 0..d {
                for k in (j + 1)..d {
                    let xs = coords[idx] * s;
                    let xa = coords[idx + 1] * s;
                    idx += 2;
                    m[(j, k)] = Complex::new(xs, xa);
                    m[(k, j)] = Complex::new(xs, -xa);
                }
            }
            blocks.push(m);
        }
        Ok(AlgElement {
            algebra: Arc::clone(self),
            blocks,
        })
    }

    /// The orthonormal self-adjoint basis in coordinate order.
    pub fn sa_basis<T: Scalar>(self: &Arc<Self>) -> Vec<AlgElement<T>> {
        let m = self.total_dim();
        (0..m)
            .map(|i| {
                let mut e = DVector::<T>::zeros(m);
                e[i] = T::one();
                self.from_sa_coords(&e).expect("coordinate length matches")
            })
            .collect()
    }
}

/// An element of a [`FiniteDimAlgebra`]: one complex matrix per block.
#[derive(Clone, Debug)]
pub struct AlgElement<T: Scalar> {
    algebra: Arc<FiniteDimAlgebra>,
    blocks: Vec<CMatrix<T>>,
}

impl<T: Scalar> AlgElement<T> {
    pub fn new(algebra: Arc<FiniteDimAlgebra>, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(CqmsError::Shape(format!(
                "{} blocks given for an algebra with {}",
                blocks.len(),
                algebra.num_blocks()
            )));
        }
        for (i, (b, &d)) in blocks.iter().zip(algebra.block_dims()).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(CqmsError::Shape(format!(
                    "block {i} is {}x{}, expected {d}x{d}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { algebra, blocks })
    }

    pub fn identity(algebra: &Arc<FiniteDimAlgebra>) -> Self {
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&d| CMatrix::<T>::identity(d, d))
            .collect();
        Self {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    pub fn zero(algebra: &Arc<FiniteDimAlgebra>) -> Self {
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&d| CMatrix::<T>::zeros(d, d))
            .collect();
        Self {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    /// Real-valued function on the points of a commutative algebra.
    pub fn from_function(algebra: &Arc<FiniteDimAlgebra>, values: &[T]) -> Result<Self> {
        let cv: Vec<Complex<T>> = values.iter().map(|&v| creal(v)).collect();
        Self::from_complex_function(algebra, &cv)
    }

    pub fn from_complex_function(algebra: &Arc<FiniteDimAlgebra>, values: &[Complex<T>]) -> Result<Self> {
        if !algebra.is_commutative() {
            return Err(CqmsError::Shape(format!(
                "function values require a commutative algebra, got {algebra}"
            )));
        }
        if values.len() != algebra.num_blocks() {
            return Err(CqmsError::Shape(format!(
                "{} values for {} points",
                values.len(),
                algebra.num_blocks()
            )));
        }
        let blocks = values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect();
        Ok(Self {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    /// Compress a matrix on the representation space to its diagonal blocks.
    pub fn from_rep_matrix(algebra: &Arc<FiniteDimAlgebra>, m: &CMatrix<T>) -> Result<Self> {
        let n = algebra.rep_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(CqmsError::Shape(format!(
                "representation matrix must be {n}x{n}"
            )));
        }
        let blocks = algebra
            .rep_offsets()
            .into_iter()
            .zip(algebra.block_dims())
            .map(|(o, &d)| m.view((o, o), (d, d)).into_owned())
            .collect();
        Ok(Self {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    pub fn algebra(&self) -> &Arc<FiniteDimAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix<T>] {
        &self.blocks
    }

    /// Values of a commutative element, one per point.
    pub fn values(&self) -> Vec<Complex<T>> {
        self.blocks.iter().map(|b| b[(0, 0)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix<T>, &CMatrix<T>) -> CMatrix<T>) -> Result<Self> {
        self.algebra.check_same(&other.algebra)?;
        Ok(Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(|b| b * z).collect(),
        }
    }

    pub fn scale_real(&self, x: T) -> Self {
        self.scale(creal(x))
    }

    /// `self + λ·1`.
    pub fn shift(&self, lambda: Complex<T>) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            for j in 0..b.nrows() {
                b[(j, j)] += lambda;
            }
        }
        out
    }

    /// `(a + a*)/2` and `(a − a*)/2i`, so that `a = a₁ + i a₂`.
    pub fn self_adjoint_parts(&self) -> (Self, Self) {
        let half = creal(T::of(0.5));
        let neg_half_i = Complex::new(T::zero(), T::of(-0.5));
        let adj = self.adjoint();
        let re = self.add(&adj).expect("same algebra").scale(half);
        let im = self.sub(&adj).expect("same algebra").scale(neg_half_i);
        (re, im)
    }

    pub fn hermitian_residual(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::hermitian_residual)
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn is_self_adjoint(&self, tol: T) -> bool {
        self.hermitian_residual() <= tol
    }

    /// Maximum over blocks of the largest singular value.
    pub fn operator_norm(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::op_norm)
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Block-diagonal matrix on `C^{Σ d_i}`.
    pub fn to_rep_matrix(&self) -> CMatrix<T> {
        let refs: Vec<&CMatrix<T>> = self.blocks.iter().collect();
        linalg::direct_sum(&refs)
    }

    /// Coordinates of the self-adjoint part `(a + a*)/2`.
    pub fn sa_coords(&self) -> DVector<T> {
        self.algebra.pair_with_basis(&self.blocks)
    }

    /// Maximum entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(T::zero(), |a, b| if b > a { b } else { a }))
    }

    /// Operator norm of `self − other`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.operator_norm())
    }
}

/// A state `μ(a) = Σ w_i tr(ρ_i a_i)` with trace-one block densities.
#[derive(Clone, Debug)]
pub struct AlgState<T: Scalar> {
    algebra: Arc<FiniteDimAlgebra>,
    densities: Vec<CMatrix<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> AlgState<T> {
    pub fn new(algebra: Arc<FiniteDimAlgebra>, densities: Vec<CMatrix<T>>, weights: Vec<T>) -> Result<Self> {
        let k = algebra.num_blocks();
        if densities.len() != k || weights.len() != k {
            return Err(CqmsError::InvalidState(format!(
                "expected {k} densities and weights, got {} and {}",
                densities.len(),
                weights.len()
            )));
        }
        let tol = T::exact_tol() * T::of(100.0);
        let mut total = T::zero();
        for (i, ((rho, &w), &d)) in densities.iter().zip(&weights).zip(algebra.block_dims()).enumerate() {
            if rho.nrows() != d || rho.ncols() != d {
                return Err(CqmsError::InvalidState(format!("density {i} has the wrong shape")));
            }
            if w < -tol {
                return Err(CqmsError::InvalidState(format!("weight {i} is negative")));
            }
            if linalg::hermitian_residual(rho) > tol {
                return Err(CqmsError::InvalidState(format!("density {i} is not Hermitian")));
            }
            let tr = linalg::trace(rho);
            if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
                return Err(CqmsError::InvalidState(format!("density {i} has trace {tr}, expected 1")));
            }
            if d > 1 {
                let min_eig = linalg::hermitian_eigenvalues(rho)[0];
                if min_eig < -tol {
                    return Err(CqmsError::InvalidState(format!(
                        "density {i} is not positive (eigenvalue {min_eig})"
                    )));
                }
            } else if rho[(0, 0)].re < -tol {
                return Err(CqmsError::InvalidState(format!("density {i} is negative")));
            }
            total += w;
        }
        if (total - T::one()).abs() > tol {
            return Err(CqmsError::InvalidState(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self {
            algebra,
            densities,
            weights,
        })
    }

    /// Normalize a family of positive block matrices `w_i ρ_i` into a state.
    pub fn from_blocks(algebra: &Arc<FiniteDimAlgebra>, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(CqmsError::InvalidState("wrong number of blocks".into()));
        }
        let traces: Vec<T> = blocks.iter().map(|b| linalg::trace(b).re).collect();
        let total = traces.iter().fold(T::zero(), |a, &b| a + b);
        if total <= T::zero() {
            return Err(CqmsError::InvalidState("blocks have zero total trace".into()));
        }
        let mut densities = Vec::with_capacity(blocks.len());
        let mut weights = Vec::with_capacity(blocks.len());
        for ((b, tr), &d) in blocks.into_iter().zip(traces).zip(algebra.block_dims()) {
            if tr > T::zero() {
                let h = (&b + b.adjoint()) * creal(T::of(0.5) / tr);
                densities.push(h);
                weights.push(tr / total);
            } else {
                densities.push(CMatrix::<T>::identity(d, d) * creal(T::one() / T::of(d as f64)));
                weights.push(T::zero());
            }
        }
        Self::new(Arc::clone(algebra), densities, weights)
    }

    /// Vector state of a unit vector in one block.
    pub fn pure(algebra: &Arc<FiniteDimAlgebra>, block: usize, vector: &[Complex<T>]) -> Result<Self> {
        let d = *algebra
            .block_dims()
            .get(block)
            .ok_or_else(|| CqmsError::InvalidState(format!("no block {block}")))?;
        if vector.len() != d {
            return Err(CqmsError::InvalidState("vector length does not match block".into()));
        }
        let norm = vector.iter().fold(T::zero(), |a, z| a + z.re * z.re + z.im * z.im).sqrt();
        if norm <= T::zero() {
            return Err(CqmsError::InvalidState("zero vector".into()));
        }
        let v: Vec<Complex<T>> = vector.iter().map(|z| *z / creal(norm)).collect();
        let blocks = algebra
            .block_dims()
            .iter()
            .enumerate()
            .map(|(i, &di)| {
                if i == block {
                    CMatrix::from_fn(di, di, |r, c| v[r] * v[c].conj())
                } else {
                    CMatrix::zeros(di, di)
                }
            })
            .collect();
        Self::from_blocks(algebra, blocks)
    }

    /// Point mass at `point` of a commutative algebra.
    pub fn dirac(algebra: &Arc<FiniteDimAlgebra>, point: usize) -> Result<Self> {
        if !algebra.is_commutative() {
            return Err(CqmsError::InvalidState("Dirac states need a commutative algebra".into()));
        }
        Self::pure(algebra, point, &[creal(T::one())])
    }

    /// Probability vector on the points of a commutative algebra.
    pub fn from_probabilities(algebra: &Arc<FiniteDimAlgebra>, p: &[T]) -> Result<Self> {
        if !algebra.is_commutative() {
            return Err(CqmsError::InvalidState("probability vectors need a commutative algebra".into()));
        }
        if p.len() != algebra.num_blocks() {
            return Err(CqmsError::InvalidState("probability vector has the wrong length".into()));
        }
        let densities = p.iter().map(|_| CMatrix::from_element(1, 1, creal(T::one()))).collect();
        Self::new(Arc::clone(algebra), densities, p.to_vec())
    }

    /// Normalized trace of the block-diagonal representation.
    pub fn maximally_mixed(algebra: &Arc<FiniteDimAlgebra>) -> Self {
        let n = T::of(algebra.rep_dim() as f64);
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&d| CMatrix::<T>::identity(d, d) * creal(T::one() / n))
            .collect();
        Self::from_blocks(algebra, blocks).expect("identity blocks form a state")
    }

    pub fn algebra(&self) -> &Arc<FiniteDimAlgebra> {
        &self.algebra
    }

    pub fn densities(&self) -> &[CMatrix<T>] {
        &self.densities
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `w_i ρ_i` per block.
    pub fn effective_blocks(&self) -> Vec<CMatrix<T>> {
        self.densities
            .iter()
            .zip(&self.weights)
            .map(|(r, &w)| r * creal(w))
            .collect()
    }

    /// Point masses of a state on a commutative algebra.
    pub fn probabilities(&self) -> Vec<T> {
        self.densities
            .iter()
            .zip(&self.weights)
            .map(|(r, &w)| r[(0, 0)].re * w)
            .collect()
    }

    pub fn evaluate(&self, a: &AlgElement<T>) -> Result<Complex<T>> {
        self.algebra.check_same(a.algebra())?;
        Ok(self
            .densities
            .iter()
            .zip(&self.weights)
            .zip(a.blocks())
            .fold(czero(), |acc, ((r, &w), b)| acc + linalg::trace_product(r, b) * creal(w)))
    }

    /// `μ(b_i)` for the self-adjoint basis.
    pub fn sa_coords(&self) -> DVector<T> {
        self.algebra.pair_with_basis(&self.effective_blocks())
    }

    /// `t·self + (1−t)·other`.
    pub fn convex_combination(&self, t: T, other: &Self) -> Result<Self> {
        self.algebra.check_same(&other.algebra)?;
        if t < T::zero() || t > T::one() {
            return Err(CqmsError::InvalidArgument("mixing parameter must lie in [0, 1]".into()));
        }
        let s = T::one() - t;
        let blocks = self
            .effective_blocks()
            .iter()
            .zip(other.effective_blocks())
            .map(|(a, b)| a * creal(t) + b * creal(s))
            .collect();
        Self::from_blocks(&self.algebra, blocks)
    }

    /// Maximum entrywise distance between the effective block densities.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self
            .effective_blocks()
            .iter()
            .zip(other.effective_blocks())
            .map(|(a, b)| linalg::max_abs_diff(a, &b))
            .fold(T::zero(), |a, b| if b > a { b } else { a }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn rejects_empty_and_zero_blocks() {
        assert!(FiniteDimAlgebra::new(vec![], "x").is_err());
        assert!(FiniteDimAlgebra::new(vec![2, 0], "x").is_err());
    }

    #[test]
    fn identity_evaluates_to_one() {
        let alg = FiniteDimAlgebra::new(vec![1, 2, 3], "mixed").unwrap();
        let mu = AlgState::<f64>::maximally_mixed(&alg);
        let one = AlgElement::identity(&alg);
        let v = mu.evaluate(&one).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn two_point_weighted_sum() {
        let alg = FiniteDimAlgebra::commutative(2, "xy").unwrap();
        let mu = AlgState::from_probabilities(&alg, &[0.3, 0.7]).unwrap();
        let f = AlgElement::<f64>::from_function(&alg, &[2.0, 4.0]).unwrap();
        let v = mu.evaluate(&f).unwrap();
        assert!((v.re - 3.4).abs() < 1e-12);
    }

    #[test]
    fn m2_trace_against_projection() {
        let alg = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
        let mu = AlgState::pure(&alg, 0, &[c(1.0), c(0.0)]).unwrap();
        let a = AlgElement::new(
            Arc::clone(&alg),
            vec![CMatrix::from_row_slice(2, 2, &[c(5.), c(1.), c(1.), c(-5.)])],
        )
        .unwrap();
        assert!((mu.evaluate(&a).unwrap().re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_examples() {
        let two = FiniteDimAlgebra::commutative(2, "xy").unwrap();
        let f = AlgElement::<f64>::from_function(&two, &[3.0, -4.0]).unwrap();
        assert!((f.operator_norm() - 4.0).abs() < 1e-12);
        assert!((AlgElement::<f64>::identity(&two).operator_norm() - 1.0).abs() < 1e-12);
        let m2 = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
        let n = AlgElement::new(
            Arc::clone(&m2),
            vec![CMatrix::from_row_slice(2, 2, &[c(0.), c(2.), c(0.), c(0.)])],
        )
        .unwrap();
        assert!((n.operator_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coordinates_round_trip_hermitian() {
        let alg = FiniteDimAlgebra::new(vec![1, 3], "a").unwrap();
        let x = DVector::from_fn(alg.total_dim(), |i, _| (i as f64 * 0.37).sin());
        let a = alg.from_sa_coords(&x).unwrap();
        assert!(a.is_self_adjoint(1e-14));
        let back = a.sa_coords();
        assert!((back - x).amax() < 1e-13);
    }

    #[test]
    fn basis_is_orthonormal_under_trace_pairing() {
        let alg = FiniteDimAlgebra::new(vec![2, 2], "a").unwrap();
        let basis = alg.sa_basis::<f64>();
        for (i, b) in basis.iter().enumerate() {
            let coords = alg.pair_with_basis(b.blocks());
            for (j, &v) in coords.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn state_coords_are_basis_evaluations() {
        let alg = FiniteDimAlgebra::new(vec![2, 1], "a").unwrap();
        let mu = AlgState::pure(&alg, 0, &[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]).unwrap();
        let coords = mu.sa_coords();
        for (i, b) in alg.sa_basis::<f64>().iter().enumerate() {
            assert!((mu.evaluate(b).unwrap().re - coords[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn self_adjoint_decomposition_recombines() {
        let alg = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
        let a = AlgElement::new(
            Arc::clone(&alg),
            vec![CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex::new(1.0, 2.0),
                    Complex::new(-0.5, 0.25),
                    Complex::new(3.0, -1.0),
                    Complex::new(0.0, 0.7),
                ],
            )],
        )
        .unwrap();
        let (a1, a2) = a.self_adjoint_parts();
        assert!(a1.is_self_adjoint(1e-15) && a2.is_self_adjoint(1e-15));
        let re = a1.add(&a2.scale(Complex::new(0.0, 1.0))).unwrap();
        assert!(re.max_abs_diff(&a).unwrap() < 1e-14);
        let back = a.adjoint().adjoint();
        assert_eq!(back.max_abs_diff(&a).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = FiniteDimAlgebra::commutative(2, "a").unwrap();
        let b = FiniteDimAlgebra::commutative(3, "b").unwrap();
        let mu = AlgState::<f64>::maximally_mixed(&a);
        let f = AlgElement::identity(&b);
        assert!(matches!(mu.evaluate(&f), Err(CqmsError::AlgebraMismatch { .. })));
    }

    #[test]
    fn invalid_states_are_rejected() {
        let alg = FiniteDimAlgebra::commutative(2, "a").unwrap();
        assert!(AlgState::from_probabilities(&alg, &[0.5, 0.6]).is_err());
        assert!(AlgState::from_probabilities(&alg, &[1.5, -0.5]).is_err());
        let m2 = FiniteDimAlgebra::full_matrix(2, "M2").unwrap();
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.), c(0.), c(-0.5)]);
        assert!(AlgState::new(m2, vec![bad], vec![1.0]).is_err());
    }
}
