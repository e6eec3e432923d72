//! Small dense complex linear algebra helpers built on nalgebra.

use crate::scalar::{cabs, czero, Scalar};
use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Largest singular value.
pub fn op_norm<T: Scalar>(m: &CMatrix<T>) -> T {
    if m.nrows() == 0 || m.ncols() == 0 {
        return T::zero();
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return cabs(m[(0, 0)]);
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values
        .iter()
        .fold(T::zero(), |acc, &s| if s > acc { s } else { acc })
}

/// A unit pair `(u, v)` with `Re(u* M v)` equal to the largest singular value.
#[derive(Clone, Debug)]
pub struct SingularPair<T: Scalar> {
    pub u: CVector<T>,
    pub v: CVector<T>,
}

/// Largest singular value together with a family of maximizing pairs.
///
/// Singular values within `rel_tol * sigma_max` of the top form a cluster; the
/// returned pairs are `u = U w`, `v = V w` for canonical `w` in that cluster and
/// a few of their normalized sums.
pub fn top_singular_pairs<T: Scalar>(m: &CMatrix<T>, rel_tol: T) -> (T, Vec<SingularPair<T>>) {
    let (r, c) = m.shape();
    if r == 1 && c == 1 {
        let z = m[(0, 0)];
        let s = cabs(z);
        let phase = if s > T::zero() {
            Complex::new(z.re / s, z.im / s)
        } else {
            Complex::new(T::one(), T::zero())
        };
        let u = CVector::from_element(1, phase);
        let v = CVector::from_element(1, Complex::new(T::one(), T::zero()));
        return (s, vec![SingularPair { u, v }]);
    }
    let svd = m.clone().svd(true, true);
    let u_mat = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(T::zero(), |acc, &s| if s > acc { s } else { acc });
    let mut cluster: Vec<usize> = (0..sv.len())
        .filter(|&k| sv[k] >= smax - rel_tol * smax)
        .collect();
    cluster.truncate(4);
    let left = |k: usize| u_mat.column(k).into_owned();
    let right = |k: usize| v_t.row(k).adjoint();
    let mut pairs = Vec::new();
    for &k in &cluster {
        pairs.push(SingularPair { u: left(k), v: right(k) });
    }
    let h = T::of(std::f64::consts::FRAC_1_SQRT_2);
    for (ia, &ka) in cluster.iter().enumerate() {
        for &kb in cluster.iter().skip(ia + 1) {
            for phase in [
                Complex::new(h, T::zero()),
                Complex::new(-h, T::zero()),
                Complex::new(T::zero(), h),
                Complex::new(T::zero(), -h),
            ] {
                let w0 = Complex::new(h, T::zero());
                let u = left(ka) * w0 + left(kb) * phase;
                let v = right(ka) * w0 + right(kb) * phase;
                pairs.push(SingularPair { u, v });
            }
        }
    }
    (smax, pairs)
}

/// Frobenius norm.
pub fn frobenius<T: Scalar>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

/// Maximum entrywise modulus of `a - b`; shapes must agree.
pub fn max_abs_diff<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| {
            let d = cabs(*x - *y);
            if d > acc {
                d
            } else {
                acc
            }
        })
}

pub fn hermitian_residual<T: Scalar>(m: &CMatrix<T>) -> T {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues<T: Scalar>(m: &CMatrix<T>) -> Vec<T> {
    let half = Complex::new(T::of(0.5), T::zero());
    let h = (m + m.adjoint()) * half;
    let eig = SymmetricEigen::new(h);
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

pub fn trace<T: Scalar>(m: &CMatrix<T>) -> Complex<T> {
    let n = m.nrows().min(m.ncols());
    (0..n).fold(czero(), |acc, i| acc + m[(i, i)])
}

/// `trace(a * b)` without forming the product.
pub fn trace_product<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = czero();
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Unitary residual `max |U* U - I|`.
pub fn unitary_residual<T: Scalar>(u: &CMatrix<T>) -> T {
    if u.nrows() != u.ncols() {
        return T::infinity();
    }
    let prod = u.adjoint() * u;
    let id = CMatrix::<T>::identity(u.nrows(), u.ncols());
    max_abs_diff(&prod, &id)
}

/// Block-diagonal direct sum.
pub fn direct_sum<T: Scalar>(blocks: &[&CMatrix<T>]) -> CMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::<T>::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((off, off), (d, d)).copy_from(b);
        off += d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn nilpotent_norm_is_two() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(2., 0.), c(0., 0.), c(0., 0.)]);
        assert!((op_norm(&m) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_pairs_attain_norm() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1., 0.5),
                c(0., 2.),
                c(-1., 0.),
                c(0.3, 0.),
                c(2., -1.),
                c(0., 0.),
                c(0., 0.),
                c(1., 1.),
                c(0.5, 0.),
            ],
        );
        let (s, pairs) = top_singular_pairs(&m, 1e-9);
        assert!((s - op_norm(&m)).abs() < 1e-12);
        for p in pairs {
            let val = (p.u.adjoint() * &m * &p.v)[(0, 0)];
            assert!((val.re - s).abs() < 1e-9, "{val} vs {s}");
        }
    }

    #[test]
    fn degenerate_cluster_pairs_all_attain_norm() {
        // i * sigma_y scaled: both singular values equal 3
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(3., 0.), c(-3., 0.), c(0., 0.)]);
        let (s, pairs) = top_singular_pairs(&m, 1e-9);
        assert!(pairs.len() > 2);
        for p in pairs {
            let val = (p.u.adjoint() * &m * &p.v)[(0, 0)];
            assert!((val.re - s).abs() < 1e-9);
            assert!((p.u.norm() - 1.0).abs() < 1e-12);
        }
    }
}
