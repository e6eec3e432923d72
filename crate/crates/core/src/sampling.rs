//! Seeded random elements, states and unitaries.
//!
//! All sampling goes through [`ChaCha8Rng`] so that a seed fully determines
//! every downstream number.

use crate::algebra::{AlgElement, AlgState, FiniteDimAlgebra};
use crate::linalg::CMatrix;
use crate::scalar::{cabs, creal, Scalar};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<T: Scalar, R: Rng>(rng: &mut R) -> T {
    T::of(rng.sample::<f64, _>(StandardNormal))
}

fn complex_normal<T: Scalar, R: Rng>(rng: &mut R) -> Complex<T> {
    Complex::new(normal(rng), normal(rng))
}

/// Haar-random unit vector in `C^n`.
pub fn unit_vector<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..n).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if norm > T::of(1e-8) {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn unitary<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> CMatrix<T> {
    let g = CMatrix::<T>::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let m = cabs(d);
        if m > T::zero() {
            let phase = d / m;
            let mut col = q.column_mut(k);
            col *= phase;
        }
    }
    q
}

/// Probability vector drawn uniformly from the simplex.
pub fn simplex_weights<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| T::of(x / s)).collect()
}

/// Pure state supported on a block chosen with probability proportional to
/// its dimension.
pub fn pure_state<T: Scalar, R: Rng>(rng: &mut R, algebra: &Arc<FiniteDimAlgebra>) -> AlgState<T> {
    let dims = algebra.block_dims();
    let total: usize = dims.iter().sum();
    let mut pick = rng.random_range(0..total);
    let mut block = 0;
    while pick >= dims[block] {
        pick -= dims[block];
        block += 1;
    }
    let v = unit_vector(rng, dims[block]);
    AlgState::pure(algebra, block, &v).expect("unit vector gives a pure state")
}

/// Uniform mixture of `components` random pure states.
pub fn mixed_state<T: Scalar, R: Rng>(
    rng: &mut R,
    algebra: &Arc<FiniteDimAlgebra>,
    components: usize,
) -> AlgState<T> {
    let weights = simplex_weights::<T, _>(rng, components.max(1));
    let mut blocks: Vec<CMatrix<T>> = algebra
        .block_dims()
        .iter()
        .map(|&d| CMatrix::zeros(d, d))
        .collect();
    for w in weights {
        let s = pure_state::<T, _>(rng, algebra);
        for (acc, b) in blocks.iter_mut().zip(s.effective_blocks()) {
            *acc += b * creal(w);
        }
    }
    AlgState::from_blocks(algebra, blocks).expect("convex mixture of states")
}

/// Mix of pure states, the maximally mixed state and random mixtures.
pub fn state<T: Scalar, R: Rng>(rng: &mut R, algebra: &Arc<FiniteDimAlgebra>) -> AlgState<T> {
    let u: f64 = rng.random();
    if u < 0.45 {
        pure_state(rng, algebra)
    } else if u < 0.55 {
        AlgState::maximally_mixed(algebra)
    } else {
        let k = rng.random_range(2..=4);
        mixed_state(rng, algebra, k)
    }
}

/// Element with independent standard complex Gaussian entries.
pub fn element<T: Scalar, R: Rng>(rng: &mut R, algebra: &Arc<FiniteDimAlgebra>) -> AlgElement<T> {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&d| CMatrix::from_fn(d, d, |_, _| complex_normal(rng)))
        .collect();
    AlgElement::new(Arc::clone(algebra), blocks).expect("shapes match the algebra")
}

pub fn self_adjoint<T: Scalar, R: Rng>(rng: &mut R, algebra: &Arc<FiniteDimAlgebra>) -> AlgElement<T> {
    element(rng, algebra).self_adjoint_parts().0
}

/// Real function with values uniform in `[-1, 1]`.
pub fn function<T: Scalar, R: Rng>(rng: &mut R, algebra: &Arc<FiniteDimAlgebra>) -> AlgElement<T> {
    let v: Vec<T> = (0..algebra.num_blocks())
        .map(|_| T::of(rng.random_range(-1.0..=1.0)))
        .collect();
    AlgElement::from_function(algebra, &v).expect("one value per point")
}

/// Values at `points` of a random continuous piecewise-linear function on
/// `[0, 1]` with `knots` interior breakpoints and values in `[-1, 1]`.
pub fn piecewise_linear<T: Scalar, R: Rng>(rng: &mut R, points: &[T], knots: usize) -> Vec<T> {
    let mut xs: Vec<f64> = (0..knots).map(|_| rng.random::<f64>()).collect();
    xs.push(0.0);
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    let ys: Vec<f64> = xs.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
    points
        .iter()
        .map(|&p| {
            let t = p.as_f64().clamp(0.0, 1.0);
            let k = xs.partition_point(|&x| x <= t).clamp(1, xs.len() - 1);
            let (x0, x1) = (xs[k - 1], xs[k]);
            let s = if x1 > x0 { (t - x0) / (x1 - x0) } else { 0.0 };
            T::of(ys[k - 1] + s * (ys[k] - ys[k - 1]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(7);
        let u = unitary::<f64, _>(&mut r, 5);
        assert!(linalg::unitary_residual(&u) < 1e-12);
    }

    #[test]
    fn same_seed_same_state() {
        let alg = FiniteDimAlgebra::new(vec![1, 2, 3], "a").unwrap();
        let a: AlgState<f64> = state(&mut rng(11), &alg);
        let b: AlgState<f64> = state(&mut rng(11), &alg);
        assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
    }

    #[test]
    fn mixtures_are_states() {
        let alg = FiniteDimAlgebra::new(vec![2, 3], "a").unwrap();
        let mut r = rng(3);
        for _ in 0..20 {
            let s: AlgState<f64> = mixed_state(&mut r, &alg, 3);
            let one = AlgElement::identity(&alg);
            assert!((s.evaluate(&one).unwrap().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn piecewise_linear_is_lipschitz_between_knots() {
        let pts: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let v = piecewise_linear(&mut rng(1), &pts, 3);
        assert_eq!(v.len(), 21);
        assert!(v.iter().all(|x| x.abs() <= 1.0));
    }
}
