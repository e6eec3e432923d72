//! Unital *-homomorphisms between finite-dimensional algebras in Bratteli
//! form: block multiplicities followed by a unitary conjugation per target
//! block.

use crate::algebra::{AlgElement, AlgState, FiniteDimAlgebra};
use crate::error::{CqmsError, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::Scalar;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct UnitalHom<T: Scalar> {
    source: Arc<FiniteDimAlgebra>,
    target: Arc<FiniteDimAlgebra>,
    /// `multiplicities[i][j]`: copies of source block `i` inside target block `j`.
    multiplicities: Vec<Vec<usize>>,
    unitaries: Option<Vec<CMatrix<T>>>,
}

impl<T: Scalar> UnitalHom<T> {
    /// Validated constructor: unitality and unitarity are enforced.
    pub fn new(
        source: Arc<FiniteDimAlgebra>,
        target: Arc<FiniteDimAlgebra>,
        multiplicities: Vec<Vec<usize>>,
        unitaries: Option<Vec<CMatrix<T>>>,
    ) -> Result<Self> {
        let hom = Self::new_unchecked(source, target, multiplicities, unitaries)?;
        let issues = hom.issues();
        if issues.is_empty() {
            Ok(hom)
        } else {
            Err(CqmsError::InvalidHom(issues.join("; ")))
        }
    }

    /// Only checks array shapes; use [`UnitalHom::issues`] to diagnose the rest.
    pub fn new_unchecked(
        source: Arc<FiniteDimAlgebra>,
        target: Arc<FiniteDimAlgebra>,
        multiplicities: Vec<Vec<usize>>,
        unitaries: Option<Vec<CMatrix<T>>>,
    ) -> Result<Self> {
        let (ks, kt) = (source.num_blocks(), target.num_blocks());
        if multiplicities.len() != ks || multiplicities.iter().any(|row| row.len() != kt) {
            return Err(CqmsError::InvalidHom(format!(
                "multiplicity matrix must be {ks}x{kt}"
            )));
        }
        if let Some(us) = &unitaries {
            if us.len() != kt {
                return Err(CqmsError::InvalidHom(format!("expected {kt} unitaries, got {}", us.len())));
            }
            for (j, (u, &d)) in us.iter().zip(target.block_dims()).enumerate() {
                if u.nrows() != d || u.ncols() != d {
                    return Err(CqmsError::InvalidHom(format!("unitary {j} must be {d}x{d}")));
                }
            }
        }
        Ok(Self {
            source,
            target,
            multiplicities,
            unitaries,
        })
    }

    pub fn identity(algebra: &Arc<FiniteDimAlgebra>) -> Self {
        let k = algebra.num_blocks();
        let m = (0..k).map(|i| (0..k).map(|j| usize::from(i == j)).collect()).collect();
        Self {
            source: Arc::clone(algebra),
            target: Arc::clone(algebra),
            multiplicities: m,
            unitaries: None,
        }
    }

    /// Inner automorphism `a ↦ U a U*` with `U = ⊕ U_j`.
    pub fn inner(algebra: &Arc<FiniteDimAlgebra>, unitaries: Vec<CMatrix<T>>) -> Result<Self> {
        let id = Self::identity(algebra);
        Self::new(Arc::clone(algebra), Arc::clone(algebra), id.multiplicities, Some(unitaries))
    }

    /// Embedding of a commutative algebra along a point map: target point `j`
    /// takes the value at source point `assignment[j]`.
    pub fn from_point_map(
        source: &Arc<FiniteDimAlgebra>,
        target: &Arc<FiniteDimAlgebra>,
        assignment: &[usize],
    ) -> Result<Self> {
        if !source.is_commutative() || !target.is_commutative() {
            return Err(CqmsError::InvalidHom("point maps need commutative algebras".into()));
        }
        if assignment.len() != target.num_blocks() {
            return Err(CqmsError::InvalidHom("assignment length must equal target point count".into()));
        }
        let mut m = vec![vec![0usize; target.num_blocks()]; source.num_blocks()];
        for (j, &i) in assignment.iter().enumerate() {
            if i >= source.num_blocks() {
                return Err(CqmsError::InvalidHom(format!("source point {i} does not exist")));
            }
            m[i][j] = 1;
        }
        Self::new(Arc::clone(source), Arc::clone(target), m, None)
    }

    pub fn source(&self) -> &Arc<FiniteDimAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteDimAlgebra> {
        &self.target
    }

    pub fn multiplicities(&self) -> &[Vec<usize>] {
        &self.multiplicities
    }

    pub fn unitaries(&self) -> Option<&[CMatrix<T>]> {
        self.unitaries.as_deref()
    }

    /// `Σ_i m[i][j] d_i` for each target block.
    pub fn filled_dims(&self) -> Vec<usize> {
        let ds = self.source.block_dims();
        (0..self.target.num_blocks())
            .map(|j| (0..ds.len()).map(|i| self.multiplicities[i][j] * ds[i]).sum())
            .collect()
    }

    /// Itemized violations of unitality and unitarity; empty for a valid hom.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (j, (filled, &d)) in self.filled_dims().into_iter().zip(self.target.block_dims()).enumerate() {
            if filled != d {
                out.push(format!(
                    "unitality fails at target block {j}: multiplicities fill {filled} of {d}"
                ));
            }
        }
        if let Some(us) = &self.unitaries {
            let tol = T::of(1e-10);
            for (j, u) in us.iter().enumerate() {
                let r = linalg::unitary_residual(u);
                if r > tol {
                    out.push(format!("conjugation at target block {j} is not unitary (residual {r:e})"));
                }
            }
        }
        out
    }

    pub fn is_unital(&self) -> bool {
        self.filled_dims()
            .iter()
            .zip(self.target.block_dims())
            .all(|(a, b)| a == b)
    }

    fn layout(&self, j: usize) -> Vec<(usize, usize)> {
        // (source block, offset) in target block j
        let ds = self.source.block_dims();
        let mut off = 0;
        let mut out = Vec::new();
        for (i, &d) in ds.iter().enumerate() {
            for _ in 0..self.multiplicities[i][j] {
                out.push((i, off));
                off += d;
            }
        }
        out
    }

    pub fn apply(&self, a: &AlgElement<T>) -> Result<AlgElement<T>> {
        self.source.check_same(a.algebra())?;
        let mut blocks = Vec::with_capacity(self.target.num_blocks());
        for (j, &dj) in self.target.block_dims().iter().enumerate() {
            let filled = self.filled_dims()[j];
            if filled > dj {
                return Err(CqmsError::InvalidHom(format!(
                    "multiplicities overfill target block {j} ({filled} > {dj})"
                )));
            }
            let mut m = CMatrix::<T>::zeros(dj, dj);
            for (i, off) in self.layout(j) {
                let b = &a.blocks()[i];
                let d = b.nrows();
                m.view_mut((off, off), (d, d)).copy_from(b);
            }
            if let Some(us) = &self.unitaries {
                m = &us[j] * m * us[j].adjoint();
            }
            blocks.push(m);
        }
        AlgElement::new(Arc::clone(&self.target), blocks)
    }

    /// `ν(a) = μ(φ(a))`.
    pub fn dual_pushforward(&self, mu: &AlgState<T>) -> Result<AlgState<T>> {
        self.target.check_same(mu.algebra())?;
        if !self.is_unital() {
            return Err(CqmsError::InvalidHom(
                "the dual of a non-unital map does not preserve states".into(),
            ));
        }
        let mut acc: Vec<CMatrix<T>> = self
            .source
            .block_dims()
            .iter()
            .map(|&d| CMatrix::zeros(d, d))
            .collect();
        for (j, eff) in mu.effective_blocks().into_iter().enumerate() {
            let sigma = match &self.unitaries {
                Some(us) => us[j].adjoint() * eff * &us[j],
                None => eff,
            };
            for (i, off) in self.layout(j) {
                let d = acc[i].nrows();
                acc[i] += sigma.view((off, off), (d, d));
            }
        }
        AlgState::from_blocks(&self.source, acc)
    }

    /// `then ∘ self`.
    pub fn compose(&self, then: &UnitalHom<T>) -> Result<UnitalHom<T>> {
        self.target.check_same(then.source())?;
        let (ka, kb, kc) = (
            self.source.num_blocks(),
            self.target.num_blocks(),
            then.target.num_blocks(),
        );
        let mut m = vec![vec![0usize; kc]; ka];
        for (i, row) in m.iter_mut().enumerate() {
            for (l, entry) in row.iter_mut().enumerate() {
                *entry = (0..kb)
                    .map(|j| self.multiplicities[i][j] * then.multiplicities[j][l])
                    .sum();
            }
        }
        let ds = self.source.block_dims();
        let mut unitaries = Vec::with_capacity(kc);
        let mut trivial = self.unitaries.is_none() && then.unitaries.is_none();
        for (l, &dl) in then.target.block_dims().iter().enumerate() {
            // items of the nested layout, in the order they appear inside block l
            let mut items: Vec<(usize, usize)> = Vec::new(); // (source block of A, offset)
            let mut inner = Vec::new(); // (B block j, offset of its copy)
            for (j, off_j) in then.layout(l) {
                inner.push((j, off_j));
                for (i, off_i) in self.layout(j) {
                    items.push((i, off_j + off_i));
                }
            }
            let mut canonical: Vec<usize> = (0..items.len()).collect();
            canonical.sort_by_key(|&k| items[k].0);
            let mut perm = CMatrix::<T>::zeros(dl, dl);
            let mut can_off = 0;
            let mut identity_perm = true;
            for &k in &canonical {
                let (i, nested_off) = items[k];
                if nested_off != can_off {
                    identity_perm = false;
                }
                for r in 0..ds[i] {
                    perm[(nested_off + r, can_off + r)] = crate::scalar::cone();
                }
                can_off += ds[i];
            }
            if can_off != dl {
                return Err(CqmsError::InvalidHom("composition of non-unital maps".into()));
            }
            trivial &= identity_perm;
            let mut v = CMatrix::<T>::identity(dl, dl);
            if let Some(us) = &self.unitaries {
                for &(j, off_j) in &inner {
                    let dj = us[j].nrows();
                    v.view_mut((off_j, off_j), (dj, dj)).copy_from(&us[j]);
                }
            }
            let outer = match &then.unitaries {
                Some(us) => us[l].clone(),
                None => CMatrix::identity(dl, dl),
            };
            unitaries.push(outer * v * perm);
        }
        UnitalHom::new_unchecked(
            Arc::clone(&self.source),
            Arc::clone(&then.target),
            m,
            if trivial { None } else { Some(unitaries) },
        )
    }

    /// Whether the hom is a *-isomorphism (a permutation of equal blocks).
    pub fn is_isomorphism(&self) -> bool {
        self.permutation().is_some()
    }

    fn permutation(&self) -> Option<Vec<usize>> {
        let (ks, kt) = (self.source.num_blocks(), self.target.num_blocks());
        if ks != kt {
            return None;
        }
        let mut sigma = vec![usize::MAX; kt];
        #[allow(clippy::needless_range_loop)] // j indexes both sigma and multiplicity columns
        for j in 0..kt {
            let col: Vec<usize> = (0..ks).filter(|&i| self.multiplicities[i][j] != 0).collect();
            if col.len() != 1 || self.multiplicities[col[0]][j] != 1 {
                return None;
            }
            if self.source.block_dims()[col[0]] != self.target.block_dims()[j] {
                return None;
            }
            sigma[j] = col[0];
        }
        let mut seen = vec![false; ks];
        for &i in &sigma {
            if seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(sigma)
    }

    pub fn inverse(&self) -> Result<UnitalHom<T>> {
        let sigma = self
            .permutation()
            .ok_or_else(|| CqmsError::InvalidHom("map is not an isomorphism".into()))?;
        let k = sigma.len();
        let mut m = vec![vec![0usize; k]; k];
        let mut inv_of = vec![0usize; k];
        for (j, &i) in sigma.iter().enumerate() {
            m[j][i] = 1;
            inv_of[i] = j;
        }
        let unitaries = self
            .unitaries
            .as_ref()
            .map(|us| (0..k).map(|i| us[inv_of[i]].adjoint()).collect());
        UnitalHom::new(Arc::clone(&self.target), Arc::clone(&self.source), m, unitaries)
    }
}
