//! Subspaces and *-subalgebras of `M_d`, stored as Frobenius-orthonormal bases.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{canonical_basis, column_span, stacked_nullspace};
use crate::matrix::{identity, kron, unvec_slice, vec, zeros, CMatrix, ONE};
use crate::tol::Tolerance;

/// A linear subspace of `M_d` with an orthonormal (Frobenius) basis.
///
/// The basis is kept as the columns of a `d²×n` matrix of vectorizations, in
/// canonical form (see [`canonical_basis`]), so equal subspaces have equal bases.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpace {
    dim: usize,
    basis: CMatrix,
}

impl OperatorSpace {
    /// Wraps a `d²×n` matrix with orthonormal columns, canonicalizing it.
    pub fn from_orthonormal(dim: usize, basis: CMatrix) -> Self {
        assert_eq!(basis.nrows(), dim * dim);
        Self {
            dim,
            basis: canonical_basis(&basis),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            basis: zeros(dim * dim, 0),
        }
    }

    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            basis: identity(dim * dim),
        }
    }

    /// Span of `elements`; elements with norm `≤ rank_rel·max norm` are ignored
    /// and the rest are normalized before the rank decision.
    pub fn span(dim: usize, elements: &[CMatrix], tol: &Tolerance) -> Self {
        let cols = normalized_vecs(elements, tol);
        if cols.is_empty() {
            return Self::zero(dim);
        }
        let m = CMatrix::from_columns(&cols);
        Self {
            dim,
            basis: column_span(&m, tol, None),
        }
    }

    /// Span of the columns of a `d²×n` matrix of vectorized operators.
    pub fn span_of_vectors(dim: usize, vectors: &CMatrix, tol: &Tolerance) -> Self {
        assert_eq!(vectors.nrows(), dim * dim);
        Self {
            dim,
            basis: column_span(vectors, tol, None),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    /// `d²×n` matrix whose columns are the vectorized basis elements.
    pub fn basis_vectors(&self) -> &CMatrix {
        &self.basis
    }

    pub fn element(&self, i: usize) -> CMatrix {
        unvec_slice(self.basis.column(i).as_slice(), self.dim)
    }

    pub fn elements(&self) -> Vec<CMatrix> {
        (0..self.dimension()).map(|i| self.element(i)).collect()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let v = vec(x);
        let coeffs = self.basis.adjoint() * &v;
        unvec_slice((&self.basis * coeffs).as_slice(), self.dim)
    }

    /// Frobenius distance from `x` to the subspace.
    pub fn distance(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &CMatrix, tol: &Tolerance) -> bool {
        self.distance(x) <= tol.residual * x.norm().max(1.0)
    }

    /// Largest distance of a basis element of `self` from `other`.
    pub fn excess_over(&self, other: &OperatorSpace) -> f64 {
        let proj = &other.basis * (other.basis.adjoint() * &self.basis);
        (0..self.dimension())
            .map(|i| (self.basis.column(i) - proj.column(i)).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_subspace_of(&self, other: &OperatorSpace, tol: &Tolerance) -> bool {
        self.dimension() <= other.dimension() && self.excess_over(other) <= tol.residual
    }

    pub fn equals(&self, other: &OperatorSpace, tol: &Tolerance) -> bool {
        self.dim == other.dim
            && self.dimension() == other.dimension()
            && self.excess_over(other) <= tol.residual
            && other.excess_over(self) <= tol.residual
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &OperatorSpace, tol: &Tolerance) -> OperatorSpace {
        let mut cols: Vec<DVector<Complex64>> = self.basis.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(other.basis.column_iter().map(|c| c.into_owned()));
        if cols.is_empty() {
            return Self::zero(self.dim);
        }
        Self::span_of_vectors(self.dim, &CMatrix::from_columns(&cols), tol)
    }

    /// `x ↦ U*·x·U` applied to every basis element.
    pub fn conjugated_elements(&self, u: &CMatrix) -> Vec<CMatrix> {
        self.elements().iter().map(|x| u.adjoint() * x * u).collect()
    }
}

fn normalized_vecs(elements: &[CMatrix], tol: &Tolerance) -> Vec<DVector<Complex64>> {
    let max = elements.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return vec![];
    }
    elements
        .iter()
        .filter(|e| e.norm() > tol.rank_rel * max)
        .map(|e| vec(e) / Complex64::new(e.norm(), 0.0))
        .collect()
}

/// Structural residuals of the *-algebra axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraResiduals {
    pub identity: f64,
    pub adjoint: f64,
    pub product: f64,
    pub gram: f64,
}

impl AlgebraResiduals {
    pub fn max(&self) -> f64 {
        self.identity.max(self.adjoint).max(self.product).max(self.gram)
    }
}

/// A unital *-subalgebra of `M_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorAlgebra {
    space: OperatorSpace,
}

impl OperatorAlgebra {
    /// Trusts the caller that `space` is a unital *-algebra; see [`Self::residuals`].
    pub fn from_space(space: OperatorSpace) -> Self {
        Self { space }
    }

    /// `C·1`.
    pub fn scalars(dim: usize) -> Self {
        let mut b = zeros(dim * dim, 1);
        let s = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        for i in 0..dim {
            b[(i * dim + i, 0)] = s;
        }
        Self::from_space(OperatorSpace::from_orthonormal(dim, b))
    }

    /// `M_d`.
    pub fn full(dim: usize) -> Self {
        Self::from_space(OperatorSpace::full(dim))
    }

    /// Diagonal matrices in `M_d`.
    pub fn diagonal(dim: usize) -> Self {
        let mut b = zeros(dim * dim, dim);
        for i in 0..dim {
            b[(i * dim + i, i)] = ONE;
        }
        Self::from_space(OperatorSpace::from_orthonormal(dim, b))
    }

    pub fn space(&self) -> &OperatorSpace {
        &self.space
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.ambient_dim()
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn elements(&self) -> Vec<CMatrix> {
        self.space.elements()
    }

    pub fn contains(&self, x: &CMatrix, tol: &Tolerance) -> bool {
        self.space.contains(x, tol)
    }

    /// Hermitian elements spanning the algebra over the reals.
    pub fn hermitian_spanning_set(&self) -> Vec<CMatrix> {
        let i = Complex64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(2 * self.dimension());
        for b in self.elements() {
            let bs = b.adjoint();
            out.push((&b + &bs) * Complex64::new(0.5, 0.0));
            out.push((&b - &bs) * (-i * 0.5));
        }
        out
    }

    pub fn residuals(&self) -> AlgebraResiduals {
        let d = self.ambient_dim();
        let elems = self.elements();
        let identity_res = self.space.distance(&identity(d));
        let adjoint = elems
            .iter()
            .map(|b| self.space.distance(&b.adjoint()))
            .fold(0.0, f64::max);
        let mut product: f64 = 0.0;
        for a in &elems {
            for b in &elems {
                product = product.max(self.space.distance(&(a * b)));
            }
        }
        let gram = (self.space.basis.adjoint() * &self.space.basis - identity(self.dimension())).norm();
        AlgebraResiduals {
            identity: identity_res,
            adjoint,
            product,
            gram,
        }
    }

    pub fn is_valid(&self, tol: &Tolerance) -> bool {
        self.residuals().max() <= tol.residual
    }

    pub fn is_subalgebra_of(&self, other: &OperatorAlgebra, tol: &Tolerance) -> bool {
        self.space.is_subspace_of(&other.space, tol)
    }

    pub fn is_abelian(&self, tol: &Tolerance) -> bool {
        let elems = self.elements();
        elems.iter().enumerate().all(|(i, a)| {
            elems[i + 1..]
                .iter()
                .all(|b| (a * b - b * a).norm() <= tol.residual)
        })
    }

    pub fn is_factor(&self, tol: &Tolerance) -> bool {
        center(self, tol).dimension() == 1
    }
}

/// Smallest unital *-algebra containing `generators`.
///
/// The span of `{1} ∪ G ∪ G*` is closed under products by repeatedly adding
/// the new directions among all products with the current basis, until the
/// dimension stops growing (at most `d²` rounds).
pub fn generate_algebra(dim: usize, generators: &[CMatrix], tol: &Tolerance) -> OperatorAlgebra {
    let mut seed: Vec<CMatrix> = vec![identity(dim)];
    for g in generators {
        assert_eq!(g.shape(), (dim, dim), "generator shape");
        seed.push(g.clone());
        seed.push(g.adjoint());
    }
    let mut basis = OperatorSpace::span(dim, &seed, tol);
    let mut fresh = basis.elements();
    for _ in 0..dim * dim {
        let current = basis.elements();
        let mut candidates = Vec::with_capacity(2 * current.len() * fresh.len());
        for a in &current {
            for b in &fresh {
                candidates.push(a * b);
                candidates.push(b * a);
            }
        }
        let grown = extend(&basis, &candidates, tol);
        if grown.dimension() == basis.dimension() {
            break;
        }
        fresh = new_directions(&basis, &grown, tol);
        basis = grown;
    }
    OperatorAlgebra::from_space(basis)
}

/// `space + span(candidates)`, dropping candidate residuals that are below
/// `rank_rel` times the largest candidate norm.
pub fn extend(space: &OperatorSpace, candidates: &[CMatrix], tol: &Tolerance) -> OperatorSpace {
    let scale = candidates.iter().map(|c| c.norm()).fold(0.0, f64::max);
    extend_scaled(space, candidates, scale, tol)
}

/// `space + span(candidates)` with residual ranks decided against `rank_rel·scale`.
pub fn extend_scaled(space: &OperatorSpace, candidates: &[CMatrix], scale: f64, tol: &Tolerance) -> OperatorSpace {
    let dim = space.ambient_dim();
    if scale == 0.0 || candidates.is_empty() {
        return space.clone();
    }
    let b = space.basis_vectors();
    let residuals: Vec<DVector<Complex64>> = candidates
        .iter()
        .map(|c| {
            let mut v = vec(c);
            for _ in 0..2 {
                let coeffs = b.adjoint() * &v;
                v -= b * coeffs;
            }
            v
        })
        .collect();
    let new = column_span(&CMatrix::from_columns(&residuals), tol, Some(scale));
    if new.ncols() == 0 {
        return space.clone();
    }
    let mut cols: Vec<DVector<Complex64>> = b.column_iter().map(|c| c.into_owned()).collect();
    cols.extend(new.column_iter().map(|c| c.into_owned()));
    OperatorSpace::from_orthonormal(dim, CMatrix::from_columns(&cols))
}

/// Orthonormal elements of `grown` orthogonal to `old`.
pub fn new_directions(old: &OperatorSpace, grown: &OperatorSpace, tol: &Tolerance) -> Vec<CMatrix> {
    let b = old.basis_vectors();
    let residual = grown.basis_vectors() - b * (b.adjoint() * grown.basis_vectors());
    let cols = column_span(&residual, tol, Some(1.0));
    (0..cols.ncols())
        .map(|i| unvec_slice(cols.column(i).as_slice(), old.ambient_dim()))
        .collect()
}

fn max_norm(elements: &[CMatrix]) -> f64 {
    elements.iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// Linear map `x ↦ a·x − x·a` on vectorized `x`.
fn commutator_map(dim: usize, a: &CMatrix) -> CMatrix {
    let one = identity(dim);
    kron(&one, a) - kron(&a.transpose(), &one)
}

/// Commutant `{x : [x,a] = [x,a*] = 0 ∀a}` of a set of operators.
pub fn commutant_of(dim: usize, elements: &[CMatrix], tol: &Tolerance) -> OperatorAlgebra {
    let max = elements.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let mut constraints = Vec::with_capacity(2 * elements.len());
    for e in elements {
        assert_eq!(e.shape(), (dim, dim), "element shape");
        if e.norm() > tol.rank_rel * max {
            let s = Complex64::new(1.0 / e.norm(), 0.0);
            constraints.push(e * s);
            constraints.push(e.adjoint() * s);
        }
    }
    commutant_of_selfadjoint_set(dim, &constraints, tol)
}

fn commutant_of_selfadjoint_set(dim: usize, elements: &[CMatrix], tol: &Tolerance) -> OperatorAlgebra {
    if elements.is_empty() {
        return OperatorAlgebra::full(dim);
    }
    let blocks = elements.iter().map(|a| commutator_map(dim, a));
    let null = stacked_nullspace(dim * dim, blocks, tol, max_norm(elements));
    OperatorAlgebra::from_space(OperatorSpace::from_orthonormal(dim, null))
}

/// Commutant of an algebra (its basis is already *-closed).
pub fn commutant(a: &OperatorAlgebra, tol: &Tolerance) -> OperatorAlgebra {
    commutant_of_selfadjoint_set(a.ambient_dim(), &a.elements(), tol)
}

/// `Z(A) = A ∩ A′`, solved in the coefficient space of the basis of `A`.
pub fn center(a: &OperatorAlgebra, tol: &Tolerance) -> OperatorAlgebra {
    let dim = a.ambient_dim();
    let elems = a.elements();
    let n = elems.len();
    let d2 = dim * dim;
    let blocks = elems.iter().map(|bk| {
        let mut m = zeros(d2, n);
        for (j, bj) in elems.iter().enumerate() {
            let comm = bj * bk - bk * bj;
            m.column_mut(j).copy_from_slice(comm.as_slice());
        }
        m
    });
    let coeffs = stacked_nullspace(n, blocks, tol, 1.0);
    let basis = a.space().basis_vectors() * coeffs;
    OperatorAlgebra::from_space(OperatorSpace::from_orthonormal(dim, basis))
}

/// `A′′ = A` as subspaces.
pub fn double_commutant_check(a: &OperatorAlgebra, tol: &Tolerance) -> bool {
    algebra_equal(&commutant(&commutant(a, tol), tol), a, tol)
}

pub fn algebra_equal(a: &OperatorAlgebra, b: &OperatorAlgebra, tol: &Tolerance) -> bool {
    a.space().equals(b.space(), tol)
}

/// `Z(M) = Z(Z(M)′)`.
pub fn center_of_commutant_identity(m: &OperatorAlgebra, tol: &Tolerance) -> bool {
    let z = center(m, tol);
    let rhs = center(&commutant(&z, tol), tol);
    algebra_equal(&z, &rhs, tol)
}
