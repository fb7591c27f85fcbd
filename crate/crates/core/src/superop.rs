use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::linalg;
use crate::matrix::{identity, kron, unvec, vec, CMatrix};

/// Linear map on `d×d` matrices, stored as a `d²×d²` matrix acting on
/// column-stacked vectorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Self {
        assert_eq!(matrix.shape(), (dim * dim, dim * dim), "superoperator shape");
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(dim, identity(dim * dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_matrix(dim, CMatrix::zeros(dim * dim, dim * dim))
    }

    /// `x ↦ A·x·B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self::from_matrix(a.nrows(), kron(&b.transpose(), a))
    }

    /// `x ↦ A·x`.
    pub fn left(a: &CMatrix) -> Self {
        Self::sandwich(a, &identity(a.nrows()))
    }

    /// `x ↦ x·B`.
    pub fn right(b: &CMatrix) -> Self {
        Self::sandwich(&identity(b.nrows()), b)
    }

    /// `x ↦ [H, x]`.
    pub fn commutator(h: &CMatrix) -> Self {
        Self::left(h) - Self::right(h)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        unvec(&(&self.matrix * vec(x)), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self::from_matrix(self.dim, &self.matrix * &other.matrix)
    }

    /// Hilbert–Schmidt adjoint: `tr(A(x)*·y) = tr(x*·A†(y))`.
    pub fn adjoint(&self) -> Superoperator {
        Self::from_matrix(self.dim, self.matrix.adjoint())
    }

    pub fn scale(&self, z: Complex64) -> Superoperator {
        Self::from_matrix(self.dim, &self.matrix * z)
    }

    /// `e^{t·S}`.
    pub fn expm(&self, t: f64) -> Superoperator {
        Self::from_matrix(self.dim, linalg::expm(&(&self.matrix * Complex64::new(t, 0.0))))
    }

    /// Frobenius norm of the `d²×d²` matrix.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Spectral norm of the `d²×d²` matrix.
    pub fn operator_norm(&self) -> f64 {
        linalg::singular_values(&self.matrix).first().copied().unwrap_or(0.0)
    }

    pub fn commutator_with(&self, other: &Superoperator) -> Superoperator {
        &self.compose(other) - &other.compose(self)
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator::from_matrix(self.dim, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator::from_matrix(self.dim, &self.matrix - &rhs.matrix)
    }
}

impl Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Superoperator) -> Superoperator {
        &self + &rhs
    }
}

impl Sub for Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: Superoperator) -> Superoperator {
        &self - &rhs
    }
}

impl Mul for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: &Superoperator) -> Superoperator {
        self.compose(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, pauli, real};
    use proptest::prelude::*;

    fn cmatrix(d: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
            .prop_map(move |v| CMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| c(re, im))))
    }

    proptest! {
        #[test]
        fn vec_contract((a, x, b) in (1usize..=4).prop_flat_map(|d| (cmatrix(d), cmatrix(d), cmatrix(d)))) {
            let direct = &a * &x * &b;
            let via = Superoperator::sandwich(&a, &b).apply(&x);
            prop_assert!((direct - via).norm() <= 1e-12);
        }

        #[test]
        fn adjoint_is_hilbert_schmidt_dual((a, b, x, y) in (1usize..=3).prop_flat_map(|d| (cmatrix(d), cmatrix(d), cmatrix(d), cmatrix(d)))) {
            let s = Superoperator::sandwich(&a, &b);
            let lhs = crate::matrix::frobenius_inner(&s.apply(&x), &y).unwrap();
            let rhs = crate::matrix::frobenius_inner(&x, &s.adjoint().apply(&y)).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn expm_at_zero_is_identity() {
        let s = Superoperator::commutator(&pauli::x());
        assert!((s.expm(0.0).matrix() - identity(4)).norm() < 1e-15);
    }

    #[test]
    fn expm_of_square_zero_map_truncates() {
        // x ↦ σ_-·x·σ_- squares to zero.
        let s = Superoperator::sandwich(&pauli::minus(), &pauli::minus());
        assert!(s.compose(&s).norm() == 0.0);
        let t = 2.5;
        let expected = &Superoperator::identity(2) + &s.scale(real(t));
        assert!((s.expm(t).matrix() - expected.matrix()).norm() < 1e-14);
    }

    #[test]
    fn semigroup_property() {
        let s = Superoperator::commutator(&pauli::y()).scale(c(0.0, 1.0))
            + Superoperator::sandwich(&pauli::z(), &pauli::z())
            - Superoperator::identity(2);
        let (t, u) = (0.7, 1.9);
        let lhs = s.expm(t + u);
        let rhs = s.expm(t).compose(&s.expm(u));
        let bound = 1e-8 * (s.operator_norm() * (t + u)).exp();
        assert!((lhs.matrix() - rhs.matrix()).norm() <= bound);
    }
}
