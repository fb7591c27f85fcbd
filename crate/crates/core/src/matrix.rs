//! Dense complex matrices and the column-stacking vectorization.
//!
//! `vec` stacks columns, so that `vec(A·X·B) = (Bᵀ ⊗ A)·vec(X)`. Every
//! superoperator in the crate is written against this convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| real(entries[i * cols + j]))
}

/// The matrix unit `e_{ij}` (zero-based indices).
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { real(values[i]) } else { ZERO })
}

/// Pauli matrices and the lowering operator `σ_- = [[0,1],[0,0]]`.
pub mod pauli {
    use super::*;

    pub fn x() -> CMatrix {
        from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    pub fn z() -> CMatrix {
        from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn minus() -> CMatrix {
        from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    pub fn plus() -> CMatrix {
        from_real_rows(2, 2, &[0.0, 0.0, 1.0, 0.0])
    }
}

/// `tr(A*·B)`.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            actual: b.shape(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec`] for a square `d×d` matrix.
pub fn unvec(v: &CVector, d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "vector length is not d²");
    CMatrix::from_column_slice(d, d, v.as_slice())
}

pub fn unvec_slice(v: &[Complex64], d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "vector length is not d²");
    CMatrix::from_column_slice(d, d, v)
}

pub fn relative_skew(a: &CMatrix) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / norm
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && relative_skew(a) <= tol
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && (u.adjoint() * u - identity(u.nrows())).norm() <= tol
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * real(0.5)
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Largest off-diagonal-block Frobenius mass of `a` for the given block sizes.
pub fn off_block_norm(a: &CMatrix, sizes: &[usize]) -> f64 {
    let mut owner = Vec::with_capacity(a.nrows());
    for (b, &s) in sizes.iter().enumerate() {
        owner.extend(std::iter::repeat(b).take(s));
    }
    let mut sum = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if owner[i] != owner[j] {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// `Tr_1` over the first (slow) factor of `C^k ⊗ C^m`.
pub fn partial_trace_first(x: &CMatrix, k: usize, m: usize) -> CMatrix {
    assert_eq!(x.nrows(), k * m);
    let mut out = zeros(m, m);
    for j in 0..k {
        out += x.view((j * m, j * m), (m, m));
    }
    out
}

/// `Tr_2` over the second (fast) factor of `C^k ⊗ C^m`.
pub fn partial_trace_second(x: &CMatrix, k: usize, m: usize) -> CMatrix {
    assert_eq!(x.nrows(), k * m);
    CMatrix::from_fn(k, k, |a, b| (0..m).map(|r| x[(a * m + r, b * m + r)]).sum())
}

/// Direct sum of square blocks.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        let s = b.nrows();
        out.view_mut((offset, offset), (s, s)).copy_from(b);
        offset += s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_inner_examples() {
        let one = identity(2);
        assert_eq!(frobenius_inner(&one, &one).unwrap(), real(2.0));
        assert_eq!(frobenius_inner(&pauli::z(), &pauli::x()).unwrap(), ZERO);
        let sm = pauli::minus();
        assert_eq!(frobenius_inner(&sm, &sm).unwrap(), ONE);
        assert!(matches!(
            frobenius_inner(&identity(2), &identity(3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn vec_is_column_stacking() {
        let x = CMatrix::from_row_slice(2, 2, &[real(1.0), real(2.0), real(3.0), real(4.0)]);
        let v = vec(&x);
        assert_eq!(v.as_slice(), &[real(1.0), real(3.0), real(2.0), real(4.0)]);
        assert_eq!(unvec(&v, 2), x);
    }

    #[test]
    fn partial_traces_of_product() {
        let a = from_real_rows(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = from_real_rows(3, 3, &[1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 1.0, 1.0, -1.0]);
        let ab = kron(&a, &b);
        let t1 = partial_trace_first(&ab, 2, 3);
        let t2 = partial_trace_second(&ab, 2, 3);
        assert!((t1 - &b * trace(&a)).norm() < 1e-14);
        assert!((t2 - &a * trace(&b)).norm() < 1e-14);
    }

    #[test]
    fn off_block_mass() {
        let a = from_real_rows(3, 3, &[1.0, 0.0, 3.0, 0.0, 1.0, 0.0, 4.0, 0.0, 1.0]);
        assert!((off_block_norm(&a, &[2, 1]) - 5.0).abs() < 1e-14);
        assert_eq!(off_block_norm(&a, &[3]), 0.0);
    }
}
