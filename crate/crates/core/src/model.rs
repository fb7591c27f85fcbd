use crate::error::{Error, Result};
use crate::matrix::{identity, kron, pauli, relative_skew, zeros, CMatrix};
use crate::tol::Tolerance;

/// Lindblad data `{H, L_k}` of a uniformly continuous quantum Markov semigroup.
///
/// The representation is kept verbatim; everything computed from it is a
/// property of the generator, not of the chosen `H` and `L_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QmsModel {
    dim: usize,
    hamiltonian: CMatrix,
    lindblads: Vec<CMatrix>,
    pub label: String,
}

impl QmsModel {
    pub fn new(
        hamiltonian: CMatrix,
        lindblads: Vec<CMatrix>,
        label: impl Into<String>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let dim = hamiltonian.nrows();
        let invalid = |field: &str, reason: String| Error::ModelInvalid {
            field: field.to_string(),
            reason,
        };
        if dim == 0 || !hamiltonian.is_square() {
            return Err(invalid("H", format!("expected a non-empty square matrix, got {:?}", hamiltonian.shape())));
        }
        if hamiltonian.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("H", "non-finite entry".into()));
        }
        let skew = relative_skew(&hamiltonian);
        if skew > tol.hermitian {
            return Err(invalid("H", format!("not Hermitian (relative skew {skew:.3e})")));
        }
        if lindblads.is_empty() {
            return Err(invalid("L", "at least one Lindblad operator is required".into()));
        }
        for (k, l) in lindblads.iter().enumerate() {
            if l.shape() != (dim, dim) {
                return Err(invalid(&format!("L[{k}]"), format!("expected {dim}x{dim}, got {:?}", l.shape())));
            }
            if l.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(invalid(&format!("L[{k}]"), "non-finite entry".into()));
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            lindblads,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[CMatrix] {
        &self.lindblads
    }

    /// `Σ_k L_k*·L_k`.
    pub fn dissipation_sum(&self) -> CMatrix {
        self.lindblads
            .iter()
            .fold(zeros(self.dim, self.dim), |acc, l| acc + l.adjoint() * l)
    }

    /// The model `{W*·H·W, W*·L_k·W}` on the range of an isometry `W`.
    pub fn compress(&self, w: &CMatrix, tol: &Tolerance) -> Result<QmsModel> {
        let h = w.adjoint() * &self.hamiltonian * w;
        let h = (&h + h.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
        let ls = self.lindblads.iter().map(|l| w.adjoint() * l * w).collect();
        QmsModel::new(h, ls, format!("{} (compressed)", self.label), tol)
    }
}

/// Small named models used as fixtures.
pub mod examples {
    use super::*;
    use crate::matrix::diag_real;

    fn build(h: CMatrix, ls: Vec<CMatrix>, label: &str) -> QmsModel {
        QmsModel::new(h, ls, label, &Tolerance::default()).expect("fixture is valid")
    }

    /// `d = 2`, `H = 0`, `L = σ_z`.
    pub fn dephasing() -> QmsModel {
        build(zeros(2, 2), vec![pauli::z()], "dephasing")
    }

    /// `d = 2`, `H = 0`, `L = σ_- = [[0,1],[0,0]]`.
    pub fn amplitude_damping() -> QmsModel {
        build(zeros(2, 2), vec![pauli::minus()], "amplitude damping")
    }

    /// Purely Hamiltonian evolution (`L = 0`).
    pub fn unitary(h: CMatrix) -> QmsModel {
        let d = h.nrows();
        build(h, vec![zeros(d, d)], "unitary")
    }

    /// `H = K⊗1 + 1⊗N_0`, `L = 1⊗σ_-` on `C²⊗C²`, with `K = diag(1,2)`.
    pub fn kronecker_block(n0: &[f64; 2]) -> QmsModel {
        let one = identity(2);
        let k = diag_real(&[1.0, 2.0]);
        let h = kron(&k, &one) + kron(&one, &diag_real(n0));
        build(h, vec![kron(&one, &pauli::minus())], "kronecker block")
    }

    /// `L = σ_z ⊕ σ_-` on `C² ⊕ C²`, `H = 0`.
    pub fn dephasing_plus_damping() -> QmsModel {
        let l = crate::matrix::direct_sum(&[pauli::z(), pauli::minus()]);
        build(zeros(4, 4), vec![l], "dephasing ⊕ damping")
    }
}
