//! Minimal central projections and the spatial decomposition
//! `U*·A·U = ⊕_i B(C^{k_i}) ⊗ 1_{m_i}` of a finite-dimensional *-algebra.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{center, OperatorAlgebra, OperatorSpace};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, polar_unitary};
use crate::matrix::{
    direct_sum, identity, kron, off_block_norm, partial_trace_first, partial_trace_second, zeros,
    CMatrix,
};
use crate::tol::Tolerance;

/// Generic-element draws before giving up on separating eigenvalues.
const MAX_SAMPLES: usize = 10;

/// One factor block `B(C^k) ⊗ 1_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub k: usize,
    pub m: usize,
}

/// A minimal central projection together with an orthonormal basis of its range.
#[derive(Debug, Clone)]
pub struct CentralProjection {
    pub projection: CMatrix,
    /// `d×n` isometry onto `range(p)`.
    pub range: CMatrix,
    pub block: Block,
}

/// Random real-Gaussian combination of Hermitian elements, scaled to unit Frobenius norm.
pub fn generic_hermitian(spanning: &[CMatrix], dim: usize, rng: &mut impl Rng) -> CMatrix {
    let mut h = zeros(dim, dim);
    for s in spanning {
        let g: f64 = rng.sample(StandardNormal);
        h += s * Complex64::new(g, 0.0);
    }
    let n = h.norm();
    if n > 0.0 {
        h /= Complex64::new(n, 0.0);
    }
    h
}

/// Random complex-Gaussian combination of elements.
fn generic_element(elements: &[CMatrix], dim: usize, rng: &mut impl Rng) -> CMatrix {
    let mut a = zeros(dim, dim);
    for e in elements {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        a += e * Complex64::new(re, im);
    }
    a
}

/// Eigenspaces of a generic Hermitian element with exactly `expected` clusters
/// separated by at least `10·eig_cluster_abs`; resamples a bounded number of times.
fn separated_eigenspaces(
    spanning: &[CMatrix],
    dim: usize,
    expected: usize,
    tol: &Tolerance,
    rng: &mut impl Rng,
) -> Result<Vec<CMatrix>> {
    let mut worst_gap = f64::INFINITY;
    for _ in 0..MAX_SAMPLES {
        let h = generic_hermitian(spanning, dim, rng);
        let eig = eig_hermitian(&h, tol)?;
        let clusters = eig.clusters(tol.eig_cluster_abs);
        let gap = clusters
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min);
        if clusters.len() == expected && gap >= 10.0 * tol.eig_cluster_abs {
            return Ok(clusters.into_iter().map(|(_, v)| v).collect());
        }
        worst_gap = worst_gap.min(gap);
    }
    Err(Error::DegenerateCenter {
        min_gap: if worst_gap.is_finite() { worst_gap } else { 0.0 },
    })
}

/// Dimension of the compression `W*·A·W` of an algebra to the range of `w`.
fn compressed(a: &OperatorAlgebra, w: &CMatrix, tol: &Tolerance) -> OperatorSpace {
    let n = w.ncols();
    let elems: Vec<CMatrix> = a.elements().iter().map(|b| w.adjoint() * b * w).collect();
    OperatorSpace::span(n, &elems, tol)
}

fn ordering_key(p: &CentralProjection) -> (std::cmp::Reverse<usize>, std::cmp::Reverse<usize>, Vec<std::cmp::Reverse<i64>>) {
    let trace_vector = p
        .projection
        .diagonal()
        .iter()
        .map(|z| std::cmp::Reverse((z.re * 1e9).round() as i64))
        .collect();
    (
        std::cmp::Reverse(p.block.k),
        std::cmp::Reverse(p.block.m),
        trace_vector,
    )
}

/// Minimal projections of `Z(A)`, each with its factor shape.
///
/// Eigenprojections of a generic Hermitian central element; the number of
/// eigenvalue clusters must equal `dim Z(A)`. Sorted by `k` descending, then
/// `m` descending, then by the diagonal of `p` (lexicographically descending).
pub fn minimal_central_projections(
    a: &OperatorAlgebra,
    tol: &Tolerance,
    rng: &mut impl Rng,
) -> Result<Vec<CentralProjection>> {
    let dim = a.ambient_dim();
    let z = center(a, tol);
    let spaces = if z.dimension() == 1 {
        vec![identity(dim)]
    } else {
        separated_eigenspaces(&z.hermitian_spanning_set(), dim, z.dimension(), tol, rng)?
    };
    let mut out = Vec::with_capacity(spaces.len());
    for w in spaces {
        let n = w.ncols();
        let factor_dim = compressed(a, &w, tol).dimension();
        let k = (factor_dim as f64).sqrt().round() as usize;
        if k == 0 || k * k != factor_dim || n % k != 0 {
            return Err(Error::BlockMismatch {
                off_block: factor_dim as f64,
            });
        }
        out.push(CentralProjection {
            projection: &w * w.adjoint(),
            range: w,
            block: Block { k, m: n / k },
        });
    }
    out.sort_by_key(ordering_key);
    Ok(out)
}

/// Change of basis exhibiting the factor blocks of an algebra.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    /// Unitary; block `i` occupies columns `offset(i)..offset(i)+k_i·m_i`, in
    /// Kronecker order (the `k_i` index is the slow one).
    pub u: CMatrix,
    pub blocks: Vec<Block>,
    pub central_projections: Vec<CMatrix>,
}

impl BlockDecomposition {
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.k * b.m).collect()
    }

    pub fn offset(&self, i: usize) -> usize {
        self.blocks[..i].iter().map(|b| b.k * b.m).sum()
    }

    /// `U*·x·U`.
    pub fn conjugate(&self, x: &CMatrix) -> CMatrix {
        self.u.adjoint() * x * &self.u
    }

    /// `U·y·U*`.
    pub fn unconjugate(&self, y: &CMatrix) -> CMatrix {
        &self.u * y * self.u.adjoint()
    }

    /// Diagonal block `i` of `U*·x·U`.
    pub fn block_of(&self, x: &CMatrix, i: usize) -> CMatrix {
        let y = self.conjugate(x);
        let (o, s) = (self.offset(i), self.blocks[i].k * self.blocks[i].m);
        y.view((o, o), (s, s)).into_owned()
    }

    /// `U·(0 ⊕ … ⊕ y ⊕ … ⊕ 0)·U*` with `y` in block `i`.
    pub fn embed(&self, i: usize, y: &CMatrix) -> CMatrix {
        let blocks: Vec<CMatrix> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| if j == i { y.clone() } else { zeros(b.k * b.m, b.k * b.m) })
            .collect();
        self.unconjugate(&direct_sum(&blocks))
    }

    /// `U·(⊕_i y_i)·U*`.
    pub fn assemble(&self, blocks: &[CMatrix]) -> CMatrix {
        self.unconjugate(&direct_sum(blocks))
    }

    pub fn off_block(&self, x: &CMatrix) -> f64 {
        off_block_norm(&self.conjugate(x), &self.sizes())
    }

    /// Worst deviation of `x` from the form `⊕ b_i ⊗ 1_{m_i}`.
    pub fn algebra_residual(&self, x: &CMatrix) -> f64 {
        let mut worst = self.off_block(x);
        for (i, b) in self.blocks.iter().enumerate() {
            let y = self.block_of(x, i);
            let bi = partial_trace_second(&y, b.k, b.m) / Complex64::new(b.m as f64, 0.0);
            worst = worst.max((y - kron(&bi, &identity(b.m))).norm());
        }
        worst
    }

    /// Worst deviation of `x` from the form `⊕ 1_{k_i} ⊗ c_i`.
    pub fn commutant_residual(&self, x: &CMatrix) -> f64 {
        let mut worst = self.off_block(x);
        for (i, b) in self.blocks.iter().enumerate() {
            let y = self.block_of(x, i);
            let ci = partial_trace_first(&y, b.k, b.m) / Complex64::new(b.k as f64, 0.0);
            worst = worst.max((y - kron(&identity(b.k), &ci)).norm());
        }
        worst
    }

    /// Residuals of the decomposition invariants: unitarity, partition of
    /// unity by the central projections, and block form of the algebra basis.
    pub fn invariant_residuals(&self, a: &OperatorAlgebra) -> DecompositionResiduals {
        let d = self.dim();
        let unitary = (self.u.adjoint() * &self.u - identity(d)).norm();
        let mut sum = zeros(d, d);
        let mut orthogonality: f64 = 0.0;
        for (i, p) in self.central_projections.iter().enumerate() {
            sum += p;
            for (j, q) in self.central_projections.iter().enumerate() {
                let expected = if i == j { p.clone() } else { zeros(d, d) };
                orthogonality = orthogonality.max((p * q - expected).norm());
            }
        }
        let partition = (sum - identity(d)).norm().max(orthogonality);
        let block_form = a
            .elements()
            .iter()
            .map(|x| self.algebra_residual(x))
            .fold(0.0, f64::max);
        DecompositionResiduals {
            unitary,
            partition,
            block_form,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionResiduals {
    pub unitary: f64,
    pub partition: f64,
    pub block_form: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        self.unitary.max(self.partition).max(self.block_form)
    }
}

/// Constructive Wedderburn decomposition.
///
/// Inside each central block the eigenprojections of a generic Hermitian
/// element of the factor are `k` equivalent minimal projections `e_j`; an
/// orthonormal basis of `range(e_1)` is transported to `range(e_j)` by the
/// unitary polar factor of `e_j·a·e_1` for a generic element `a`.
pub fn wedderburn(
    a: &OperatorAlgebra,
    tol: &Tolerance,
    rng: &mut impl Rng,
) -> Result<BlockDecomposition> {
    let dim = a.ambient_dim();
    let projections = minimal_central_projections(a, tol, rng)?;
    let mut u = zeros(dim, dim);
    let mut offset = 0;
    for cp in &projections {
        let Block { k, m } = cp.block;
        let w = &cp.range;
        let block_basis = if k == 1 {
            w.clone()
        } else {
            let factor = compressed(a, w, tol);
            let factor_alg = OperatorAlgebra::from_space(factor.clone());
            let n = w.ncols();
            let spaces = separated_eigenspaces(&factor_alg.hermitian_spanning_set(), n, k, tol, rng)?;
            if spaces.iter().any(|e| e.ncols() != m) {
                return Err(Error::BlockMismatch { off_block: f64::NAN });
            }
            let generic = generic_element(&factor.elements(), n, rng);
            let e1 = &spaces[0];
            let mut local = zeros(n, n);
            local.columns_mut(0, m).copy_from(e1);
            for (j, ej) in spaces.iter().enumerate().skip(1) {
                let link = ej.adjoint() * &generic * e1;
                let transported = ej * polar_unitary(&link);
                local.columns_mut(j * m, m).copy_from(&transported);
            }
            w * local
        };
        u.columns_mut(offset, k * m).copy_from(&block_basis);
        offset += k * m;
    }
    Ok(BlockDecomposition {
        u,
        blocks: projections.iter().map(|p| p.block).collect(),
        central_projections: projections.into_iter().map(|p| p.projection).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutant, generate_algebra};
    use crate::matrix::{kron, pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn m2_tensor_one_plus_c() -> OperatorAlgebra {
        // (M_2 ⊗ 1_2) ⊕ C inside M_5.
        let embed = |x: &CMatrix| direct_sum(&[kron(x, &identity(2)), zeros(1, 1)]);
        let gens = vec![embed(&pauli::x()), embed(&pauli::z()), embed(&identity(2))];
        generate_algebra(5, &gens, &tol())
    }

    #[test]
    fn projections_of_full_algebra() {
        let p = minimal_central_projections(&OperatorAlgebra::full(3), &tol(), &mut rng()).unwrap();
        assert_eq!(p.len(), 1);
        assert!((&p[0].projection - identity(3)).norm() < 1e-12);
        assert_eq!(p[0].block, Block { k: 3, m: 1 });
    }

    #[test]
    fn projections_of_diagonal_algebra() {
        let p = minimal_central_projections(&OperatorAlgebra::diagonal(2), &tol(), &mut rng()).unwrap();
        assert_eq!(p.len(), 2);
        assert!((&p[0].projection - crate::matrix::matrix_unit(2, 0, 0)).norm() < 1e-12);
        assert!((&p[1].projection - crate::matrix::matrix_unit(2, 1, 1)).norm() < 1e-12);
    }

    #[test]
    fn projections_of_direct_sum() {
        let a = m2_tensor_one_plus_c();
        assert_eq!(a.dimension(), 5);
        let p = minimal_central_projections(&a, &tol(), &mut rng()).unwrap();
        let ranks: Vec<usize> = p.iter().map(|c| c.range.ncols()).collect();
        assert_eq!(ranks, vec![4, 1]);
        assert_eq!(p[0].block, Block { k: 2, m: 2 });
        for c in &p {
            let w = &c.range;
            let elems: Vec<CMatrix> = a.elements().iter().map(|b| w.adjoint() * b * w).collect();
            let compressed = generate_algebra(w.ncols(), &elems, &tol());
            assert!(compressed.is_factor(&tol()));
        }
    }

    #[test]
    fn wedderburn_of_scalars() {
        let a = OperatorAlgebra::scalars(3);
        let dec = wedderburn(&a, &tol(), &mut rng()).unwrap();
        assert_eq!(dec.blocks, vec![Block { k: 1, m: 3 }]);
        assert!(dec.invariant_residuals(&a).max() < 1e-10);
    }

    #[test]
    fn wedderburn_of_kronecker_algebra() {
        let gens: Vec<CMatrix> = [pauli::x(), pauli::y()].iter().map(|p| kron(p, &identity(2))).collect();
        let a = generate_algebra(4, &gens, &tol());
        let dec = wedderburn(&a, &tol(), &mut rng()).unwrap();
        assert_eq!(dec.blocks, vec![Block { k: 2, m: 2 }]);
        assert!(dec.invariant_residuals(&a).max() < 1e-10);
        let comm = commutant(&a, &tol());
        for x in comm.elements() {
            assert!(dec.commutant_residual(&x) < 1e-10);
        }
    }

    #[test]
    fn wedderburn_of_diagonal() {
        let a = OperatorAlgebra::diagonal(2);
        let dec = wedderburn(&a, &tol(), &mut rng()).unwrap();
        assert_eq!(dec.blocks, vec![Block { k: 1, m: 1 }, Block { k: 1, m: 1 }]);
        assert!(dec.invariant_residuals(&a).max() < 1e-10);
    }

    #[test]
    fn wedderburn_dimension_accounting() {
        let a = m2_tensor_one_plus_c();
        let dec = wedderburn(&a, &tol(), &mut rng()).unwrap();
        let d: usize = dec.blocks.iter().map(|b| b.k * b.m).sum();
        let n: usize = dec.blocks.iter().map(|b| b.k * b.k).sum();
        assert_eq!(d, 5);
        assert_eq!(n, a.dimension());
        assert!(dec.invariant_residuals(&a).max() < 1e-10);
    }
}
