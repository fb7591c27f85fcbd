//! Block form of the Lindblad data relative to the decomposition of `N(T)`,
//! and the factorization `T_t = T^da_t ∘ T^df_t` it induces.

use rand::seq::index::sample;
use rand::Rng;

use crate::algebra::{algebra_equal, OperatorAlgebra, OperatorSpace};
use crate::error::{Error, Result};
use crate::generator::{build_generator, df_subalgebra_scaled, model_scale, GeneratorPair};
use crate::linalg::expm;
use crate::matrix::{
    commutator, hermitian_part, identity, kron, matrix_unit, partial_trace_first, partial_trace_second, real,
    trace, CMatrix, I,
};
use crate::model::QmsModel;
use crate::superop::Superoperator;
use crate::tol::Tolerance;
use crate::wedderburn::{Block, BlockDecomposition, CentralProjection};

/// Cap on sampled product observables per block.
const MAX_PAIRS: usize = 64;

/// `U*·H·U|_i = H_i ⊗ 1 + 1 ⊗ N0_i`, `U*·L_ℓ·U|_i = 1 ⊗ Nk_i[ℓ]`.
#[derive(Debug, Clone)]
pub struct BlockComponents {
    pub block: Block,
    /// Traceless `k×k`.
    pub h: CMatrix,
    pub n0: CMatrix,
    pub nk: Vec<CMatrix>,
}

impl BlockComponents {
    /// The `m`-dimensional model `{N0, Nk}` acting on the multiplicity factor.
    pub fn multiplicity_model(&self, tol: &Tolerance) -> Result<QmsModel> {
        QmsModel::new(self.n0.clone(), self.nk.clone(), "multiplicity factor", tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtractionResiduals {
    /// Worst off-block Frobenius norm of `U*·H·U` and `U*·L_ℓ·U`.
    pub off_block: f64,
    pub hamiltonian: f64,
    pub lindblad: f64,
}

impl ExtractionResiduals {
    pub fn max(&self) -> f64 {
        self.off_block.max(self.hamiltonian).max(self.lindblad)
    }
}

#[derive(Debug, Clone)]
pub struct BlockLindbladData {
    pub decomposition: BlockDecomposition,
    pub components: Vec<BlockComponents>,
    pub residuals: ExtractionResiduals,
}

impl BlockLindbladData {
    pub fn dim(&self) -> usize {
        self.decomposition.dim()
    }

    /// `U·(⊕ H_i ⊗ 1)·U*`.
    pub fn df_hamiltonian(&self) -> CMatrix {
        let blocks: Vec<CMatrix> = self
            .components
            .iter()
            .map(|c| kron(&c.h, &identity(c.block.m)))
            .collect();
        hermitian_part(&self.decomposition.assemble(&blocks))
    }

    /// `U·(⊕ 1 ⊗ N0_i)·U*`.
    pub fn da_hamiltonian(&self) -> CMatrix {
        let blocks: Vec<CMatrix> = self
            .components
            .iter()
            .map(|c| kron(&identity(c.block.k), &c.n0))
            .collect();
        hermitian_part(&self.decomposition.assemble(&blocks))
    }

    /// `U·(⊕ 1 ⊗ Nk_i[ℓ])·U*`.
    pub fn da_lindblad(&self, l: usize) -> CMatrix {
        let blocks: Vec<CMatrix> = self
            .components
            .iter()
            .map(|c| kron(&identity(c.block.k), &c.nk[l]))
            .collect();
        self.decomposition.assemble(&blocks)
    }

    pub fn lindblad_count(&self) -> usize {
        self.components.first().map_or(0, |c| c.nk.len())
    }

    /// `‖H − H̃‖` and `max_ℓ ‖L_ℓ − L̃_ℓ‖` for the data reassembled in the original basis.
    pub fn reconstruction_error(&self, m: &QmsModel) -> (f64, f64) {
        let h = self.df_hamiltonian() + self.da_hamiltonian();
        let h_err = (m.hamiltonian() - h).norm();
        let l_err = m
            .lindblads()
            .iter()
            .enumerate()
            .map(|(l, x)| (x - self.da_lindblad(l)).norm())
            .fold(0.0, f64::max);
        (h_err, l_err)
    }
}

/// Reads off `H_i`, `N0_i`, `Nk_i` by partial traces.
///
/// `Nk_i[ℓ] = Tr_1(block)/k`; the Kronecker-sum part of the Hamiltonian block
/// is the orthogonal projection onto `{X⊗1 + 1⊗Y}`, with `tr H_i = 0`.
pub fn extract_block_data(m: &QmsModel, dec: &BlockDecomposition, tol: &Tolerance) -> Result<BlockLindbladData> {
    let mut residuals = ExtractionResiduals::default();
    let mut offenders = vec![m.hamiltonian()];
    offenders.extend(m.lindblads());
    for x in offenders {
        residuals.off_block = residuals.off_block.max(dec.off_block(x) / (1.0 + x.norm()));
    }
    if residuals.off_block > tol.residual {
        return Err(Error::BlockMismatch {
            off_block: residuals.off_block,
        });
    }
    let mut components = Vec::with_capacity(dec.blocks.len());
    for (i, &block) in dec.blocks.iter().enumerate() {
        let Block { k, m: mult } = block;
        let hb = dec.block_of(m.hamiltonian(), i);
        let a = partial_trace_second(&hb, k, mult) * real(1.0 / mult as f64);
        let n0 = hermitian_part(&(partial_trace_first(&hb, k, mult) * real(1.0 / k as f64)));
        let shift = trace(&a) * real(1.0 / k as f64);
        let h = hermitian_part(&(a - identity(k) * shift));
        let fitted = kron(&h, &identity(mult)) + kron(&identity(k), &n0);
        residuals.hamiltonian = residuals.hamiltonian.max((hb - fitted).norm());
        let mut nk = Vec::with_capacity(m.lindblads().len());
        for l in m.lindblads() {
            let lb = dec.block_of(l, i);
            let n = partial_trace_first(&lb, k, mult) * real(1.0 / k as f64);
            residuals.lindblad = residuals.lindblad.max((lb - kron(&identity(k), &n)).norm());
            nk.push(n);
        }
        components.push(BlockComponents { block, h, n0, nk });
    }
    Ok(BlockLindbladData {
        decomposition: dec.clone(),
        components,
        residuals,
    })
}

/// `L^df = i[H̃, ·]` and `L^da`, the GKSL generator of `{⊕1⊗N0_i, ⊕1⊗Nk_i}`.
#[derive(Debug, Clone)]
pub struct DfDaGenerators {
    pub df: Superoperator,
    pub da: Superoperator,
    /// `‖L^df∘L^da − L^da∘L^df‖_F`.
    pub commutation: f64,
    /// `‖L − L^df − L^da‖_F`.
    pub sum: f64,
}

impl DfDaGenerators {
    /// `max_t ‖e^{tL} − e^{tL^da}·e^{tL^df}‖_F`.
    pub fn factorization_residual(&self, g: &GeneratorPair, ts: &[f64]) -> f64 {
        ts.iter()
            .map(|&t| {
                let lhs = g.semigroup(t);
                let rhs = self.da.expm(t).compose(&self.df.expm(t));
                (lhs.matrix() - rhs.matrix()).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn build_df_da_generators(data: &BlockLindbladData, g: &GeneratorPair, tol: &Tolerance) -> Result<DfDaGenerators> {
    let d = data.dim();
    let df = Superoperator::commutator(&data.df_hamiltonian()).scale(I);
    let ls: Vec<CMatrix> = (0..data.lindblad_count()).map(|l| data.da_lindblad(l)).collect();
    let da_model = QmsModel::new(data.da_hamiltonian(), ls, "da", tol)?;
    let da = build_generator(&da_model).heisenberg;
    debug_assert_eq!(da.dim(), d);
    let commutation = df.commutator_with(&da).norm();
    let scale = 1.0 + g.heisenberg.norm();
    if commutation > tol.residual * scale {
        return Err(Error::CommutationFailure {
            residual: commutation,
        });
    }
    let sum = (g.heisenberg.matrix() - df.matrix() - da.matrix()).norm();
    Ok(DfDaGenerators { df, da, commutation, sum })
}

/// Residuals of the explicit action of `T^df` and of `T_t` on product observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfActionResiduals {
    /// `T^df_t(x) = e^{itH̃}·x·e^{−itH̃}`.
    pub df_conjugation: f64,
    /// `T_t(x⊗y) = e^{itH_i}·x·e^{−itH_i} ⊗ T^{(i)}_t(y)` inside block `i`.
    pub product_action: f64,
}

impl DfActionResiduals {
    pub fn passes(&self, tol: &Tolerance) -> bool {
        self.df_conjugation.max(self.product_action) <= tol.residual
    }
}

/// Matrix-unit pairs `(e_ab, e_cd)` of the two tensor factors, subsampled when numerous.
fn product_pairs(block: Block, rng: &mut impl Rng) -> Vec<((usize, usize), (usize, usize))> {
    let (k2, m2) = (block.k * block.k, block.m * block.m);
    let total = k2 * m2;
    let pick: Vec<usize> = if total <= MAX_PAIRS {
        (0..total).collect()
    } else {
        let mut v = sample(rng, total, MAX_PAIRS).into_vec();
        v.sort_unstable();
        v
    };
    pick.into_iter()
        .map(|p| {
            let (x, y) = (p / m2, p % m2);
            ((x / block.k, x % block.k), (y / block.m, y % block.m))
        })
        .collect()
}

pub fn verify_df_action(
    data: &BlockLindbladData,
    gens: &DfDaGenerators,
    g: &GeneratorPair,
    ts: &[f64],
    tol: &Tolerance,
    rng: &mut impl Rng,
) -> Result<DfActionResiduals> {
    let dec = &data.decomposition;
    let h_df = data.df_hamiltonian();
    let mut out = DfActionResiduals {
        df_conjugation: 0.0,
        product_action: 0.0,
    };
    let local: Vec<GeneratorPair> = data
        .components
        .iter()
        .map(|c| c.multiplicity_model(tol).map(|m| build_generator(&m)))
        .collect::<Result<_>>()?;
    let pairs: Vec<_> = data.components.iter().map(|c| product_pairs(c.block, rng)).collect();
    for &t in ts {
        let tt = g.semigroup(t);
        let tdf = gens.df.expm(t);
        let u = expm(&(&h_df * (I * t)));
        for (i, c) in data.components.iter().enumerate() {
            let Block { k, m } = c.block;
            let ui = expm(&(&c.h * (I * t)));
            let ti = local[i].semigroup(t);
            for &((a, b), (p, q)) in &pairs[i] {
                let x = matrix_unit(k, a, b);
                let y = matrix_unit(m, p, q);
                let obs = dec.embed(i, &kron(&x, &y));
                let conj = &u * &obs * u.adjoint();
                out.df_conjugation = out.df_conjugation.max((tdf.apply(&obs) - conj).norm());
                let expected = dec.embed(i, &kron(&(&ui * &x * ui.adjoint()), &ti.apply(&y)));
                out.product_action = out.product_action.max((tt.apply(&obs) - expected).norm());
            }
        }
    }
    Ok(out)
}

/// Per block: whether `N(T^{(i)}) = C·1` for the multiplicity-factor model.
/// Rank decisions use the largest component scale, so a block whose data is
/// pure roundoff is not mistaken for a model of its own.
pub fn verify_component_triviality(data: &BlockLindbladData, tol: &Tolerance) -> Result<Vec<bool>> {
    let models = data
        .components
        .iter()
        .map(|c| c.multiplicity_model(tol))
        .collect::<Result<Vec<_>>>()?;
    let scale = models.iter().map(model_scale).fold(0.0, f64::max);
    data.components
        .iter()
        .zip(&models)
        .map(|(c, m)| {
            let n = df_subalgebra_scaled(m, scale, tol);
            Ok(algebra_equal(&n, &OperatorAlgebra::scalars(c.block.m), tol))
        })
        .collect()
}

/// Restriction of the dynamics to the range of one minimal central projection of `N(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralRestriction {
    pub rank: usize,
    /// `max(‖[p,H]‖, ‖[p,L_k]‖)`.
    pub commutator_residual: f64,
    /// `N` of the compressed model equals `p·N(T)·p`.
    pub compressed_matches: bool,
    /// `max ‖L(W·y·W*) − W·L_p(y)·W*‖` over matrix units `y`.
    pub generator_residual: f64,
}

impl CentralRestriction {
    pub fn passes(&self, tol: &Tolerance) -> bool {
        self.compressed_matches && self.commutator_residual.max(self.generator_residual) <= tol.residual
    }
}

pub fn verify_central_block_restriction(
    m: &QmsModel,
    g: &GeneratorPair,
    nt: &OperatorAlgebra,
    projections: &[CentralProjection],
    tol: &Tolerance,
) -> Result<Vec<CentralRestriction>> {
    projections
        .iter()
        .map(|cp| {
            let p = &cp.projection;
            let w = &cp.range;
            let n = w.ncols();
            let mut commutator_residual = commutator(p, m.hamiltonian()).norm();
            for l in m.lindblads() {
                commutator_residual = commutator_residual.max(commutator(p, l).norm());
            }
            let compressed = m.compress(w, tol)?;
            let local_nt = df_subalgebra_scaled(&compressed, model_scale(m), tol);
            let restricted: Vec<CMatrix> = nt.elements().iter().map(|x| w.adjoint() * x * w).collect();
            let restricted = OperatorSpace::span(n, &restricted, tol);
            let compressed_matches = local_nt.space().equals(&restricted, tol);
            let local_g = build_generator(&compressed);
            let mut generator_residual: f64 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let y = matrix_unit(n, a, b);
                    let lhs = g.heisenberg.apply(&(w * &y * w.adjoint()));
                    let rhs = w * local_g.heisenberg.apply(&y) * w.adjoint();
                    generator_residual = generator_residual.max((lhs - rhs).norm());
                }
            }
            Ok(CentralRestriction {
                rank: n,
                commutator_residual,
                compressed_matches,
                generator_residual,
            })
        })
        .collect()
}

/// Block data of `M_r` compared with that of `N(T)`.
#[derive(Debug, Clone)]
pub struct ReversibleBlocks {
    pub data: BlockLindbladData,
    /// Sorted block lists of `M_r` and `N(T)` coincide.
    pub matches_nt: bool,
    /// Every `K_j` is Hermitian, so its spectrum is pure point.
    pub pure_point: bool,
}

pub fn reversible_block_structure(
    m: &QmsModel,
    mr_blocks: &BlockDecomposition,
    nt_blocks: &BlockDecomposition,
    faithful: bool,
    tol: &Tolerance,
) -> Result<ReversibleBlocks> {
    if !faithful {
        return Err(Error::NoFaithfulState);
    }
    let data = extract_block_data(m, mr_blocks, tol)?;
    let mut a = mr_blocks.blocks.clone();
    let mut b = nt_blocks.blocks.clone();
    a.sort();
    b.sort();
    let pure_point = data
        .components
        .iter()
        .all(|c| crate::matrix::is_hermitian(&c.h, tol.hermitian));
    Ok(ReversibleBlocks {
        data,
        matches_nt: a == b,
        pure_point,
    })
}
