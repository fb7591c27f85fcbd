//! Reversible and stable parts of the dynamics, and their relation to `N(T)`.

use num_complex::Complex64;

use crate::algebra::{algebra_equal, generate_algebra, OperatorAlgebra, OperatorSpace};
use crate::error::{Error, Result};
use crate::generator::GeneratorPair;
use crate::matrix::{trace, CMatrix};
use crate::superop::Superoperator;
use crate::tol::Tolerance;
use crate::wedderburn::{Block, BlockDecomposition};

use super::spectral::SpectralSplit;
use super::states::invariance_residual;

/// The algebra generated by the peripheral eigenvectors of `L`.
#[derive(Debug, Clone)]
pub struct ReversibleAlgebra {
    /// Span of the peripheral eigenvectors.
    pub span: OperatorSpace,
    pub algebra: OperatorAlgebra,
    /// `true` when generating the algebra added nothing to the span.
    pub closure_noop: bool,
    /// A peripheral eigenvalue with a Jordan block, if any.
    pub peripheral_jordan: Option<Complex64>,
}

impl ReversibleAlgebra {
    /// Fails with [`Error::NonSemisimplePeripheral`] when a Jordan block was seen.
    pub fn checked(self) -> Result<Self> {
        match self.peripheral_jordan {
            Some(l) => Err(Error::NonSemisimplePeripheral { re: l.re, im: l.im }),
            None => Ok(self),
        }
    }
}

pub fn reversible_algebra(split: &SpectralSplit, tol: &Tolerance) -> ReversibleAlgebra {
    let span = split.peripheral_space(tol);
    let algebra = generate_algebra(split.dim, &span.elements(), tol);
    let closure_noop = algebra.dimension() == span.dimension();
    ReversibleAlgebra {
        span,
        algebra,
        closure_noop,
        peripheral_jordan: split.peripheral_jordan(tol),
    }
}

/// `M_s`: the stable generalized eigenspaces, with decay diagnostics.
#[derive(Debug, Clone)]
pub struct StableSpace {
    pub space: OperatorSpace,
    pub gap: Option<f64>,
    pub t_check: f64,
    /// `max_x ‖T_{t_check}(x)‖_F` over the orthonormal basis.
    pub max_decay: f64,
    /// `K` of the envelope `‖T_t(x)‖ ≤ K·e^{−γt/2}·‖x‖`.
    pub envelope_constant: f64,
}

impl StableSpace {
    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn decay_certified(&self, tol: &Tolerance) -> bool {
        self.max_decay <= tol.residual
    }

    /// Worst ratio `‖T_t(x)‖ / (K·e^{−γt/2})` at the sampled times (≤ 1 when the envelope holds).
    pub fn envelope_ratio(&self, g: &GeneratorPair, ts: &[f64]) -> f64 {
        let Some(gamma) = self.gap else {
            return 0.0;
        };
        let mut worst: f64 = 0.0;
        for &t in ts {
            let tt = g.semigroup(t);
            let bound = self.envelope_constant * (-gamma * t / 2.0).exp();
            for x in self.space.elements() {
                worst = worst.max(tt.apply(&x).norm() / bound);
            }
        }
        worst
    }
}

pub fn stable_space(g: &GeneratorPair, split: &SpectralSplit, tol: &Tolerance) -> StableSpace {
    let space = split.stable_space(tol);
    let t_check = split.t_check();
    let tt = g.semigroup(t_check);
    let max_decay = space
        .elements()
        .iter()
        .map(|x| tt.apply(x).norm())
        .fold(0.0, f64::max);
    StableSpace {
        space,
        gap: split.gap(),
        t_check,
        max_decay,
        envelope_constant: split.decay_constant(),
    }
}

/// `max |‖T_t(x)‖_F − ‖x‖_F|` over the basis of `a` and the sampled times.
pub fn isometry_defect(g: &GeneratorPair, a: &OperatorAlgebra, ts: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in ts {
        let tt = g.semigroup(t);
        for x in a.elements() {
            worst = worst.max((tt.apply(&x).norm() - x.norm()).abs());
        }
    }
    worst
}

/// `max ‖L(z)‖_F` over a basis of `z`.
pub fn annihilation_residual(g: &GeneratorPair, z: &OperatorAlgebra) -> f64 {
    z.elements()
        .iter()
        .map(|x| g.heisenberg.apply(x).norm())
        .fold(0.0, f64::max)
}

/// `max(‖E∘E − E‖, ‖E∘T_t − E‖, ‖T_t∘E − E‖)` at the sampled times.
pub fn ergodic_consistency(g: &GeneratorPair, e: &Superoperator, ts: &[f64]) -> f64 {
    let mut worst = (e.compose(e).matrix() - e.matrix()).norm();
    for &t in ts {
        let tt = g.semigroup(t);
        worst = worst.max((e.compose(&tt).matrix() - e.matrix()).norm());
        worst = worst.max((tt.compose(e).matrix() - e.matrix()).norm());
    }
    worst
}

/// Comparison of the decoherence-free algebra with the reversible algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct NtMrVerdict {
    pub faithful: bool,
    pub equal: bool,
    pub mr_within_nt: bool,
    pub nt_dimension: usize,
    pub mr_dimension: usize,
    pub blocks: Vec<Block>,
    /// Per block of `N(T)`: whether the compression of `M_r` fills the factor.
    pub block_factors: Vec<bool>,
}

impl NtMrVerdict {
    /// The equality is a theorem only under a faithful invariant state.
    pub fn asserted(&self) -> bool {
        self.faithful
    }
}

pub fn compare_nt_mr(
    nt: &OperatorAlgebra,
    nt_blocks: &BlockDecomposition,
    mr: &OperatorAlgebra,
    faithful: bool,
    tol: &Tolerance,
) -> NtMrVerdict {
    let block_factors = nt_blocks
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let compressed: Vec<CMatrix> = mr
                .elements()
                .iter()
                .map(|x| {
                    let y = nt_blocks.block_of(x, i);
                    crate::matrix::partial_trace_second(&y, b.k, b.m)
                })
                .collect();
            OperatorSpace::span(b.k, &compressed, tol).dimension() == b.k * b.k
        })
        .collect();
    NtMrVerdict {
        faithful,
        equal: algebra_equal(nt, mr, tol),
        mr_within_nt: mr.is_subalgebra_of(nt, tol),
        nt_dimension: nt.dimension(),
        mr_dimension: mr.dimension(),
        blocks: nt_blocks.blocks.clone(),
        block_factors,
    }
}

/// One `p_i·σ·p_i / tr(p_i·σ)` component of an invariant state.
#[derive(Debug, Clone)]
pub struct StateBlock {
    pub projection: CMatrix,
    pub weight: f64,
    /// Normalized state, or the zero matrix when `weight` vanishes.
    pub state: CMatrix,
}

#[derive(Debug, Clone)]
pub struct StateBlockStructure {
    pub blocks: Vec<StateBlock>,
    /// `max_{i≠j} ‖p_i·σ·p_j‖_F`.
    pub off_diagonal: f64,
    /// `|Σ weights − 1|`.
    pub weight_defect: f64,
}

/// Splits an invariant state along minimal central projections of `N(T)`.
pub fn invariant_state_block_structure(
    g: &GeneratorPair,
    sigma: &CMatrix,
    faithful_exists: bool,
    projections: &[CMatrix],
    tol: &Tolerance,
) -> Result<StateBlockStructure> {
    let residual = invariance_residual(g, sigma);
    if residual > tol.residual {
        return Err(Error::NotInvariant { residual });
    }
    if !faithful_exists {
        return Err(Error::NoFaithfulState);
    }
    let mut off_diagonal: f64 = 0.0;
    for (i, p) in projections.iter().enumerate() {
        for (j, q) in projections.iter().enumerate() {
            if i != j {
                off_diagonal = off_diagonal.max((p * sigma * q).norm());
            }
        }
    }
    let blocks: Vec<StateBlock> = projections
        .iter()
        .map(|p| {
            let part = p * sigma * p;
            let weight = trace(&part).re;
            let state = if weight.abs() > f64::EPSILON {
                part / Complex64::new(weight, 0.0)
            } else {
                part * Complex64::new(0.0, 0.0)
            };
            StateBlock {
                projection: p.clone(),
                weight,
                state,
            }
        })
        .collect();
    let weight_defect = (blocks.iter().map(|b| b.weight).sum::<f64>() - trace(sigma).re).abs();
    Ok(StateBlockStructure {
        blocks,
        off_diagonal,
        weight_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::spectral::spectral_split;
    use crate::generator::{build_generator, df_subalgebra};
    use crate::matrix::{diag_real, identity, matrix_unit};
    use crate::model::examples;
    use crate::wedderburn::wedderburn;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn reversible_algebra_examples() {
        let t = tol();
        let g = build_generator(&examples::dephasing());
        let r = reversible_algebra(&spectral_split(&g, &t).unwrap(), &t).checked().unwrap();
        assert!(algebra_equal(&r.algebra, &OperatorAlgebra::diagonal(2), &t));
        assert!(r.closure_noop);

        let g = build_generator(&examples::amplitude_damping());
        let r = reversible_algebra(&spectral_split(&g, &t).unwrap(), &t);
        assert!(algebra_equal(&r.algebra, &OperatorAlgebra::scalars(2), &t));

        let g = build_generator(&examples::unitary(diag_real(&[1.0, 2.0])));
        let r = reversible_algebra(&spectral_split(&g, &t).unwrap(), &t);
        assert_eq!(r.algebra.dimension(), 4);
        assert!(r.closure_noop);
    }

    #[test]
    fn dephasing_stable_decay() {
        let t = tol();
        let g = build_generator(&examples::dephasing());
        let split = spectral_split(&g, &t).unwrap();
        let s = stable_space(&g, &split, &t);
        assert_eq!(s.dimension(), 2);
        assert_eq!(s.t_check, 10.0);
        let decay = g.semigroup(10.0).apply(&matrix_unit(2, 0, 1)).norm();
        assert!((decay / (-20.0f64).exp() - 1.0).abs() < 1e-6);
        assert!(s.decay_certified(&t));
        assert!(s.envelope_ratio(&g, &[0.0, 0.3, 1.0, 4.0]) <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_generator_has_empty_stable_space() {
        let t = tol();
        let m = examples::unitary(crate::matrix::zeros(2, 2));
        let g = build_generator(&m);
        let s = stable_space(&g, &spectral_split(&g, &t).unwrap(), &t);
        assert_eq!(s.dimension(), 0);
        assert!(s.decay_certified(&t));
    }

    #[test]
    fn dephasing_nt_equals_mr() {
        let t = tol();
        let m = examples::dephasing();
        let g = build_generator(&m);
        let nt = df_subalgebra(&m, &t);
        let dec = wedderburn(&nt, &t, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mr = reversible_algebra(&spectral_split(&g, &t).unwrap(), &t).algebra;
        let v = compare_nt_mr(&nt, &dec, &mr, true, &t);
        assert!(v.equal && v.mr_within_nt && v.asserted());
        assert_eq!(v.blocks, vec![Block { k: 1, m: 1 }; 2]);
        assert_eq!(v.block_factors, vec![true, true]);
        assert!(isometry_defect(&g, &mr, &[0.5, 3.0]) < 1e-10);
    }

    #[test]
    fn dephasing_state_blocks() {
        let t = tol();
        let g = build_generator(&examples::dephasing());
        let sigma = diag_real(&[0.3, 0.7]);
        let ps = [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)];
        let s = invariant_state_block_structure(&g, &sigma, true, &ps, &t).unwrap();
        assert!((s.blocks[0].weight - 0.3).abs() < 1e-12);
        assert!((s.blocks[1].weight - 0.7).abs() < 1e-12);
        assert!((&s.blocks[0].state - matrix_unit(2, 0, 0)).norm() < 1e-12);
        assert!(s.off_diagonal < 1e-15 && s.weight_defect < 1e-12);

        let not_invariant = identity(2) * Complex64::new(0.5, 0.0) + matrix_unit(2, 0, 1) * Complex64::new(0.1, 0.0);
        let h = crate::matrix::hermitian_part(&not_invariant);
        assert!(matches!(
            invariant_state_block_structure(&g, &h, true, &ps, &t),
            Err(Error::NotInvariant { .. })
        ));
        assert!(matches!(
            invariant_state_block_structure(&g, &sigma, false, &ps, &t),
            Err(Error::NoFaithfulState)
        ));
    }

    #[test]
    fn ergodic_projection_commutes_with_semigroup() {
        let t = tol();
        let g = build_generator(&examples::amplitude_damping());
        let e = spectral_split(&g, &t).unwrap().ergodic_projection(&t).unwrap();
        assert!(ergodic_consistency(&g, &e, &[0.1, 1.0, 5.0]) < 1e-9);
    }
}
