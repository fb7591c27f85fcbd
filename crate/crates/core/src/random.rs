//! Seeded samplers for models and algebras.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{algebra_equal, generate_algebra, OperatorAlgebra};
use crate::error::Result;
use crate::generator::df_subalgebra;
use crate::matrix::{c, direct_sum, hermitian_part, identity, kron, real, zeros, CMatrix};
use crate::model::QmsModel;
use crate::tol::Tolerance;
use crate::wedderburn::Block;

/// Largest `Σ k_i·m_i` produced by [`block_model`].
pub const MAX_BLOCK_DIM: usize = 12;

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Independent standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

fn unit_norm(x: CMatrix) -> CMatrix {
    let n = x.norm();
    if n > 0.0 {
        x * real(1.0 / n)
    } else {
        x
    }
}

/// Gaussian Hermitian matrix with `‖H‖_F = 1`.
pub fn gaussian_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    unit_norm(hermitian_part(&ginibre(d, d, rng)))
}

/// Haar unitary (QR of a Ginibre matrix, columns rephased by `r_jj/|r_jj|`).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let r = qr.r();
    let mut u = qr.q();
    for j in 0..d {
        let z = r[(j, j)];
        if z.norm() > 0.0 {
            let phase = z / z.norm();
            u.column_mut(j).iter_mut().for_each(|w| *w *= phase);
        }
    }
    u
}

/// `H` with `‖H‖_F = 1` and 1–3 Lindblad operators with `‖L_k‖_F = 1`, all Gaussian.
pub fn gaussian_model(d: usize, rng: &mut impl Rng) -> QmsModel {
    let h = gaussian_hermitian(d, rng);
    let count = rng.random_range(1..=3);
    let ls = (0..count).map(|_| unit_norm(ginibre(d, d, rng))).collect();
    QmsModel::new(h, ls, format!("gaussian d={d}"), &Tolerance::default()).expect("sampled model is valid")
}

/// Faithful density matrix with spectrum bounded away from zero.
pub fn faithful_state(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    let w = &g * g.adjoint() + identity(d) * real(0.2);
    let tr = crate::matrix::trace(&w).re;
    hermitian_part(&(w * real(1.0 / tr)))
}

/// Detailed-balance sampler.
///
/// Picks a faithful `ρ = V·diag(p)·V*`, a Hamiltonian diagonal in the same
/// basis, and jump pairs `(A, ρ^{1/2}·A*·ρ^{−1/2})` with `A = a·V·e_ij·V*`
/// for a random subset of index pairs, plus an optional diagonal dephasing
/// operator. Each `A` is an eigenoperator of `ρ·(·)·ρ^{−1}`, so `ρ` is invariant.
pub fn detailed_balance_model(d: usize, rng: &mut impl Rng) -> QmsModel {
    let v = haar_unitary(d, rng);
    let mut p: Vec<f64> = (0..d).map(|_| 0.2 + rng.random::<f64>()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    let in_basis = |x: &CMatrix| &v * x * v.adjoint();
    let energies: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
    let h = in_basis(&crate::matrix::diag_real(&energies));
    let mut ls = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            pairs.push((i, j));
        }
    }
    let keep = rng.random_range(1..=pairs.len().max(1));
    for _ in 0..pairs.len().saturating_sub(keep) {
        let drop = rng.random_range(0..pairs.len());
        pairs.swap_remove(drop);
    }
    for (i, j) in pairs {
        let a = c(normal(rng), normal(rng));
        let mut e = zeros(d, d);
        e[(i, j)] = a;
        let mut reverse = zeros(d, d);
        reverse[(j, i)] = a.conj() * (p[i] / p[j]).sqrt();
        ls.push(in_basis(&e));
        ls.push(in_basis(&reverse));
    }
    if ls.is_empty() || rng.random_bool(0.5) {
        let diag: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
        ls.push(in_basis(&crate::matrix::diag_real(&diag)));
    }
    let scale = ls.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let ls = ls.into_iter().map(|l| l * real(1.0 / scale)).collect();
    QmsModel::new(hermitian_part(&h), ls, format!("detailed balance d={d}"), &Tolerance::default())
        .expect("sampled model is valid")
}

/// The prescribed data of a constructed block model.
#[derive(Debug, Clone)]
pub struct BlockConstruction {
    pub blocks: Vec<Block>,
    pub u: CMatrix,
    pub h: Vec<CMatrix>,
    pub n0: Vec<CMatrix>,
    pub nk: Vec<Vec<CMatrix>>,
    /// Per block: whether `{N0_i, Nk_i}` has `N = C·1`.
    pub trivial_components: Vec<bool>,
    pub model: QmsModel,
}

/// Random signature `[(k_i, m_i)]` with `2 ≤ Σ k_i·m_i ≤ max_dim`.
pub fn block_signature(max_dim: usize, rng: &mut impl Rng) -> Vec<Block> {
    loop {
        let count = rng.random_range(1..=3);
        let blocks: Vec<Block> = (0..count)
            .map(|_| Block {
                k: rng.random_range(1..=3),
                m: rng.random_range(1..=3),
            })
            .collect();
        let d: usize = blocks.iter().map(|b| b.k * b.m).sum();
        if (2..=max_dim).contains(&d) {
            return blocks;
        }
    }
}

/// `H = U·⊕(H_i⊗1 + 1⊗N0_i)·U*`, `L_ℓ = U·⊕(1⊗Nk_i[ℓ])·U*` with Gaussian components.
pub fn block_model(blocks: &[Block], rng: &mut impl Rng, tol: &Tolerance) -> Result<BlockConstruction> {
    let d: usize = blocks.iter().map(|b| b.k * b.m).sum();
    let u = haar_unitary(d, rng);
    let lindblads = rng.random_range(1..=2);
    let mut h = Vec::new();
    let mut n0 = Vec::new();
    let mut nk = Vec::new();
    let mut trivial_components = Vec::new();
    for b in blocks {
        let hi = gaussian_hermitian(b.k, rng);
        let hi = &hi - identity(b.k) * (crate::matrix::trace(&hi) * real(1.0 / b.k as f64));
        let n0i = gaussian_hermitian(b.m, rng);
        let nki: Vec<CMatrix> = (0..lindblads).map(|_| unit_norm(ginibre(b.m, b.m, rng))).collect();
        let component = QmsModel::new(n0i.clone(), nki.clone(), "component", tol)?;
        let n = df_subalgebra(&component, tol);
        trivial_components.push(algebra_equal(&n, &OperatorAlgebra::scalars(b.m), tol));
        h.push(hermitian_part(&hi));
        n0.push(n0i);
        nk.push(nki);
    }
    let hb: Vec<CMatrix> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| kron(&h[i], &identity(b.m)) + kron(&identity(b.k), &n0[i]))
        .collect();
    let hamiltonian = hermitian_part(&(&u * direct_sum(&hb) * u.adjoint()));
    let ls = (0..lindblads)
        .map(|l| {
            let lb: Vec<CMatrix> = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| kron(&identity(b.k), &nk[i][l]))
                .collect();
            &u * direct_sum(&lb) * u.adjoint()
        })
        .collect();
    let model = QmsModel::new(hamiltonian, ls, format!("block model {blocks:?}"), tol)?;
    Ok(BlockConstruction {
        blocks: blocks.to_vec(),
        u,
        h,
        n0,
        nk,
        trivial_components,
        model,
    })
}

/// A random unital *-subalgebra of `M_d`: a random signature `⊕ M_{k_i} ⊗ 1_{m_i}`
/// conjugated by a Haar unitary, recovered by [`generate_algebra`] from two generic elements.
pub fn random_algebra(d: usize, rng: &mut impl Rng, tol: &Tolerance) -> (Vec<Block>, OperatorAlgebra) {
    let blocks = loop {
        let mut left = d;
        let mut blocks = Vec::new();
        while left > 0 {
            let m = rng.random_range(1..=left);
            let divisors: Vec<usize> = (1..=left / m).collect();
            let k = divisors[rng.random_range(0..divisors.len())];
            blocks.push(Block { k, m });
            left -= k * m;
        }
        if blocks.iter().map(|b| b.k * b.m).sum::<usize>() == d {
            break blocks;
        }
    };
    let u = haar_unitary(d, rng);
    let generators: Vec<CMatrix> = (0..2)
        .map(|_| {
            let parts: Vec<CMatrix> = blocks
                .iter()
                .map(|b| kron(&ginibre(b.k, b.k, rng), &identity(b.m)))
                .collect();
            &u * direct_sum(&parts) * u.adjoint()
        })
        .collect();
    (blocks, generate_algebra(d, &generators, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{invariant_states, spectral_split};
    use crate::generator::build_generator;
    use crate::matrix::is_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            assert!(is_unitary(&haar_unitary(d, &mut rng), 1e-12));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = gaussian_model(3, &mut ChaCha8Rng::seed_from_u64(9));
        let b = gaussian_model(3, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn detailed_balance_models_are_faithful() {
        let t = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=4 {
            for _ in 0..5 {
                let m = detailed_balance_model(d, &mut rng);
                let g = build_generator(&m);
                let e = spectral_split(&g, &t).unwrap().ergodic_projection(&t).unwrap();
                let s = invariant_states(&g, &e, &t, &mut rng).unwrap();
                assert!(s.faithful, "{}", m.label);
            }
        }
    }

    #[test]
    fn block_models_respect_dimension_cap() {
        let t = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let sig = block_signature(MAX_BLOCK_DIM, &mut rng);
            let b = block_model(&sig, &mut rng, &t).unwrap();
            let d: usize = sig.iter().map(|x| x.k * x.m).sum();
            assert!(d <= MAX_BLOCK_DIM);
            assert_eq!(b.model.dim(), d);
        }
    }

    #[test]
    fn random_algebras_have_prescribed_dimension() {
        let t = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=4 {
            for _ in 0..5 {
                let (blocks, a) = random_algebra(d, &mut rng, &t);
                let expected: usize = blocks.iter().map(|b| b.k * b.k).sum();
                assert_eq!(a.dimension(), expected, "{blocks:?}");
                assert!(a.is_valid(&t));
            }
        }
    }
}
