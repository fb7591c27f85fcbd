//! Structural invariants checked on randomly sampled models and algebras.

use num_complex::Complex64;
use proptest::prelude::*;
use qmsdf_core::algebra::{center, center_of_commutant_identity, commutant, double_commutant_check, OperatorSpace};
use qmsdf_core::analysis::{analyze, AnalysisOptions};
use qmsdf_core::asymptotics::{annihilation_residual, spectral_split};
use qmsdf_core::generator::{automorphism_residual, build_generator, df_subalgebra, DEFAULT_TIMES};
use qmsdf_core::linalg::svd;
use qmsdf_core::matrix::{identity, trace, vec};
use qmsdf_core::model::QmsModel;
use qmsdf_core::random::{detailed_balance_model, faithful_state, gaussian_model, ginibre, haar_unitary, random_algebra};
use qmsdf_core::wedderburn::wedderburn;
use qmsdf_core::{CMatrix, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn model(seed: u64, d: usize, faithful: bool) -> QmsModel {
    let mut r = rng(seed);
    if faithful {
        detailed_balance_model(d, &mut r)
    } else {
        gaussian_model(d, &mut r)
    }
}

fn unit(x: CMatrix) -> CMatrix {
    let n = x.norm();
    x / Complex64::new(n, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_is_unital_trace_preserving_and_dual(seed: u64, d in 2usize..=4, faithful: bool) {
        let m = model(seed, d, faithful);
        let g = build_generator(&m);
        let mut r = rng(seed ^ 1);
        let x = unit(ginibre(d, d, &mut r));
        let rho = faithful_state(d, &mut r);
        prop_assert!(g.heisenberg.apply(&identity(d)).norm() < 1e-12);
        prop_assert!(trace(&g.predual.apply(&rho)).norm() < 1e-12);
        let lhs = trace(&(g.predual.apply(&rho) * &x));
        let rhs = trace(&(&rho * g.heisenberg.apply(&x)));
        prop_assert!((lhs - rhs).norm() < 1e-12);
        // L(x*) = L(x)*.
        prop_assert!((g.heisenberg.apply(&x.adjoint()) - g.heisenberg.apply(&x).adjoint()).norm() < 1e-12);
    }

    #[test]
    fn semigroup_is_positive_and_composes(seed: u64, d in 2usize..=4, s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let g = build_generator(&model(seed, d, false));
        let composed = g.semigroup(s).compose(&g.semigroup(t));
        prop_assert!((g.semigroup(s + t).matrix() - composed.matrix()).norm() < 1e-9);
        let rho = faithful_state(d, &mut rng(seed ^ 2));
        let evolved = g.semigroup(t).adjoint().apply(&rho);
        let h = (&evolved + evolved.adjoint()) * Complex64::new(0.5, 0.0);
        prop_assert!(h.symmetric_eigenvalues().iter().all(|&l| l > -1e-10));
        prop_assert!((trace(&evolved).re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn df_subalgebra_is_an_invariant_unital_algebra(seed: u64, d in 2usize..=4, faithful: bool) {
        let tol = Tolerance::default();
        let m = model(seed, d, faithful);
        let g = build_generator(&m);
        let nt = df_subalgebra(&m, &tol);
        prop_assert!(nt.is_valid(&tol));
        prop_assert!(nt.contains(&identity(d), &tol));
        prop_assert!(automorphism_residual(&m, &g, &nt, &DEFAULT_TIMES) < 1e-8);
    }

    #[test]
    fn df_subalgebra_is_unitarily_covariant(seed: u64, d in 2usize..=4) {
        let tol = Tolerance::default();
        let m = model(seed, d, false);
        let u = haar_unitary(d, &mut rng(seed ^ 3));
        let conj = |x: &CMatrix| &u * x * u.adjoint();
        let moved = QmsModel::new(
            conj(m.hamiltonian()),
            m.lindblads().iter().map(conj).collect(),
            "conjugated",
            &tol,
        ).unwrap();
        let a = df_subalgebra(&m, &tol);
        let b = df_subalgebra(&moved, &tol);
        prop_assert_eq!(a.dimension(), b.dimension());
        for x in a.elements() {
            prop_assert!(b.contains(&conj(&x), &tol));
        }
    }

    #[test]
    fn block_decomposition_accounts_for_dimensions(seed: u64, d in 1usize..=5) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let (blocks, alg) = random_algebra(d, &mut r, &tol);
        let dec = wedderburn(&alg, &tol, &mut r).unwrap();
        prop_assert_eq!(dec.blocks.iter().map(|b| b.k * b.m).sum::<usize>(), d);
        prop_assert_eq!(dec.blocks.iter().map(|b| b.k * b.k).sum::<usize>(), alg.dimension());
        let mut want: Vec<_> = blocks.iter().map(|b| (b.k, b.m)).collect();
        let mut got: Vec<_> = dec.blocks.iter().map(|b| (b.k, b.m)).collect();
        want.sort();
        got.sort();
        prop_assert_eq!(want, got);
        prop_assert!(dec.invariant_residuals(&alg).max() < 1e-9);
    }

    #[test]
    fn commutant_identities_hold(seed: u64, d in 1usize..=4) {
        let tol = Tolerance::default();
        let (_, alg) = random_algebra(d, &mut rng(seed), &tol);
        prop_assert!(double_commutant_check(&alg, &tol));
        prop_assert!(center_of_commutant_identity(&alg, &tol));
        // The center is shared by an algebra and its commutant.
        let z = center(&alg, &tol);
        let zc = center(&commutant(&alg, &tol), &tol);
        prop_assert_eq!(z.dimension(), zc.dimension());
    }

    #[test]
    fn spectral_parts_span_everything(seed: u64, d in 2usize..=4, faithful: bool) {
        let tol = Tolerance::default();
        let g = build_generator(&model(seed, d, faithful));
        let split = spectral_split(&g, &tol).unwrap();
        prop_assert!(split.max_real_part() < 1e-9);
        let total = split.peripheral_space(&tol).dimension() + split.stable_space(&tol).dimension();
        prop_assert_eq!(total, d * d);
        let e = split.ergodic_projection(&tol).unwrap();
        prop_assert!((e.compose(&e).matrix() - e.matrix()).norm() < 1e-8);
    }

    #[test]
    fn faithful_models_satisfy_the_asymptotic_structure(seed: u64, d in 2usize..=4) {
        let m = model(seed, d, true);
        let a = analyze(&m, &AnalysisOptions { seed, ..AnalysisOptions::default() }).unwrap();
        prop_assume!(a.faithful());
        prop_assert!(annihilation_residual(&a.generator, &a.nt_center) < 1e-8);
        prop_assert_eq!(a.nt.dimension() + a.stable.dimension(), d * d);
        prop_assert_eq!(a.reversible.algebra.dimension(), a.nt.dimension());
        let sigma = &a.states.distinguished;
        prop_assert!((trace(sigma).re - 1.0).abs() < 1e-10);
        prop_assert!(a.generator.predual.apply(sigma).norm() < 1e-9);
        prop_assert!(!a.has_failures() && !a.has_errors());
    }

    #[test]
    fn analysis_is_deterministic(seed: u64, d in 2usize..=3, faithful: bool) {
        let m = model(seed, d, faithful);
        let o = AnalysisOptions { seed, ..AnalysisOptions::default() };
        let a = analyze(&m, &o).unwrap();
        let b = analyze(&m, &o).unwrap();
        prop_assert_eq!(a.nt.space().basis_vectors(), b.nt.space().basis_vectors());
        prop_assert_eq!(&a.states.distinguished, &b.states.distinguished);
        prop_assert_eq!(a.checks, b.checks);
    }

    #[test]
    fn svd_reconstructs(seed: u64, rows in 1usize..=7, cols in 1usize..=7) {
        let a = ginibre(rows, cols, &mut rng(seed));
        let dec = svd(&a);
        let r = rows.min(cols);
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(r, dec.singular_values.iter().map(|&s| Complex64::new(s, 0.0))));
        let back = &dec.u * sigma * dec.v.columns(0, r).adjoint();
        prop_assert!((back - &a).norm() < 1e-12 * (1.0 + a.norm()));
        prop_assert!((dec.v.adjoint() * &dec.v - identity(cols)).norm() < 1e-12);
        prop_assert!(dec.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn span_basis_is_canonical(seed: u64, d in 2usize..=3, n in 1usize..=4) {
        // The same subspace presented through different spanning sets gets the same basis.
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let elements: Vec<CMatrix> = (0..n).map(|_| ginibre(d, d, &mut r)).collect();
        let mixed: Vec<CMatrix> = (0..n)
            .map(|_| {
                let c = ginibre(n, 1, &mut r);
                elements.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (i, e)| acc + e * c[i])
            })
            .collect();
        let a = OperatorSpace::span(d, &elements, &tol);
        let b = OperatorSpace::span(d, &mixed, &tol);
        prop_assert_eq!(a.dimension(), b.dimension());
        prop_assert!((a.basis_vectors() - b.basis_vectors()).norm() < 1e-8);
        prop_assert!(elements.iter().all(|e| a.distance(e) < 1e-10 * (1.0 + vec(e).norm())));
    }
}
