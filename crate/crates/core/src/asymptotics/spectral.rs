//! Spectral splitting of the Liouvillian into peripheral and stable parts.

use num_complex::Complex64;

use crate::algebra::OperatorSpace;
use crate::error::{Error, Result};
use crate::generator::GeneratorPair;
use crate::linalg::{
    column_span, inverse, is_semisimple, schur, spectral_decomposition, SpectralCluster,
};
use crate::matrix::{identity, real, zeros, CMatrix, ZERO};
use crate::superop::Superoperator;
use crate::tol::Tolerance;

/// Eigenvalue clusters of `L` with their generalized eigenspaces.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub dim: usize,
    pub clusters: Vec<SpectralCluster>,
    /// `|Re λ| ≤ eig_cluster_abs`.
    pub peripheral: Vec<usize>,
    /// `Re λ < −eig_cluster_abs`.
    pub stable: Vec<usize>,
    /// `Re λ > eig_cluster_abs`; empty for every valid generator.
    pub unstable: Vec<usize>,
    /// `‖L·Q − Q·T‖_F` of the underlying Schur form.
    pub schur_residual: f64,
    /// Frobenius norm of `L`.
    pub generator_norm: f64,
    /// Per stable cluster: `(‖P_c‖₂, ‖strictly upper part of L|_c‖, size)`.
    envelopes: Vec<(f64, f64, usize)>,
}

pub fn spectral_split(g: &GeneratorPair, tol: &Tolerance) -> Result<SpectralSplit> {
    let l = g.heisenberg.matrix();
    let dec = spectral_decomposition(l, tol)?;
    let schur_residual = (l * &dec.schur.q - &dec.schur.q * &dec.schur.t).norm();
    let mut peripheral = Vec::new();
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for (i, c) in dec.clusters.iter().enumerate() {
        let re = c.eigenvalue.re;
        if re.abs() <= tol.eig_cluster_abs {
            peripheral.push(i);
        } else if re < 0.0 {
            stable.push(i);
        } else {
            unstable.push(i);
        }
    }
    let mut envelopes = Vec::with_capacity(stable.len());
    for &i in &stable {
        let c = &dec.clusters[i];
        // L restricted to its invariant subspace, in an orthonormal basis.
        let restricted = c.basis.adjoint() * l * &c.basis;
        let tri = schur(&restricted, tol)?.t;
        let strict = CMatrix::from_fn(tri.nrows(), tri.ncols(), |r, k| if k > r { tri[(r, k)] } else { ZERO });
        envelopes.push((c.projector_norm, strict.norm(), c.multiplicity));
    }
    Ok(SpectralSplit {
        dim: g.dim(),
        clusters: dec.clusters,
        peripheral,
        stable,
        unstable,
        schur_residual,
        generator_norm: l.norm(),
        envelopes,
    })
}

impl SpectralSplit {
    /// Eigenvalue and multiplicity of every cluster, in spectral order.
    pub fn spectrum(&self) -> Vec<(Complex64, usize)> {
        self.clusters.iter().map(|c| (c.eigenvalue, c.multiplicity)).collect()
    }

    /// Eigenvalues with repetition, in spectral order.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat(c.eigenvalue).take(c.multiplicity))
            .collect()
    }

    pub fn max_real_part(&self) -> f64 {
        self.clusters.iter().map(|c| c.eigenvalue.re).fold(f64::NEG_INFINITY, f64::max)
    }

    fn span_of(&self, indices: &[usize], tol: &Tolerance) -> OperatorSpace {
        let d2 = self.dim * self.dim;
        let cols: Vec<_> = indices
            .iter()
            .flat_map(|&i| self.clusters[i].basis.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
            .collect();
        if cols.is_empty() {
            return OperatorSpace::zero(self.dim);
        }
        let m = CMatrix::from_columns(&cols);
        debug_assert_eq!(m.nrows(), d2);
        OperatorSpace::from_orthonormal(self.dim, column_span(&m, tol, Some(1.0)))
    }

    /// Span of the peripheral generalized eigenspaces.
    pub fn peripheral_space(&self, tol: &Tolerance) -> OperatorSpace {
        self.span_of(&self.peripheral, tol)
    }

    /// Span of the stable generalized eigenspaces (the space on which `T_t → 0`).
    pub fn stable_space(&self, tol: &Tolerance) -> OperatorSpace {
        self.span_of(&self.stable, tol)
    }

    /// First peripheral cluster carrying a Jordan block, if any.
    pub fn peripheral_jordan(&self, tol: &Tolerance) -> Option<Complex64> {
        self.peripheral
            .iter()
            .map(|&i| &self.clusters[i])
            .find(|c| !is_semisimple(c, self.generator_norm, tol))
            .map(|c| c.eigenvalue)
    }

    pub fn require_semisimple_peripheral(&self, tol: &Tolerance) -> Result<()> {
        match self.peripheral_jordan(tol) {
            Some(l) => Err(Error::NonSemisimplePeripheral { re: l.re, im: l.im }),
            None => Ok(()),
        }
    }

    /// `min |Re λ|` over stable clusters.
    pub fn gap(&self) -> Option<f64> {
        self.stable
            .iter()
            .map(|&i| -self.clusters[i].eigenvalue.re)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// `max(10, (20 + ln⁺K)/γ)` with `K` the [`decay_constant`](Self::decay_constant):
    /// `max(10, 20/γ)` when the stable part has no transient growth, pushed
    /// out by the time the envelope needs to absorb `K` otherwise.
    pub fn t_check(&self) -> f64 {
        match self.gap() {
            Some(g) if g > 0.0 => ((20.0 + self.decay_constant().ln().max(0.0)) / g).max(10.0),
            _ => 10.0,
        }
    }

    /// Index of the cluster at `λ = 0`.
    pub fn zero_cluster(&self, tol: &Tolerance) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.eigenvalue.norm() <= tol.eig_cluster_abs)
    }

    /// Spectral projection onto `ker L` along the other generalized eigenspaces.
    pub fn ergodic_projection(&self, tol: &Tolerance) -> Result<Superoperator> {
        let i = self
            .zero_cluster(tol)
            .ok_or(Error::ConvergenceFailure("ergodic projection: no eigenvalue at 0"))?;
        Ok(Superoperator::from_matrix(self.dim, self.clusters[i].projector.clone()))
    }

    /// Constant `K` with `‖e^{tL}x‖ ≤ K·e^{−γt/2}·‖x‖` for `x` in the stable space.
    ///
    /// With `e^{tL}P_c = B_c·e^{tA_c}·B_c*·P_c` and `A_c ≅ λ + N` triangular,
    /// `‖e^{tA_c}‖ ≤ e^{−γt}Σ_{j<m}(t‖N‖)^j/j!` and `t^j e^{−γt/2} ≤ (2j/(eγ))^j`.
    pub fn decay_constant(&self) -> f64 {
        let Some(gamma) = self.gap() else {
            return 0.0;
        };
        let mut total = 0.0;
        for &(p_norm, n, m) in &self.envelopes {
            let mut sum = 0.0;
            let mut factorial = 1.0;
            for j in 0..m {
                if j > 0 {
                    factorial *= j as f64;
                }
                let base = n * 2.0 * j as f64 / (std::f64::consts::E * gamma);
                sum += if j == 0 { 1.0 } else { base.powi(j as i32) / factorial };
            }
            total += p_norm * sum;
        }
        total
    }
}

/// `(1/t)∫₀ᵗ e^{sL} ds` by Gauss–Legendre quadrature on a short interval
/// followed by exact doubling `I(2h) = I(h) + e^{hL}·I(h)`.
pub fn cesaro_mean(l: &Superoperator, t: f64) -> Superoperator {
    let n = l.matrix().nrows();
    let norm = l.operator_norm().max(1e-300);
    let mut doublings = 0u32;
    let mut h = t;
    while h * norm > 0.25 && doublings < 60 {
        h /= 2.0;
        doublings += 1;
    }
    let mut integral = zeros(n, n);
    for (&x, &w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        let s = 0.5 * h * (x + 1.0);
        integral += l.expm(s).into_matrix() * real(0.5 * h * w);
    }
    let mut step = l.expm(h).into_matrix();
    for _ in 0..doublings {
        integral = &integral + &step * &integral;
        step = &step * &step;
    }
    Superoperator::from_matrix(l.dim(), integral * real(1.0 / t))
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Outcome of comparing the ergodic projection with a Cesàro mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CesaroCheck {
    pub t: f64,
    /// `‖C(t) − E‖_F`; decays like `1/t`.
    pub raw_deviation: f64,
    /// `‖C(t) − E − S·(e^{tL} − 1)/t‖_F` with `S = (L + E)⁻¹ − E`; zero in exact arithmetic.
    pub corrected_residual: f64,
}

impl CesaroCheck {
    pub fn passes(&self, bound: f64) -> bool {
        self.corrected_residual <= bound
    }
}

/// Cross-checks `E` against the quadrature Cesàro mean at time `t`.
///
/// `∫₀ᵗ e^{sL} ds = t·E + S·(e^{tL} − 1)` holds exactly when `0` is a
/// semisimple eigenvalue, so the corrected residual isolates errors in `E`.
pub fn cesaro_check(g: &GeneratorPair, ergodic: &Superoperator, t: f64) -> Result<CesaroCheck> {
    let l = &g.heisenberg;
    let e = ergodic.matrix();
    let n = e.nrows();
    let mean = cesaro_mean(l, t);
    let raw_deviation = (mean.matrix() - e).norm();
    let drazin = inverse(&(l.matrix() + e))? - e;
    let evolution = l.expm(t).into_matrix() - identity(n);
    let predicted = e + drazin * evolution * real(1.0 / t);
    Ok(CesaroCheck {
        t,
        raw_deviation,
        corrected_residual: (mean.matrix() - predicted).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;
    use crate::matrix::{diag_real, matrix_unit, zeros as mzeros};
    use crate::model::{examples, QmsModel};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn approx_spectrum(split: &SpectralSplit) -> Vec<(f64, f64)> {
        split.eigenvalues().iter().map(|z| (z.re, z.im)).collect()
    }

    #[test]
    fn dephasing_spectrum() {
        let g = build_generator(&examples::dephasing());
        let s = spectral_split(&g, &tol()).unwrap();
        let ev = approx_spectrum(&s);
        let expected = [(0.0, 0.0), (0.0, 0.0), (-2.0, 0.0), (-2.0, 0.0)];
        for (a, b) in ev.iter().zip(expected.iter()) {
            assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
        let t = tol();
        let per = s.peripheral_space(&t);
        let expected_per = OperatorSpace::span(2, &[matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)], &t);
        assert!(per.equals(&expected_per, &t));
        let st = s.stable_space(&t);
        let expected_st = OperatorSpace::span(2, &[matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)], &t);
        assert!(st.equals(&expected_st, &t));
        assert_eq!(s.gap(), Some(2.0));
    }

    #[test]
    fn damping_spectrum() {
        let g = build_generator(&examples::amplitude_damping());
        let s = spectral_split(&g, &tol()).unwrap();
        let ev = approx_spectrum(&s);
        let expected = [0.0, -0.5, -0.5, -1.0];
        for (a, b) in ev.iter().zip(expected.iter()) {
            assert!((a.0 - b).abs() < 1e-9 && a.1.abs() < 1e-9);
        }
        assert_eq!(s.stable_space(&tol()).dimension(), 3);
    }

    #[test]
    fn zero_generator_is_all_peripheral() {
        let m = QmsModel::new(mzeros(2, 2), vec![mzeros(2, 2)], "zero", &tol()).unwrap();
        let s = spectral_split(&build_generator(&m), &tol()).unwrap();
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.peripheral, vec![0]);
        assert_eq!(s.stable_space(&tol()).dimension(), 0);
        let e = s.ergodic_projection(&tol()).unwrap();
        assert!((e.matrix() - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn ergodic_projection_examples() {
        let t = tol();
        let g = build_generator(&examples::dephasing());
        let e = spectral_split(&g, &t).unwrap().ergodic_projection(&t).unwrap();
        let x = CMatrix::from_fn(2, 2, |i, j| crate::matrix::c((i + 2 * j) as f64 + 1.0, i as f64));
        let mut diag = x.clone();
        diag[(0, 1)] = crate::matrix::ZERO;
        diag[(1, 0)] = crate::matrix::ZERO;
        assert!((e.apply(&x) - diag).norm() < 1e-12);

        let g = build_generator(&examples::unitary(diag_real(&[1.0, 2.0])));
        let s = spectral_split(&g, &t).unwrap();
        let e = s.ergodic_projection(&t).unwrap();
        let expected = OperatorSpace::span(2, &[matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)], &t);
        for i in 0..2 {
            for j in 0..2 {
                let y = e.apply(&matrix_unit(2, i, j));
                assert!(expected.distance(&y) < 1e-12);
            }
        }
        assert!((e.compose(&e).matrix() - e.matrix()).norm() < 1e-10);
    }

    #[test]
    fn cesaro_mean_matches_ergodic_projection() {
        let t = tol();
        for m in [examples::dephasing(), examples::amplitude_damping(), examples::unitary(diag_real(&[1.0, 2.0]))] {
            let g = build_generator(&m);
            let s = spectral_split(&g, &t).unwrap();
            let e = s.ergodic_projection(&t).unwrap();
            let check = cesaro_check(&g, &e, 1e3).unwrap();
            assert!(check.passes(1e-6), "{}: {:?}", m.label, check);
        }
    }

    #[test]
    fn decay_envelope_holds_on_damping() {
        let t = tol();
        let g = build_generator(&examples::amplitude_damping());
        let s = spectral_split(&g, &t).unwrap();
        let k = s.decay_constant();
        let gamma = s.gap().unwrap();
        for x in s.stable_space(&t).elements() {
            for &time in &[0.0, 0.5, 2.0, 10.0] {
                let y = g.semigroup(time).apply(&x);
                assert!(y.norm() <= k * (-gamma * time / 2.0).exp() * x.norm() + 1e-12);
            }
        }
        assert!(k >= 1.0);
        assert!((s.t_check() - (20.0 + k.ln()) / 0.5).abs() < 1e-9);
    }
}
