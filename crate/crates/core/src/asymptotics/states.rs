//! Invariant states of the predual semigroup.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::generator::GeneratorPair;
use crate::linalg::{nullspace, svd};
use crate::matrix::{c, hermitian_part, identity, real, trace, unvec_slice, vec, zeros, CMatrix};
use crate::superop::Superoperator;
use crate::tol::Tolerance;

/// Random restarts of the smoothed ascent used when the kernel is large.
const RESTARTS: usize = 10;
/// Largest kernel dimension handled by the exhaustive grid.
const GRID_MAX_KERNEL: usize = 3;
const GRID_POINTS: usize = 41;

/// `ker L_*` together with the states singled out from it.
#[derive(Debug, Clone)]
pub struct InvariantStateSet {
    /// Hermitian basis of `ker L_*`, orthonormal in the Hilbert–Schmidt product.
    pub basis: Vec<CMatrix>,
    /// `E_*(1/d)`: an invariant state of maximal support.
    pub reference: CMatrix,
    /// The invariant state of maximal von Neumann entropy.
    pub distinguished: CMatrix,
    /// The invariant state with the largest smallest eigenvalue that was found.
    pub witness: CMatrix,
    /// `λ_min(witness)`.
    pub min_eigenvalue: f64,
    pub faithful: bool,
    /// `max_b ‖L_*(b)‖_F` over the basis.
    pub kernel_residual: f64,
}

impl InvariantStateSet {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Ascending eigenvalues and matching eigenvectors, without canonicalization.
fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    eigh(a).0[0]
}

/// Isometry from Hermitian `d×d` matrices to `R^{d²}`.
fn to_real(h: &CMatrix) -> Vec<f64> {
    let d = h.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(h[(i, i)].re);
        for j in i + 1..d {
            out.push(s * h[(i, j)].re);
            out.push(s * h[(i, j)].im);
        }
    }
    out
}

fn from_real(d: usize, v: &[f64]) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        h[(i, i)] = real(v[k]);
        k += 1;
        for j in i + 1..d {
            let z = c(s * v[k], s * v[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Real orthonormal basis of the Hermitian elements of a `*`-closed space of operators.
pub fn hermitian_basis(dim: usize, vectors: &CMatrix, tol: &Tolerance) -> Vec<CMatrix> {
    let n = vectors.ncols();
    if n == 0 {
        return Vec::new();
    }
    let mut cols = Vec::with_capacity(2 * n);
    for k in 0..n {
        let x = unvec_slice(vectors.column(k).as_slice(), dim);
        cols.push(to_real(&hermitian_part(&x)));
        cols.push(to_real(&hermitian_part(&(&x * c(0.0, -1.0)))));
    }
    let m = CMatrix::from_fn(dim * dim, cols.len(), |i, j| real(cols[j][i]));
    let dec = svd(&m);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    // A real input has real singular vectors up to a phase per column.
    (0..dec.singular_values.len())
        .filter(|&j| dec.singular_values[j] > tol.rank_rel * smax.max(1.0))
        .map(|j| {
            let mut col: Vec<_> = dec.u.column(j).iter().copied().collect();
            crate::linalg::fix_phase(&mut col);
            let v: Vec<f64> = col.iter().map(|z| z.re).collect();
            from_real(dim, &v)
        })
        .collect()
}

/// Orthonormal traceless directions `τ_j` spanning `{h ∈ span(basis) : tr h = 0}`.
fn traceless_directions(basis: &[CMatrix]) -> Vec<CMatrix> {
    let n = basis.len();
    if n <= 1 {
        return Vec::new();
    }
    let traces: Vec<f64> = basis.iter().map(|h| trace(h).re).collect();
    let mut m = DMatrix::<f64>::zeros(n, n + 1);
    for i in 0..n {
        m[(i, 0)] = traces[i];
        m[(i, i + 1)] = 1.0;
    }
    let q = m.qr().q();
    (1..n)
        .map(|j| {
            basis
                .iter()
                .enumerate()
                .fold(zeros(basis[0].nrows(), basis[0].nrows()), |acc, (i, h)| acc + h * real(q[(i, j)]))
        })
        .collect()
}

fn combine(base: &CMatrix, dirs: &[CMatrix], coeffs: &[f64]) -> CMatrix {
    dirs.iter()
        .zip(coeffs)
        .fold(base.clone(), |acc, (t, &x)| acc + t * real(x))
}

/// Maximizes the concave function `λ_min(ρ₀ + Σ c_j τ_j)`.
fn maximize_min_eigenvalue(rho0: &CMatrix, dirs: &[CMatrix], rng: &mut impl Rng) -> (Vec<f64>, f64) {
    let p = dirs.len();
    let f = |x: &[f64]| min_eigenvalue(&combine(rho0, dirs, x));
    if p == 0 {
        return (Vec::new(), f(&[]));
    }
    if p < GRID_MAX_KERNEL {
        let (start, value) = grid_search(&f, p);
        let spacing = 3.0 / (GRID_POINTS - 1) as f64;
        let (x, v) = pattern_search(&f, start, spacing);
        return if v >= value { (x, v) } else { (vec![0.0; p], f(&vec![0.0; p])) };
    }
    let mut best = (vec![0.0; p], f(&vec![0.0; p]));
    for r in 0..RESTARTS {
        let start: Vec<f64> = if r == 0 {
            vec![0.0; p]
        } else {
            (0..p).map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let (x, v) = smoothed_ascent(rho0, dirs, start);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

fn grid_search(f: &impl Fn(&[f64]) -> f64, p: usize) -> (Vec<f64>, f64) {
    let axis: Vec<f64> = (0..GRID_POINTS)
        .map(|i| -1.5 + 3.0 * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let mut best = (vec![0.0; p], f(&vec![0.0; p]));
    let mut idx = vec![0usize; p];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        let v = f(&x);
        if v > best.1 {
            best = (x, v);
        }
        let mut k = 0;
        while k < p {
            idx[k] += 1;
            if idx[k] < GRID_POINTS {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == p {
            return best;
        }
    }
}

/// Compass search over coordinate and diagonal directions with step halving.
fn pattern_search(f: &impl Fn(&[f64]) -> f64, mut x: Vec<f64>, mut step: f64) -> (Vec<f64>, f64) {
    let p = x.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..p {
        for s in [-1.0, 1.0] {
            let mut d = vec![0.0; p];
            d[i] = s;
            dirs.push(d);
        }
    }
    if p == 2 {
        for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            dirs.push(vec![a, b]);
        }
    }
    let mut value = f(&x);
    let mut iterations = 0;
    while step > 1e-13 && iterations < 20_000 {
        iterations += 1;
        let mut improved = false;
        for d in &dirs {
            let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
            let v = f(&y);
            if v > value {
                x = y;
                value = v;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, value)
}

/// Gradient ascent on the soft-min `−β⁻¹·log Σ e^{−βλ_i}` with `β` continuation.
fn smoothed_ascent(rho0: &CMatrix, dirs: &[CMatrix], mut x: Vec<f64>) -> (Vec<f64>, f64) {
    let soft = |x: &[f64], beta: f64| -> (f64, Vec<f64>, f64) {
        let (values, vectors) = eigh(&combine(rho0, dirs, x));
        let lo = values[0];
        let weights: Vec<f64> = values.iter().map(|&l| (-beta * (l - lo)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let value = lo - z.ln() / beta;
        let grad = dirs
            .iter()
            .map(|t| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let v = vectors.column(i);
                        w * (v.adjoint() * t * v)[(0, 0)].re
                    })
                    .sum::<f64>()
                    / z
            })
            .collect();
        (value, grad, lo)
    };
    let mut best = (x.clone(), soft(&x, 1.0).2);
    let mut beta = 10.0;
    while beta <= 1e8 {
        let mut step = 1.0;
        for _ in 0..60 {
            let (v, g, lo) = soft(&x, beta);
            if lo > best.1 {
                best = (x.clone(), lo);
            }
            let gn: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt();
            if gn < 1e-14 {
                break;
            }
            let mut accepted = false;
            while step > 1e-14 {
                let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b / gn).collect();
                let (vy, _, loy) = soft(&y, beta);
                if vy > v {
                    x = y;
                    if loy > best.1 {
                        best = (x.clone(), loy);
                    }
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        beta *= 10.0;
    }
    best
}

/// Maximizes `S(ρ)` over `ρ₀ + span(τ_j)` by damped Newton steps,
/// working on the support of `ρ₀` where every invariant state lives.
fn maximize_entropy(rho0: &CMatrix, dirs: &[CMatrix], tol: &Tolerance) -> CMatrix {
    if dirs.is_empty() {
        return rho0.clone();
    }
    let (values, vectors) = eigh(rho0);
    let support: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > tol.faithful_min_eig)
        .collect();
    let w = CMatrix::from_columns(&support.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>());
    let base = w.adjoint() * rho0 * &w;
    let taus: Vec<CMatrix> = dirs.iter().map(|t| w.adjoint() * t * &w).collect();
    let p = taus.len();
    let entropy = |x: &[f64]| -> Option<f64> {
        let (vals, _) = eigh(&combine(&base, &taus, x));
        if vals[0] <= 0.0 {
            return None;
        }
        Some(-vals.iter().map(|l| l * l.ln()).sum::<f64>())
    };
    let mut x = vec![0.0; p];
    let Some(mut s) = entropy(&x) else {
        return rho0.clone();
    };
    for _ in 0..200 {
        let rho = combine(&base, &taus, &x);
        let (vals, vecs) = eigh(&rho);
        let t_eig: Vec<CMatrix> = taus.iter().map(|t| vecs.adjoint() * t * &vecs).collect();
        let grad: Vec<f64> = t_eig
            .iter()
            .map(|t| -(0..vals.len()).map(|a| t[(a, a)].re * vals[a].ln()).sum::<f64>())
            .collect();
        // Divided differences of log for the Hessian.
        let k = DMatrix::from_fn(vals.len(), vals.len(), |a, b| {
            let (la, lb) = (vals[a], vals[b]);
            if (la - lb).abs() <= 1e-12 * la.max(lb) {
                1.0 / la
            } else {
                (la.ln() - lb.ln()) / (la - lb)
            }
        });
        let hess = DMatrix::from_fn(p, p, |i, j| {
            let mut acc = 0.0;
            for a in 0..vals.len() {
                for b in 0..vals.len() {
                    acc += k[(a, b)] * (t_eig[i][(a, b)] * t_eig[j][(b, a)]).re;
                }
            }
            acc
        });
        let g = nalgebra::DVector::from_vec(grad.clone());
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let decrement = g.dot(&step);
        if decrement < 1e-24 {
            break;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-12 {
            let y: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + alpha * b).collect();
            if let Some(sy) = entropy(&y) {
                if sy >= s + 0.25 * alpha * decrement || (sy >= s && alpha < 1e-6) {
                    x = y;
                    s = sy;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let rho = &w * combine(&base, &taus, &x) * w.adjoint();
    hermitian_part(&rho)
}

fn normalize_state(rho: &CMatrix) -> CMatrix {
    let h = hermitian_part(rho);
    let tr = trace(&h).re;
    h * real(1.0 / tr)
}

/// Basis of `ker L_*`, the reference state `E_*(1/d)`, the maximum-entropy
/// invariant state, and the search for a faithful invariant state.
pub fn invariant_states(
    g: &GeneratorPair,
    ergodic: &Superoperator,
    tol: &Tolerance,
    rng: &mut impl Rng,
) -> Result<InvariantStateSet> {
    let d = g.dim();
    let kernel = nullspace(g.predual.matrix(), tol);
    let basis = hermitian_basis(d, &kernel, tol);
    if basis.is_empty() {
        return Err(Error::ConvergenceFailure("invariant states: predual kernel is empty"));
    }
    let kernel_residual = basis
        .iter()
        .map(|b| g.predual.apply(b).norm())
        .fold(0.0, f64::max);

    let predual_ergodic = ergodic.adjoint();
    let reference = normalize_state(&predual_ergodic.apply(&(identity(d) * real(1.0 / d as f64))));
    let dirs = traceless_directions(&basis);

    let distinguished = normalize_state(&maximize_entropy(&reference, &dirs, tol));
    let (coeffs, searched) = maximize_min_eigenvalue(&reference, &dirs, rng);
    let mut witness = normalize_state(&combine(&reference, &dirs, &coeffs));
    let mut min_eig = searched;
    let distinguished_min = min_eigenvalue(&distinguished);
    if distinguished_min > min_eig {
        witness = distinguished.clone();
        min_eig = distinguished_min;
    }
    Ok(InvariantStateSet {
        basis,
        reference,
        distinguished,
        witness,
        min_eigenvalue: min_eig,
        faithful: min_eig >= tol.faithful_min_eig,
        kernel_residual,
    })
}

/// `‖L_*(ρ)‖_F / max(1, ‖ρ‖_F)`.
pub fn invariance_residual(g: &GeneratorPair, rho: &CMatrix) -> f64 {
    let v = vec(rho);
    let out = g.predual.matrix() * v;
    out.norm() / rho.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::spectral::spectral_split;
    use crate::generator::build_generator;
    use crate::matrix::{diag_real, matrix_unit};
    use crate::model::{examples, QmsModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn states(m: &QmsModel) -> InvariantStateSet {
        let t = Tolerance::default();
        let g = build_generator(m);
        let e = spectral_split(&g, &t).unwrap().ergodic_projection(&t).unwrap();
        invariant_states(&g, &e, &t, &mut ChaCha8Rng::seed_from_u64(7)).unwrap()
    }

    #[test]
    fn dephasing_states() {
        let s = states(&examples::dephasing());
        assert_eq!(s.dimension(), 2);
        assert!((&s.distinguished - identity(2) * real(0.5)).norm() < 1e-8);
        assert!(s.faithful);
        assert!((s.min_eigenvalue - 0.5).abs() < 1e-8);
    }

    #[test]
    fn damping_has_no_faithful_state() {
        let s = states(&examples::amplitude_damping());
        assert_eq!(s.dimension(), 1);
        assert!((&s.distinguished - matrix_unit(2, 0, 0)).norm() < 1e-10);
        assert!(!s.faithful);
        assert!(s.min_eigenvalue.abs() < 1e-9);
    }

    #[test]
    fn unitary_evolution_keeps_maximally_mixed() {
        let s = states(&examples::unitary(diag_real(&[1.0, 2.0])));
        assert_eq!(s.dimension(), 2);
        assert!((&s.distinguished - identity(2) * real(0.5)).norm() < 1e-8);
        assert!(s.faithful);
    }

    #[test]
    fn mixed_model_faithful_only_on_one_block() {
        let s = states(&examples::dephasing_plus_damping());
        // Invariant states: conv{e11, e22, e33}.
        assert_eq!(s.dimension(), 3);
        assert!(!s.faithful);
        let expected = diag_real(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!((&s.distinguished - expected).norm() < 1e-7, "{}", s.distinguished);
    }

    #[test]
    fn large_kernel_uses_restarts() {
        let t = Tolerance::default();
        let m = QmsModel::new(zeros(3, 3), vec![zeros(3, 3)], "zero", &t).unwrap();
        let s = states(&m);
        assert_eq!(s.dimension(), 9);
        assert!((s.min_eigenvalue - 1.0 / 3.0).abs() < 1e-6);
        for b in &s.basis {
            assert!(crate::matrix::is_hermitian(b, 1e-12));
        }
    }
}
