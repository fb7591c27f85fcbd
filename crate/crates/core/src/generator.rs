//! GKSL generators, evolution in both pictures, and the decoherence-free and
//! fixed-point subalgebras.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::algebra::{commutant_of, extend_scaled, new_directions, OperatorAlgebra, OperatorSpace};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, expm, nullspace};
use crate::matrix::{identity, real, trace, CMatrix, I};
use crate::model::QmsModel;
use crate::superop::Superoperator;
use crate::tol::Tolerance;

/// Default sampling times for dynamical checks.
pub const DEFAULT_TIMES: [f64; 4] = [0.1, 0.5, 1.0, 5.0];

/// The generator `L` in both pictures together with its Hamiltonian and
/// dissipative parts, `L = i·δ_H + L_0`. Treat the fields as read-only:
/// exponentials are cached per instance.
#[derive(Debug, Clone)]
pub struct GeneratorPair {
    pub heisenberg: Superoperator,
    pub predual: Superoperator,
    pub hamiltonian_part: Superoperator,
    pub dissipative_part: Superoperator,
    /// `e^{tL}` for recently requested `t`; the same few times recur across checks.
    semigroups: Arc<Mutex<Vec<(u64, Superoperator)>>>,
}

/// Cached exponentials per generator.
const SEMIGROUP_CACHE: usize = 16;

/// `L(x) = i[H,x] − ½Σ(L*L·x − 2L*·x·L + x·L*L)` and
/// `L_*(ρ) = −i[H,ρ] + Σ(L·ρ·L* − ½{L*L, ρ})`.
pub fn build_generator(m: &QmsModel) -> GeneratorPair {
    let d = m.dim();
    let one = identity(d);
    let h = m.hamiltonian();
    let hamiltonian_part = Superoperator::commutator(h).scale(I);
    let mut dissipative = Superoperator::zero(d);
    let mut predual_dissipative = Superoperator::zero(d);
    for l in m.lindblads() {
        let ll = l.adjoint() * l;
        let half = real(0.5);
        dissipative = &dissipative
            + &(&(&Superoperator::sandwich(&l.adjoint(), l)
                - &Superoperator::left(&ll).scale(half))
                - &Superoperator::right(&ll).scale(half));
        predual_dissipative = &predual_dissipative
            + &(&(&Superoperator::sandwich(l, &l.adjoint())
                - &Superoperator::sandwich(&ll, &one).scale(half))
                - &Superoperator::sandwich(&one, &ll).scale(half));
    }
    let heisenberg = &hamiltonian_part + &dissipative;
    let predual = &Superoperator::commutator(h).scale(-I) + &predual_dissipative;
    GeneratorPair {
        heisenberg,
        predual,
        hamiltonian_part,
        dissipative_part: dissipative,
        semigroups: Arc::default(),
    }
}

/// Residuals of the structural identities every GKSL generator satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorResiduals {
    /// `‖L − (iδ_H + L_0)‖`.
    pub split: f64,
    /// `‖L_* − L†‖` (Hilbert–Schmidt duality).
    pub duality: f64,
    /// `‖L(1)‖`.
    pub unitality: f64,
    /// `max |tr L_*(e_ij)|`.
    pub trace_preservation: f64,
}

impl GeneratorPair {
    pub fn dim(&self) -> usize {
        self.heisenberg.dim()
    }

    pub fn residuals(&self) -> GeneratorResiduals {
        let d = self.dim();
        let split = (&self.heisenberg - &(&self.hamiltonian_part + &self.dissipative_part)).norm();
        let duality = (self.predual.matrix() - self.heisenberg.matrix().adjoint()).norm();
        let unitality = self.heisenberg.apply(&identity(d)).norm();
        let mut trace_preservation: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let e = crate::matrix::matrix_unit(d, i, j);
                trace_preservation = trace_preservation.max(trace(&self.predual.apply(&e)).norm());
            }
        }
        GeneratorResiduals {
            split,
            duality,
            unitality,
            trace_preservation,
        }
    }

    /// `T_t = e^{tL}` as a superoperator.
    pub fn semigroup(&self, t: f64) -> Superoperator {
        let key = t.to_bits();
        let mut cache = self.semigroups.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((_, s)) = cache.iter().find(|(k, _)| *k == key) {
            return s.clone();
        }
        let s = self.heisenberg.expm(t);
        if cache.len() == SEMIGROUP_CACHE {
            cache.remove(0);
        }
        cache.push((key, s.clone()));
        s
    }
}

/// `T_t(x) = e^{tL}(x)`.
pub fn evolve_observable(g: &GeneratorPair, x: &CMatrix, t: f64) -> CMatrix {
    g.semigroup(t).apply(x)
}

/// Checks that `ρ` is a density matrix within the tolerance policy.
pub fn check_state(rho: &CMatrix, tol: &Tolerance) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotAState(format!("shape {:?}", rho.shape())));
    }
    let eig = eig_hermitian(rho, tol).map_err(|_| Error::NotAState("not Hermitian".into()))?;
    let tr = trace(rho);
    if (tr - real(1.0)).norm() > tol.residual {
        return Err(Error::NotAState(format!("trace {tr}")));
    }
    if let Some(&min) = eig.values.first() {
        if min < -tol.residual {
            return Err(Error::NotAState(format!("negative eigenvalue {min:.3e}")));
        }
    }
    Ok(())
}

/// `ρ(t) = e^{tL_*}(ρ)`.
pub fn evolve_state(g: &GeneratorPair, rho: &CMatrix, t: f64, tol: &Tolerance) -> Result<CMatrix> {
    check_state(rho, tol)?;
    if rho.nrows() != g.dim() {
        return Err(Error::NotAState(format!("dimension {} does not match model {}", rho.nrows(), g.dim())));
    }
    Ok(g.predual.expm(t).apply(rho))
}

/// Smallest `δ_H`-invariant subspace containing every `L_ℓ` and `L_ℓ*`.
///
/// Grown one commutator layer at a time until a full step adds nothing
/// (at most `d²` steps); rank decisions are relative to
/// `max(2‖H‖_F, max_ℓ ‖L_ℓ‖_F)`.
pub fn iterated_commutator_span(m: &QmsModel, tol: &Tolerance) -> OperatorSpace {
    iterated_commutator_span_scaled(m, model_scale(m), tol)
}

/// `max(2‖H‖_F, max_ℓ ‖L_ℓ‖_F)`: the size below which an operator built from the model is roundoff.
pub fn model_scale(m: &QmsModel) -> f64 {
    let l = m.lindblads().iter().map(|l| l.norm()).fold(0.0, f64::max);
    (2.0 * m.hamiltonian().norm()).max(l)
}

/// As [`iterated_commutator_span`] with an explicit scale, for compressions
/// whose entries inherit roundoff from a larger model.
pub fn iterated_commutator_span_scaled(m: &QmsModel, scale: f64, tol: &Tolerance) -> OperatorSpace {
    let d = m.dim();
    let mut seed = Vec::with_capacity(2 * m.lindblads().len());
    for l in m.lindblads() {
        seed.push(l.clone());
        seed.push(l.adjoint());
    }
    let mut span = extend_scaled(&OperatorSpace::zero(d), &seed, scale, tol);
    let h = m.hamiltonian();
    if h.norm() == 0.0 || span.dimension() == 0 {
        return span;
    }
    let mut fresh = span.elements();
    for _ in 0..d * d {
        if span.dimension() == d * d {
            break;
        }
        let candidates: Vec<CMatrix> = fresh.iter().map(|b| h * b - b * h).collect();
        let grown = extend_scaled(&span, &candidates, scale, tol);
        if grown.dimension() == span.dimension() {
            break;
        }
        fresh = new_directions(&span, &grown, tol);
        span = grown;
    }
    span
}

/// `N(T)`: the commutant of `{δ_H^n(L_ℓ), δ_H^n(L_ℓ*) : n ≥ 0}`.
pub fn df_subalgebra(m: &QmsModel, tol: &Tolerance) -> OperatorAlgebra {
    df_subalgebra_scaled(m, model_scale(m), tol)
}

pub fn df_subalgebra_scaled(m: &QmsModel, scale: f64, tol: &Tolerance) -> OperatorAlgebra {
    let span = iterated_commutator_span_scaled(m, scale, tol);
    commutant_of(m.dim(), &span.elements(), tol)
}

/// Dynamical membership test for `N(T)`: both multiplicativity identities
/// `T_t(x*x) = T_t(x)*T_t(x)` and `T_t(xx*) = T_t(x)T_t(x)*` at every sampled `t`.
pub fn df_membership_check(g: &GeneratorPair, x: &CMatrix, ts: &[f64], tol: &Tolerance) -> bool {
    df_membership_residual(g, x, ts) <= tol.residual * (1.0 + x.norm() * x.norm())
}

pub fn df_membership_residual(g: &GeneratorPair, x: &CMatrix, ts: &[f64]) -> f64 {
    ts.iter().map(|&t| membership_defect(&g.semigroup(t), x)).fold(0.0, f64::max)
}

/// `max_x df_membership_residual(x) / (1 + ‖x‖²)` over `xs`, with one
/// exponential per sampled time.
pub fn df_membership_worst(g: &GeneratorPair, xs: &[CMatrix], ts: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in ts {
        let tt = g.semigroup(t);
        for x in xs {
            worst = worst.max(membership_defect(&tt, x) / (1.0 + x.norm() * x.norm()));
        }
    }
    worst
}

fn membership_defect(tt: &Superoperator, x: &CMatrix) -> f64 {
    let xs = x.adjoint();
    let tx = tt.apply(x);
    let txs = tt.apply(&xs);
    let a = (tt.apply(&(&xs * x)) - &txs * &tx).norm();
    let b = (tt.apply(&(x * &xs)) - &tx * &txs).norm();
    a.max(b)
}

/// `ker L`, optionally cross-checked against `{H, L_k, L_k*}′`.
#[derive(Debug, Clone)]
pub struct FixedPoints {
    pub space: OperatorSpace,
    /// Whether the kernel passes the *-algebra axioms.
    pub is_algebra: bool,
    /// `Some(equal)` when the comparison with `{H, L_k, L_k*}′` was requested.
    pub matches_commutant: Option<bool>,
}

impl FixedPoints {
    pub fn algebra(&self) -> Option<OperatorAlgebra> {
        self.is_algebra
            .then(|| OperatorAlgebra::from_space(self.space.clone()))
    }
}

/// `F(T) = ker L`.
///
/// With a faithful invariant state `F(T)` is an algebra equal to
/// `{H, L_k, L_k*}′`; the comparison is only made when `faithful_state_known`.
pub fn fixed_point_algebra(
    m: &QmsModel,
    g: &GeneratorPair,
    faithful_state_known: bool,
    tol: &Tolerance,
) -> FixedPoints {
    let d = m.dim();
    let kernel = nullspace(g.heisenberg.matrix(), tol);
    let space = OperatorSpace::from_orthonormal(d, kernel);
    let is_algebra = OperatorAlgebra::from_space(space.clone()).is_valid(tol);
    let matches_commutant = faithful_state_known.then(|| {
        let mut set = vec![m.hamiltonian().clone()];
        set.extend(m.lindblads().iter().cloned());
        let comm = commutant_of(d, &set, tol);
        space.equals(comm.space(), tol)
    });
    FixedPoints {
        space,
        is_algebra,
        matches_commutant,
    }
}

/// `‖T_t(x) − e^{itH}·x·e^{−itH}‖_F` maximized over the basis of `a` and `ts`,
/// each term divided by `1 + ‖x‖_F`.
pub fn automorphism_residual(m: &QmsModel, g: &GeneratorPair, a: &OperatorAlgebra, ts: &[f64]) -> f64 {
    let h = m.hamiltonian();
    let mut worst: f64 = 0.0;
    for &t in ts {
        let tt = g.semigroup(t);
        let u = expm(&(h * Complex64::new(0.0, t)));
        for x in a.elements() {
            let lhs = tt.apply(&x);
            let rhs = &u * &x * u.adjoint();
            worst = worst.max((lhs - rhs).norm() / (1.0 + x.norm()));
        }
    }
    worst
}

/// `T_t(x) = e^{itH}·x·e^{−itH}` on `a` at the sampled times.
pub fn automorphism_check(m: &QmsModel, g: &GeneratorPair, a: &OperatorAlgebra, ts: &[f64], tol: &Tolerance) -> bool {
    automorphism_residual(m, g, a, ts) <= tol.residual
}
