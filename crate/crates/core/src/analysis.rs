//! Full analysis of one model: every structure is computed once and every
//! structural statement is checked against it, with explicit hypotheses.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{center, center_of_commutant_identity, OperatorAlgebra};
use crate::asymptotics::{
    annihilation_residual, cesaro_check, compare_nt_mr, ergodic_consistency, invariant_state_block_structure,
    invariant_states, isometry_defect, reversible_algebra, spectral_split, stable_space, CesaroCheck,
    InvariantStateSet, NtMrVerdict, ReversibleAlgebra, SpectralSplit, StableSpace,
};
use crate::error::{Error, Result};
use crate::generator::{
    automorphism_residual, build_generator, df_membership_worst, df_subalgebra, fixed_point_algebra,
    FixedPoints, GeneratorPair, DEFAULT_TIMES,
};
use crate::model::QmsModel;
use crate::structure::{
    build_df_da_generators, extract_block_data, reversible_block_structure, verify_central_block_restriction,
    verify_component_triviality, verify_df_action, BlockLindbladData,
};
use crate::superop::Superoperator;
use crate::tol::Tolerance;
use crate::wedderburn::{minimal_central_projections, wedderburn, BlockDecomposition, CentralProjection};

/// Times at which the block factorization is checked.
pub const FACTORIZATION_TIMES: [f64; 3] = [0.1, 1.0, 10.0];
/// Horizon of the Cesàro-mean comparison.
pub const CESARO_TIME: f64 = 1e3;
/// Bound on the drift-corrected Cesàro residual.
pub const CESARO_BOUND: f64 = 1e-6;

pub const NO_FAITHFUL_STATE: &str = "no faithful invariant state";
pub const PERIPHERAL_JORDAN: &str = "peripheral eigenvalue with a Jordan block";

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub tol: Tolerance,
    pub seed: u64,
    pub times: Vec<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            seed: 0,
            times: DEFAULT_TIMES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The hypothesis named here was not established.
    Skipped(String),
    Error(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped(_) => "skipped",
            Verdict::Error(_) => "error",
        }
    }
}

/// One row of the verdict table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub statement: &'static str,
    pub verdict: Verdict,
    /// Worst residual behind the verdict, when one exists.
    pub residual: Option<f64>,
    pub detail: String,
}

fn check(name: &'static str, statement: &'static str, ok: bool, residual: Option<f64>, detail: String) -> Check {
    Check {
        name,
        statement,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        residual,
        detail,
    }
}

fn skipped(name: &'static str, statement: &'static str, reason: &str) -> Check {
    Check {
        name,
        statement,
        verdict: Verdict::Skipped(reason.to_string()),
        residual: None,
        detail: String::new(),
    }
}

fn errored(name: &'static str, statement: &'static str, err: &Error) -> Check {
    Check {
        name,
        statement,
        verdict: Verdict::Error(err.to_string()),
        residual: None,
        detail: String::new(),
    }
}

/// Everything computed for one model.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub model: QmsModel,
    pub options: AnalysisOptions,
    pub generator: GeneratorPair,
    pub nt: OperatorAlgebra,
    pub nt_center: OperatorAlgebra,
    pub central_projections: Option<Vec<CentralProjection>>,
    pub nt_blocks: Option<BlockDecomposition>,
    pub block_data: Option<BlockLindbladData>,
    pub fixed_points: FixedPoints,
    pub split: SpectralSplit,
    pub ergodic: Superoperator,
    pub cesaro: Option<CesaroCheck>,
    pub states: InvariantStateSet,
    pub reversible: ReversibleAlgebra,
    pub stable: StableSpace,
    pub nt_mr: Option<NtMrVerdict>,
    pub checks: Vec<Check>,
}

impl Analysis {
    pub fn faithful(&self) -> bool {
        self.states.faithful
    }

    /// Why faithful-state-conditional statements do not apply, if they do not.
    pub fn conditional_hypothesis_failure(&self) -> Option<&'static str> {
        if self.reversible.peripheral_jordan.is_some() {
            Some(PERIPHERAL_JORDAN)
        } else if !self.states.faithful {
            Some(NO_FAITHFUL_STATE)
        } else {
            None
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn has_failures(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn has_errors(&self) -> bool {
        self.checks.iter().any(|c| matches!(c.verdict, Verdict::Error(_)))
    }
}

/// Runs every module on `model`. Fails only when the spectral or
/// invariant-state computation itself fails; other module errors become
/// [`Verdict::Error`] rows.
pub fn analyze(model: &QmsModel, options: &AnalysisOptions) -> Result<Analysis> {
    let tol = &options.tol;
    tol.validate()?;
    let ts = &options.times;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let g = build_generator(model);
    let d = model.dim();
    let mut checks = Vec::new();
    let lnorm = g.heisenberg.norm();

    let gr = g.residuals();
    let gen_worst = gr.split.max(gr.duality).max(gr.unitality).max(gr.trace_preservation);
    checks.push(check(
        "generator_identities",
        "L = iδ_H + L_0, L_* = L†, L(1) = 0, tr∘L_* = 0",
        gen_worst <= tol.residual * (1.0 + lnorm),
        Some(gen_worst),
        format!("split {:.2e}, duality {:.2e}, unitality {:.2e}, trace {:.2e}", gr.split, gr.duality, gr.unitality, gr.trace_preservation),
    ));

    // Decoherence-free subalgebra.
    let nt = df_subalgebra(model, tol);
    let nt_alg = nt.residuals().max();
    checks.push(check(
        "nt_is_algebra",
        "N(T) is a unital *-algebra",
        nt.is_valid(tol),
        Some(nt_alg),
        format!("dimension {}", nt.dimension()),
    ));
    let membership = df_membership_worst(&g, &nt.elements(), ts);
    checks.push(check(
        "nt_multiplicative",
        "T_t(x*x) = T_t(x)*T_t(x) and T_t(xx*) = T_t(x)T_t(x)* on N(T)",
        membership <= tol.residual,
        Some(membership),
        String::new(),
    ));
    let auto = automorphism_residual(model, &g, &nt, ts);
    checks.push(check(
        "nt_automorphic_action",
        "T_t(x) = e^{itH}·x·e^{−itH} on N(T)",
        auto <= tol.residual,
        Some(auto),
        String::new(),
    ));
    let nt_center = center(&nt, tol);
    let coc = center_of_commutant_identity(&nt, tol);
    checks.push(check(
        "center_of_commutant",
        "Z(N(T)) = Z(Z(N(T))′)",
        coc,
        None,
        format!("center dimension {}", nt_center.dimension()),
    ));

    let central_projections = match minimal_central_projections(&nt, tol, &mut rng) {
        Ok(p) => Some(p),
        Err(e) => {
            checks.push(errored("minimal_central_projections", "Z(N(T)) has minimal projections summing to 1", &e));
            None
        }
    };
    let nt_blocks = match wedderburn(&nt, tol, &mut rng) {
        Ok(dec) => {
            let r = dec.invariant_residuals(&nt);
            checks.push(check(
                "nt_block_decomposition",
                "U*·N(T)·U = ⊕ B(C^k) ⊗ 1_m with orthogonal central projections summing to 1",
                r.max() <= tol.residual,
                Some(r.max()),
                format!("blocks {:?}", dec.blocks.iter().map(|b| (b.k, b.m)).collect::<Vec<_>>()),
            ));
            Some(dec)
        }
        Err(e) => {
            checks.push(errored("nt_block_decomposition", "U*·N(T)·U = ⊕ B(C^k) ⊗ 1_m", &e));
            None
        }
    };

    // Block form of the Lindblad data and the induced factorization.
    let mut block_data = None;
    if let Some(dec) = &nt_blocks {
        match extract_block_data(model, dec, tol) {
            Ok(data) => {
                let r = data.residuals.max();
                let (he, le) = data.reconstruction_error(model);
                checks.push(check(
                    "block_form_of_generator",
                    "L_ℓ = ⊕ 1 ⊗ N_ℓ^{(i)} and H = ⊕ (H_i ⊗ 1 + 1 ⊗ N_0^{(i)}) in the block basis",
                    r <= tol.residual,
                    Some(r),
                    format!("reconstruction error H {he:.2e}, L {le:.2e}"),
                ));
                match build_df_da_generators(&data, &g, tol) {
                    Ok(gens) => {
                        let fact = gens.factorization_residual(&g, &FACTORIZATION_TIMES);
                        let worst = fact.max(gens.sum).max(gens.commutation);
                        checks.push(check(
                            "df_da_factorization",
                            "L = L^df + L^da with commuting parts and e^{tL} = e^{tL^da}·e^{tL^df}",
                            gens.sum <= tol.residual * (1.0 + lnorm) && fact <= tol.residual,
                            Some(worst),
                            format!("commutation {:.2e}, sum {:.2e}, factorization {:.2e}", gens.commutation, gens.sum, fact),
                        ));
                        match verify_df_action(&data, &gens, &g, ts, tol, &mut rng) {
                            Ok(a) => checks.push(check(
                                "df_product_action",
                                "T^df_t is conjugation by e^{itH̃} and T_t(x⊗y) = e^{itH_i}xe^{−itH_i} ⊗ T^{(i)}_t(y)",
                                a.passes(tol),
                                Some(a.df_conjugation.max(a.product_action)),
                                String::new(),
                            )),
                            Err(e) => checks.push(errored("df_product_action", "explicit action on product observables", &e)),
                        }
                    }
                    Err(e) => checks.push(errored("df_da_factorization", "L^df and L^da commute", &e)),
                }
                match verify_component_triviality(&data, tol) {
                    Ok(flags) => checks.push(check(
                        "multiplicity_components_trivial",
                        "each multiplicity-factor semigroup has N = C·1",
                        flags.iter().all(|&f| f),
                        None,
                        format!("{flags:?}"),
                    )),
                    Err(e) => checks.push(errored("multiplicity_components_trivial", "N(T^{(i)}) = C·1", &e)),
                }
                block_data = Some(data);
            }
            Err(e) => checks.push(errored("block_form_of_generator", "block form of H and L_ℓ", &e)),
        }
    }

    if let Some(cps) = &central_projections {
        let zr = annihilation_residual(&g, &nt_center);
        checks.push(check(
            "center_is_fixed",
            "L(z) = 0 for every z ∈ Z(N(T))",
            zr <= tol.residual,
            Some(zr),
            String::new(),
        ));
        match verify_central_block_restriction(model, &g, &nt, cps, tol) {
            Ok(rs) => {
                let worst = rs
                    .iter()
                    .map(|r| r.commutator_residual.max(r.generator_residual))
                    .fold(0.0, f64::max);
                checks.push(check(
                    "central_block_restriction",
                    "[p,H] = [p,L_ℓ] = 0 and the compressed model has N = p·N(T)·p for each minimal central p",
                    rs.iter().all(|r| r.passes(tol)),
                    Some(worst),
                    format!("ranks {:?}", rs.iter().map(|r| r.rank).collect::<Vec<_>>()),
                ));
            }
            Err(e) => checks.push(errored("central_block_restriction", "restriction to central blocks", &e)),
        }
    }

    // Spectral side.
    let split = spectral_split(&g, tol)?;
    let max_re = split.max_real_part();
    checks.push(check(
        "spectrum_in_left_half_plane",
        "Re λ ≤ 0 for every eigenvalue of L",
        max_re <= tol.eig_cluster_abs,
        Some(max_re.max(0.0)),
        format!("Schur residual {:.2e}", split.schur_residual),
    ));
    let ergodic = split.ergodic_projection(tol)?;
    let consistency = ergodic_consistency(&g, &ergodic, ts);
    let cesaro = cesaro_check(&g, &ergodic, CESARO_TIME).ok();
    let zero_multiplicity = split
        .zero_cluster(tol)
        .map_or(0, |i| split.clusters[i].multiplicity);
    let states = invariant_states(&g, &ergodic, tol, &mut rng)?;
    let faithful = states.faithful;
    let fixed_points = fixed_point_algebra(model, &g, faithful, tol);
    checks.push(check(
        "ergodic_projection",
        "E∘E = E, E∘T_t = T_t∘E = E, range E = ker L, and E matches the Cesàro mean",
        consistency <= tol.residual * (1.0 + ergodic.norm())
            && zero_multiplicity == fixed_points.space.dimension()
            && cesaro.is_some_and(|c| c.passes(CESARO_BOUND)),
        Some(consistency),
        match cesaro {
            Some(c) => format!("Cesàro at t = {}: corrected {:.2e}, raw {:.2e}", c.t, c.corrected_residual, c.raw_deviation),
            None => "Cesàro comparison failed".into(),
        },
    ));

    let reversible = reversible_algebra(&split, tol);
    let stable = stable_space(&g, &split, tol);
    let peripheral_dim = split.peripheral_space(tol).dimension();
    checks.push(check(
        "peripheral_stable_completeness",
        "peripheral and stable generalized eigenspaces span all of B(h)",
        peripheral_dim + stable.dimension() == d * d,
        None,
        format!("{} + {} vs {}", peripheral_dim, stable.dimension(), d * d),
    ));
    let envelope = stable.envelope_ratio(&g, &[0.0, 0.5, 1.0, 2.0, 5.0, stable.t_check]);
    checks.push(check(
        "stable_decay_envelope",
        "‖T_t(x)‖ ≤ K·e^{−γt/2}·‖x‖ on the stable space",
        envelope <= 1.0 + tol.residual,
        Some(envelope),
        format!("K = {:.3e}, gap {:?}", stable.envelope_constant, stable.gap),
    ));

    let hypothesis = if reversible.peripheral_jordan.is_some() {
        Some(PERIPHERAL_JORDAN)
    } else if !faithful {
        Some(NO_FAITHFUL_STATE)
    } else {
        None
    };

    let mut nt_mr = None;
    if let Some(dec) = &nt_blocks {
        nt_mr = Some(compare_nt_mr(&nt, dec, &reversible.algebra, faithful, tol));
    }

    match hypothesis {
        Some(reason) => {
            for (name, statement) in CONDITIONAL {
                checks.push(skipped(name, statement, reason));
            }
        }
        None => conditional_checks(
            &mut checks,
            ConditionalInputs {
                model,
                g: &g,
                nt: &nt,
                nt_blocks: nt_blocks.as_ref(),
                central_projections: central_projections.as_deref(),
                fixed_points: &fixed_points,
                states: &states,
                reversible: &reversible,
                stable: &stable,
                nt_mr: nt_mr.as_ref(),
                ts,
                tol,
                rng: &mut rng,
            },
        ),
    }

    Ok(Analysis {
        model: model.clone(),
        options: options.clone(),
        generator: g,
        nt,
        nt_center,
        central_projections,
        nt_blocks,
        block_data,
        fixed_points,
        split,
        ergodic,
        cesaro,
        states,
        reversible,
        stable,
        nt_mr,
        checks,
    })
}

/// Statements that require a faithful invariant state.
const CONDITIONAL: [(&str, &str); 8] = [
    ("fixed_points_commutant", "F(T) = {H, L_ℓ, L_ℓ*}′"),
    ("peripheral_semisimple", "peripheral eigenvalues of L are semisimple"),
    ("reversible_span_is_algebra", "the span of peripheral eigenvectors is already a *-algebra"),
    ("reversible_isometric", "‖T_t(x)‖ = ‖x‖ on M_r"),
    ("nt_equals_reversible", "N(T) = M_r"),
    ("reversible_blocks_match", "M_r and N(T) have the same block structure"),
    ("invariant_states_block_diagonal", "p_i·σ·p_j = 0 for i ≠ j and invariant σ"),
    ("decoherence_completeness", "dim N(T) + dim M_s = d² and T_t → 0 on M_s"),
];

struct ConditionalInputs<'a, R> {
    model: &'a QmsModel,
    g: &'a GeneratorPair,
    nt: &'a OperatorAlgebra,
    nt_blocks: Option<&'a BlockDecomposition>,
    central_projections: Option<&'a [CentralProjection]>,
    fixed_points: &'a FixedPoints,
    states: &'a InvariantStateSet,
    reversible: &'a ReversibleAlgebra,
    stable: &'a StableSpace,
    nt_mr: Option<&'a NtMrVerdict>,
    ts: &'a [f64],
    tol: &'a Tolerance,
    rng: &'a mut R,
}

fn conditional_checks<R: rand::Rng>(checks: &mut Vec<Check>, c: ConditionalInputs<'_, R>) {
    let tol = c.tol;
    let [fixed, semisimple, span_alg, isometric, equal, blocks, diag, eid] = CONDITIONAL;
    checks.push(check(
        fixed.0,
        fixed.1,
        c.fixed_points.matches_commutant == Some(true) && c.fixed_points.is_algebra,
        None,
        format!("dim F(T) = {}", c.fixed_points.space.dimension()),
    ));
    checks.push(check(semisimple.0, semisimple.1, c.reversible.peripheral_jordan.is_none(), None, String::new()));
    checks.push(check(
        span_alg.0,
        span_alg.1,
        c.reversible.closure_noop,
        None,
        format!("span {} vs algebra {}", c.reversible.span.dimension(), c.reversible.algebra.dimension()),
    ));
    let iso = isometry_defect(c.g, &c.reversible.algebra, c.ts);
    checks.push(check(isometric.0, isometric.1, iso <= tol.residual, Some(iso), String::new()));

    match c.nt_mr {
        Some(v) => checks.push(check(
            equal.0,
            equal.1,
            v.equal,
            None,
            format!("dim N(T) = {}, dim M_r = {}", v.nt_dimension, v.mr_dimension),
        )),
        None => checks.push(skipped(equal.0, equal.1, "no block decomposition of N(T)")),
    }

    match c.nt_blocks {
        Some(nt_dec) => match wedderburn(&c.reversible.algebra, tol, c.rng)
            .and_then(|mr_dec| reversible_block_structure(c.model, &mr_dec, nt_dec, true, tol))
        {
            Ok(r) => checks.push(check(
                blocks.0,
                blocks.1,
                r.matches_nt && r.pure_point && r.data.residuals.max() <= tol.residual,
                Some(r.data.residuals.max()),
                format!("blocks {:?}", r.data.decomposition.blocks.iter().map(|b| (b.k, b.m)).collect::<Vec<_>>()),
            )),
            Err(e) => checks.push(errored(blocks.0, blocks.1, &e)),
        },
        None => checks.push(skipped(blocks.0, blocks.1, "no block decomposition of N(T)")),
    }

    match c.central_projections {
        Some(cps) => {
            let ps: Vec<_> = cps.iter().map(|p| p.projection.clone()).collect();
            let mut worst_off: f64 = 0.0;
            let mut worst_weight: f64 = 0.0;
            let mut failure = None;
            let candidates = [&c.states.distinguished, &c.states.reference, &c.states.witness];
            for sigma in candidates {
                match invariant_state_block_structure(c.g, sigma, true, &ps, tol) {
                    Ok(s) => {
                        worst_off = worst_off.max(s.off_diagonal);
                        worst_weight = worst_weight.max(s.weight_defect);
                    }
                    Err(e) => failure = Some(e),
                }
            }
            // The statement is linear in σ, so the whole kernel is covered by its basis.
            for b in &c.states.basis {
                for (i, p) in ps.iter().enumerate() {
                    for (j, q) in ps.iter().enumerate() {
                        if i != j {
                            worst_off = worst_off.max((p * b * q).norm());
                        }
                    }
                }
            }
            match failure {
                Some(e) => checks.push(errored(diag.0, diag.1, &e)),
                None => checks.push(check(
                    diag.0,
                    diag.1,
                    worst_off <= tol.residual && worst_weight <= 1e-10,
                    Some(worst_off),
                    format!("weight defect {worst_weight:.2e}"),
                )),
            }
        }
        None => checks.push(skipped(diag.0, diag.1, "no minimal central projections")),
    }

    let complete = c.nt.dimension() + c.stable.dimension() == c.g.dim() * c.g.dim();
    checks.push(check(
        eid.0,
        eid.1,
        complete && c.stable.decay_certified(tol),
        Some(c.stable.max_decay),
        format!(
            "{} + {} vs {}, decay at t = {:.3} is {:.2e}",
            c.nt.dimension(),
            c.stable.dimension(),
            c.g.dim() * c.g.dim(),
            c.stable.t_check,
            c.stable.max_decay
        ),
    ));
}

/// Clustered spectrum as `(λ, multiplicity)` pairs.
pub fn clustered_spectrum(a: &Analysis) -> Vec<(Complex64, usize)> {
    a.split.spectrum()
}

/// Whether `N(T)` and `M_r` agree, regardless of hypotheses (reported as an observation when not asserted).
pub fn nt_mr_observation(a: &Analysis) -> Option<bool> {
    a.nt_mr.as_ref().map(|v| v.equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::diag_real;
    use crate::model::examples;
    use crate::wedderburn::Block;

    fn run(m: &QmsModel) -> Analysis {
        analyze(m, &AnalysisOptions::default()).unwrap()
    }

    fn assert_no_failures(a: &Analysis) {
        for c in &a.checks {
            assert!(
                !matches!(c.verdict, Verdict::Fail | Verdict::Error(_)),
                "{}: {} {:?} {:?} {}",
                a.model.label,
                c.name,
                c.verdict,
                c.residual,
                c.detail
            );
        }
    }

    #[test]
    fn dephasing_passes_everything() {
        let a = run(&examples::dephasing());
        assert_no_failures(&a);
        assert!(a.faithful());
        assert_eq!(a.nt.dimension(), 2);
        assert_eq!(a.nt_blocks.as_ref().unwrap().blocks, vec![Block { k: 1, m: 1 }; 2]);
        assert_eq!(a.check("nt_equals_reversible").unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn damping_skips_conditional_checks() {
        let a = run(&examples::amplitude_damping());
        assert_no_failures(&a);
        assert!(!a.faithful());
        let c = a.check("nt_equals_reversible").unwrap();
        assert_eq!(c.verdict, Verdict::Skipped(NO_FAITHFUL_STATE.into()));
        assert_eq!(nt_mr_observation(&a), Some(true));
    }

    #[test]
    fn other_fixtures_pass() {
        for m in [
            examples::kronecker_block(&[0.5, -0.5]),
            examples::unitary(diag_real(&[1.0, 2.0])),
            examples::dephasing_plus_damping(),
        ] {
            assert_no_failures(&run(&m));
        }
    }

    #[test]
    fn analysis_is_deterministic() {
        let m = examples::kronecker_block(&[0.5, -0.5]);
        let a = run(&m);
        let b = run(&m);
        assert_eq!(a.checks, b.checks);
        assert_eq!(a.states.distinguished, b.states.distinguished);
    }
}
