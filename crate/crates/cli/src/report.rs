//! The JSON analysis report.

use std::collections::BTreeMap;

use qmsdf_core::analysis::{Analysis, Verdict};
use qmsdf_core::CMatrix;
use serde::Serialize;
use serde_json::Value;

use crate::model_file::{matrix_to_json, model_to_json};
use crate::settings::tolerance_map;

/// Bumped on any change to the report layout.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "qmsdf";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const ATOMICITY_NOTE: &str = "Every finite-dimensional von Neumann algebra is atomic: a finite direct sum of type I factors B(C^k) ⊗ 1_m. Atomicity of N(T) therefore holds automatically here; the statement is exercised through its checkable companion N(T) = M_r (check nt_equals_reversible).";
pub const TOPOLOGY_NOTE: &str = "In finite dimension all operator topologies on B(h) coincide, so N(T) and F(T) are computed as plain subspaces with no closure step.";
pub const STABLE_NOTE: &str = "With a spectral gap, the observables with T_t(x) → 0 are exactly the stable generalized eigenspaces of L; that space is reported once, as reversible.stable_dimension.";
pub const TYPE_II_NOTE: &str = "The type II_1 example built from the free group is infinite-dimensional and has no finite-dimensional realization; it is not computed.";

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Input {
    pub model: Value,
    pub tolerance: BTreeMap<&'static str, f64>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecoherenceFree {
    pub dimension: usize,
    pub basis: Vec<JsonMatrix>,
    pub center_dimension: usize,
    /// `[k_i, m_i]`; absent when the block decomposition failed.
    pub blocks: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointSummary {
    pub dimension: usize,
    pub basis: Vec<JsonMatrix>,
    pub is_algebra: bool,
    /// Only decided when a faithful invariant state exists.
    pub equals_commutant: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantStateSummary {
    pub dimension: usize,
    pub faithful: bool,
    pub min_eigenvalue: f64,
    pub distinguished: JsonMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumCluster {
    pub eigenvalue: [f64; 2],
    pub multiplicity: usize,
    /// `peripheral`, `stable` or `unstable`.
    pub class: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reversible {
    pub dimension: usize,
    pub span_dimension: usize,
    pub stable_dimension: usize,
    pub spectral_gap: Option<f64>,
    pub t_check: f64,
    pub stable_decay_at_t_check: f64,
    pub envelope_constant: f64,
    /// Whether `N(T) = M_r` numerically, asserted or not.
    pub equals_nt: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub name: &'static str,
    pub statement: &'static str,
    pub verdict: &'static str,
    /// The unmet hypothesis for `skipped`, the error message for `error`.
    pub reason: Option<String>,
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: Tool,
    pub seed: u64,
    pub input: Input,
    pub notes: [&'static str; 4],
    pub decoherence_free: DecoherenceFree,
    pub fixed_points: FixedPointSummary,
    pub invariant_states: InvariantStateSummary,
    pub spectrum: Vec<SpectrumCluster>,
    pub reversible: Reversible,
    pub verdicts: Vec<VerdictRow>,
    pub residuals: BTreeMap<String, f64>,
    pub summary: BTreeMap<&'static str, usize>,
}

fn json_basis(elements: &[CMatrix]) -> Vec<JsonMatrix> {
    elements.iter().map(matrix_to_json).collect()
}

pub fn verdict_row(name: &'static str, statement: &'static str, verdict: &Verdict, residual: Option<f64>, detail: &str) -> VerdictRow {
    let reason = match verdict {
        Verdict::Skipped(r) | Verdict::Error(r) => Some(r.clone()),
        _ => None,
    };
    VerdictRow {
        name,
        statement,
        verdict: verdict.label(),
        reason,
        residual,
        detail: detail.to_string(),
    }
}

impl AnalysisReport {
    pub fn new(a: &Analysis) -> Self {
        let split = &a.split;
        let spectrum = split
            .clusters
            .iter()
            .enumerate()
            .map(|(i, c)| SpectrumCluster {
                eigenvalue: [c.eigenvalue.re, c.eigenvalue.im],
                multiplicity: c.multiplicity,
                class: if split.peripheral.contains(&i) {
                    "peripheral"
                } else if split.stable.contains(&i) {
                    "stable"
                } else {
                    "unstable"
                },
            })
            .collect();
        let verdicts: Vec<VerdictRow> = a
            .checks
            .iter()
            .map(|c| verdict_row(c.name, c.statement, &c.verdict, c.residual, &c.detail))
            .collect();
        let mut residuals: BTreeMap<String, f64> = a
            .checks
            .iter()
            .filter_map(|c| c.residual.map(|r| (c.name.to_string(), r)))
            .collect();
        residuals.insert("invariant_state_kernel".into(), a.states.kernel_residual);
        residuals.insert("schur_decomposition".into(), split.schur_residual);
        let mut summary = BTreeMap::from([("pass", 0), ("fail", 0), ("skipped", 0), ("error", 0)]);
        for row in &verdicts {
            *summary.get_mut(row.verdict).expect("known label") += 1;
        }
        Self {
            tool: Tool {
                name: TOOL_NAME,
                version: TOOL_VERSION,
                schema_version: SCHEMA_VERSION,
            },
            seed: a.options.seed,
            input: Input {
                model: model_to_json(&a.model),
                tolerance: tolerance_map(&a.options.tol),
                times: a.options.times.clone(),
            },
            notes: [ATOMICITY_NOTE, TYPE_II_NOTE, TOPOLOGY_NOTE, STABLE_NOTE],
            decoherence_free: DecoherenceFree {
                dimension: a.nt.dimension(),
                basis: json_basis(&a.nt.elements()),
                center_dimension: a.nt_center.dimension(),
                blocks: a
                    .nt_blocks
                    .as_ref()
                    .map(|d| d.blocks.iter().map(|b| [b.k, b.m]).collect()),
            },
            fixed_points: FixedPointSummary {
                dimension: a.fixed_points.space.dimension(),
                basis: json_basis(&a.fixed_points.space.elements()),
                is_algebra: a.fixed_points.is_algebra,
                equals_commutant: a.fixed_points.matches_commutant,
            },
            invariant_states: InvariantStateSummary {
                dimension: a.states.dimension(),
                faithful: a.states.faithful,
                min_eigenvalue: a.states.min_eigenvalue,
                distinguished: matrix_to_json(&a.states.distinguished),
            },
            spectrum,
            reversible: Reversible {
                dimension: a.reversible.algebra.dimension(),
                span_dimension: a.reversible.span.dimension(),
                stable_dimension: a.stable.dimension(),
                spectral_gap: a.stable.gap,
                t_check: a.stable.t_check,
                stable_decay_at_t_check: a.stable.max_decay,
                envelope_constant: a.stable.envelope_constant,
                equals_nt: a.nt_mr.as_ref().map(|v| v.equal),
            },
            verdicts,
            residuals,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per verdict: `name  verdict (reason)`.
    pub fn verdict_lines(&self) -> String {
        let width = self.verdicts.iter().map(|v| v.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for v in &self.verdicts {
            out.push_str(&format!("{:width$}  {}", v.name, v.verdict));
            if let Some(r) = &v.reason {
                out.push_str(&format!(" ({r})"));
            }
            out.push('\n');
        }
        out
    }
}
