//! Analysis of many sampled models in parallel.

use qmsdf_core::analysis::{analyze, Analysis, AnalysisOptions, Verdict};
use qmsdf_core::model::QmsModel;
use qmsdf_core::random::{detailed_balance_model, gaussian_model};
use qmsdf_core::Tolerance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::report::{verdict_row, VerdictRow, SCHEMA_VERSION, TOOL_NAME, TOOL_VERSION};

pub const SUPPORTED_DIMS: std::ops::RangeInclusive<usize> = 2..=8;
/// Draws per model before giving up on a faithful invariant state.
pub const FAITHFUL_ATTEMPTS: usize = 50;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub count: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub require_faithful: bool,
    pub tol: Tolerance,
}

impl SuiteOptions {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(CliError::Usage("--count must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(CliError::Usage("--dims is empty".into()));
        }
        if let Some(d) = self.dims.iter().find(|d| !SUPPORTED_DIMS.contains(d)) {
            return Err(CliError::Usage(format!(
                "--dims: {d} is outside the supported range {}..={}",
                SUPPORTED_DIMS.start(),
                SUPPORTED_DIMS.end()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelOutcome {
    pub index: usize,
    pub dim: usize,
    pub sampler: &'static str,
    pub attempts: usize,
    pub analysis_seed: u64,
    pub faithful: bool,
    pub nt_dimension: usize,
    pub mr_dimension: usize,
    pub blocks: Option<Vec<[usize; 2]>>,
    pub nt_equals_reversible: VerdictRow,
    pub failed: Vec<&'static str>,
    pub errors: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub seed: u64,
    pub count: usize,
    pub dims: Vec<usize>,
    pub require_faithful: bool,
    pub models: Vec<ModelOutcome>,
    /// Models whose verdict table has no `fail` and no `error` rows.
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    /// Models where `N(T) = M_r` was asserted and passed.
    pub nt_equals_reversible_pass: usize,
}

/// Independent stream per model index, so results do not depend on scheduling.
fn model_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Samples model `index` and analyzes it. With `require_faithful`, uses the
/// detailed-balance sampler and rejects draws without a faithful invariant state.
pub fn sample_and_analyze(opts: &SuiteOptions, index: usize) -> Result<(QmsModel, Analysis, usize, &'static str)> {
    let mut rng = model_rng(opts.seed, index);
    let attempts = if opts.require_faithful { FAITHFUL_ATTEMPTS } else { 1 };
    for attempt in 1..=attempts {
        let d = opts.dims[rng.random_range(0..opts.dims.len())];
        let (model, sampler) = if opts.require_faithful {
            (detailed_balance_model(d, &mut rng), "detailed-balance")
        } else {
            (gaussian_model(d, &mut rng), "gaussian")
        };
        let options = AnalysisOptions {
            tol: opts.tol,
            seed: rng.random(),
            ..AnalysisOptions::default()
        };
        let analysis = analyze(&model, &options)?;
        if !opts.require_faithful || analysis.faithful() {
            return Ok((model, analysis, attempt, sampler));
        }
    }
    Err(CliError::SamplingExhausted { index, attempts })
}

fn outcome(index: usize, a: &Analysis, attempts: usize, sampler: &'static str) -> ModelOutcome {
    let by_verdict = |pred: fn(&Verdict) -> bool| a.checks.iter().filter(|c| pred(&c.verdict)).map(|c| c.name).collect();
    let eq = a.check("nt_equals_reversible").expect("always reported");
    ModelOutcome {
        index,
        dim: a.model.dim(),
        sampler,
        attempts,
        analysis_seed: a.options.seed,
        faithful: a.faithful(),
        nt_dimension: a.nt.dimension(),
        mr_dimension: a.reversible.algebra.dimension(),
        blocks: a.nt_blocks.as_ref().map(|d| d.blocks.iter().map(|b| [b.k, b.m]).collect()),
        nt_equals_reversible: verdict_row(eq.name, eq.statement, &eq.verdict, eq.residual, &eq.detail),
        failed: by_verdict(|v| *v == Verdict::Fail),
        errors: by_verdict(|v| matches!(v, Verdict::Error(_))),
    }
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    opts.validate()?;
    let models = (0..opts.count)
        .into_par_iter()
        .map(|i| sample_and_analyze(opts, i).map(|(_, a, attempts, sampler)| outcome(i, &a, attempts, sampler)))
        .collect::<Result<Vec<_>>>()?;
    let failed = models.iter().filter(|m| !m.failed.is_empty()).count();
    let errored = models.iter().filter(|m| !m.errors.is_empty()).count();
    let passed = models.iter().filter(|m| m.failed.is_empty() && m.errors.is_empty()).count();
    let nt_equals_reversible_pass = models.iter().filter(|m| m.nt_equals_reversible.verdict == "pass").count();
    Ok(SuiteReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        count: opts.count,
        dims: opts.dims.clone(),
        require_faithful: opts.require_faithful,
        models,
        passed,
        failed,
        errored,
        nt_equals_reversible_pass,
    })
}
