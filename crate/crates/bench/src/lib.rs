//! Fixed model corpora for the benchmarks.

use qmsdf_core::model::QmsModel;
use qmsdf_core::random::{block_model, detailed_balance_model, gaussian_model};
use qmsdf_core::wedderburn::Block;
use qmsdf_core::Tolerance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 7;

/// A Gaussian model of dimension `d`, the same for every run.
pub fn gaussian(d: usize) -> QmsModel {
    gaussian_model(d, &mut ChaCha8Rng::seed_from_u64(SEED + d as u64))
}

/// A detailed-balance model of dimension `d` (faithful invariant state).
pub fn faithful(d: usize) -> QmsModel {
    detailed_balance_model(d, &mut ChaCha8Rng::seed_from_u64(SEED + d as u64))
}

/// A model with decoherence-free blocks `[(k, m)]`.
pub fn blocks(signature: &[(usize, usize)]) -> QmsModel {
    let blocks: Vec<Block> = signature.iter().map(|&(k, m)| Block { k, m }).collect();
    block_model(&blocks, &mut ChaCha8Rng::seed_from_u64(SEED), &Tolerance::default())
        .expect("valid block signature")
        .model
}
