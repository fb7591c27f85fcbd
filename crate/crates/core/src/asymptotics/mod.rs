//! Long-time behaviour: spectral splitting, invariant states, `M_r`, `M_s`.

pub mod spectral;
pub mod splitting;
pub mod states;

pub use spectral::{cesaro_check, cesaro_mean, spectral_split, CesaroCheck, SpectralSplit};
pub use splitting::{
    annihilation_residual, compare_nt_mr, ergodic_consistency, invariant_state_block_structure,
    isometry_defect, reversible_algebra, stable_space, NtMrVerdict, ReversibleAlgebra, StableSpace,
    StateBlock, StateBlockStructure,
};
pub use states::{invariant_states, InvariantStateSet};
