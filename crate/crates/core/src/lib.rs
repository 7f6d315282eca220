//! Phase-estimation toolkit for number-state filtered coherent states.
//!
//! States live in a truncated Fock basis ([`fock`]); their interferometric
//! Fisher information and phase bounds come from [`metrology`] and are
//! cross-checked by the brute-force two-mode path in [`oracle`].
//! [`search`] optimises which Fock components to remove and [`wigner`]
//! measures the nonclassicality of the result. [`experiments`] turns all of
//! it into reproducible CSV tables.

pub mod error;
pub mod experiments;
pub mod fock;
pub mod metrology;
pub mod oracle;
pub mod search;
pub mod special;
pub mod wigner;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use fock::{
    build_state, coherent_state, even_coherent_state, filtered_coherent_state, fock_state, moments, odd_coherent_state,
    snfcs_moments_closed_form, squeezed_truncation_dim, squeezed_vacuum, truncation_dim, FilterSet, FockAmplitudes,
    ModeMoments, StateKind, StateParams, StateRecord,
};
pub use metrology::{bounds_for, qfi_port2_coherent, InputConfig, PhaseBounds};
pub use oracle::{qfi_finite_difference, qfi_jy_variance, tensor, TwoModeAmplitudes};
pub use search::{exhaustive_search, greedy_search, score_filter_set, SearchResult, SearchSpec, Strategy};
pub use wigner::{negativity_volume, wigner_grid, wigner_value, NegativityResult, WignerGrid};
pub use experiments::{run_experiment, validate_oracles, ExperimentConfig, ExperimentId, ResultTable, ValidationGrid};
