//! Quantum speed limits for finite-dimensional, time-independent systems.
//!
//! The central identity: if `exp(-iTH) = O` and `F` is positive-homogeneous
//! on su(N), then `T = F(log O) / F(-iH)`. Fixing `F(-iH) = kappa` turns this
//! into an optimal gate time, and choosing `O` to be a swap of an orthogonal
//! pair turns that into an orthogonality-time bound. The crate provides:
//!
//! - [`linalg`]: Hermitian spectra, `exp(-itH)`, principal unitary logs.
//! - [`functional`]: `G_p`, `G_op` and user-supplied functionals.
//! - [`gates`]: the swap-gate family.
//! - [`engine`]: gate times and the closed-form/literature bounds.
//! - [`oracle`]: direct time evolution to measure `t_perp`.
//! - [`search`]: constrained Hamiltonian search for the fastest orthogonalization.
//!
//! Units: `hbar = 1`.

pub mod config;
pub mod engine;
pub mod error;
pub mod functional;
pub mod gates;
pub mod json;
pub mod linalg;
pub mod matrix;
pub mod oracle;
pub mod random;
pub mod search;

pub use engine::{
    action_functional, ml_bound, opnorm_bound, optimal_time, swap_time_closed_form, te_bound, theorem1_time,
    BoundKind, BoundReport,
};
pub use error::{QslError, Result};
pub use functional::{eval_gop, eval_gp, evaluate, rescale_to_constraint, ConstraintLevel, PHFunctional};
pub use gates::{conjugate_swap_from_pair, embedded_swap, gate_log, two_level_swap, GatePlan};
pub use linalg::{
    complete_special_unitary, eig_hermitian, exp_antihermitian, fractional_power_psd, log_unitary_principal, Spectrum,
};
pub use matrix::{ComplexMatrix, StateVector};
pub use num_complex::Complex64;
pub use oracle::{
    ensemble_verify, first_orthogonality_time, gate_reach_check, survival_amplitude, BoundFamily, EnsembleReport,
    OrthogonalityResult,
};
pub use search::{minimize_orthogonality_time, saturation_gap, traceless_basis, SearchReport};
