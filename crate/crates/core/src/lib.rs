//! # rhor-core
//!
//! Maximum-likelihood reconstruction of quantum states from measurement
//! records, built around the diluted `RρR` fixed-point iteration
//!
//! ```text
//! ρ ← N[ (1 + εR)/(1+ε) · ρ · (1 + εR)/(1+ε) ],   R = (1/N) Σ_j (f_j / pr_j) Π_j
//! ```
//!
//! where `N` normalizes to unit trace. `ε → ∞` recovers the plain `RρR`
//! iteration; small `ε` guarantees that the log-likelihood increases.
//!
//! ## Layout
//!
//! - [`matrix`], [`hermitian`], [`state`], [`dataset`]: dense complex linear
//!   algebra and validated domain types.
//! - [`mle`]: likelihood, the `R` operator, the iteration maps, ε strategies
//!   and the reconstruction loop.
//! - [`povm`]: projective and homodyne (quadrature) measurement operators.
//! - [`sim`]: seeded synthetic data.
//!
//! The crate is `no_std` and only needs `alloc`. Clocks, files and threads
//! live in the `rhor-cli` companion crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod hermitian;
pub mod matrix;
pub mod mle;
pub mod povm;
pub mod sim;
pub mod state;

pub use num_complex::Complex64;

pub use dataset::{Dataset, GOperator, Record};
pub use error::{Error, Result};
pub use hermitian::{eigendecompose, hermitize, Eigen, HermitianOperator};
pub use matrix::CMatrix;
pub use mle::{
    choose_epsilon_line_search, diluted_step, extremal_residual, g_corrected_step,
    iterations_to_reference, likelihood_gain, likelihood_gain_first_order, log_likelihood,
    outcome_probabilities, r_operator, reconstruct, reconstruct_with, rhor_step, trace_r_rho_r,
    EpsilonStrategy, IterationEvent, LineSearchParams, ReconstructionConfig, ReconstructionResult,
    StallDiagnostics, Termination,
};
pub use povm::{
    counterexample_dataset, harmonic_wavefunction, projector_from_state, quadrature_dataset,
    quadrature_projector, QuadratureSample,
};
pub use sim::{sample_counts, sample_quadratures, SimulationSpec, RNG_ALGORITHM};
pub use state::{fidelity, normalize, validate_density, DensityMatrix, PovmElement};
