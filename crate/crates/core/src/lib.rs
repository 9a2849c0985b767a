//! L1 finite differences in time and a Legendre-Galerkin method in space for
//! the time-fractional nonlocal thermistor problem
//!
//! ```text
//! ∂^α_t u - u_xx = λ f(u) / (∫_{-1}^{1} f(u) dx)²   on (-1, 1) × (0, T],
//! u(±1, t) = 0,   u(x, 0) = u₀(x),
//! ```
//!
//! with `0 < α < 1` and the Caputo derivative in time.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod cli;
pub mod config;
pub mod error;
pub mod nonlocal;
pub mod output;
pub mod quadrature;
pub mod spectral;
pub mod stepper;
pub mod time_fractional;
pub mod verify;

pub use error::{Error, Result};
pub use nonlocal::{hypothesis_check, integral_f, nonlocal_load, Conductivity, HypothesisReport};
pub use quadrature::{legendre_eval, lgl_rule, QuadratureRule};
pub use spectral::{
    assemble_mass, assemble_stiffness, CoefficientVector, ErrorNorms, SpatialFunction,
    SpectralSpace,
};
pub use stepper::{
    run, HistoryForm, InitialState, Linearization, PicardOptions, ProblemConfig, RunError,
    RunRecord, Solver, SourceTerm,
};
pub use time_fractional::{
    gamma, history_combination, l1_caputo_apply, FractionalOrder, L1Weights, TimeGrid,
};
