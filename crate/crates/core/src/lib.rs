//! Operator splitting with real, complex and extrapolated coefficients for
//! the viscous Burgers equation `u_t + u u_x = ν u_xx`.
//!
//! The conservation law `u_t + (u²/2)_x = 0` (flow A) and the heat equation
//! `u_t = ν u_xx` (flow B) are advanced separately and composed. Two spatial
//! backends are provided: a Fourier pseudospectral one on `[0, 2π]` with
//! periodic data, which also accepts complex diffusion times, and a
//! finite-difference/WENO5 one on `[0, 1]` with homogeneous Dirichlet data.
//!
//! ```
//! use burgers_split::{integrate, Method, Preset, ProblemSpec, StepperConfig};
//!
//! let problem = ProblemSpec::<f64>::preset(Preset::Example1, false).with_resolution(32);
//! let method = Method::by_name("RC4").unwrap();
//! let run = integrate(&problem, &StepperConfig::new(method, problem.t_final / 64.0)).unwrap();
//! assert!(run.error_inf.unwrap() < 1e-5);
//! assert_eq!(run.work, 64 * 4);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod exact;
pub mod fd;
pub mod field;
pub mod harness;
pub mod linalg;
pub mod problem;
pub mod scalar;
pub mod schemes;
pub mod spectral;
pub mod weno;
pub mod work;

pub use engine::{
    convergence_study, extrapolated_step, integrate, integrate_against, split_step,
    DirichletBackend, PeriodicBackend, RunResult, SplitBackend, StepperConfig, StudyOptions,
};
pub use error::{Error, ExitKind, Result};
pub use exact::{evaluate_exact, hopf_cole_coefficients, ExactExample, HopfColeSeries, QuadratureSpec};
pub use field::{Field, GridKind};
pub use harness::{emit_report, parse_report, ConvergenceReport, ExperimentConfig};
pub use problem::{Preset, ProblemSpec};
pub use scalar::Real;
pub use schemes::{
    builtin_extrapolation, builtin_scheme, validate, ExtrapolationRule, Method, Pattern,
    SplittingScheme,
};
pub use work::WorkCounter;

/// Double-precision splitting scheme.
pub type Scheme = SplittingScheme<f64>;
/// Double-precision field.
pub type Field64 = Field<f64>;
pub type Problem = ProblemSpec<f64>;
pub type Run = RunResult<f64>;
pub type Series = HopfColeSeries<f64>;
