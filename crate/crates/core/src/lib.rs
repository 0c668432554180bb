//! Two-step regularization for spherical pseudo-differential inverse problems:
//! presmoothing of noisy samples followed by regularized collocation, with
//! quasi-optimal parameter choice.

pub mod collocation;
pub mod error;
pub mod experiments;
pub mod format;
pub mod harmonics;
pub mod operators;
pub mod quadrature;
pub mod selection;
pub mod smoothing;
pub mod verify;

pub use collocation::{
    composite_norm_bound, filtered_projection, invert_regularized, two_step_solve, CollocationParams,
    FilterFunction,
};
pub use error::{Error, Result};
pub use experiments::{run_case, simulate_problem, ExperimentCase, BenchmarkCase, Method, TrialResult};
pub use harmonics::{eval_basis, legendre, sph_harm, DegreeIndex, SpherePoint, UnitVector};
pub use operators::{
    analyze, apply_forward, symbol_preset, synthesize, HarmonicCoefficients, SphericalSymbol, SymbolPreset,
};
pub use quadrature::{gauss_legendre, sphere_rule, CubatureRule};
pub use selection::{select_single, select_two_step, EvalGrid, ParameterGrid};
pub use smoothing::{smooth, smooth_oracle, PenaltyRule, PenaltyWeights, SmoothingParams};
