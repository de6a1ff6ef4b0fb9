//! Steady states of Gierer–Meinhardt type systems on the exterior of a
//! ball, restricted to radial solutions.
//!
//! Parameter sets are classified exactly (rational exponents) or in
//! floating point; existence regimes are solved by monotone iteration on a
//! log-uniform grid and the far-field decay is fitted against the
//! predicted profile. Nonexistence regimes get a truncation probe.
//!
//! Numerics are generic over [`Scalar`] (`f32`, `f64`); classification is
//! generic over [`Exponent`], which also covers [`BigRational`].

// `!(x > 0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod coupled;
pub mod error;
pub mod model_params;
pub mod nonexistence;
pub mod radial;
pub mod scalar;
pub mod scalar_solver;

pub use num_rational::BigRational;

pub use asymptotics::{compare_profile, fit_power, fit_power_log, fit_power_with, FitResult, ProfileCheck};
pub use coupled::{solve_problem, solve_system, CoupledProblem, CoupledState, SystemOptions, SystemSolution};
pub use error::{Error, Result};
pub use model_params::{
    classify, constant_schedule, AsymptoticProfile, ConstantSchedule, ExponentSet, Outcome, RegimeVerdict, SourceEnvelope,
    SystemKind,
};
pub use nonexistence::{criterion_2d, degeneration_probe, integral_criterion, ProbeReport};
pub use radial::{assemble_operator, build_grid, GridFunction, OuterBoundary, RadialGrid, RadialOperator};
pub use scalar::{parse_rational, Exponent, Scalar};
pub use scalar_solver::{solve_monotone, MonotoneOptions, MonotoneSolution, Nonlinearity};

pub type ExponentSetF64 = ExponentSet<f64>;
pub type ExactExponentSet = ExponentSet<BigRational>;
pub type ExactVerdict = RegimeVerdict<BigRational>;
pub type RadialGridF64 = RadialGrid<f64>;
pub type GridFunctionF64 = GridFunction<f64>;
pub type RadialOperatorF64 = RadialOperator<f64>;
pub type CoupledProblemF64 = CoupledProblem<f64>;
pub type SystemSolutionF64 = SystemSolution<f64>;
pub type FitResultF64 = FitResult<f64>;
