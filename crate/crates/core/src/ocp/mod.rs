//! Constrained optimal control of internship (`u1`) and incentive (`u2`)
//! policies by trapezoidal direct collocation.
//!
//! The transcribed program is solved with an augmented Lagrangian method; see
//! [`nlp`] for the generic solver and [`solve`] for the problem-level entry.

pub mod nlp;

pub use nlp::{derivative_check, DerivativeCheck};
mod policy;
mod problem;
mod solver;
mod transcription;

pub use policy::{control_cost_series, evaluate_policy, PolicyEvaluation, Propagation, Violations};
pub use problem::{OcpProblem, Preset, Weights};
pub use solver::{initial_guess, solve, solve_from, Multipliers, OcpSolution, Residuals, SolveStatus, SolverOptions};
pub use transcription::{
    objective_offset, transcribe, trapezoid_objective, ConstraintLocation, Formulation, Transcription,
};
