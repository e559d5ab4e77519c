//! Highly efficient exact paired-comparison designs for factorial
//! two-color microarray experiments.
//!
//! The pipeline solves the weighted A-optimal approximate design problem
//! with a multiplicative algorithm, discretizes the optimal measure by
//! rounding, refines with greedy single-slide step-up/step-down moves, and
//! then scores the result under dye-color effects and heteroscedastic
//! pair variances.

pub mod config;
pub mod document;
pub mod dye;
pub mod error;
pub mod exact;
pub mod factorial;
pub mod linalg;
pub mod measure;
pub mod notation;
pub mod pipeline;
pub mod reference;
pub mod robustness;

pub use error::{DesignError, Result};
pub use exact::{
    construct_design, efficiency, psi_exact, rounding_scan, step_down, step_up, variance_breakdown, ConstructionResult,
    ExactDesign, RoundingCatalog,
};
pub use factorial::{
    enumerate_pairs, enumerate_treatments, pair_contrast, tau_coefficients, theta_layout, weight_matrix,
    ContrastVector, FactorialSpec, PairSpace, Parametrization, ThetaLayout, Treatment, WeightMatrix,
};
pub use measure::{
    criterion_trace, info_matrix, optimality_gap, solve_optimal_measure, DesignMeasure, InfoMatrix, OptimalityReport,
    Regressors, SolverOptions,
};
