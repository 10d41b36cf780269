//! Closed-form solutions and exact multi-copy cost series.

mod series;
mod two_qubit;

pub use series::{
    cost_ml, cost_ml_formula, cost_ml_with_prior, cost_series, ml_guesses, mixture_moments,
    moment_table, MixtureStrategy, MlCost, MomentTable, SeriesCost,
};
pub use two_qubit::{
    appendix_intermediates, case_a, case_b, cost_case_a, cost_case_b, AppendixIntermediates,
    CaseAResult, CaseBResult, TwoQubitCase,
};
