//! Time-indexed QUBO formulation of the scheduling problem.

mod bounds;
mod builder;
mod ising;
mod model;
mod registry;

use thiserror::Error;

pub use bounds::{compute_tmax, predecessor_time, successor_time};
pub use builder::{
    build_qubo, calibrate_weights, completion_cost, evaluate_terms, CostTerms, Weights,
};
pub use ising::IsingModel;
pub use model::{Qubo, QuboBuilder};
pub use registry::{VariableKey, VariableRegistry};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuboError {
    #[error("assignment has {got} entries, model has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("job {job} operation {op} has no start time within horizon {t_max}")]
    InfeasibleWindow { job: usize, op: usize, t_max: i64 },
    #[error("penalty weights must be nonnegative")]
    NegativeWeight,
    #[error("{what} coefficient {value} is not an integer")]
    NonIntegral { what: String, value: String },
    #[error("spin {index} is {value}, expected -1 or +1")]
    InvalidSpin { index: usize, value: i8 },
    #[error("qubo export line {line}: {message}")]
    ExportParse { line: usize, message: String },
}

/// Registry, calibrated weights and compiled model for one instance.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub registry: VariableRegistry,
    pub weights: Weights,
    pub qubo: Qubo,
}

/// Builds the registry, calibrates the weights and compiles the QUBO.
pub fn compile(instance: &crate::instance::Instance) -> Result<Compiled, QuboError> {
    let registry = VariableRegistry::build(instance)?;
    let weights = calibrate_weights(&registry);
    let qubo = build_qubo(instance, &registry, weights);
    Ok(Compiled {
        registry,
        weights,
        qubo,
    })
}
