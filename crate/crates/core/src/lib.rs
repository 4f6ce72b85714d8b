//! Distributed flexible job shop scheduling as a QUBO.
//!
//! * [`instance`]: jobs, machines, factories and shipping times.
//! * [`qubo`]: pruned time-indexed variables, the penalty/makespan cost
//!   function, calibrated Lagrange weights and Ising conversion.
//! * [`samplers`]: simulated annealing, exhaustive enumeration, a direct
//!   schedule-space oracle and a remote annealing client.
//! * [`schedule`]: decoding, constraint validation, makespan and Gantt text.
//! * [`harness`]: instance generator, experiment runner and reports.

pub mod fixtures;
pub mod harness;
pub mod instance;
pub mod qubo;
pub mod samplers;
pub mod schedule;

pub use instance::Instance;
pub use qubo::{Qubo, VariableRegistry, Weights};
