//! Warm-started scalarization methods for multi-objective (mixed-)integer
//! linear programs.
//!
//! The crate bundles everything needed to run and study the weighted-sum
//! method and the augmented epsilon-constraint method on small integer
//! programs:
//!
//! - [`model`]: problem representation and the JSON instance format
//! - [`simplex`]: bounded-variable primal/dual revised simplex with warm bases
//! - [`branch_bound`]: MILP search with root-basis and incumbent warm starts
//! - [`pareto`]: dominance, nondominated archives, supportedness, brute-force oracle
//! - [`wsm`] and [`ecm`]: the two scalarization engines
//! - [`ordergrid`]: solver-free counting of warm starts versus infeasibility detections
//! - [`instances`]: seeded knapsack, assignment and TSP generators
//! - [`experiment`]: experiment matrices, CSV reports and oracle verification

pub mod branch_bound;
pub mod ecm;
pub mod error;
pub mod experiment;
pub mod instances;
pub mod model;
pub mod ordergrid;
pub mod pareto;
pub mod report;
pub mod rng;
pub mod simplex;
pub mod wsm;

pub use error::{Error, Result};
pub use model::{load_instance, Problem, Solution};
