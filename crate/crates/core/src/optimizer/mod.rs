//! Multi-objective geometry synthesis.
//!
//! Each design is scored by the peak actuator effort `f1` and peak actuator
//! rate `f2` it needs to track a set of reference tasks, subject to
//! feasibility over the operational region. NSGA-II with constrained
//! dominance searches the design box; random numbers come from a counter-based
//! stream per `(seed, generation, slot)` so results do not depend on thread
//! scheduling.

mod design;
mod nsga2;
mod problem;
mod sort;
mod task;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use design::{Bounds, DesignGeometry, DesignSpace, DesignVector, LegBounds};
pub use nsga2::{constrained_dominates, nsga2, GenerationStats, Individual, Nsga2Config, ParetoFront, Problem};
pub use problem::{task_peaks, AnkleProblem, Constraints, TaskPeaks, Unrealizable};
pub use sort::{crowding_distance, dominates, hypervolume_2d, nondominated_sort, sort_fronts};
pub use task::{TaskSample, TaskTrajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid optimizer input: {0}")]
    InvalidConfig(String),
    #[error("no feasible design found; best violation {:.4e}", best.first().map_or(f64::NAN, |b| b.evaluation.violation))]
    NoFeasibleFound { best: Vec<Individual> },
}

/// Objectives and feasibility of one design. Infeasible designs carry
/// infinite objectives and a positive violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    #[serde(with = "finite_or_null")]
    pub f1: f64,
    #[serde(with = "finite_or_null")]
    pub f2: f64,
    pub feasible: bool,
    pub violation: f64,
}

impl Evaluation {
    pub fn feasible(f1: f64, f2: f64) -> Self {
        Self { f1, f2, feasible: true, violation: 0.0 }
    }

    pub fn infeasible(violation: f64) -> Self {
        Self { f1: f64::INFINITY, f2: f64::INFINITY, feasible: false, violation: violation.max(f64::MIN_POSITIVE) }
    }
}

/// JSON has no infinity; non-finite objectives are stored as `null`.
mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() { s.serialize_f64(*v) } else { s.serialize_none() }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
