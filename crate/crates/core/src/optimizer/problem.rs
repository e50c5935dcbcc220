//! The ankle design problem: objectives and feasibility of one design.

use serde::{Deserialize, Serialize};

use super::design::{Bounds, DesignGeometry, DesignSpace};
use super::nsga2::Problem;
use super::task::{TaskSample, TaskTrajectory};
use super::{Evaluation, OptimizerError};
use crate::mechkin::{
    ik, ik_rsu, jacobian, AnkleJacobian, Branch, FootOrientation, MechanismParams, RsuParams, SpuParams, StrokeLimits, Vec3,
};
use crate::metrics::{ActuatorKind, ActuatorSpec};
use crate::reparam::{realize_with, OperationalRegion, ReparamError, ReparamOptions};

/// Geometric stand-ins for collision avoidance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constraints {
    /// Minimum distance between the two shin anchors and between the two foot
    /// anchors [mm].
    pub min_anchor_separation: f64,
    /// Shin-side points (anchors `a_i`, RSU crank tips at neutral) must lie at
    /// or above this height [mm].
    pub foot_keepout_z: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self { min_anchor_separation: 40.0, foot_keepout_z: 80.0 }
    }
}

/// Peak actuator demands over all task samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskPeaks {
    /// Max |actuator effort| [N or Nm].
    pub effort: f64,
    /// Max |actuator rate| [mm/s or rad/s].
    pub rate: f64,
    /// Samples where IK failed or the Jacobian was singular.
    pub failures: usize,
    pub samples: usize,
}

/// Peak actuator effort `J^T tau` and rate `J^{-1} v` over every sample,
/// component and task.
pub fn task_peaks(params: &MechanismParams, branch: [Branch; 2], tasks: &[TaskTrajectory]) -> TaskPeaks {
    let mut peaks = TaskPeaks { effort: 0.0, rate: 0.0, failures: 0, samples: 0 };
    for sample in tasks.iter().flat_map(|t| &t.samples) {
        peaks.samples += 1;
        let jac = ik(params, sample.pose, branch).and_then(|q| jacobian(params, sample.pose, &q));
        match jac {
            Ok(jac) => peaks.accumulate(&jac, sample),
            Err(_) => peaks.failures += 1,
        }
    }
    peaks
}

impl TaskPeaks {
    fn accumulate(&mut self, jac: &AnkleJacobian, sample: &TaskSample) {
        for v in jac.actuator_efforts(sample.torque) {
            self.effort = self.effort.max(v.abs());
        }
        for v in jac.actuator_rates(sample.rate) {
            self.rate = self.rate.max(v.abs());
        }
    }
}

pub struct AnkleProblem {
    pub space: DesignSpace,
    pub tasks: Vec<TaskTrajectory>,
    pub actuator: ActuatorSpec,
    pub region: OperationalRegion,
    pub core: OperationalRegion,
    pub constraints: Constraints,
    pub branch: [Branch; 2],
    pub reparam: ReparamOptions,
    bounds: Vec<Bounds>,
    stroke: Option<StrokeLimits>,
}

/// Why a design could not be turned into a mechanism, with its violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Unrealizable {
    pub reason: String,
    pub violation: f64,
}

impl AnkleProblem {
    pub fn new(
        space: DesignSpace,
        tasks: Vec<TaskTrajectory>,
        actuator: ActuatorSpec,
        region: OperationalRegion,
        core: OperationalRegion,
        constraints: Constraints,
        branch: [Branch; 2],
    ) -> Result<Self, OptimizerError> {
        space.validate()?;
        region.validate().map_err(|e| OptimizerError::InvalidConfig(e.to_string()))?;
        if !region.contains_region(&core) {
            return Err(OptimizerError::InvalidConfig("core region exceeds the operational region".into()));
        }
        actuator.validate().map_err(|e| OptimizerError::InvalidConfig(e.to_string()))?;
        actuator
            .check_architecture(space.arch)
            .map_err(|e| OptimizerError::InvalidConfig(e.to_string()))?;
        if tasks.is_empty() || tasks.iter().all(|t| t.samples.is_empty()) {
            return Err(OptimizerError::InvalidConfig("no task samples".into()));
        }
        for task in &tasks {
            if let Some(k) = task.outside(&region).first() {
                return Err(OptimizerError::InvalidConfig(format!(
                    "task {} sample {k} lies outside the operational region",
                    task.id
                )));
            }
        }
        let stroke = match actuator.kind {
            ActuatorKind::Linear => {
                let min = actuator.retracted_length.ok_or_else(|| {
                    OptimizerError::InvalidConfig(format!("{}: linear actuator needs retracted_length", actuator.name))
                })?;
                Some(StrokeLimits { min, max: min + actuator.stroke.unwrap_or(0.0) })
            }
            ActuatorKind::Rotary => None,
        };
        let bounds = space.gene_bounds();
        Ok(Self {
            space,
            tasks,
            actuator,
            region,
            core,
            constraints,
            branch,
            reparam: ReparamOptions::default(),
            bounds,
            stroke,
        })
    }

    /// Builds the mechanism for a gene vector (RSU lengths by
    /// reparameterization over the operational region).
    pub fn realize(&self, genes: &[f64]) -> Result<MechanismParams, Unrealizable> {
        let geometry = self.space.decode(genes).map_err(|e| Unrealizable { reason: e.to_string(), violation: 10.0 })?;
        match geometry {
            DesignGeometry::Spu { a, b } => Ok(MechanismParams::Spu(SpuParams {
                a,
                b,
                stroke: [self.stroke.expect("linear actuator"); 2],
            })),
            DesignGeometry::Rsu(free) => match realize_with(&free, &self.region, self.reparam) {
                Ok(r) => Ok(MechanismParams::Rsu(r.params)),
                Err(e) => {
                    let violation = match &e {
                        ReparamError::EmptyInterval { r_min, r_max, .. } => 1.0 + (r_min - r_max) / r_min,
                        ReparamError::RodNotLongerThanCrank { crank, rod, .. } => 1.0 + (crank - rod) / crank,
                        _ => 10.0,
                    };
                    Err(Unrealizable { reason: e.to_string(), violation })
                }
            },
        }
    }

    /// Sum of normalized excesses of all constraints except the peak ratings.
    pub fn geometric_violation(&self, params: &MechanismParams) -> f64 {
        let mut violation = 0.0;
        let (a, b) = params.anchors();
        let sep = self.constraints.min_anchor_separation;
        if sep > 0.0 {
            for d in [(a[0] - a[1]).norm(), (b[0] - b[1]).norm()] {
                violation += ((sep - d) / sep).max(0.0);
            }
        }
        let keepout = self.constraints.foot_keepout_z;
        let scale = keepout.abs().max(1.0);
        let mut shin_points: Vec<Vec3> = a.to_vec();
        if let MechanismParams::Rsu(p) = params {
            match ik_rsu(p, FootOrientation::NEUTRAL, self.branch) {
                Ok(q) => shin_points.extend((0..2).map(|leg| p.a[leg] + p.crank_vector(leg, q.q[leg]))),
                Err(_) => violation += 1.0,
            }
        }
        for p in shin_points {
            violation += ((keepout - p.z) / scale).max(0.0);
        }
        match params {
            MechanismParams::Spu(p) => violation += self.stroke_violation(p),
            MechanismParams::Rsu(p) => violation += self.containment_violation(p),
        }
        violation + self.core_singularity_violation(params)
    }

    /// Worst stroke excess over the operational grid, relative to the stroke.
    fn stroke_violation(&self, p: &SpuParams) -> f64 {
        let mut worst = [0.0f64; 2];
        for pose in self.region.grid() {
            let q = crate::mechkin::ik_spu(p, pose);
            for leg in 0..2 {
                worst[leg] = worst[leg].max(p.stroke[leg].excess(q.q[leg]));
            }
        }
        let stroke = (p.stroke[0].max - p.stroke[0].min).max(1.0);
        worst.iter().map(|w| w / stroke).sum()
    }

    /// IK existence on a grid twice as fine as the one used to realize the
    /// lengths.
    fn containment_violation(&self, p: &RsuParams) -> f64 {
        let fine = self.region.with_step(self.region.step / 2.0);
        match crate::reparam::check_containment(p, &fine) {
            crate::reparam::Containment::Contained { .. } => 0.0,
            crate::reparam::Containment::Violated { margin, .. } => {
                if margin.is_finite() { -margin } else { 1.0 }
            }
        }
    }

    /// Fraction of core grid poses that are unreachable or singular.
    fn core_singularity_violation(&self, params: &MechanismParams) -> f64 {
        let grid = self.core.grid();
        let bad = grid
            .iter()
            .filter(|&&pose| {
                ik(params, pose, self.branch)
                    .and_then(|q| jacobian(params, pose, &q))
                    .and_then(|j| j.manipulability())
                    .is_err()
            })
            .count();
        bad as f64 / grid.len() as f64
    }
}

impl Problem for AnkleProblem {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&self, genes: &[f64]) -> Evaluation {
        let params = match self.realize(genes) {
            Ok(p) => p,
            Err(u) => return Evaluation::infeasible(u.violation),
        };
        let mut violation = self.geometric_violation(&params);
        let peaks = task_peaks(&params, self.branch, &self.tasks);
        if peaks.failures > 0 {
            violation += peaks.failures as f64 / peaks.samples as f64;
        }
        violation += ((peaks.effort - self.actuator.peak_effort) / self.actuator.peak_effort).max(0.0);
        violation += ((peaks.rate - self.actuator.peak_speed) / self.actuator.peak_speed).max(0.0);
        if violation > 0.0 {
            Evaluation::infeasible(violation)
        } else {
            Evaluation::feasible(peaks.effort, peaks.rate)
        }
    }
}
