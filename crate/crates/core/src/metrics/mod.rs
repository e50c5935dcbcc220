//! Ankle performance metrics.
//!
//! Speed, torque, backdriving torque and manipulability vary over the
//! operational region and are summarized by a region-weighted mean and
//! variance. Compactness, actuation mass and CoM height are evaluated once at
//! the neutral pose.
//!
//! Two-axis quantities reduce to one value per pose: speed and torque take the
//! weaker of the roll and pitch capabilities, backdriving torque the larger of
//! the two resistances. Each axis capability assumes both actuators run at
//! their rated magnitude with the most favourable signs, i.e.
//! `sum_j |M_axis,j| * rating`.

mod geometry;
mod weight;

use std::io::Write;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechkin::{ik, jacobian, AnkleJacobian, Architecture, Branch, FootOrientation, KinematicsError, MechanismParams};

pub use geometry::{
    characteristic_points, enclosing_radius, mass_and_com, mass_distribution, metric_compactness,
    metric_mass_and_com, min_enclosing_circle, Circle, Point2, PointMass,
};
pub use weight::{build_weight_map, taper, weighted_summary, MetricSummary, WeightMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("invalid regions: {0}")]
    InvalidRegions(String),
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("missing actuator data: {0}")]
    MissingSpec(String),
    #[error("{arch} mechanisms need a {expected:?} actuator, got {found:?}")]
    ActuatorMismatch { arch: Architecture, expected: ActuatorKind, found: ActuatorKind },
    #[error("neutral pose is not reachable: {0}")]
    NeutralInfeasible(KinematicsError),
    #[error("pose ({roll:.4}, {pitch:.4}) rad: {source}")]
    Unreachable { roll: f64, pitch: f64, source: KinematicsError },
    #[error("singular configuration inside the core region at ({roll:.4}, {pitch:.4}) rad")]
    SingularInCore { roll: f64, pitch: f64 },
    #[error("invalid actuator {name}: {field} {reason}")]
    InvalidActuator { name: String, field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActuatorKind {
    Linear,
    Rotary,
}

impl ActuatorKind {
    pub fn for_architecture(arch: Architecture) -> Self {
        match arch {
            Architecture::Spu => ActuatorKind::Linear,
            Architecture::Rsu => ActuatorKind::Rotary,
        }
    }
}

/// Actuator data in internal units: lengths mm, linear speed mm/s, angular
/// speed rad/s, force N, torque Nm, mass kg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec {
    pub name: String,
    pub kind: ActuatorKind,
    pub nominal_speed: f64,
    pub nominal_effort: f64,
    pub peak_speed: f64,
    pub peak_effort: f64,
    pub static_friction: f64,
    pub mass: f64,
    /// Linear only: usable stroke.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke: Option<f64>,
    /// Linear only: joint-to-joint length when fully retracted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retracted_length: Option<f64>,
    /// Rotary only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gear_ratio: Option<f64>,
    /// Rotary only: crank and rod mass per unit length [kg/mm].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linkage_density: Option<f64>,
}

impl ActuatorSpec {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let fail = |field: &'static str, reason: &str| {
            Err(MetricsError::InvalidActuator { name: self.name.clone(), field, reason: reason.into() })
        };
        let positive = [
            ("nominal_speed", self.nominal_speed),
            ("nominal_effort", self.nominal_effort),
            ("peak_speed", self.peak_speed),
            ("peak_effort", self.peak_effort),
            ("mass", self.mass),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(field, "must be positive");
            }
        }
        if !(self.static_friction >= 0.0 && self.static_friction.is_finite()) {
            return fail("static_friction", "must be non-negative");
        }
        if self.peak_speed < self.nominal_speed {
            return fail("peak_speed", "is below nominal_speed");
        }
        if self.peak_effort < self.nominal_effort {
            return fail("peak_effort", "is below nominal_effort");
        }
        let optional_positive = [
            ("stroke", self.stroke),
            ("retracted_length", self.retracted_length),
            ("gear_ratio", self.gear_ratio),
        ];
        for (field, v) in optional_positive {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return fail(field, "must be positive");
            }
        }
        if self.linkage_density.is_some_and(|d| !(d >= 0.0 && d.is_finite())) {
            return fail("linkage_density", "must be non-negative");
        }
        if self.kind == ActuatorKind::Linear && self.stroke.is_none() {
            return fail("stroke", "is required for linear actuators");
        }
        Ok(())
    }

    pub fn check_architecture(&self, arch: Architecture) -> Result<(), MetricsError> {
        let expected = ActuatorKind::for_architecture(arch);
        if self.kind != expected {
            return Err(MetricsError::ActuatorMismatch { arch, expected, found: self.kind });
        }
        Ok(())
    }
}

/// `sum_j |M_axis,j| * magnitude_j` per axis: the largest output magnitude
/// along each axis over all sign choices of the inputs.
pub fn axis_capability(map: &Matrix2<f64>, magnitudes: [f64; 2]) -> [f64; 2] {
    [0, 1].map(|axis| map[(axis, 0)].abs() * magnitudes[0] + map[(axis, 1)].abs() * magnitudes[1])
}

/// Ankle rates [rad/s] with both actuators at nominal speed.
pub fn speed_axes(jac: &AnkleJacobian, actuator: &ActuatorSpec) -> [f64; 2] {
    axis_capability(&jac.matrix, [actuator.nominal_speed; 2])
}

/// Ankle torques [Nm] with both actuators at nominal effort.
pub fn torque_axes(jac: &AnkleJacobian, actuator: &ActuatorSpec) -> [f64; 2] {
    axis_capability(&jac.torque_map(), [actuator.nominal_effort; 2])
}

/// Ankle torques [Nm] needed to overcome actuator static friction.
pub fn backdrive_axes(jac: &AnkleJacobian, actuator: &ActuatorSpec) -> [f64; 2] {
    axis_capability(&jac.torque_map(), [actuator.static_friction; 2])
}

fn min2(v: [f64; 2]) -> f64 {
    v[0].min(v[1])
}

fn max2(v: [f64; 2]) -> f64 {
    v[0].max(v[1])
}

/// Metric values at one grid pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub pose: FootOrientation,
    pub weight: f64,
    pub speed: [f64; 2],
    pub torque: [f64; 2],
    pub backdrive: [f64; 2],
    pub manipulability: f64,
}

impl PoseSample {
    pub fn from_jacobian(jac: &AnkleJacobian, actuator: &ActuatorSpec, weight: f64) -> Result<Self, KinematicsError> {
        Ok(Self {
            pose: jac.pose,
            weight,
            speed: speed_axes(jac, actuator),
            torque: torque_axes(jac, actuator),
            backdrive: backdrive_axes(jac, actuator),
            manipulability: jac.manipulability()?,
        })
    }

    pub fn speed_scalar(&self) -> f64 {
        min2(self.speed)
    }

    pub fn torque_scalar(&self) -> f64 {
        min2(self.torque)
    }

    pub fn backdrive_scalar(&self) -> f64 {
        max2(self.backdrive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnkleMetrics {
    pub speed: MetricSummary,
    pub torque: MetricSummary,
    pub backdriving_torque: MetricSummary,
    pub manipulability: MetricSummary,
    pub compactness: f64,
    pub actuation_mass: f64,
    pub com_height: f64,
}

/// Region-aggregated metrics with the per-pose data behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub metrics: AnkleMetrics,
    /// One entry per weight-map pose; `None` where the pose is singular.
    pub samples: Vec<Option<PoseSample>>,
    pub singular_poses: usize,
}

impl MetricsReport {
    /// Per-pose diagnostics; singular poses are written with empty fields.
    pub fn write_csv<W: Write>(&self, writer: W, map: &WeightMap) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "roll_deg", "pitch_deg", "weight", "speed_roll", "speed_pitch", "torque_roll", "torque_pitch",
            "backdrive_roll", "backdrive_pitch", "manipulability",
        ])?;
        for (pose, sample) in map.poses.iter().zip(&self.samples) {
            let (r, p) = pose.to_degrees();
            let mut row = vec![r.to_string(), p.to_string(), map.weight(*pose).to_string()];
            match sample {
                Some(s) => row.extend(
                    [s.speed[0], s.speed[1], s.torque[0], s.torque[1], s.backdrive[0], s.backdrive[1], s.manipulability]
                        .map(|v| v.to_string()),
                ),
                None => row.extend(std::iter::repeat_n(String::new(), 7)),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Region-weighted summaries of the four pose-dependent metrics.
pub fn summarize_samples(samples: &[PoseSample]) -> Result<[MetricSummary; 4], MetricsError> {
    let weights: Vec<f64> = samples.iter().map(|s| s.weight).collect();
    let field = |f: fn(&PoseSample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    Ok([
        weighted_summary(&field(PoseSample::speed_scalar), &weights)?,
        weighted_summary(&field(PoseSample::torque_scalar), &weights)?,
        weighted_summary(&field(PoseSample::backdrive_scalar), &weights)?,
        weighted_summary(&field(|s| s.manipulability), &weights)?,
    ])
}

/// Per-pose metrics over the weight-map grid. Singular poses outside the core
/// are `None`; unreachable poses and singular core poses are errors.
pub fn pose_samples(
    params: &MechanismParams,
    branch: [Branch; 2],
    actuator: &ActuatorSpec,
    map: &WeightMap,
) -> Result<Vec<Option<PoseSample>>, MetricsError> {
    actuator.check_architecture(params.architecture())?;
    let results: Vec<Result<PoseSample, KinematicsError>> = map
        .poses
        .par_iter()
        .zip(&map.weights)
        .map(|(&pose, &w)| {
            let q = ik(params, pose, branch)?;
            let jac = jacobian(params, pose, &q)?;
            PoseSample::from_jacobian(&jac, actuator, w)
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    for (k, result) in results.into_iter().enumerate() {
        let pose = map.poses[k];
        match result {
            Ok(s) => samples.push(Some(s)),
            Err(KinematicsError::Singular { .. }) if map.in_core(k) => {
                return Err(MetricsError::SingularInCore { roll: pose.roll, pitch: pose.pitch })
            }
            Err(KinematicsError::Singular { .. }) => samples.push(None),
            Err(source) => return Err(MetricsError::Unreachable { roll: pose.roll, pitch: pose.pitch, source }),
        }
    }
    Ok(samples)
}

/// All seven metrics of a mechanism over a weight map.
pub fn evaluate_metrics(
    params: &MechanismParams,
    branch: [Branch; 2],
    actuator: &ActuatorSpec,
    map: &WeightMap,
    ground_offset: f64,
) -> Result<MetricsReport, MetricsError> {
    actuator.validate()?;
    let samples = pose_samples(params, branch, actuator, map)?;
    let valid: Vec<PoseSample> = samples.iter().flatten().copied().collect();
    let [speed, torque, backdriving_torque, manipulability] = summarize_samples(&valid)?;
    let compactness = metric_compactness(params, branch)?;
    let (actuation_mass, com_height) = metric_mass_and_com(params, branch, actuator, ground_offset)?;
    Ok(MetricsReport {
        metrics: AnkleMetrics { speed, torque, backdriving_torque, manipulability, compactness, actuation_mass, com_height },
        singular_poses: samples.len() - valid.len(),
        samples,
    })
}

/// Metrics of a serial ankle with one actuator per axis (`J = I` everywhere),
/// so region metrics are constants with zero variance.
pub fn serial_metrics(actuator: &ActuatorSpec, compactness: f64, com_height: f64) -> AnkleMetrics {
    let constant = |v: f64| MetricSummary { mean: v, variance: 0.0 };
    AnkleMetrics {
        speed: constant(actuator.nominal_speed),
        torque: constant(actuator.nominal_effort),
        backdriving_torque: constant(actuator.static_friction),
        manipulability: constant(1.0),
        compactness,
        actuation_mass: 2.0 * actuator.mass,
        com_height,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mechkin::{RsuParams, Vec3};
    use crate::reparam::OperationalRegion;
    use proptest::prelude::*;

    pub(crate) fn rotary_spec() -> ActuatorSpec {
        ActuatorSpec {
            name: "rotary-test".into(),
            kind: ActuatorKind::Rotary,
            nominal_speed: 10.0,
            nominal_effort: 20.0,
            peak_speed: 15.0,
            peak_effort: 40.0,
            static_friction: 0.2,
            mass: 0.8,
            stroke: None,
            retracted_length: None,
            gear_ratio: Some(20.0),
            linkage_density: Some(5e-4),
        }
    }

    fn identity() -> AnkleJacobian {
        AnkleJacobian::from_matrix(Architecture::Rsu, FootOrientation::NEUTRAL, Matrix2::identity()).unwrap()
    }

    #[test]
    fn identity_jacobian_passes_ratings_through() {
        let mut spec = rotary_spec();
        spec.nominal_speed = 1.0;
        let s = PoseSample::from_jacobian(&identity(), &spec, 1.0).unwrap();
        assert_eq!(s.speed_scalar(), 1.0);
        assert_eq!(s.backdrive_scalar(), 0.2);
        assert_eq!(s.manipulability, 1.0);
    }

    #[test]
    fn serial_baseline_is_identity_mapping() {
        let spec = rotary_spec();
        let m = serial_metrics(&spec, 40.0, 120.0);
        let s = PoseSample::from_jacobian(&identity(), &spec, 1.0).unwrap();
        assert_eq!(m.speed.mean, s.speed_scalar());
        assert_eq!(m.torque.mean, s.torque_scalar());
        assert_eq!(m.backdriving_torque.mean, s.backdrive_scalar());
        assert_eq!(m.actuation_mass, 1.6);
    }

    #[test]
    fn invalid_actuator_names_the_field() {
        let mut spec = rotary_spec();
        spec.mass = -1.0;
        assert!(matches!(spec.validate(), Err(MetricsError::InvalidActuator { field: "mass", .. })));
        let mut spec = rotary_spec();
        spec.peak_effort = 1.0;
        assert!(matches!(spec.validate(), Err(MetricsError::InvalidActuator { field: "peak_effort", .. })));
    }

    #[test]
    fn spu_units_convert_to_newton_metres() {
        // 1 rad per 10 mm: 100 N at both actuators gives 2 N * 10 mm / rad = 2 Nm per axis.
        let jac = AnkleJacobian::from_matrix(Architecture::Spu, FootOrientation::NEUTRAL, Matrix2::identity() * 0.1).unwrap();
        assert!((axis_capability(&jac.torque_map(), [100.0, 100.0])[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_actuator_is_rejected() {
        let mut spec = rotary_spec();
        spec.kind = ActuatorKind::Linear;
        assert!(matches!(
            spec.check_architecture(Architecture::Rsu),
            Err(MetricsError::ActuatorMismatch { .. })
        ));
    }

    #[test]
    fn evaluation_is_deterministic() {
        let params = MechanismParams::Rsu(RsuParams {
            a: [Vec3::new(-86.0, 40.0, 235.0), Vec3::new(-86.0, -40.0, 235.0)],
            b: [Vec3::new(-34.0, 36.0, 36.0), Vec3::new(-34.0, -36.0, 36.0)],
            psi: [-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            crank: [60.0, 60.0],
            rod: [215.0, 215.0],
        });
        let core = OperationalRegion::from_degrees((-10.0, 10.0), (-20.0, 10.0), 2.0).unwrap();
        let ext = OperationalRegion::from_degrees((-20.0, 20.0), (-30.0, 20.0), 2.0).unwrap();
        let map = build_weight_map(&core, &ext).unwrap();
        let a = evaluate_metrics(&params, [Branch::Primary; 2], &rotary_spec(), &map, 80.0).unwrap();
        let b = evaluate_metrics(&params, [Branch::Primary; 2], &rotary_spec(), &map, 80.0).unwrap();
        assert_eq!(a, b);
        assert!(a.metrics.manipulability.mean >= 1.0);
        assert!(a.metrics.speed.mean > 0.0 && a.metrics.torque.mean > 0.0);
        let mut csv = Vec::new();
        a.write_csv(&mut csv, &map).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), map.len() + 1);
    }

    proptest! {
        #[test]
        fn torque_matches_sign_enumeration(
            m in proptest::array::uniform4(-3.0f64..3.0),
            tau in 0.1f64..50.0,
        ) {
            let j = Matrix2::new(m[0], m[1], m[2], m[3]);
            prop_assume!(j.determinant().abs() > 1e-2);
            let jac = AnkleJacobian::from_matrix(Architecture::Rsu, FootOrientation::NEUTRAL, j).unwrap();
            let mut spec = rotary_spec();
            spec.nominal_effort = tau;
            let got = torque_axes(&jac, &spec);
            let inv_t = j.try_inverse().unwrap().transpose();
            for axis in 0..2 {
                let mut best: f64 = 0.0;
                for s0 in [-1.0, 1.0] {
                    for s1 in [-1.0, 1.0] {
                        let f = inv_t * nalgebra::Vector2::new(s0 * tau, s1 * tau);
                        best = best.max(f[axis].abs());
                    }
                }
                prop_assert!((got[axis] - best).abs() <= 1e-9 * best.max(1.0));
            }
        }
    }
}
