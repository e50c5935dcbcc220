//! Kinematics of the two-DoF SPU and RSU parallel ankles.
//!
//! The shin carries the world frame `W` with origin at the central universal
//! joint `U_0`; the foot frame `F` shares that origin and is rotated by
//! `R_y(pitch) * R_x(roll)`. Each actuated leg `i` is described by a shin
//! anchor `a_i` (world coordinates) and a foot anchor `b_i` (foot
//! coordinates). Lengths are millimetres, angles radians.
//!
//! Inverse kinematics is closed form. Forward kinematics is a damped Newton
//! solve on the squared loop-closure equations and is used mostly as an
//! oracle. The Jacobian maps actuator rates to Euler-angle rates
//! `(roll_rate, pitch_rate)`, which are not body angular velocities away from
//! the neutral pose.

mod fk;
mod ik;
mod jacobian;
pub mod rotation;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub use fk::{fk_numeric, fk_numeric_with, FkOptions};
pub use ik::{ik, ik_rsu, ik_spu, leg_closure, LegClosure, RsuExistence};
pub(crate) use ik::polar_terms;
pub use jacobian::{
    jacobian, manipulability_ratio, AnkleJacobian, SINGULARITY_TOLERANCE, LENGTH_UNITS_PER_METER,
};

pub type Vec3 = Vector3<f64>;

/// Tolerance on `|k/rho| - 1` under which an RSU leg is treated as exactly
/// aligned instead of unreachable.
pub const EXISTENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("leg {leg} cannot close: |k/rho| exceeds 1 by {excess:.3e}")]
    Unreachable { leg: usize, excess: f64 },
    #[error("leg {leg} is degenerate at this pose (zero U-R distance or actuator axis along the leg)")]
    DegenerateLeg { leg: usize },
    #[error("forward kinematics did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("kinematic singularity (normalized det {det:.3e})")]
    Singular { det: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Spu,
    Rsu,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Architecture::Spu => write!(f, "spu"),
            Architecture::Rsu => write!(f, "rsu"),
        }
    }
}

/// Foot roll and pitch relative to the shin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FootOrientation {
    pub roll: f64,
    pub pitch: f64,
}

impl FootOrientation {
    pub const NEUTRAL: FootOrientation = FootOrientation { roll: 0.0, pitch: 0.0 };

    pub fn new(roll: f64, pitch: f64) -> Self {
        Self { roll, pitch }
    }

    pub fn from_degrees(roll: f64, pitch: f64) -> Self {
        Self::new(roll.to_radians(), pitch.to_radians())
    }

    pub fn to_degrees(self) -> (f64, f64) {
        (self.roll.to_degrees(), self.pitch.to_degrees())
    }

    /// Finite and within the single-cover range `(-pi, pi)` on both axes.
    pub fn is_valid(&self) -> bool {
        self.roll.is_finite() && self.pitch.is_finite() && self.roll.abs() < PI && self.pitch.abs() < PI
    }

    pub fn rotation(&self) -> nalgebra::Rotation3<f64> {
        rotation::foot_rotation(*self)
    }
}

/// Length limits of a prismatic leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeLimits {
    pub min: f64,
    pub max: f64,
}

impl StrokeLimits {
    pub fn contains(&self, zeta: f64) -> bool {
        zeta >= self.min && zeta <= self.max
    }

    /// Distance outside `[min, max]`, zero when inside.
    pub fn excess(&self, zeta: f64) -> f64 {
        (self.min - zeta).max(zeta - self.max).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuParams {
    pub a: [Vec3; 2],
    pub b: [Vec3; 2],
    pub stroke: [StrokeLimits; 2],
}

impl SpuParams {
    pub fn validate(&self) -> Result<(), String> {
        for i in 0..2 {
            if (self.a[i] - self.b[i]).norm() <= 0.0 {
                return Err(format!("leg {}: anchors coincide", i + 1));
            }
            let s = self.stroke[i];
            if !(s.min >= 0.0 && s.max > s.min) {
                return Err(format!("leg {}: invalid stroke limits [{}, {}]", i + 1, s.min, s.max));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsuParams {
    pub a: [Vec3; 2],
    pub b: [Vec3; 2],
    /// Yaw of each actuator axis about the shin vertical [rad].
    pub psi: [f64; 2],
    pub crank: [f64; 2],
    pub rod: [f64; 2],
}

impl RsuParams {
    pub fn validate(&self) -> Result<(), String> {
        for i in 0..2 {
            let (c, r) = (self.crank[i], self.rod[i]);
            if !(c > 0.0 && r > 0.0) {
                return Err(format!("leg {}: crank and rod must be positive", i + 1));
            }
            if r <= c {
                return Err(format!("leg {}: rod {r} not longer than crank {c}", i + 1));
            }
        }
        Ok(())
    }

    /// World-frame crank vector `R_z(psi) R_x(alpha) [0, c, 0]`.
    pub fn crank_vector(&self, leg: usize, alpha: f64) -> Vec3 {
        let (sp, cp) = self.psi[leg].sin_cos();
        let (sa, ca) = alpha.sin_cos();
        self.crank[leg] * Vec3::new(-sp * ca, cp * ca, sa)
    }

    pub(crate) fn crank_vector_derivative(&self, leg: usize, alpha: f64) -> Vec3 {
        let (sp, cp) = self.psi[leg].sin_cos();
        let (sa, ca) = alpha.sin_cos();
        self.crank[leg] * Vec3::new(sp * sa, -cp * sa, ca)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "lowercase")]
pub enum MechanismParams {
    Spu(SpuParams),
    Rsu(RsuParams),
}

impl MechanismParams {
    pub fn architecture(&self) -> Architecture {
        match self {
            MechanismParams::Spu(_) => Architecture::Spu,
            MechanismParams::Rsu(_) => Architecture::Rsu,
        }
    }

    pub fn anchors(&self) -> (&[Vec3; 2], &[Vec3; 2]) {
        match self {
            MechanismParams::Spu(p) => (&p.a, &p.b),
            MechanismParams::Rsu(p) => (&p.a, &p.b),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            MechanismParams::Spu(p) => p.validate(),
            MechanismParams::Rsu(p) => p.validate(),
        }
    }
}

/// Which of the two closed-form IK roots a leg uses. For SPU legs only
/// `Primary` (positive elongation) is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSolution {
    /// Actuator coordinates: elongation [mm] for SPU, crank angle [rad] for RSU.
    pub q: [f64; 2],
    pub branch: [Branch; 2],
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Foot-frame anchor in world coordinates: `d_i = a_i - R b_i`.
pub(crate) fn leg_vector(a: &Vec3, b: &Vec3, pose: FootOrientation) -> Vec3 {
    a - pose.rotation() * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(normalize_angle(0.25), 0.25);
    }

    #[test]
    fn pose_validity() {
        assert!(FootOrientation::NEUTRAL.is_valid());
        assert!(!FootOrientation::new(PI, 0.0).is_valid());
        assert!(!FootOrientation::new(f64::NAN, 0.0).is_valid());
    }

    #[test]
    fn stroke_excess() {
        let s = StrokeLimits { min: 100.0, max: 200.0 };
        assert_eq!(s.excess(150.0), 0.0);
        assert_eq!(s.excess(90.0), 10.0);
        assert_eq!(s.excess(205.0), 5.0);
    }

    #[test]
    fn crank_derivative_matches_difference() {
        let p = RsuParams {
            a: [Vec3::zeros(); 2],
            b: [Vec3::zeros(); 2],
            psi: [0.4, -1.2],
            crank: [30.0, 45.0],
            rod: [200.0, 200.0],
        };
        let h = 1e-6;
        for leg in 0..2 {
            let fd = (p.crank_vector(leg, 0.7 + h) - p.crank_vector(leg, 0.7 - h)) / (2.0 * h);
            assert!((fd - p.crank_vector_derivative(leg, 0.7)).norm() < 1e-7);
            assert!((p.crank_vector(leg, 1.1).norm() - p.crank[leg]).abs() < 1e-12);
        }
    }
}
