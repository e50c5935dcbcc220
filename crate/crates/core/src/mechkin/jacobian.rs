use nalgebra::{Matrix2, Vector2};

use super::{leg_closure, Architecture, FootOrientation, JointSolution, KinematicsError, MechanismParams};

/// Threshold on `|det G|` after each row of `G` is divided by its leg scale.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Internal lengths are millimetres; efforts are reported in N and Nm.
pub const LENGTH_UNITS_PER_METER: f64 = 1000.0;

/// Eigenvalue ratio floor `lambda_min / lambda_max` below which the
/// manipulability ellipse is treated as degenerate.
const MANIPULABILITY_FLOOR: f64 = 1e-15;

/// Differential map of the ankle at one pose.
///
/// `matrix` is `J`, with `(roll_rate, pitch_rate) = J * q_dot`; `inverse` is
/// `G = dq/d(roll, pitch)`. For SPU `J` is in rad/mm, for RSU rad/rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnkleJacobian {
    pub arch: Architecture,
    pub pose: FootOrientation,
    pub matrix: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
}

impl AnkleJacobian {
    pub fn from_matrix(
        arch: Architecture,
        pose: FootOrientation,
        matrix: Matrix2<f64>,
    ) -> Result<Self, KinematicsError> {
        let inverse = matrix.try_inverse().ok_or(KinematicsError::Singular {
            det: matrix.determinant(),
        })?;
        Ok(Self { arch, pose, matrix, inverse })
    }

    fn effort_unit(&self) -> f64 {
        match self.arch {
            Architecture::Spu => LENGTH_UNITS_PER_METER,
            Architecture::Rsu => 1.0,
        }
    }

    /// `J^T` scaled so that ankle torques [Nm] map to actuator efforts
    /// [N for SPU, Nm for RSU].
    pub fn effort_map(&self) -> Matrix2<f64> {
        self.matrix.transpose() * self.effort_unit()
    }

    /// `J^{-T}` scaled so that actuator efforts map to ankle torques [Nm].
    pub fn torque_map(&self) -> Matrix2<f64> {
        self.inverse.transpose() / self.effort_unit()
    }

    pub fn ankle_rates(&self, actuator_rates: [f64; 2]) -> [f64; 2] {
        (self.matrix * Vector2::from(actuator_rates)).into()
    }

    pub fn actuator_rates(&self, ankle_rates: [f64; 2]) -> [f64; 2] {
        (self.inverse * Vector2::from(ankle_rates)).into()
    }

    pub fn actuator_efforts(&self, ankle_torques: [f64; 2]) -> [f64; 2] {
        (self.effort_map() * Vector2::from(ankle_torques)).into()
    }

    pub fn ankle_torques(&self, actuator_efforts: [f64; 2]) -> [f64; 2] {
        (self.torque_map() * Vector2::from(actuator_efforts)).into()
    }

    pub fn manipulability(&self) -> Result<f64, KinematicsError> {
        manipulability_ratio(self)
    }
}

/// Jacobian by implicit differentiation of the squared loop-closure
/// equations: `G_i = -(dF_i/dpose) / (dF_i/dq_i)`, `J = G^{-1}`.
pub fn jacobian(
    params: &MechanismParams,
    pose: FootOrientation,
    q: &JointSolution,
) -> Result<AnkleJacobian, KinematicsError> {
    let mut g = Matrix2::zeros();
    let mut normalized = Matrix2::zeros();
    for leg in 0..2 {
        let lc = leg_closure(params, leg, q.q[leg], pose);
        let row_scale = match params {
            MechanismParams::Spu(_) => q.q[leg],
            MechanismParams::Rsu(_) => 1.0,
        };
        for j in 0..2 {
            g[(leg, j)] = -lc.d_dpose[j] / lc.d_dq;
            normalized[(leg, j)] = g[(leg, j)] / row_scale;
        }
    }
    if normalized.iter().any(|v| !v.is_finite()) {
        // Crank and rod aligned (or a zero-length SPU leg): dq/dpose unbounded.
        return Err(KinematicsError::Singular { det: f64::INFINITY });
    }
    let det = normalized.determinant();
    if det.abs() < SINGULARITY_TOLERANCE {
        return Err(KinematicsError::Singular { det });
    }
    let matrix = g.try_inverse().ok_or(KinematicsError::Singular { det })?;
    Ok(AnkleJacobian {
        arch: params.architecture(),
        pose,
        matrix,
        inverse: g,
    })
}

/// `sqrt(lambda_max / lambda_min)` of `M = J J^T`.
pub fn manipulability_ratio(jac: &AnkleJacobian) -> Result<f64, KinematicsError> {
    let j = &jac.matrix;
    let m = j * j.transpose();
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let radius = (0.5 * (m[(0, 0)] - m[(1, 1)])).hypot(m[(0, 1)]);
    let lambda_max = mean + radius;
    // det(M) = det(J)^2 avoids the cancellation in mean - radius.
    let det = j.determinant();
    let lambda_min = det * det / lambda_max;
    if !(lambda_max > 0.0) || !(lambda_min >= MANIPULABILITY_FLOOR * lambda_max) {
        return Err(KinematicsError::Singular { det });
    }
    Ok((lambda_max / lambda_min).sqrt().max(1.0))
}
