use std::f64::consts::PI;

use super::rotation::foot_rotation_partials;
use super::{
    leg_vector, normalize_angle, Branch, FootOrientation, JointSolution, KinematicsError,
    MechanismParams, RsuParams, SpuParams, Vec3, EXISTENCE_TOLERANCE,
};

/// Closed-form SPU inverse kinematics (positive-elongation root).
///
/// Stroke limits are not checked here.
pub fn ik_spu(params: &SpuParams, pose: FootOrientation) -> JointSolution {
    let zeta = |i: usize| leg_vector(&params.a[i], &params.b[i], pose).norm();
    JointSolution {
        q: [zeta(0), zeta(1)],
        branch: [Branch::Primary; 2],
    }
}

/// Terms of the RSU existence condition `|r^2 - c^2 - |d|^2| <= 2 c |d| rho`
/// for one leg at one pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsuExistence {
    /// `|d_i|`, the U_i to R_i distance.
    pub distance: f64,
    pub rho: f64,
    /// Phase `atan2(d~_y, d~_z)` of the polar form.
    pub phase: f64,
    /// `k_i = (r^2 - c^2 - |d|^2) / (2 c |d|)`.
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl RsuExistence {
    pub fn new(params: &RsuParams, leg: usize, pose: FootOrientation) -> Self {
        let d = leg_vector(&params.a[leg], &params.b[leg], pose);
        let distance = d.norm();
        let (c, r) = (params.crank[leg], params.rod[leg]);
        let (rho, phase) = if distance > 0.0 {
            polar_terms(&(d / distance), params.psi[leg])
        } else {
            (0.0, 0.0)
        };
        let numerator = r * r - c * c - distance * distance;
        Self {
            distance,
            rho,
            phase,
            k: numerator / (2.0 * c * distance),
            lhs: numerator.abs(),
            rhs: 2.0 * c * distance * rho,
        }
    }

    /// `k / rho`; its magnitude must not exceed one for the leg to close.
    pub fn ratio(&self) -> f64 {
        self.k / self.rho
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.distance > 0.0 && self.rho > 0.0) || !self.ratio().is_finite()
    }

    /// `1 - |k / rho|`: positive when both roots exist, zero on the
    /// crank-rod alignment locus, negative when the leg cannot close.
    pub fn margin(&self) -> f64 {
        if self.is_degenerate() {
            f64::NEG_INFINITY
        } else {
            1.0 - self.ratio().abs()
        }
    }
}

/// `rho` and phase of `d~ = R_z(psi)^T d_hat`.
pub(crate) fn polar_terms(d_hat: &Vec3, psi: f64) -> (f64, f64) {
    let (s, c) = psi.sin_cos();
    // Second and third components of R_z(psi)^T d_hat.
    let dy = -s * d_hat.x + c * d_hat.y;
    let dz = d_hat.z;
    (dy.hypot(dz), dy.atan2(dz))
}

/// Closed-form RSU inverse kinematics.
///
/// `Primary` returns `-phase + asin(k/rho)`, `Secondary` returns
/// `-phase + pi - asin(k/rho)`; both wrapped into `(-pi, pi]`.
pub fn ik_rsu(
    params: &RsuParams,
    pose: FootOrientation,
    branch: [Branch; 2],
) -> Result<JointSolution, KinematicsError> {
    let mut q = [0.0; 2];
    for leg in 0..2 {
        let ex = RsuExistence::new(params, leg, pose);
        if ex.is_degenerate() {
            return Err(KinematicsError::DegenerateLeg { leg: leg + 1 });
        }
        let ratio = ex.ratio();
        let excess = ratio.abs() - 1.0;
        if excess > EXISTENCE_TOLERANCE {
            return Err(KinematicsError::Unreachable { leg: leg + 1, excess });
        }
        let s = ratio.clamp(-1.0, 1.0).asin();
        q[leg] = normalize_angle(match branch[leg] {
            Branch::Primary => -ex.phase + s,
            Branch::Secondary => -ex.phase + PI - s,
        });
    }
    Ok(JointSolution { q, branch })
}

/// Dispatches to the architecture's closed-form solver.
pub fn ik(
    params: &MechanismParams,
    pose: FootOrientation,
    branch: [Branch; 2],
) -> Result<JointSolution, KinematicsError> {
    match params {
        MechanismParams::Spu(p) => Ok(ik_spu(p, pose)),
        MechanismParams::Rsu(p) => ik_rsu(p, pose, branch),
    }
}

/// Squared loop-closure equation `F(q, pose) = 0` of one leg with its
/// partial derivatives.
///
/// SPU: `F = |d|^2 - zeta^2`. RSU: `F = c^2 + |d|^2 + 2 d.c(alpha) - r^2`.
/// `scale` is a squared leg-length used to make `F` dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegClosure {
    pub residual: f64,
    pub d_dq: f64,
    pub d_dpose: [f64; 2],
    pub scale: f64,
}

impl LegClosure {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.scale
    }
}

pub fn leg_closure(params: &MechanismParams, leg: usize, q: f64, pose: FootOrientation) -> LegClosure {
    let (a, b) = params.anchors();
    let (a, b) = (&a[leg], &b[leg]);
    let d = leg_vector(a, b, pose);
    let rb = foot_rotation_partials(pose).map(|p| -(p * b));
    match params {
        MechanismParams::Spu(_) => {
            let size = a.norm() + b.norm();
            LegClosure {
                residual: d.norm_squared() - q * q,
                d_dq: -2.0 * q,
                d_dpose: [2.0 * d.dot(&rb[0]), 2.0 * d.dot(&rb[1])],
                scale: size * size,
            }
        }
        MechanismParams::Rsu(p) => {
            let c_vec = p.crank_vector(leg, q);
            let (c, r) = (p.crank[leg], p.rod[leg]);
            let s = d + c_vec;
            LegClosure {
                residual: c * c + d.norm_squared() + 2.0 * d.dot(&c_vec) - r * r,
                d_dq: 2.0 * d.dot(&p.crank_vector_derivative(leg, q)),
                d_dpose: [2.0 * s.dot(&rb[0]), 2.0 * s.dot(&rb[1])],
                scale: r * r,
            }
        }
    }
}
