//! Neutral-pose metrics: compactness, actuation mass and CoM height.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{ActuatorSpec, MetricsError};
use crate::mechkin::{ik_rsu, Branch, MechanismParams, FootOrientation, Vec3};

pub type Point2 = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: &Point2, tol: f64) -> bool {
        (p - self.center).norm() <= self.radius + tol
    }

    fn diametral(p: &Point2, q: &Point2) -> Circle {
        Circle { center: 0.5 * (p + q), radius: 0.5 * (p - q).norm() }
    }

    /// Circumcircle, or the diametral circle of the farthest pair when the
    /// points are collinear.
    fn through(p: &Point2, q: &Point2, r: &Point2) -> Circle {
        let (b, c) = (q - p, r - p);
        let d = 2.0 * (b.x * c.y - b.y * c.x);
        let scale = b.norm_squared().max(c.norm_squared());
        if d.abs() <= 1e-12 * scale {
            let pairs = [(p, q), (p, r), (q, r)];
            let (u, v) = pairs
                .into_iter()
                .max_by(|x, y| (x.0 - x.1).norm().total_cmp(&(y.0 - y.1).norm()))
                .unwrap();
            return Circle::diametral(u, v);
        }
        let (b2, c2) = (b.norm_squared(), c.norm_squared());
        let ux = (c.y * b2 - b.y * c2) / d;
        let uy = (b.x * c2 - c.x * b2) / d;
        let offset = Point2::new(ux, uy);
        Circle { center: p + offset, radius: offset.norm() }
    }
}

/// Minimum enclosing circle by incremental construction (Welzl without
/// shuffling, deterministic for a given point order).
pub fn min_enclosing_circle(points: &[Point2]) -> Circle {
    let Some(first) = points.first() else {
        return Circle { center: Point2::zeros(), radius: 0.0 };
    };
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let mut c = Circle { center: *first, radius: 0.0 };
    for i in 1..points.len() {
        if c.contains(&points[i], tol) {
            continue;
        }
        c = Circle { center: points[i], radius: 0.0 };
        for j in 0..i {
            if c.contains(&points[j], tol) {
                continue;
            }
            c = Circle::diametral(&points[i], &points[j]);
            for k in 0..j {
                if !c.contains(&points[k], tol) {
                    c = Circle::through(&points[i], &points[j], &points[k]);
                }
            }
        }
    }
    c
}

/// Characteristic mechanism points at the neutral pose.
///
/// Always `U_0`, `U_i` and `S_i`. RSU adds the actuator centres `R_i`; SPU
/// adds the far end of each prismatic guide, `U_i + zeta_max * d_hat_i`, when
/// it lies beyond `S_i`.
pub fn characteristic_points(params: &MechanismParams, branch: [Branch; 2]) -> Result<Vec<Vec3>, MetricsError> {
    let mut points = vec![Vec3::zeros()];
    match params {
        MechanismParams::Spu(p) => {
            for leg in 0..2 {
                let (s, u) = (p.a[leg], p.b[leg]);
                let d = s - u;
                points.push(u);
                points.push(s);
                let reach = p.stroke[leg].max;
                let norm = d.norm();
                if norm > 0.0 && reach > norm {
                    points.push(u + d * (reach / norm));
                }
            }
        }
        MechanismParams::Rsu(p) => {
            let q = ik_rsu(p, FootOrientation::NEUTRAL, branch).map_err(MetricsError::NeutralInfeasible)?;
            for leg in 0..2 {
                points.push(p.b[leg]);
                points.push(p.a[leg] + p.crank_vector(leg, q.q[leg]));
                points.push(p.a[leg]);
            }
        }
    }
    Ok(points)
}

/// Radius of the thinnest vertical cylinder enclosing `points`.
pub fn enclosing_radius(points: &[Vec3]) -> Circle {
    let projected: Vec<Point2> = points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    min_enclosing_circle(&projected)
}

pub fn metric_compactness(params: &MechanismParams, branch: [Branch; 2]) -> Result<f64, MetricsError> {
    Ok(enclosing_radius(&characteristic_points(params, branch)?).radius)
}

/// Point mass used in the CoM estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub mass: f64,
    pub position: Vec3,
}

/// Actuator and linkage point masses at the neutral pose.
pub fn mass_distribution(
    params: &MechanismParams,
    branch: [Branch; 2],
    actuator: &ActuatorSpec,
) -> Result<Vec<PointMass>, MetricsError> {
    let mut masses = Vec::new();
    match params {
        MechanismParams::Spu(p) => {
            for leg in 0..2 {
                masses.push(PointMass { mass: actuator.mass, position: 0.5 * (p.a[leg] + p.b[leg]) });
            }
        }
        MechanismParams::Rsu(p) => {
            let density = actuator
                .linkage_density
                .ok_or_else(|| MetricsError::MissingSpec(format!("{}: linkage_density", actuator.name)))?;
            let q = ik_rsu(p, FootOrientation::NEUTRAL, branch).map_err(MetricsError::NeutralInfeasible)?;
            for leg in 0..2 {
                let r = p.a[leg];
                let s = r + p.crank_vector(leg, q.q[leg]);
                let u = p.b[leg];
                masses.push(PointMass { mass: actuator.mass, position: r });
                masses.push(PointMass { mass: density * p.crank[leg], position: 0.5 * (r + s) });
                masses.push(PointMass { mass: density * p.rod[leg], position: 0.5 * (s + u) });
            }
        }
    }
    Ok(masses)
}

/// Total actuation mass [kg] and CoM height above the ground [mm].
pub fn metric_mass_and_com(
    params: &MechanismParams,
    branch: [Branch; 2],
    actuator: &ActuatorSpec,
    ground_offset: f64,
) -> Result<(f64, f64), MetricsError> {
    Ok(mass_and_com(&mass_distribution(params, branch, actuator)?, ground_offset))
}

pub fn mass_and_com(masses: &[PointMass], ground_offset: f64) -> (f64, f64) {
    let total: f64 = masses.iter().map(|m| m.mass).sum();
    let moment: f64 = masses.iter().map(|m| m.mass * m.position.z).sum();
    let z = if total > 0.0 { moment / total } else { 0.0 };
    (total, ground_offset + z)
}
