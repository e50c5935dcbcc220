use nalgebra::{Matrix2, Vector2};

use super::{leg_closure, normalize_angle, FootOrientation, JointSolution, KinematicsError, MechanismParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the norm of the scale-normalized residuals.
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for FkOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-10,
            max_halvings: 20,
        }
    }
}

struct System {
    residual: Vector2<f64>,
    jacobian: Matrix2<f64>,
}

fn system(params: &MechanismParams, q: &JointSolution, pose: FootOrientation) -> System {
    let l = [0, 1].map(|leg| leg_closure(params, leg, q.q[leg], pose));
    System {
        residual: Vector2::new(l[0].residual / l[0].scale, l[1].residual / l[1].scale),
        jacobian: Matrix2::new(
            l[0].d_dpose[0] / l[0].scale,
            l[0].d_dpose[1] / l[0].scale,
            l[1].d_dpose[0] / l[1].scale,
            l[1].d_dpose[1] / l[1].scale,
        ),
    }
}

/// Newton step `-A^{-1} r` written out so that mirror-symmetric systems keep
/// an exactly zero roll component.
fn newton_step(s: &System) -> Option<Vector2<f64>> {
    let m = &s.jacobian;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if !det.is_normal() {
        return None;
    }
    let (r0, r1) = (s.residual[0], s.residual[1]);
    Some(Vector2::new(
        -(m[(1, 1)] * r0 - m[(0, 1)] * r1) / det,
        -(m[(0, 0)] * r1 - m[(1, 0)] * r0) / det,
    ))
}

fn offset(pose: FootOrientation, step: &Vector2<f64>, scale: f64) -> FootOrientation {
    FootOrientation::new(pose.roll + scale * step[0], pose.pitch + scale * step[1])
}

pub fn fk_numeric(
    params: &MechanismParams,
    q: &JointSolution,
    seed: FootOrientation,
) -> Result<FootOrientation, KinematicsError> {
    fk_numeric_with(params, q, seed, FkOptions::default())
}

/// Damped Newton solve of both squared loop-closure equations for the foot
/// orientation that produces the actuator coordinates `q`.
pub fn fk_numeric_with(
    params: &MechanismParams,
    q: &JointSolution,
    seed: FootOrientation,
    options: FkOptions,
) -> Result<FootOrientation, KinematicsError> {
    let mut pose = seed;
    let mut current = system(params, q, pose);
    let mut norm = current.residual.norm();
    for _ in 0..options.max_iterations {
        if norm < options.tolerance {
            // Quadratic convergence: a couple of full steps reach round-off.
            for _ in 0..2 {
                let Some(step) = newton_step(&current) else { break };
                let trial = offset(pose, &step, 1.0);
                let next = system(params, q, trial);
                if next.residual.norm() >= norm {
                    break;
                }
                pose = trial;
                norm = next.residual.norm();
                current = next;
            }
            return Ok(FootOrientation::new(normalize_angle(pose.roll), normalize_angle(pose.pitch)));
        }
        let Some(step) = newton_step(&current) else {
            break;
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=options.max_halvings {
            let trial = offset(pose, &step, scale);
            let next = system(params, q, trial);
            let next_norm = next.residual.norm();
            if next_norm < norm {
                pose = trial;
                norm = next_norm;
                current = next;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(KinematicsError::NoConvergence {
        iterations: options.max_iterations,
        residual: norm,
    })
}
