//! Elementary rotations and the foot orientation map `R_y(pitch) * R_x(roll)`.

use nalgebra::{Matrix3, Rotation3, Vector3};

use super::FootOrientation;

pub fn rot_x(angle: f64) -> Rotation3<f64> {
    let (s, c) = angle.sin_cos();
    Rotation3::from_matrix_unchecked(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
}

pub fn rot_y(angle: f64) -> Rotation3<f64> {
    let (s, c) = angle.sin_cos();
    Rotation3::from_matrix_unchecked(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
}

pub fn rot_z(angle: f64) -> Rotation3<f64> {
    let (s, c) = angle.sin_cos();
    Rotation3::from_matrix_unchecked(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
}

fn rot_x_derivative(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(0.0, 0.0, 0.0, 0.0, -s, -c, 0.0, c, -s)
}

fn rot_y_derivative(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s)
}

/// Orientation of the foot frame in the shin frame.
pub fn foot_rotation(pose: FootOrientation) -> Rotation3<f64> {
    rot_y(pose.pitch) * rot_x(pose.roll)
}

/// Partial derivatives of [`foot_rotation`] with respect to roll and pitch.
pub fn foot_rotation_partials(pose: FootOrientation) -> [Matrix3<f64>; 2] {
    let ry = rot_y(pose.pitch);
    let rx = rot_x(pose.roll);
    [
        ry.matrix() * rot_x_derivative(pose.roll),
        rot_y_derivative(pose.pitch) * rx.matrix(),
    ]
}

/// Reflection through the sagittal (x-z) plane.
pub fn mirror_y(v: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(v.x, -v.y, v.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthonormal(r: &Rotation3<f64>) -> bool {
        let m = r.matrix();
        (m.transpose() * m - Matrix3::identity()).abs().max() < 1e-12
            && (m.determinant() - 1.0).abs() < 1e-12
    }

    proptest! {
        #[test]
        fn elementary_rotations_are_proper(a in -10.0f64..10.0) {
            prop_assert!(orthonormal(&rot_x(a)));
            prop_assert!(orthonormal(&rot_y(a)));
            prop_assert!(orthonormal(&rot_z(a)));
        }

        #[test]
        fn matches_axis_angle(a in -3.0f64..3.0) {
            let x = Rotation3::from_axis_angle(&Vector3::x_axis(), a);
            let y = Rotation3::from_axis_angle(&Vector3::y_axis(), a);
            let z = Rotation3::from_axis_angle(&Vector3::z_axis(), a);
            prop_assert!((rot_x(a).matrix() - x.matrix()).abs().max() < 1e-14);
            prop_assert!((rot_y(a).matrix() - y.matrix()).abs().max() < 1e-14);
            prop_assert!((rot_z(a).matrix() - z.matrix()).abs().max() < 1e-14);
        }

        #[test]
        fn partials_match_central_differences(roll in -3.0f64..3.0, pitch in -3.0f64..3.0) {
            let h = 1e-6;
            let pose = FootOrientation::new(roll, pitch);
            let [dr, dp] = foot_rotation_partials(pose);
            let fd_r = (foot_rotation(FootOrientation::new(roll + h, pitch)).matrix()
                - foot_rotation(FootOrientation::new(roll - h, pitch)).matrix()) / (2.0 * h);
            let fd_p = (foot_rotation(FootOrientation::new(roll, pitch + h)).matrix()
                - foot_rotation(FootOrientation::new(roll, pitch - h)).matrix()) / (2.0 * h);
            prop_assert!((dr - fd_r).abs().max() < 1e-8);
            prop_assert!((dp - fd_p).abs().max() < 1e-8);
        }
    }

    #[test]
    fn foot_rotation_composes_pitch_after_roll() {
        let pose = FootOrientation::new(0.3, -0.5);
        let expected = Rotation3::from_axis_angle(&Vector3::y_axis(), -0.5)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), 0.3);
        assert!((foot_rotation(pose).matrix() - expected.matrix()).abs().max() < 1e-14);
    }
}
