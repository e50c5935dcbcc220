//! Reference task trajectories.

use serde::{Deserialize, Serialize};

use crate::mechkin::FootOrientation;
use crate::reparam::OperationalRegion;

/// One time sample: pose [rad], ankle rates [rad/s], ankle torques [Nm].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSample {
    pub t: f64,
    pub pose: FootOrientation,
    pub rate: [f64; 2],
    pub torque: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTrajectory {
    pub id: String,
    pub samples: Vec<TaskSample>,
}

impl TaskTrajectory {
    /// Index of the first sample whose time does not increase, if any.
    pub fn first_non_monotone(&self) -> Option<usize> {
        self.samples.windows(2).position(|w| !(w[1].t > w[0].t)).map(|k| k + 1)
    }

    /// Indices of samples whose pose lies outside `region`.
    pub fn outside(&self, region: &OperationalRegion) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter(|(_, s)| !region.contains(s.pose))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| {
            s.t.is_finite()
                && s.pose.roll.is_finite()
                && s.pose.pitch.is_finite()
                && s.rate.iter().chain(&s.torque).all(|v| v.is_finite())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, roll: f64) -> TaskSample {
        TaskSample { t, pose: FootOrientation::from_degrees(roll, 0.0), rate: [0.0; 2], torque: [0.0; 2] }
    }

    #[test]
    fn monotonicity_and_region_checks() {
        let task = TaskTrajectory { id: "t".into(), samples: vec![sample(0.0, 0.0), sample(0.1, 20.0), sample(0.1, 0.0)] };
        assert_eq!(task.first_non_monotone(), Some(2));
        let region = OperationalRegion::square_degrees(10.0, 1.0).unwrap();
        assert_eq!(task.outside(&region), vec![1]);
        assert!(task.is_finite());
    }
}
