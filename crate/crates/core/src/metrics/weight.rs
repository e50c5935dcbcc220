//! Region weighting and weighted aggregation.

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::mechkin::FootOrientation;
use crate::reparam::{Interval, OperationalRegion};

/// Raised-cosine taper: 1 for `s <= 0`, 0 for `s >= 1`.
pub fn taper(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * s).cos())
    }
}

/// Normalized outward distance of `v` from `core` towards the edge of `outer`.
fn axis_distance(v: f64, core: Interval, outer: Interval) -> f64 {
    if v > core.hi {
        let gap = outer.hi - core.hi;
        if gap > 0.0 { (v - core.hi) / gap } else { 1.0 }
    } else if v < core.lo {
        let gap = core.lo - outer.lo;
        if gap > 0.0 { (core.lo - v) / gap } else { 1.0 }
    } else {
        0.0
    }
}

/// Weights over the grid of the extended region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMap {
    pub core: OperationalRegion,
    pub extended: OperationalRegion,
    pub poses: Vec<FootOrientation>,
    pub weights: Vec<f64>,
}

impl WeightMap {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn in_core(&self, index: usize) -> bool {
        self.core.contains(self.poses[index])
    }

    /// Normalized distance `s = max(s_roll, s_pitch)` of a pose.
    pub fn distance(&self, pose: FootOrientation) -> f64 {
        axis_distance(pose.roll, self.core.roll, self.extended.roll)
            .max(axis_distance(pose.pitch, self.core.pitch, self.extended.pitch))
    }

    pub fn weight(&self, pose: FootOrientation) -> f64 {
        taper(self.distance(pose))
    }
}

/// Builds the weight map on the grid of `extended`.
pub fn build_weight_map(core: &OperationalRegion, extended: &OperationalRegion) -> Result<WeightMap, MetricsError> {
    core.validate().map_err(|e| MetricsError::InvalidRegions(e.to_string()))?;
    extended.validate().map_err(|e| MetricsError::InvalidRegions(e.to_string()))?;
    if !extended.contains_region(core) {
        return Err(MetricsError::InvalidRegions("core region exceeds the extended region".into()));
    }
    let mut map = WeightMap { core: *core, extended: *extended, poses: extended.grid(), weights: Vec::new() };
    map.weights = map.poses.iter().map(|&p| map.weight(p)).collect();
    Ok(map)
}

/// Weighted mean and variance of a metric over the region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub variance: f64,
}

impl MetricSummary {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn weighted_summary(values: &[f64], weights: &[f64]) -> Result<MetricSummary, MetricsError> {
    assert_eq!(values.len(), weights.len(), "values and weights differ in length");
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(MetricsError::AllZeroWeights);
    }
    let mean = values.iter().zip(weights).map(|(m, w)| w * m).sum::<f64>() / total;
    let variance = values
        .iter()
        .zip(weights)
        .map(|(m, w)| w * (m - mean) * (m - mean))
        .sum::<f64>()
        / total;
    Ok(MetricSummary { mean, variance: variance.max(0.0) })
}
