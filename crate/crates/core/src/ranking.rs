//! Cross-population normalization and scalar cost.
//!
//! Every metric is min-max normalized over the whole candidate pool (all
//! architectures, actuators and baselines) so that 0 is the best value in the
//! pool and 1 the worst. The cost is `xi = sum_j eta_j * m~_j`, lower is better.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::AnkleMetrics;

pub const METRIC_COUNT: usize = 7;

pub const METRIC_NAMES: [&str; METRIC_COUNT] = [
    "speed",
    "torque",
    "backdriving_torque",
    "manipulability",
    "compactness",
    "actuation_mass",
    "com_height",
];

/// Metrics aggregated over the region (the others are single values).
pub const REGION_METRICS: [bool; METRIC_COUNT] = [true, true, true, true, false, false, false];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankingError {
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("empty candidate pool")]
    EmptyPool,
    #[error("candidate {id}: metric {metric} is not finite")]
    NonFiniteMetric { id: String, metric: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Higher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricDirections {
    pub speed: Direction,
    pub torque: Direction,
    pub backdriving_torque: Direction,
    pub manipulability: Direction,
    pub compactness: Direction,
    pub actuation_mass: Direction,
    pub com_height: Direction,
}

impl Default for MetricDirections {
    fn default() -> Self {
        use Direction::*;
        Self {
            speed: Higher,
            torque: Higher,
            backdriving_torque: Lower,
            manipulability: Lower,
            compactness: Lower,
            actuation_mass: Lower,
            com_height: Higher,
        }
    }
}

impl MetricDirections {
    pub fn as_array(&self) -> [Direction; METRIC_COUNT] {
        [
            self.speed,
            self.torque,
            self.backdriving_torque,
            self.manipulability,
            self.compactness,
            self.actuation_mass,
            self.com_height,
        ]
    }
}

/// Metric weights `eta_j`, non-negative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weights([f64; METRIC_COUNT]);

impl Weights {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(values: &[f64]) -> Result<Self, RankingError> {
        let arr: [f64; METRIC_COUNT] = values
            .try_into()
            .map_err(|_| RankingError::BadWeights(format!("expected {METRIC_COUNT} weights, got {}", values.len())))?;
        if arr.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(RankingError::BadWeights("weights must be finite and non-negative".into()));
        }
        let sum: f64 = arr.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(RankingError::BadWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(arr))
    }

    pub fn uniform() -> Self {
        Self([1.0 / METRIC_COUNT as f64; METRIC_COUNT])
    }

    pub fn one_hot(metric: usize) -> Self {
        let mut w = [0.0; METRIC_COUNT];
        w[metric] = 1.0;
        Self(w)
    }

    /// `"uniform"`, a metric name (one-hot), or seven comma-separated numbers.
    pub fn parse(text: &str) -> Result<Self, RankingError> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("uniform") {
            return Ok(Self::uniform());
        }
        if let Some(j) = METRIC_NAMES.iter().position(|n| *n == text) {
            return Ok(Self::one_hot(j));
        }
        let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| RankingError::BadWeights(format!("cannot parse {text:?}: {e}")))?;
        Self::new(&values)
    }

    pub fn values(&self) -> &[f64; METRIC_COUNT] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Weights {
    type Error = RankingError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(&v)
    }
}

impl From<Weights> for Vec<f64> {
    fn from(w: Weights) -> Self {
        w.0.to_vec()
    }
}

/// One member of the normalization pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankInput {
    pub id: String,
    pub architecture: String,
    pub actuator: String,
    /// Mean of region metrics, value of neutral-pose metrics, in
    /// `METRIC_NAMES` order.
    pub raw: [f64; METRIC_COUNT],
    /// Variance of region metrics; zero for neutral-pose metrics.
    pub variance: [f64; METRIC_COUNT],
    pub baseline: bool,
}

pub fn raw_metrics(m: &AnkleMetrics) -> [f64; METRIC_COUNT] {
    [
        m.speed.mean,
        m.torque.mean,
        m.backdriving_torque.mean,
        m.manipulability.mean,
        m.compactness,
        m.actuation_mass,
        m.com_height,
    ]
}

pub fn metric_variances(m: &AnkleMetrics) -> [f64; METRIC_COUNT] {
    [
        m.speed.variance,
        m.torque.variance,
        m.backdriving_torque.variance,
        m.manipulability.variance,
        0.0,
        0.0,
        0.0,
    ]
}

fn normalize_column(values: impl Iterator<Item = f64> + Clone, direction: Direction) -> Vec<f64> {
    let min = values.clone().fold(f64::INFINITY, f64::min);
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values
        .map(|m| {
            if !(span > 0.0) {
                return 0.0;
            }
            let v = match direction {
                Direction::Lower => (m - min) / span,
                Direction::Higher => (max - m) / span,
            };
            v.clamp(0.0, 1.0)
        })
        .collect()
}

/// Min-max normalization per metric; a zero span maps every value to 0.
pub fn normalize(raw: &[[f64; METRIC_COUNT]], directions: &MetricDirections) -> Vec<[f64; METRIC_COUNT]> {
    let mut out = vec![[0.0; METRIC_COUNT]; raw.len()];
    for (j, dir) in directions.as_array().into_iter().enumerate() {
        for (k, v) in normalize_column(raw.iter().map(|r| r[j]), dir).into_iter().enumerate() {
            out[k][j] = v;
        }
    }
    out
}

pub fn cost(normalized: &[f64; METRIC_COUNT], weights: &Weights) -> f64 {
    normalized.iter().zip(weights.values()).map(|(m, w)| m * w).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RankOptions {
    /// Share `lambda` of the cost given to normalized standard deviations of
    /// the region metrics: `xi = (1 - lambda) sum eta m~ + lambda sum eta s~`.
    pub variance_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub rank: usize,
    pub id: String,
    pub architecture: String,
    pub actuator: String,
    pub baseline: bool,
    pub raw: [f64; METRIC_COUNT],
    pub normalized: [f64; METRIC_COUNT],
    pub cost: f64,
}

/// Normalizes the pool, scores it and sorts by ascending cost, ties by id.
pub fn rank_population(
    candidates: &[RankInput],
    weights: &Weights,
    directions: &MetricDirections,
    options: RankOptions,
) -> Result<Vec<RankedCandidate>, RankingError> {
    if candidates.is_empty() {
        return Err(RankingError::EmptyPool);
    }
    let lambda = options.variance_penalty;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(RankingError::BadWeights("variance penalty outside [0, 1]".into()));
    }
    for c in candidates {
        if let Some(j) = c.raw.iter().chain(&c.variance).position(|v| !v.is_finite()) {
            return Err(RankingError::NonFiniteMetric { id: c.id.clone(), metric: METRIC_NAMES[j % METRIC_COUNT] });
        }
    }
    let raw: Vec<[f64; METRIC_COUNT]> = candidates.iter().map(|c| c.raw).collect();
    let normalized = normalize(&raw, directions);
    let spread: Vec<[f64; METRIC_COUNT]> = if lambda > 0.0 {
        let std: Vec<[f64; METRIC_COUNT]> = candidates.iter().map(|c| c.variance.map(f64::sqrt)).collect();
        let lower = MetricDirections {
            speed: Direction::Lower,
            torque: Direction::Lower,
            backdriving_torque: Direction::Lower,
            manipulability: Direction::Lower,
            compactness: Direction::Lower,
            actuation_mass: Direction::Lower,
            com_height: Direction::Lower,
        };
        normalize(&std, &lower)
    } else {
        vec![[0.0; METRIC_COUNT]; candidates.len()]
    };
    let mut ranked: Vec<RankedCandidate> = candidates
        .iter()
        .zip(normalized.iter().zip(&spread))
        .map(|(c, (n, s))| {
            let mut xi = cost(n, weights);
            if lambda > 0.0 {
                let masked: [f64; METRIC_COUNT] = std::array::from_fn(|j| if REGION_METRICS[j] { s[j] } else { 0.0 });
                xi = (1.0 - lambda) * xi + lambda * cost(&masked, weights);
            }
            RankedCandidate {
                rank: 0,
                id: c.id.clone(),
                architecture: c.architecture.clone(),
                actuator: c.actuator.clone(),
                baseline: c.baseline,
                raw: c.raw,
                normalized: *n,
                cost: xi,
            }
        })
        .collect();
    ranked.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.id.cmp(&b.id)));
    for (k, r) in ranked.iter_mut().enumerate() {
        r.rank = k + 1;
    }
    Ok(ranked)
}

/// SHA-256 over the pool sorted by id, identifying the normalization set.
pub fn pool_hash(candidates: &[RankInput]) -> String {
    let mut sorted: Vec<&RankInput> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut hasher = Sha256::new();
    for c in sorted {
        for field in [&c.id, &c.architecture, &c.actuator] {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field.as_bytes());
        }
        hasher.update([c.baseline as u8]);
        for v in c.raw.iter().chain(&c.variance) {
            hasher.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(id: &str, raw: [f64; METRIC_COUNT]) -> RankInput {
        RankInput {
            id: id.into(),
            architecture: "rsu".into(),
            actuator: "x".into(),
            raw,
            variance: [0.0; METRIC_COUNT],
            baseline: false,
        }
    }

    fn all(direction: Direction) -> MetricDirections {
        MetricDirections {
            speed: direction,
            torque: direction,
            backdriving_torque: direction,
            manipulability: direction,
            compactness: direction,
            actuation_mass: direction,
            com_height: direction,
        }
    }

    #[test]
    fn column_formulas() {
        let raw: Vec<[f64; 7]> = [2.0, 4.0, 6.0].iter().map(|&v| [v; 7]).collect();
        let low = normalize(&raw, &all(Direction::Lower));
        assert_eq!(low.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        let high = normalize(&raw, &all(Direction::Higher));
        assert_eq!(high.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![1.0, 0.5, 0.0]);
        let flat = normalize(&[[3.0; 7]; 4], &MetricDirections::default());
        assert!(flat.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn weights_validation_and_parsing() {
        assert!(Weights::new(&[0.5; 7]).is_err());
        assert!(Weights::new(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(Weights::new(&[1.1, -0.1, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert_eq!(Weights::parse("uniform").unwrap(), Weights::uniform());
        assert_eq!(Weights::parse("actuation_mass").unwrap(), Weights::one_hot(5));
        assert_eq!(Weights::parse("0,0,0,0,0,1,0").unwrap(), Weights::one_hot(5));
        assert!(Weights::parse("a,b").is_err());
        let uniform = Weights::uniform().values().iter().sum::<f64>();
        assert!((uniform - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_on_constant_metrics() {
        assert!((cost(&[0.5; 7], &Weights::uniform()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ties_are_broken_by_id() {
        let pool = [input("b", [1.0; 7]), input("a", [1.0; 7])];
        let ranked = rank_population(&pool, &Weights::uniform(), &MetricDirections::default(), RankOptions::default()).unwrap();
        assert_eq!(ranked[0].id, "a");
        assert_eq!(ranked[0].cost, ranked[1].cost);
        assert_eq!((ranked[0].rank, ranked[1].rank), (1, 2));
    }

    #[test]
    fn dominant_candidate_ranks_first_with_zero_cost() {
        // Best everywhere: high speed/torque/com, low others.
        let best = input("z-best", [10.0, 10.0, 0.1, 1.0, 50.0, 1.0, 300.0]);
        let worst = input("a-worst", [1.0, 1.0, 1.0, 5.0, 150.0, 5.0, 100.0]);
        let mid = input("m", [5.0, 4.0, 0.5, 2.0, 80.0, 2.0, 200.0]);
        let ranked = rank_population(&[worst, mid, best], &Weights::uniform(), &MetricDirections::default(), RankOptions::default()).unwrap();
        assert_eq!(ranked[0].id, "z-best");
        assert_eq!(ranked[0].cost, 0.0);
        assert_eq!(ranked[2].id, "a-worst");
        assert!((ranked[2].cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_hot_orders_by_that_metric() {
        let pool: Vec<RankInput> = (0..6).map(|k| {
            let mut raw = [1.0; 7];
            raw[5] = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6][k];
            raw[0] = k as f64;
            input(&format!("c{k}"), raw)
        }).collect();
        let ranked = rank_population(&pool, &Weights::one_hot(5), &MetricDirections::default(), RankOptions::default()).unwrap();
        let masses: Vec<f64> = ranked.iter().map(|r| r.raw[5]).collect();
        assert!(masses.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn variance_penalty_prefers_flat_metrics() {
        let mut a = input("a", [1.0; 7]);
        let mut b = input("b", [1.0; 7]);
        a.variance = [4.0, 4.0, 4.0, 4.0, 0.0, 0.0, 0.0];
        b.variance = [0.1, 0.1, 0.1, 0.1, 0.0, 0.0, 0.0];
        let opts = RankOptions { variance_penalty: 0.5 };
        let ranked = rank_population(&[a, b], &Weights::uniform(), &MetricDirections::default(), opts).unwrap();
        assert_eq!(ranked[0].id, "b");
        assert!(ranked.iter().all(|r| (0.0..=1.0).contains(&r.cost)));
    }

    #[test]
    fn pool_hash_tracks_membership_not_order() {
        let pool = vec![input("a", [1.0; 7]), input("b", [2.0; 7])];
        let swapped = vec![pool[1].clone(), pool[0].clone()];
        assert_eq!(pool_hash(&pool), pool_hash(&swapped));
        let mut changed = pool.clone();
        changed[1].raw[3] = 2.0000000001;
        assert_ne!(pool_hash(&pool), pool_hash(&changed));
        assert_ne!(pool_hash(&pool), pool_hash(&pool[..1]));
    }

    fn raw_strategy() -> impl Strategy<Value = Vec<[f64; 7]>> {
        proptest::collection::vec(proptest::array::uniform7(0.1f64..100.0), 2..40)
    }

    proptest! {
        #[test]
        fn normalized_values_and_costs_are_unit_bounded(raw in raw_strategy(), w in proptest::array::uniform7(0.0f64..1.0)) {
            let sum: f64 = w.iter().sum();
            prop_assume!(sum > 1e-3);
            let weights = Weights::new(&w.map(|x| x / sum)).unwrap();
            let pool: Vec<RankInput> = raw.iter().enumerate().map(|(k, r)| input(&format!("{k:03}"), *r)).collect();
            let ranked = rank_population(&pool, &weights, &MetricDirections::default(), RankOptions::default()).unwrap();
            for r in &ranked {
                prop_assert!(r.normalized.iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!(r.cost >= -1e-15 && r.cost <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn positive_affine_maps_leave_ranking_unchanged(
            raw in raw_strategy(),
            metric in 0usize..7,
            a in 0.01f64..100.0,
            b in -100.0f64..100.0,
        ) {
            let pool: Vec<RankInput> = raw.iter().enumerate().map(|(k, r)| input(&format!("{k:03}"), *r)).collect();
            let mapped: Vec<RankInput> = pool.iter().cloned().map(|mut c| { c.raw[metric] = a * c.raw[metric] + b; c }).collect();
            let dirs = MetricDirections::default();
            let n0 = normalize(&pool.iter().map(|c| c.raw).collect::<Vec<_>>(), &dirs);
            let n1 = normalize(&mapped.iter().map(|c| c.raw).collect::<Vec<_>>(), &dirs);
            for (x, y) in n0.iter().zip(&n1) {
                for j in 0..7 {
                    prop_assert!((x[j] - y[j]).abs() < 1e-9);
                }
            }
            let r0 = rank_population(&pool, &Weights::uniform(), &dirs, RankOptions::default()).unwrap();
            let r1 = rank_population(&mapped, &Weights::uniform(), &dirs, RankOptions::default()).unwrap();
            let margin = r0.get(1).map_or(f64::INFINITY, |s| s.cost - r0[0].cost);
            if margin > 1e-9 {
                prop_assert_eq!(&r0[0].id, &r1[0].id);
            }
        }

        #[test]
        fn dominated_baseline_only_matters_through_spans(raw in raw_strategy(), extra in 1.0f64..50.0) {
            let dirs = MetricDirections::default();
            let pool: Vec<RankInput> = raw.iter().enumerate().map(|(k, r)| input(&format!("{k:03}"), *r)).collect();
            // Worse than every candidate in every metric.
            let mut worst = [0.0; 7];
            for (j, d) in dirs.as_array().into_iter().enumerate() {
                let col = raw.iter().map(|r| r[j]);
                worst[j] = match d {
                    Direction::Lower => col.fold(f64::NEG_INFINITY, f64::max) + extra,
                    Direction::Higher => col.fold(f64::INFINITY, f64::min) - extra,
                };
            }
            let mut with = pool.clone();
            let mut baseline = input("zz-baseline", worst);
            baseline.baseline = true;
            with.push(baseline);
            let ranked = rank_population(&with, &Weights::uniform(), &dirs, RankOptions::default()).unwrap();
            prop_assert_eq!(&ranked.last().unwrap().id, "zz-baseline");
            // Brute-force recomputation of every cost with the extended spans.
            for r in &ranked {
                let raw_row = with.iter().find(|c| c.id == r.id).unwrap().raw;
                let mut xi = 0.0;
                for (j, d) in dirs.as_array().into_iter().enumerate() {
                    let lo = with.iter().map(|c| c.raw[j]).fold(f64::INFINITY, f64::min);
                    let hi = with.iter().map(|c| c.raw[j]).fold(f64::NEG_INFINITY, f64::max);
                    let v = match d {
                        Direction::Lower => (raw_row[j] - lo) / (hi - lo),
                        Direction::Higher => (hi - raw_row[j]) / (hi - lo),
                    };
                    xi += v / 7.0;
                }
                prop_assert!((xi - r.cost).abs() < 1e-12);
            }
        }
    }
}
