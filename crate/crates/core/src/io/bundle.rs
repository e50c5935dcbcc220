//! The result bundle: everything needed to re-rank a candidate pool.
//!
//! JSON with a pinned `schema_version`. Values are stored in internal units
//! (mm, rad, rad/s, N, Nm, kg); the field-by-field description lives in
//! `docs/bundle-schema.md`.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::DesignConfig;
use super::{display, write_text, IoError};
use crate::mechkin::{Branch, MechanismParams};
use crate::metrics::{ActuatorSpec, AnkleMetrics};
use crate::optimizer::{DesignVector, Evaluation};
use crate::ranking::{metric_variances, pool_hash, raw_metrics, RankInput};

pub const BUNDLE_SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultBundle {
    pub schema_version: u64,
    pub tool_version: String,
    pub config: DesignConfig,
    pub catalog: Vec<ActuatorSpec>,
    pub candidates: Vec<BundleCandidate>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    /// A Pareto-front member of an optimization run.
    Optimized,
    /// A reference design injected into the pool.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleCandidate {
    pub id: String,
    /// `spu`, `rsu` or `serial`.
    pub architecture: String,
    pub actuator: String,
    pub kind: CandidateKind,
    /// Nondominated within its own run.
    pub pareto: bool,
    pub branch: Option<Branch>,
    pub design: Option<DesignVector>,
    pub params: Option<MechanismParams>,
    pub evaluation: Option<Evaluation>,
    pub metrics: AnkleMetrics,
    /// Grid poses outside the core skipped as singular.
    pub singular_poses: usize,
}

impl BundleCandidate {
    pub fn is_baseline(&self) -> bool {
        self.kind == CandidateKind::Baseline
    }

    pub fn rank_input(&self) -> RankInput {
        RankInput {
            id: self.id.clone(),
            architecture: self.architecture.clone(),
            actuator: self.actuator.clone(),
            raw: raw_metrics(&self.metrics),
            variance: metric_variances(&self.metrics),
            baseline: self.is_baseline(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub architecture: String,
    pub actuator: String,
    pub seed: u64,
    pub pop_size: usize,
    pub generations: usize,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub runs: Vec<RunInfo>,
    pub created_unix_s: u64,
    /// SHA-256 of the candidate pool; see `ranking::pool_hash`.
    pub pool_hash: String,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Debug, Error, PartialEq)]
pub enum MergeError {
    #[error("no bundles to merge")]
    Empty,
    #[error("bundles disagree on the {0}")]
    Incompatible(&'static str),
    #[error("candidate id {0} appears more than once")]
    DuplicateId(String),
    #[error("actuator {0} has different specifications in different bundles")]
    CatalogConflict(String),
}

impl ResultBundle {
    pub fn new(config: DesignConfig, catalog: Vec<ActuatorSpec>, candidates: Vec<BundleCandidate>, runs: Vec<RunInfo>) -> Self {
        let mut bundle = Self {
            schema_version: BUNDLE_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config,
            catalog,
            candidates,
            provenance: Provenance { runs, created_unix_s: unix_now(), pool_hash: String::new() },
        };
        bundle.refresh_pool_hash();
        bundle
    }

    pub fn rank_inputs(&self) -> Vec<RankInput> {
        self.candidates.iter().map(BundleCandidate::rank_input).collect()
    }

    pub fn refresh_pool_hash(&mut self) {
        self.provenance.pool_hash = pool_hash(&self.rank_inputs());
    }

    /// Combines bundles that share regions, directions and ground offset.
    /// Catalogs are united by actuator name.
    pub fn merge(parts: Vec<ResultBundle>) -> Result<ResultBundle, MergeError> {
        let mut iter = parts.into_iter();
        let mut merged = iter.next().ok_or(MergeError::Empty)?;
        for part in iter {
            if let Some(item) = merged.config.incompatibility(&part.config) {
                return Err(MergeError::Incompatible(item));
            }
            for spec in part.catalog {
                match merged.catalog.iter().find(|s| s.name == spec.name) {
                    Some(existing) if *existing != spec => return Err(MergeError::CatalogConflict(spec.name)),
                    Some(_) => {}
                    None => merged.catalog.push(spec),
                }
            }
            merged.candidates.extend(part.candidates);
            merged.provenance.runs.extend(part.provenance.runs);
        }
        let mut ids: Vec<&str> = merged.candidates.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(MergeError::DuplicateId(w[0].into()));
        }
        merged.provenance.created_unix_s = unix_now();
        merged.refresh_pool_hash();
        Ok(merged)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("bundle serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, IoError> {
        let corrupt = |message: String| IoError::CorruptBundle { path: origin.into(), message };
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| corrupt("missing schema_version".into()))?;
        if version != BUNDLE_SCHEMA_VERSION {
            return Err(IoError::VersionMismatch { path: origin.into(), found: version, expected: BUNDLE_SCHEMA_VERSION });
        }
        let bundle: ResultBundle = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
        bundle.check().map_err(corrupt)?;
        Ok(bundle)
    }

    fn check(&self) -> Result<(), String> {
        let mut ids: Vec<&str> = self.candidates.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(format!("duplicate candidate id {}", w[0]));
        }
        for c in &self.candidates {
            let input = c.rank_input();
            if input.raw.iter().chain(&input.variance).any(|v| !v.is_finite()) {
                return Err(format!("candidate {} has non-finite metrics", c.id));
            }
        }
        Ok(())
    }
}

pub fn save_bundle(bundle: &ResultBundle, path: &Path) -> Result<(), IoError> {
    write_text(path, &bundle.to_json())
}

pub fn load_bundle(path: &Path) -> Result<ResultBundle, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::Read { path: display(path), message: e.to_string() })?;
    let text = String::from_utf8(bytes)
        .map_err(|e| IoError::CorruptBundle { path: display(path), message: e.to_string() })?;
    ResultBundle::from_json(&text, &display(path))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::io::toy_catalog;
    use crate::metrics::MetricSummary;
    use crate::optimizer::Evaluation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_candidate(rng: &mut ChaCha8Rng, k: usize) -> BundleCandidate {
        let mut s = || MetricSummary { mean: rng.gen_range(0.1..100.0), variance: rng.gen_range(0.0..10.0) };
        let metrics = AnkleMetrics {
            speed: s(),
            torque: s(),
            backdriving_torque: s(),
            manipulability: s(),
            compactness: rng.gen_range(20.0..120.0),
            actuation_mass: rng.gen_range(0.5..3.0),
            com_height: rng.gen_range(80.0..300.0),
        };
        BundleCandidate {
            id: format!("rsu-{k:04}"),
            architecture: "rsu".into(),
            actuator: "rotary-planetary-a".into(),
            kind: CandidateKind::Optimized,
            pareto: k % 3 != 0,
            branch: Some(Branch::Primary),
            design: Some(DesignVector {
                architecture: crate::mechkin::Architecture::Rsu,
                symmetric: true,
                genes: (0..9).map(|_| rng.gen_range(-1.0..1.0) * std::f64::consts::PI / 3.0).collect(),
            }),
            params: None,
            evaluation: Some(if k % 7 == 0 {
                Evaluation::infeasible(0.25)
            } else {
                Evaluation::feasible(rng.gen::<f64>() * 1e3, rng.gen::<f64>() / 3.0)
            }),
            metrics,
            singular_poses: k % 4,
        }
    }

    fn bundle(n: usize, seed: u64) -> ResultBundle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let candidates = (0..n).map(|k| random_candidate(&mut rng, k)).collect();
        ResultBundle::new(DesignConfig::reference(), toy_catalog(), candidates, Vec::new())
    }

    #[test]
    fn hundred_candidates_round_trip() {
        let b = bundle(100, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        save_bundle(&b, &path).unwrap();
        assert_eq!(load_bundle(&path).unwrap(), b);
    }

    #[test]
    fn truncated_and_foreign_files_are_corrupt() {
        let text = bundle(5, 2).to_json();
        for cut in [0, 1, text.len() / 3, text.len() - 3] {
            assert!(matches!(ResultBundle::from_json(&text[..cut], "t"), Err(IoError::CorruptBundle { .. })));
        }
        assert!(matches!(ResultBundle::from_json("{\"a\": 1}", "t"), Err(IoError::CorruptBundle { .. })));
    }

    #[test]
    fn other_schema_versions_are_rejected() {
        let text = bundle(3, 3).to_json().replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(matches!(
            ResultBundle::from_json(&text, "t"),
            Err(IoError::VersionMismatch { found: 2, expected: 1, .. })
        ));
    }

    #[test]
    fn pool_hash_follows_the_candidate_set() {
        let b = bundle(10, 4);
        let mut shuffled = b.clone();
        shuffled.candidates.reverse();
        shuffled.refresh_pool_hash();
        assert_eq!(shuffled.provenance.pool_hash, b.provenance.pool_hash);
        let mut fewer = b.clone();
        fewer.candidates.pop();
        fewer.refresh_pool_hash();
        assert_ne!(fewer.provenance.pool_hash, b.provenance.pool_hash);
        let mut changed = b.clone();
        changed.candidates[3].metrics.com_height += 1e-9;
        changed.refresh_pool_hash();
        assert_ne!(changed.provenance.pool_hash, b.provenance.pool_hash);
        let mut relabeled = b.clone();
        relabeled.candidates[0].pareto = !relabeled.candidates[0].pareto;
        relabeled.refresh_pool_hash();
        assert_eq!(relabeled.provenance.pool_hash, b.provenance.pool_hash);
    }

    #[test]
    fn merge_checks_compatibility_and_ids() {
        let a = bundle(4, 5);
        let mut b = bundle(3, 6);
        for c in &mut b.candidates {
            c.id = format!("other-{}", c.id);
        }
        let merged = ResultBundle::merge(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(merged.candidates.len(), 7);
        assert_eq!(merged.catalog.len(), 4);
        assert_eq!(ResultBundle::merge(vec![a.clone(), a.clone()]), Err(MergeError::DuplicateId("rsu-0000".into())));
        let mut c = b.clone();
        c.config.region.step *= 2.0;
        assert_eq!(ResultBundle::merge(vec![a.clone(), c]), Err(MergeError::Incompatible("operational region")));
        let mut d = b;
        d.catalog[1].mass += 1.0;
        assert!(matches!(ResultBundle::merge(vec![a, d]), Err(MergeError::CatalogConflict(_))));
    }
}
