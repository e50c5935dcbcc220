//! Construction of the golden fixture pool shared by the generator example
//! and the golden tests.

use std::path::{Path, PathBuf};

use ankle_cli::{evaluate_baseline, optimize_bundle, OptimizeRequest};
use ankle_core::io::{find_actuator, load_baseline, load_catalog, load_config, load_tasks, ResultBundle};
use ankle_core::mechkin::Architecture;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const PAIRS: [(Architecture, &str); 4] = [
    (Architecture::Spu, "linear-ballscrew"),
    (Architecture::Rsu, "rotary-planetary-a"),
    (Architecture::Rsu, "rotary-planetary-b"),
    (Architecture::Rsu, "rotary-harmonic-c"),
];

pub const SEED: u64 = 1;
pub const POP: usize = 8;
pub const GENERATIONS: usize = 5;

pub fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn golden_dir() -> PathBuf {
    workspace().join("fixtures/golden")
}

/// The four smoke runs merged with both baselines. Timestamps are zeroed so
/// the file is reproducible.
pub fn golden_pool() -> ResultBundle {
    let data = workspace().join("data");
    let catalog = load_catalog(&data.join("catalog.json")).unwrap();
    let tasks = load_tasks(&data.join("tasks")).unwrap();
    let mut config = load_config(&data.join("config.toml")).unwrap();
    config.optimizer.seed = SEED;
    config.optimizer.pop_size = POP;
    config.optimizer.generations = GENERATIONS;
    let bundles = PAIRS
        .iter()
        .map(|&(arch, name)| {
            let actuator = find_actuator(&catalog, name).unwrap().clone();
            let req = OptimizeRequest { arch, actuator, catalog: catalog.clone(), tasks: tasks.clone(), config: config.clone() };
            optimize_bundle(&req, |_| {}).unwrap()
        })
        .collect();
    let mut pool = ResultBundle::merge(bundles).unwrap();
    for file in ["serial.toml", "engineered_rsu.toml"] {
        let baseline = load_baseline(&data.join("baselines").join(file)).unwrap();
        let actuator = find_actuator(&pool.catalog, &baseline.actuator).unwrap().clone();
        pool.candidates.push(evaluate_baseline(&baseline, &actuator, &pool.config).unwrap());
    }
    pool.provenance.created_unix_s = 0;
    for run in &mut pool.provenance.runs {
        run.started_unix_s = 0;
        run.finished_unix_s = 0;
    }
    pool.refresh_pool_hash();
    pool
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCase {
    pub weights: Vec<f64>,
    /// Candidate ids in rank order.
    pub order: Vec<String>,
    /// Costs aligned with `order`.
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCases {
    pub pool_hash: String,
    pub cases: Vec<WeightCase>,
}

/// Twenty random weight vectors on the simplex.
pub fn random_weights() -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..20)
        .map(|_| {
            let raw: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|w| w / sum).collect()
        })
        .collect()
}

pub fn weights_arg(w: &[f64]) -> String {
    w.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}
