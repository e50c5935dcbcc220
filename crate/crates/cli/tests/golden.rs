//! The golden fixtures shared with the explorer stay reproducible, and the
//! CLI ranks them as recorded.

mod common;

use std::process::Command;

use ankle_cli::{rank_bundle, RankReport};
use ankle_core::io::load_bundle;
use ankle_core::ranking::Weights;

use common::golden::{golden_dir, golden_pool, random_weights, weights_arg, WeightCases, GENERATIONS, POP, SEED};

fn read_json<T: serde::de::DeserializeOwned>(name: &str) -> T {
    serde_json::from_str(&std::fs::read_to_string(golden_dir().join(name)).unwrap()).unwrap()
}

fn assert_costs_match(ids: &[String], costs: &[f64], report: &RankReport) {
    let got: Vec<&str> = report.ranking.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(got, ids.iter().map(String::as_str).collect::<Vec<_>>());
    for (r, expected) in report.ranking.iter().zip(costs) {
        assert!((r.cost - expected).abs() <= 1e-12, "{}: {} vs {expected}", r.id, r.cost);
    }
}

#[test]
fn fixed_seed_pool_reproduces_fixture() {
    let fixture = load_bundle(&golden_dir().join("bundle.json")).unwrap();
    let pool = golden_pool();
    assert_eq!(pool.candidates, fixture.candidates);
    assert_eq!(pool.provenance, fixture.provenance);
    assert_eq!(pool.config, fixture.config);
    for run in &fixture.provenance.runs {
        assert_eq!((run.seed, run.pop_size, run.generations), (SEED, POP, GENERATIONS));
    }
}

#[test]
fn uniform_ranking_matches_fixture() {
    let fixture = load_bundle(&golden_dir().join("bundle.json")).unwrap();
    let expected: RankReport = read_json("ranking_uniform.json");
    let report = rank_bundle(&fixture, Weights::uniform(), 0.0).unwrap();
    let ids: Vec<String> = expected.ranking.iter().map(|r| r.id.clone()).collect();
    let costs: Vec<f64> = expected.ranking.iter().map(|r| r.cost).collect();
    assert_costs_match(&ids, &costs, &report);
    assert_eq!(report.pool_hash, expected.pool_hash);
    assert_eq!(report.groups.len(), 4);
    assert_eq!(report.baselines.len(), 2);
    assert_eq!(report.groups, expected.groups);
}

#[test]
fn cli_reproduces_random_weight_rankings() {
    let cases: WeightCases = read_json("weights.json");
    assert_eq!(cases.cases.len(), 20);
    let bundle = golden_dir().join("bundle.json");
    assert_eq!(cases.pool_hash, load_bundle(&bundle).unwrap().provenance.pool_hash);
    let dir = tempfile::tempdir().unwrap();
    for (k, (case, w)) in cases.cases.iter().zip(random_weights()).enumerate() {
        assert_eq!(case.weights, w);
        let out = dir.path().join(format!("rank{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_ankle"))
            .args(["rank", "--weights", &weights_arg(&case.weights)])
            .arg("--in")
            .arg(&bundle)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let report: RankReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_costs_match(&case.order, &case.costs, &report);
    }
}
