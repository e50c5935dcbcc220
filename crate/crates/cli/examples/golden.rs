//! Regenerates `fixtures/golden`: the fixed-seed pool, its uniform-weight
//! ranking and twenty random-weight rankings.
//!
//! `cargo run --release -p ankle-cli --example golden`

#[allow(dead_code)]
#[path = "../tests/common/golden.rs"]
mod golden;

use ankle_cli::rank_bundle;
use ankle_core::io::save_bundle;
use ankle_core::ranking::Weights;

use golden::{golden_dir, golden_pool, random_weights, WeightCase, WeightCases};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = golden_dir();
    std::fs::create_dir_all(&dir)?;
    let pool = golden_pool();
    save_bundle(&pool, &dir.join("bundle.json"))?;
    let uniform = rank_bundle(&pool, Weights::uniform(), 0.0)?;
    std::fs::write(dir.join("ranking_uniform.json"), serde_json::to_string_pretty(&uniform)? + "\n")?;
    let mut cases = Vec::new();
    for w in random_weights() {
        let report = rank_bundle(&pool, Weights::new(&w)?, 0.0)?;
        cases.push(WeightCase {
            weights: w,
            order: report.ranking.iter().map(|r| r.id.clone()).collect(),
            costs: report.ranking.iter().map(|r| r.cost).collect(),
        });
    }
    let cases = WeightCases { pool_hash: pool.provenance.pool_hash.clone(), cases };
    std::fs::write(dir.join("weights.json"), serde_json::to_string_pretty(&cases)? + "\n")?;
    println!("wrote {} candidates to {}", pool.candidates.len(), dir.display());
    Ok(())
}
