use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ankle_core::io::{
    find_actuator, load_baseline, load_bundle, load_catalog, save_bundle, BaselineFile, BaselineKind, BundleCandidate,
    CandidateKind, DesignConfig, ResolveError, ResultBundle,
};
use ankle_core::metrics::{evaluate_metrics, serial_metrics, ActuatorSpec};
use ankle_core::ranking::{
    rank_population, MetricDirections, RankOptions, RankedCandidate, Weights, METRIC_NAMES,
};

use crate::args::RankArgs;
use crate::inspect::metrics_error;
use crate::CliError;

/// Cost distribution of one architecture-actuator group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostGroup {
    pub architecture: String,
    pub actuator: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Ascending.
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineCost {
    pub id: String,
    pub architecture: String,
    pub actuator: String,
    pub rank: usize,
    pub cost: f64,
}

/// Full ranking output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub pool_hash: String,
    pub weights: Weights,
    pub directions: MetricDirections,
    pub variance_penalty: f64,
    pub ranking: Vec<RankedCandidate>,
    pub groups: Vec<CostGroup>,
    pub baselines: Vec<BaselineCost>,
}

/// Linear-interpolation quantile of ascending data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Groups non-baseline candidates by architecture and actuator.
pub fn cost_groups(ranked: &[RankedCandidate]) -> Vec<CostGroup> {
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in ranked.iter().filter(|r| !r.baseline) {
        groups.entry((r.architecture.clone(), r.actuator.clone())).or_default().push(r.cost);
    }
    groups
        .into_iter()
        .map(|((architecture, actuator), mut costs)| {
            costs.sort_by(f64::total_cmp);
            CostGroup {
                architecture,
                actuator,
                count: costs.len(),
                min: costs[0],
                q1: quantile(&costs, 0.25),
                median: quantile(&costs, 0.5),
                q3: quantile(&costs, 0.75),
                max: costs[costs.len() - 1],
                mean: costs.iter().sum::<f64>() / costs.len() as f64,
                costs,
            }
        })
        .collect()
}

/// Metrics of a baseline under the pool's configuration.
pub fn evaluate_baseline(
    baseline: &BaselineFile,
    actuator: &ActuatorSpec,
    config: &DesignConfig,
) -> Result<BundleCandidate, CliError> {
    let candidate = |architecture: String, metrics, params, branch, singular_poses| BundleCandidate {
        id: baseline.id.clone(),
        architecture,
        actuator: actuator.name.clone(),
        kind: CandidateKind::Baseline,
        pareto: false,
        branch,
        design: None,
        params,
        evaluation: None,
        metrics,
        singular_poses,
    };
    match &baseline.kind {
        BaselineKind::Serial { compactness, com_height } => Ok(candidate(
            "serial".into(),
            serial_metrics(actuator, *compactness, *com_height),
            None,
            None,
            0,
        )),
        BaselineKind::Mechanism(design) => {
            actuator.check_architecture(design.architecture).map_err(CliError::input)?;
            let params = design
                .params(&config.region, config.reparam, Some(actuator))
                .map_err(|e| match e {
                    ResolveError::Input(e) => CliError::input(e),
                    ResolveError::Realize(e) => CliError::Domain(format!("baseline {}: {e}", baseline.id)),
                })?;
            let map = config.weight_map().map_err(CliError::input)?;
            let report = evaluate_metrics(&params, [design.branch; 2], actuator, &map, config.ground_offset)
                .map_err(|e| match metrics_error(e) {
                    CliError::Domain(m) => CliError::Domain(format!("baseline {}: {m}", baseline.id)),
                    other => other,
                })?;
            Ok(candidate(
                design.architecture.to_string(),
                report.metrics,
                Some(params),
                Some(design.branch),
                report.singular_poses,
            ))
        }
    }
}

fn write_ranking_csv(path: &Path, ranking: &[RankedCandidate]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let mut header: Vec<String> = ["rank", "id", "architecture", "actuator", "baseline", "cost"].map(String::from).into();
    header.extend(METRIC_NAMES.iter().map(|m| format!("raw_{m}")));
    header.extend(METRIC_NAMES.iter().map(|m| format!("norm_{m}")));
    w.write_record(&header).map_err(err)?;
    for r in ranking {
        let mut row = vec![
            r.rank.to_string(),
            r.id.clone(),
            r.architecture.clone(),
            r.actuator.clone(),
            (r.baseline as u8).to_string(),
            r.cost.to_string(),
        ];
        row.extend(r.raw.iter().chain(&r.normalized).map(f64::to_string));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_groups_csv(path: &Path, groups: &[CostGroup]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["architecture", "actuator", "count", "min", "q1", "median", "q3", "max", "mean"])
        .map_err(err)?;
    for g in groups {
        let mut row = vec![g.architecture.clone(), g.actuator.clone(), g.count.to_string()];
        row.extend([g.min, g.q1, g.median, g.q3, g.max, g.mean].map(|v| v.to_string()));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Ranks a merged bundle; shared by the command and the tests.
pub fn rank_bundle(bundle: &ResultBundle, weights: Weights, variance_penalty: f64) -> Result<RankReport, CliError> {
    let inputs = bundle.rank_inputs();
    let options = RankOptions { variance_penalty };
    let ranking = rank_population(&inputs, &weights, &bundle.config.directions, options).map_err(CliError::input)?;
    let baselines = ranking
        .iter()
        .filter(|r| r.baseline)
        .map(|r| BaselineCost {
            id: r.id.clone(),
            architecture: r.architecture.clone(),
            actuator: r.actuator.clone(),
            rank: r.rank,
            cost: r.cost,
        })
        .collect();
    Ok(RankReport {
        pool_hash: bundle.provenance.pool_hash.clone(),
        weights,
        directions: bundle.config.directions,
        variance_penalty,
        groups: cost_groups(&ranking),
        ranking,
        baselines,
    })
}

pub fn cmd_rank(args: &RankArgs) -> Result<(), CliError> {
    let weights = Weights::parse(&args.weights).map_err(CliError::input)?;
    let bundles = args
        .inputs
        .iter()
        .map(|p| load_bundle(p).map_err(CliError::input))
        .collect::<Result<Vec<_>, _>>()?;
    let mut merged = ResultBundle::merge(bundles).map_err(|e| CliError::Input(format!("incompatible bundles: {e}")))?;
    let extra = args
        .catalog
        .as_ref()
        .map(|p| load_catalog(p).map_err(CliError::input))
        .transpose()?
        .unwrap_or_default();
    for path in &args.baseline {
        let baseline = load_baseline(path).map_err(CliError::input)?;
        let actuator = match find_actuator(&merged.catalog, &baseline.actuator) {
            Some(a) => a.clone(),
            None => {
                let a = find_actuator(&extra, &baseline.actuator).cloned().ok_or_else(|| {
                    CliError::Input(format!(
                        "{}: actuator {:?} is in neither the bundles nor --catalog",
                        path.display(),
                        baseline.actuator
                    ))
                })?;
                merged.catalog.push(a.clone());
                a
            }
        };
        if merged.candidates.iter().any(|c| c.id == baseline.id) {
            return Err(CliError::Input(format!("{}: id {:?} is already in the pool", path.display(), baseline.id)));
        }
        let candidate = evaluate_baseline(&baseline, &actuator, &merged.config)?;
        merged.candidates.push(candidate);
    }
    merged.refresh_pool_hash();
    let report = rank_bundle(&merged, weights, args.variance_penalty)?;
    let is_json = args.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let text = serde_json::to_string_pretty(&report).map_err(CliError::input)? + "\n";
        std::fs::write(&args.out, text).map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
    } else {
        write_ranking_csv(&args.out, &report.ranking)?;
    }
    if let Some(path) = &args.groups_out {
        write_groups_csv(path, &report.groups)?;
    }
    if let Some(path) = &args.merged_out {
        save_bundle(&merged, path).map_err(CliError::input)?;
    }
    if let Some(best) = report.ranking.first() {
        println!("best: {} (cost {:.6}) of {} candidates", best.id, best.cost, report.ranking.len());
    }
    for b in &report.baselines {
        println!("baseline {}: rank {} cost {:.6}", b.id, b.rank, b.cost);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }
}
