use ankle_core::io::{
    find_actuator, load_catalog, load_config, load_tasks, save_bundle, unix_now, BundleCandidate, CandidateKind,
    DesignConfig, ResultBundle, RunInfo,
};
use ankle_core::mechkin::Architecture;
use ankle_core::metrics::{evaluate_metrics, ActuatorSpec};
use ankle_core::optimizer::{nsga2, AnkleProblem, DesignVector, GenerationStats, OptimizerError, TaskTrajectory};
use serde_json::json;

use crate::args::OptimizeArgs;
use crate::CliError;

/// Everything one optimization run needs, already loaded.
#[derive(Debug, Clone)]
pub struct OptimizeRequest {
    pub arch: Architecture,
    pub actuator: ActuatorSpec,
    pub catalog: Vec<ActuatorSpec>,
    pub tasks: Vec<TaskTrajectory>,
    pub config: DesignConfig,
}

/// Runs NSGA-II and evaluates the metrics of every front member.
pub fn optimize_bundle(req: &OptimizeRequest, progress: impl FnMut(&GenerationStats)) -> Result<ResultBundle, CliError> {
    let config = &req.config;
    let space = config.design_space(req.arch).map_err(CliError::input)?;
    let mut problem = AnkleProblem::new(
        space.clone(),
        req.tasks.clone(),
        req.actuator.clone(),
        config.region,
        config.core,
        config.constraints,
        [config.branch; 2],
    )
    .map_err(CliError::input)?;
    problem.reparam = config.reparam;
    let map = config.weight_map().map_err(CliError::input)?;
    let started = unix_now();
    let front = nsga2(&problem, &config.optimizer, progress).map_err(|e| match e {
        OptimizerError::NoFeasibleFound { best } => {
            let violations: Vec<String> = best.iter().map(|b| format!("{:.4e}", b.evaluation.violation)).collect();
            CliError::Domain(format!(
                "no feasible design for {} with {} after {} generations; lowest violations {}",
                req.arch,
                req.actuator.name,
                config.optimizer.generations,
                violations.join(", ")
            ))
        }
        other => CliError::input(other),
    })?;
    let mut candidates = Vec::new();
    for (k, member) in front.members.iter().enumerate() {
        let id = format!("{}-{}-s{}-{k:03}", req.arch, req.actuator.name, front.seed);
        let params = match problem.realize(&member.genes) {
            Ok(p) => p,
            Err(u) => {
                eprintln!("{}", json!({"event": "skipped", "id": id, "reason": u.reason}));
                continue;
            }
        };
        match evaluate_metrics(&params, [config.branch; 2], &req.actuator, &map, config.ground_offset) {
            Ok(report) => candidates.push(BundleCandidate {
                id,
                architecture: req.arch.to_string(),
                actuator: req.actuator.name.clone(),
                kind: CandidateKind::Optimized,
                pareto: true,
                branch: Some(config.branch),
                design: Some(DesignVector { architecture: req.arch, symmetric: space.symmetric, genes: member.genes.clone() }),
                params: Some(params),
                evaluation: Some(member.evaluation),
                metrics: report.metrics,
                singular_poses: report.singular_poses,
            }),
            Err(e) => eprintln!("{}", json!({"event": "skipped", "id": id, "reason": e.to_string()})),
        }
    }
    if candidates.is_empty() {
        return Err(CliError::Domain("no front member could be evaluated over the operational region".into()));
    }
    let run = RunInfo {
        architecture: req.arch.to_string(),
        actuator: req.actuator.name.clone(),
        seed: front.seed,
        pop_size: front.pop_size,
        generations: front.generations,
        started_unix_s: started,
        finished_unix_s: unix_now(),
    };
    Ok(ResultBundle::new(config.clone(), req.catalog.clone(), candidates, vec![run]))
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let mut config = load_config(&args.region).map_err(CliError::input)?;
    if let Some(seed) = args.seed {
        config.optimizer.seed = seed;
    }
    if let Some(pop) = args.pop {
        config.optimizer.pop_size = pop;
    }
    if let Some(gens) = args.gens {
        config.optimizer.generations = gens;
    }
    config.optimizer.validate().map_err(CliError::input)?;
    let catalog = load_catalog(&args.catalog).map_err(CliError::input)?;
    let actuator = find_actuator(&catalog, &args.actuator)
        .cloned()
        .ok_or_else(|| CliError::Input(format!("{}: no actuator named {:?}", args.catalog.display(), args.actuator)))?;
    let arch: Architecture = args.arch.into();
    actuator.check_architecture(arch).map_err(CliError::input)?;
    let tasks = load_tasks(&args.tasks).map_err(CliError::input)?;
    let request = OptimizeRequest { arch, actuator, catalog, tasks, config };
    let quiet = args.quiet;
    let bundle = optimize_bundle(&request, |s: &GenerationStats| {
        if !quiet {
            eprintln!(
                "{}",
                json!({
                    "event": "generation",
                    "generation": s.generation,
                    "best_f1": s.best_f1,
                    "best_f2": s.best_f2,
                    "feasible": s.feasible,
                })
            );
        }
    })?;
    save_bundle(&bundle, &args.out).map_err(CliError::input)?;
    eprintln!(
        "{}",
        json!({"event": "done", "candidates": bundle.candidates.len(), "out": args.out.display().to_string()})
    );
    Ok(())
}
