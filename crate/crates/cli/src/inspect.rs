use std::fs::File;
use std::io::BufWriter;

use serde::Serialize;

use ankle_core::io::{degrees_exact, load_config};
use ankle_core::mechkin::{
    ik, jacobian, Branch, FootOrientation, KinematicsError, MechanismParams, RsuExistence, SpuParams, StrokeLimits,
};
use ankle_core::metrics::{evaluate_metrics, ActuatorSpec, AnkleMetrics, MetricsError};

use crate::args::{IkArgs, MetricsArgs};
use crate::region::{catalog_actuator, config_region, design_params, load_design_for, resolve_region};
use crate::CliError;

fn parse_pose(text: &str) -> Result<FootOrientation, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parsed: Vec<f64> = parts.iter().filter_map(|p| p.parse::<f64>().ok()).collect();
    match parsed[..] {
        [roll, pitch] if parts.len() == 2 && roll.is_finite() && pitch.is_finite() => {
            let pose = FootOrientation::from_degrees(roll, pitch);
            if pose.is_valid() {
                Ok(pose)
            } else {
                Err(CliError::Input("pose angles must lie in (-180, 180) degrees".into()))
            }
        }
        _ => Err(CliError::Input(format!("--pose expects `roll,pitch` in degrees, got {text:?}"))),
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Primary => "primary",
        Branch::Secondary => "secondary",
    }
}

pub fn cmd_ik(args: &IkArgs) -> Result<(), CliError> {
    let pose = parse_pose(&args.pose)?;
    let design = load_design_for(args.arch, &args.params)?;
    let branch = [args.branch.map_or(design.branch, Branch::from); 2];
    let actuator = match (&args.catalog, &args.actuator) {
        (Some(c), Some(name)) => Some(catalog_actuator(c, name)?),
        (None, None) => None,
        _ => return Err(CliError::Input("--catalog and --actuator go together".into())),
    };
    let region = resolve_region(&args.region)?;
    let stroke_known = design.stroke.is_some() || actuator.is_some();
    let params = if design.architecture == ankle_core::mechkin::Architecture::Spu && !stroke_known {
        MechanismParams::Spu(SpuParams {
            a: design.a,
            b: design.b,
            stroke: [StrokeLimits { min: 0.0, max: f64::INFINITY }; 2],
        })
    } else {
        design_params(&design, region.as_ref(), actuator.as_ref())?
    };
    let (roll, pitch) = (degrees_exact(pose.roll), degrees_exact(pose.pitch));
    println!("pose roll {roll} deg, pitch {pitch} deg, branch {}", branch_name(branch[0]));
    let q = ik(&params, pose, branch).map_err(|e| {
        let message = match (&params, &e) {
            (MechanismParams::Rsu(p), KinematicsError::Unreachable { leg, excess }) => {
                let ex = RsuExistence::new(p, leg - 1, pose);
                format!(
                    "UNREACHABLE: leg {leg} existence condition exceeded by {excess:.6e} (|k/rho| = {:.9}, |r^2 - c^2 - |d|^2| = {:.6} > 2 c |d| rho = {:.6})",
                    ex.ratio().abs(),
                    ex.lhs,
                    ex.rhs
                )
            }
            _ => format!("UNREACHABLE: {e}"),
        };
        println!("{message}");
        CliError::Domain(message)
    })?;
    for leg in 0..2 {
        match &params {
            MechanismParams::Spu(p) => {
                let s = p.stroke[leg];
                let check = if !stroke_known {
                    String::new()
                } else if s.contains(q.q[leg]) {
                    format!(" (stroke [{}, {}] mm: ok)", s.min, s.max)
                } else {
                    format!(" (stroke [{}, {}] mm: exceeded by {:.6} mm)", s.min, s.max, s.excess(q.q[leg]))
                };
                println!("leg {}: zeta = {:.9} mm{check}", leg + 1, q.q[leg]);
            }
            MechanismParams::Rsu(p) => {
                let margin = RsuExistence::new(p, leg, pose).margin();
                println!("leg {}: alpha = {:.9} deg (existence margin {margin:.6e})", leg + 1, q.q[leg].to_degrees());
            }
        }
    }
    match jacobian(&params, pose, &q) {
        Ok(jac) => {
            let j = jac.matrix;
            println!("jacobian [[{:.9e}, {:.9e}], [{:.9e}, {:.9e}]]", j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
            match jac.manipulability() {
                Ok(k) => println!("manipulability ratio {k:.9}"),
                Err(e) => println!("manipulability ratio undefined: {e}"),
            }
        }
        Err(e) => println!("jacobian: {e}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct MetricsOutput<'a> {
    actuator: &'a str,
    metrics: &'a AnkleMetrics,
    singular_poses: usize,
}

pub(crate) fn metrics_error(e: MetricsError) -> CliError {
    match e {
        MetricsError::Unreachable { .. } | MetricsError::SingularInCore { .. } | MetricsError::NeutralInfeasible(_) => {
            CliError::domain(e)
        }
        other => CliError::input(other),
    }
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let config = load_config(&args.region).map_err(CliError::input)?;
    let actuator: ActuatorSpec = catalog_actuator(&args.catalog, &args.actuator)?;
    let design = load_design_for(args.arch, &args.params)?;
    actuator.check_architecture(design.architecture).map_err(CliError::input)?;
    let params = design_params(&design, Some(&config_region(&config)), Some(&actuator))?;
    let map = config.weight_map().map_err(CliError::input)?;
    let report = evaluate_metrics(&params, [design.branch; 2], &actuator, &map, config.ground_offset)
        .map_err(metrics_error)?;
    let m = &report.metrics;
    let rows = [
        ("speed", m.speed.mean, m.speed.std_dev(), "rad/s"),
        ("torque", m.torque.mean, m.torque.std_dev(), "Nm"),
        ("backdriving_torque", m.backdriving_torque.mean, m.backdriving_torque.std_dev(), "Nm"),
        ("manipulability", m.manipulability.mean, m.manipulability.std_dev(), "-"),
    ];
    for (name, mean, std, unit) in rows {
        println!("{name:<20} mean {mean:>14.6}  std {std:>12.6}  [{unit}]");
    }
    println!("{:<20} {:>19.6}  [mm]", "compactness", m.compactness);
    println!("{:<20} {:>19.6}  [kg]", "actuation_mass", m.actuation_mass);
    println!("{:<20} {:>19.6}  [mm]", "com_height", m.com_height);
    println!("singular poses outside the core: {}", report.singular_poses);
    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        report
            .write_csv(BufWriter::new(file), &map)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.json {
        let out = MetricsOutput { actuator: &actuator.name, metrics: m, singular_poses: report.singular_poses };
        let text = serde_json::to_string_pretty(&out).map_err(CliError::input)? + "\n";
        std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
