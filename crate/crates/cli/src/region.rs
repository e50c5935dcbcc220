use ankle_core::io::{find_actuator, load_catalog, load_config, load_design, DesignConfig, DesignFile, ResolveError};
use ankle_core::mechkin::{Architecture, MechanismParams};
use ankle_core::metrics::ActuatorSpec;
use ankle_core::reparam::{OperationalRegion, ReparamOptions};

use crate::args::{ArchArg, RegionArgs};
use crate::CliError;

pub(crate) const DEFAULT_STEP_DEG: f64 = 2.0;

pub(crate) struct ResolvedRegion {
    pub region: OperationalRegion,
    pub reparam: ReparamOptions,
}

pub(crate) fn resolve_region(args: &RegionArgs) -> Result<Option<ResolvedRegion>, CliError> {
    if let Some(half) = args.square {
        let step = args.step.unwrap_or(DEFAULT_STEP_DEG);
        let region = OperationalRegion::square_degrees(half, step).map_err(CliError::input)?;
        return Ok(Some(ResolvedRegion { region, reparam: ReparamOptions::default() }));
    }
    let Some(path) = &args.region else {
        return Ok(None);
    };
    let config = load_config(path).map_err(CliError::input)?;
    let mut region = config.region;
    if let Some(step) = args.step {
        region = region.with_step(step.to_radians());
        region.validate().map_err(CliError::input)?;
    }
    Ok(Some(ResolvedRegion { region, reparam: config.reparam }))
}

pub(crate) fn load_design_for(arch: ArchArg, path: &std::path::Path) -> Result<DesignFile, CliError> {
    let design = load_design(path).map_err(CliError::input)?;
    let expected: Architecture = arch.into();
    if design.architecture != expected {
        return Err(CliError::Input(format!(
            "{}: design is {} but --arch is {expected}",
            path.display(),
            design.architecture
        )));
    }
    Ok(design)
}

pub(crate) fn design_params(
    design: &DesignFile,
    region: Option<&ResolvedRegion>,
    actuator: Option<&ActuatorSpec>,
) -> Result<MechanismParams, CliError> {
    let fallback;
    let (region, reparam) = match region {
        Some(r) => (&r.region, r.reparam),
        None if design.free_params().is_some() => {
            return Err(CliError::Input(
                "crank and rod are given as gamma/delta; pass --region or --square to realize them".into(),
            ))
        }
        None => {
            fallback = OperationalRegion::point(Default::default());
            (&fallback, ReparamOptions::default())
        }
    };
    design.params(region, reparam, actuator).map_err(|e| match e {
        ResolveError::Input(e) => CliError::input(e),
        ResolveError::Realize(e) => CliError::Domain(format!("design cannot be realized over the region: {e}")),
    })
}

pub(crate) fn catalog_actuator(path: &std::path::Path, name: &str) -> Result<ActuatorSpec, CliError> {
    let catalog = load_catalog(path).map_err(CliError::input)?;
    find_actuator(&catalog, name)
        .cloned()
        .ok_or_else(|| CliError::Input(format!("{}: no actuator named {name:?}", path.display())))
}

pub(crate) fn config_region(config: &DesignConfig) -> ResolvedRegion {
    ResolvedRegion { region: config.region, reparam: config.reparam }
}
