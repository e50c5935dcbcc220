//! Design configuration (TOML): regions, constraints, design-space bounds,
//! metric directions and optimizer settings.
//!
//! ```toml
//! ground_offset_mm = 80.0
//! symmetric = true
//! branch = "primary"
//!
//! [region]
//! roll_deg = [-35.0, 35.0]
//! pitch_deg = [-70.0, 30.0]
//! step_deg = 2.5
//!
//! [core]
//! roll_deg = [-17.5, 17.5]
//! pitch_deg = [-60.0, 20.0]
//!
//! [bounds.rsu]
//! a_mm = [[-120.0, 60.0], [20.0, 90.0], [150.0, 300.0]]
//! b_mm = [[-80.0, 60.0], [20.0, 90.0], [0.0, 60.0]]
//! psi_deg = [-180.0, 180.0]
//! gamma = [0.0, 0.9]
//! delta = [0.0, 1.0]
//! ```
//!
//! The core region is scanned with the operational-region step. Bounds are
//! given for leg 1; leg 2 uses the mirror image.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{display, radians, read_text, IoError};
use crate::mechkin::{Architecture, Branch};
use crate::metrics::{build_weight_map, MetricsError, WeightMap};
use crate::optimizer::{Bounds, Constraints, DesignSpace, LegBounds, Nsga2Config};
use crate::ranking::MetricDirections;
use crate::reparam::{OperationalRegion, ReparamOptions};

/// Validated configuration in internal units (mm, rad).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub region: OperationalRegion,
    pub core: OperationalRegion,
    /// Height of the central joint above the ground [mm].
    pub ground_offset: f64,
    pub symmetric: bool,
    pub branch: Branch,
    pub constraints: Constraints,
    pub directions: MetricDirections,
    pub optimizer: Nsga2Config,
    pub reparam: ReparamOptions,
    pub spu_bounds: Option<LegBounds>,
    pub rsu_bounds: Option<LegBounds>,
}

/// The configuration stored in result bundles.
pub type ConfigSnapshot = DesignConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    ground_offset_mm: f64,
    #[serde(default = "yes")]
    symmetric: bool,
    #[serde(default)]
    branch: Branch,
    region: RegionFile,
    core: CoreFile,
    #[serde(default)]
    constraints: ConstraintsFile,
    #[serde(default)]
    directions: MetricDirections,
    #[serde(default)]
    optimizer: Nsga2Config,
    #[serde(default)]
    reparam: ReparamOptions,
    #[serde(default)]
    bounds: BoundsFile,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionFile {
    roll_deg: Bounds,
    pitch_deg: Bounds,
    step_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoreFile {
    roll_deg: Bounds,
    pitch_deg: Bounds,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConstraintsFile {
    min_anchor_separation_mm: f64,
    foot_keepout_z_mm: f64,
}

impl Default for ConstraintsFile {
    fn default() -> Self {
        let c = Constraints::default();
        Self { min_anchor_separation_mm: c.min_anchor_separation, foot_keepout_z_mm: c.foot_keepout_z }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    spu: Option<LegBoundsFile>,
    rsu: Option<LegBoundsFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LegBoundsFile {
    a_mm: [Bounds; 3],
    b_mm: [Bounds; 3],
    psi_deg: Option<Bounds>,
    gamma: Option<Bounds>,
    delta: Option<Bounds>,
}

impl LegBoundsFile {
    fn into_bounds(self) -> LegBounds {
        LegBounds {
            a: self.a_mm,
            b: self.b_mm,
            psi: self.psi_deg.map(|(lo, hi)| (radians(lo), radians(hi))),
            gamma: self.gamma,
            delta: self.delta,
        }
    }
}

fn region(origin: &str, field: &str, roll: Bounds, pitch: Bounds, step: f64) -> Result<OperationalRegion, IoError> {
    OperationalRegion::from_degrees(roll, pitch, step).map_err(|e| IoError::invalid(origin, field, e.to_string()))
}

impl DesignConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, IoError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| IoError::Parse { path: origin.into(), message: e.to_string() })?;
        let step = file.region.step_deg;
        let omega = region(origin, "region", file.region.roll_deg, file.region.pitch_deg, step)?;
        let core = region(origin, "core", file.core.roll_deg, file.core.pitch_deg, step)?;
        if !omega.contains_region(&core) {
            return Err(IoError::invalid(origin, "core", "must lie inside the operational region"));
        }
        if !(file.ground_offset_mm.is_finite() && file.ground_offset_mm >= 0.0) {
            return Err(IoError::invalid(origin, "ground_offset_mm", "must be a non-negative number"));
        }
        let c = file.constraints;
        if !(c.min_anchor_separation_mm >= 0.0 && c.foot_keepout_z_mm.is_finite()) {
            return Err(IoError::invalid(origin, "constraints", "invalid values"));
        }
        if !(file.reparam.crank_safety >= 0.0 && file.reparam.crank_safety.is_finite()) {
            return Err(IoError::invalid(origin, "reparam.crank_safety", "must be non-negative"));
        }
        file.optimizer
            .validate()
            .map_err(|e| IoError::invalid(origin, "optimizer", e.to_string()))?;
        let config = DesignConfig {
            region: omega,
            core,
            ground_offset: file.ground_offset_mm,
            symmetric: file.symmetric,
            branch: file.branch,
            constraints: Constraints {
                min_anchor_separation: c.min_anchor_separation_mm,
                foot_keepout_z: c.foot_keepout_z_mm,
            },
            directions: file.directions,
            optimizer: file.optimizer,
            reparam: file.reparam,
            spu_bounds: file.bounds.spu.map(LegBoundsFile::into_bounds),
            rsu_bounds: file.bounds.rsu.map(LegBoundsFile::into_bounds),
        };
        for arch in [Architecture::Spu, Architecture::Rsu] {
            if config.bounds(arch).is_some() {
                config.design_space(arch).map_err(|e| match e {
                    IoError::Invalid { field, message, .. } => IoError::invalid(origin, field, message),
                    other => other,
                })?;
            }
        }
        Ok(config)
    }

    fn bounds(&self, arch: Architecture) -> Option<&LegBounds> {
        match arch {
            Architecture::Spu => self.spu_bounds.as_ref(),
            Architecture::Rsu => self.rsu_bounds.as_ref(),
        }
    }

    pub fn design_space(&self, arch: Architecture) -> Result<DesignSpace, IoError> {
        let field = format!("bounds.{arch}");
        let leg = self
            .bounds(arch)
            .ok_or_else(|| IoError::invalid("config", &field, "missing"))?
            .clone();
        let space = DesignSpace { arch, symmetric: self.symmetric, leg };
        space.validate().map_err(|e| IoError::invalid("config", &field, e.to_string()))?;
        Ok(space)
    }

    pub fn weight_map(&self) -> Result<WeightMap, MetricsError> {
        build_weight_map(&self.core, &self.region)
    }

    /// Settings that must agree for candidates to share one normalization
    /// pool; returns the first mismatching item.
    pub fn incompatibility(&self, other: &DesignConfig) -> Option<&'static str> {
        if self.region != other.region {
            Some("operational region")
        } else if self.core != other.core {
            Some("core region")
        } else if self.directions != other.directions {
            Some("metric directions")
        } else if self.ground_offset != other.ground_offset {
            Some("ground offset")
        } else {
            None
        }
    }

    /// Built-in configuration matching the shipped example file.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_CONFIG, "reference config").expect("reference config is valid")
    }
}

pub fn load_config(path: &Path) -> Result<DesignConfig, IoError> {
    DesignConfig::from_toml_str(&read_text(path)?, &display(path))
}

pub(crate) const REFERENCE_CONFIG: &str = r#"# Reference design configuration.
ground_offset_mm = 80.0
symmetric = true
branch = "primary"

[region]
roll_deg = [-35.0, 35.0]
pitch_deg = [-70.0, 30.0]
step_deg = 2.5

[core]
roll_deg = [-17.5, 17.5]
pitch_deg = [-60.0, 20.0]

[constraints]
min_anchor_separation_mm = 40.0
foot_keepout_z_mm = 80.0

[reparam]
crank_safety = 0.001

[optimizer]
pop_size = 100
generations = 200
seed = 0

[bounds.spu]
a_mm = [[-100.0, 60.0], [20.0, 90.0], [180.0, 320.0]]
b_mm = [[-80.0, 60.0], [20.0, 90.0], [0.0, 60.0]]

[bounds.rsu]
a_mm = [[-120.0, 60.0], [20.0, 90.0], [150.0, 300.0]]
b_mm = [[-80.0, 60.0], [20.0, 90.0], [0.0, 60.0]]
psi_deg = [-180.0, 180.0]
gamma = [0.0, 0.9]
delta = [0.0, 1.0]
"#;
