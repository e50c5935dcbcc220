//! Actuator catalogs.
//!
//! ```json
//! { "actuators": [ { "name": "...", "kind": "rotary", "nominal_speed": 360.0, ... } ] }
//! ```
//!
//! Field names follow [`ActuatorSpec`]. Rotary speeds are deg/s in the file
//! and rad/s in memory; every other field keeps its unit (mm, mm/s, N, Nm,
//! kg, kg/mm).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{degrees_exact, display, radians, read_text, write_text, IoError};
use crate::metrics::{ActuatorKind, ActuatorSpec, MetricsError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    actuators: Vec<CatalogEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogEntry {
    name: String,
    kind: ActuatorKind,
    nominal_speed: f64,
    nominal_effort: f64,
    peak_speed: f64,
    peak_effort: f64,
    static_friction: f64,
    mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stroke: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    retracted_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gear_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linkage_density: Option<f64>,
}

impl CatalogEntry {
    fn into_spec(self) -> ActuatorSpec {
        let speed = |v: f64| match self.kind {
            ActuatorKind::Rotary => radians(v),
            ActuatorKind::Linear => v,
        };
        ActuatorSpec {
            nominal_speed: speed(self.nominal_speed),
            peak_speed: speed(self.peak_speed),
            name: self.name,
            kind: self.kind,
            nominal_effort: self.nominal_effort,
            peak_effort: self.peak_effort,
            static_friction: self.static_friction,
            mass: self.mass,
            stroke: self.stroke,
            retracted_length: self.retracted_length,
            gear_ratio: self.gear_ratio,
            linkage_density: self.linkage_density,
        }
    }

    fn from_spec(spec: &ActuatorSpec) -> Self {
        let speed = |v: f64| match spec.kind {
            ActuatorKind::Rotary => degrees_exact(v),
            ActuatorKind::Linear => v,
        };
        Self {
            name: spec.name.clone(),
            kind: spec.kind,
            nominal_speed: speed(spec.nominal_speed),
            nominal_effort: spec.nominal_effort,
            peak_speed: speed(spec.peak_speed),
            peak_effort: spec.peak_effort,
            static_friction: spec.static_friction,
            mass: spec.mass,
            stroke: spec.stroke,
            retracted_length: spec.retracted_length,
            gear_ratio: spec.gear_ratio,
            linkage_density: spec.linkage_density,
        }
    }
}

/// Parses and validates catalog text; `origin` labels error messages.
pub fn catalog_from_str(text: &str, origin: &str) -> Result<Vec<ActuatorSpec>, IoError> {
    let file: CatalogFile =
        serde_json::from_str(text).map_err(|e| IoError::Parse { path: origin.into(), message: e.to_string() })?;
    let specs: Vec<ActuatorSpec> = file.actuators.into_iter().map(CatalogEntry::into_spec).collect();
    for (i, spec) in specs.iter().enumerate() {
        if spec.name.trim().is_empty() {
            return Err(IoError::invalid(origin, format!("actuators[{i}].name"), "must not be empty"));
        }
        if let Some(j) = specs[..i].iter().position(|s| s.name == spec.name) {
            return Err(IoError::invalid(
                origin,
                format!("actuators[{i}].name"),
                format!("duplicates actuators[{j}] ({})", spec.name),
            ));
        }
        if let Err(MetricsError::InvalidActuator { field, reason, .. }) = spec.validate() {
            return Err(IoError::invalid(origin, format!("actuators[{i}].{field}"), reason));
        }
    }
    Ok(specs)
}

pub fn catalog_to_string(specs: &[ActuatorSpec]) -> String {
    let file = CatalogFile { description: None, actuators: specs.iter().map(CatalogEntry::from_spec).collect() };
    let mut text = serde_json::to_string_pretty(&file).expect("catalog serialization cannot fail");
    text.push('\n');
    text
}

pub fn load_catalog(path: &Path) -> Result<Vec<ActuatorSpec>, IoError> {
    catalog_from_str(&read_text(path)?, &display(path))
}

pub fn save_catalog(specs: &[ActuatorSpec], path: &Path) -> Result<(), IoError> {
    write_text(path, &catalog_to_string(specs))
}

pub fn find_actuator<'a>(specs: &'a [ActuatorSpec], name: &str) -> Option<&'a ActuatorSpec> {
    specs.iter().find(|s| s.name == name)
}

/// Illustrative catalog with one linear and three rotary actuators. The
/// numbers are plausible for a humanoid ankle but do not describe any
/// particular product.
pub fn toy_catalog() -> Vec<ActuatorSpec> {
    let rotary = |name: &str, speed_deg: f64, effort: f64, friction: f64, mass: f64, gear: f64| ActuatorSpec {
        name: name.into(),
        kind: ActuatorKind::Rotary,
        nominal_speed: radians(speed_deg),
        nominal_effort: effort,
        peak_speed: radians(1.5 * speed_deg),
        peak_effort: 2.0 * effort,
        static_friction: friction,
        mass,
        stroke: None,
        retracted_length: None,
        gear_ratio: Some(gear),
        linkage_density: Some(4e-4),
    };
    vec![
        ActuatorSpec {
            name: "linear-ballscrew".into(),
            kind: ActuatorKind::Linear,
            nominal_speed: 160.0,
            nominal_effort: 1500.0,
            peak_speed: 250.0,
            peak_effort: 3000.0,
            static_friction: 40.0,
            mass: 1.0,
            stroke: Some(200.0),
            retracted_length: Some(130.0),
            gear_ratio: None,
            linkage_density: None,
        },
        rotary("rotary-planetary-a", 360.0, 36.0, 0.8, 0.8, 20.0),
        rotary("rotary-planetary-b", 240.0, 45.0, 1.2, 1.0, 36.0),
        rotary("rotary-harmonic-c", 180.0, 60.0, 2.5, 1.2, 50.0),
    ]
}
