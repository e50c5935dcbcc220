//! Single-design parameter files and baseline descriptions (TOML).
//!
//! Design file:
//!
//! ```toml
//! architecture = "rsu"
//! branch = "primary"
//! a1_mm = [-86.0, 40.0, 235.0]
//! a2_mm = [-86.0, -40.0, 235.0]
//! b1_mm = [-34.0, 36.0, 36.0]
//! b2_mm = [-34.0, -36.0, 36.0]
//! psi_deg = [-90.0, 90.0]
//! gamma = [0.001, 0.001]      # or crank_mm = [...] and rod_mm = [...]
//! delta = [0.001, 0.001]
//! ```
//!
//! SPU files may give `stroke_mm = [[min, max], [min, max]]`; otherwise the
//! stroke comes from the actuator.
//!
//! Baseline file, either a serial ankle:
//!
//! ```toml
//! id = "serial"
//! kind = "serial"
//! actuator = "rotary-harmonic-c"
//! compactness_mm = 55.0
//! com_height_mm = 140.0
//! ```
//!
//! or an existing mechanism, `kind = "mechanism"` with `design = "<path>"`
//! relative to the baseline file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{degrees_exact, display, radians, read_text, IoError};
use crate::mechkin::{Architecture, Branch, MechanismParams, RsuParams, SpuParams, StrokeLimits, Vec3};
use crate::metrics::{ActuatorKind, ActuatorSpec};
use crate::reparam::{realize_with, OperationalRegion, ReparamError, ReparamOptions, RsuFreeParams, RsuGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignLengths {
    /// Crank and rod from the reparameterization over a region.
    Free { gamma: [f64; 2], delta: [f64; 2] },
    Fixed { crank: [f64; 2], rod: [f64; 2] },
}

/// One mechanism design in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignFile {
    pub architecture: Architecture,
    pub branch: Branch,
    pub a: [Vec3; 2],
    pub b: [Vec3; 2],
    /// RSU only [rad].
    pub psi: Option<[f64; 2]>,
    /// RSU only.
    pub lengths: Option<DesignLengths>,
    /// SPU only; defaults to the actuator's stroke.
    pub stroke: Option<[StrokeLimits; 2]>,
}

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Input(#[from] IoError),
    #[error(transparent)]
    Realize(#[from] ReparamError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignToml {
    architecture: Architecture,
    #[serde(default)]
    branch: Branch,
    a1_mm: [f64; 3],
    a2_mm: [f64; 3],
    b1_mm: [f64; 3],
    b2_mm: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    psi_deg: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crank_mm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rod_mm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stroke_mm: Option<[[f64; 2]; 2]>,
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

impl DesignFile {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, IoError> {
        let f: DesignToml =
            toml::from_str(text).map_err(|e| IoError::Parse { path: origin.into(), message: e.to_string() })?;
        let invalid = |field: &str, msg: &str| IoError::invalid(origin, field, msg);
        let all = [f.a1_mm, f.a2_mm, f.b1_mm, f.b2_mm];
        if all.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("anchors", "must be finite"));
        }
        let mut design = DesignFile {
            architecture: f.architecture,
            branch: f.branch,
            a: [vec3(f.a1_mm), vec3(f.a2_mm)],
            b: [vec3(f.b1_mm), vec3(f.b2_mm)],
            psi: None,
            lengths: None,
            stroke: None,
        };
        match f.architecture {
            Architecture::Spu => {
                for (field, present) in [
                    ("psi_deg", f.psi_deg.is_some()),
                    ("gamma", f.gamma.is_some()),
                    ("delta", f.delta.is_some()),
                    ("crank_mm", f.crank_mm.is_some()),
                    ("rod_mm", f.rod_mm.is_some()),
                ] {
                    if present {
                        return Err(invalid(field, "not used by SPU designs"));
                    }
                }
                if let Some(s) = f.stroke_mm {
                    let stroke = s.map(|[min, max]| StrokeLimits { min, max });
                    if stroke.iter().any(|s| !(s.min >= 0.0 && s.max > s.min)) {
                        return Err(invalid("stroke_mm", "needs 0 <= min < max"));
                    }
                    design.stroke = Some(stroke);
                }
            }
            Architecture::Rsu => {
                if f.stroke_mm.is_some() {
                    return Err(invalid("stroke_mm", "not used by RSU designs"));
                }
                let psi = f.psi_deg.ok_or_else(|| invalid("psi_deg", "required for RSU designs"))?;
                design.psi = Some(psi.map(radians));
                design.lengths = Some(match (f.gamma, f.delta, f.crank_mm, f.rod_mm) {
                    (Some(gamma), Some(delta), None, None) => {
                        let lengths = DesignLengths::Free { gamma, delta };
                        let free = RsuFreeParams {
                            geometry: RsuGeometry { a: design.a, b: design.b, psi: design.psi.unwrap() },
                            gamma,
                            delta,
                        };
                        free.validate().map_err(|e| invalid("gamma/delta", &e.to_string()))?;
                        lengths
                    }
                    (None, None, Some(crank), Some(rod)) => {
                        let p = RsuParams { a: design.a, b: design.b, psi: design.psi.unwrap(), crank, rod };
                        p.validate().map_err(|e| invalid("crank_mm/rod_mm", &e))?;
                        DesignLengths::Fixed { crank, rod }
                    }
                    _ => {
                        return Err(invalid("lengths", "give either gamma and delta, or crank_mm and rod_mm"));
                    }
                });
            }
        }
        Ok(design)
    }

    pub fn from_params(params: &MechanismParams, branch: Branch) -> Self {
        match params {
            MechanismParams::Spu(p) => DesignFile {
                architecture: Architecture::Spu,
                branch,
                a: p.a,
                b: p.b,
                psi: None,
                lengths: None,
                stroke: Some(p.stroke),
            },
            MechanismParams::Rsu(p) => DesignFile {
                architecture: Architecture::Rsu,
                branch,
                a: p.a,
                b: p.b,
                psi: Some(p.psi),
                lengths: Some(DesignLengths::Fixed { crank: p.crank, rod: p.rod }),
                stroke: None,
            },
        }
    }

    pub fn to_toml_string(&self) -> String {
        let arr = |v: &Vec3| [v.x, v.y, v.z];
        let (mut gamma, mut delta, mut crank_mm, mut rod_mm) = (None, None, None, None);
        match self.lengths {
            Some(DesignLengths::Free { gamma: g, delta: d }) => (gamma, delta) = (Some(g), Some(d)),
            Some(DesignLengths::Fixed { crank, rod }) => (crank_mm, rod_mm) = (Some(crank), Some(rod)),
            None => {}
        }
        let file = DesignToml {
            architecture: self.architecture,
            branch: self.branch,
            a1_mm: arr(&self.a[0]),
            a2_mm: arr(&self.a[1]),
            b1_mm: arr(&self.b[0]),
            b2_mm: arr(&self.b[1]),
            psi_deg: self.psi.map(|p| p.map(degrees_exact)),
            gamma,
            delta,
            crank_mm,
            rod_mm,
            stroke_mm: self.stroke.map(|s| s.map(|s| [s.min, s.max])),
        };
        toml::to_string(&file).expect("design serialization cannot fail")
    }

    /// Free RSU parameters when lengths come from the reparameterization.
    pub fn free_params(&self) -> Option<RsuFreeParams> {
        match (self.psi, self.lengths) {
            (Some(psi), Some(DesignLengths::Free { gamma, delta })) => Some(RsuFreeParams {
                geometry: RsuGeometry { a: self.a, b: self.b, psi },
                gamma,
                delta,
            }),
            _ => None,
        }
    }

    /// Concrete mechanism. RSU lengths in free form are realized over
    /// `region`; SPU strokes fall back to `actuator`.
    pub fn params(
        &self,
        region: &OperationalRegion,
        reparam: ReparamOptions,
        actuator: Option<&ActuatorSpec>,
    ) -> Result<MechanismParams, ResolveError> {
        match self.architecture {
            Architecture::Spu => {
                let stroke = match (self.stroke, actuator) {
                    (Some(s), _) => s,
                    (None, Some(act)) if act.kind == ActuatorKind::Linear => {
                        let min = act.retracted_length.ok_or_else(|| {
                            IoError::invalid("actuator", format!("{}.retracted_length", act.name), "required for SPU strokes")
                        })?;
                        [StrokeLimits { min, max: min + act.stroke.unwrap_or(0.0) }; 2]
                    }
                    _ => return Err(IoError::invalid("design", "stroke_mm", "needed when no linear actuator is given").into()),
                };
                Ok(MechanismParams::Spu(SpuParams { a: self.a, b: self.b, stroke }))
            }
            Architecture::Rsu => match (self.psi, self.lengths) {
                (Some(psi), Some(DesignLengths::Fixed { crank, rod })) => {
                    Ok(MechanismParams::Rsu(RsuParams { a: self.a, b: self.b, psi, crank, rod }))
                }
                _ => {
                    let free = self.free_params().expect("validated at load");
                    Ok(MechanismParams::Rsu(realize_with(&free, region, reparam)?.params))
                }
            },
        }
    }
}

pub fn load_design(path: &Path) -> Result<DesignFile, IoError> {
    DesignFile::from_toml_str(&read_text(path)?, &display(path))
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineKind {
    /// One actuator per axis; the neutral-pose metrics are given directly.
    Serial { compactness: f64, com_height: f64 },
    Mechanism(DesignFile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFile {
    pub id: String,
    pub actuator: String,
    pub kind: BaselineKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaselineToml {
    id: String,
    kind: String,
    actuator: String,
    compactness_mm: Option<f64>,
    com_height_mm: Option<f64>,
    design: Option<String>,
}

pub fn load_baseline(path: &Path) -> Result<BaselineFile, IoError> {
    let origin = display(path);
    let f: BaselineToml = toml::from_str(&read_text(path)?)
        .map_err(|e| IoError::Parse { path: origin.clone(), message: e.to_string() })?;
    let kind = match f.kind.as_str() {
        "serial" => {
            let positive = |field: &str, v: Option<f64>| {
                v.filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| IoError::invalid(&origin, field, "required non-negative number for serial baselines"))
            };
            BaselineKind::Serial {
                compactness: positive("compactness_mm", f.compactness_mm)?,
                com_height: positive("com_height_mm", f.com_height_mm)?,
            }
        }
        "mechanism" => {
            let rel = f.design.ok_or_else(|| IoError::invalid(&origin, "design", "required for mechanism baselines"))?;
            let base = path.parent().unwrap_or(Path::new("."));
            BaselineKind::Mechanism(load_design(&base.join(rel))?)
        }
        other => return Err(IoError::invalid(&origin, "kind", format!("expected serial or mechanism, got {other:?}"))),
    };
    if f.id.trim().is_empty() {
        return Err(IoError::invalid(&origin, "id", "must not be empty"));
    }
    Ok(BaselineFile { id: f.id, actuator: f.actuator, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
architecture = "rsu"
a1_mm = [-86.0, 40.0, 235.0]
a2_mm = [-86.0, -40.0, 235.0]
b1_mm = [-34.0, 36.0, 36.0]
b2_mm = [-34.0, -36.0, 36.0]
psi_deg = [-90.0, 90.0]
gamma = [0.001, 0.001]
delta = [0.001, 0.001]
"#;

    #[test]
    fn free_rsu_design_realizes() {
        let d = DesignFile::from_toml_str(REFERENCE, "reference").unwrap();
        assert_eq!(d.psi.unwrap()[0], -std::f64::consts::FRAC_PI_2);
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let p = d.params(&region, ReparamOptions::default(), None).unwrap();
        assert_eq!(p.architecture(), Architecture::Rsu);
    }

    #[test]
    fn fixed_designs_round_trip() {
        let d = DesignFile::from_toml_str(REFERENCE, "reference").unwrap();
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let p = d.params(&region, ReparamOptions::default(), None).unwrap();
        let fixed = DesignFile::from_params(&p, Branch::Secondary);
        let back = DesignFile::from_toml_str(&fixed.to_toml_string(), "mem").unwrap();
        assert_eq!(back, fixed);
        assert_eq!(back.params(&region, ReparamOptions::default(), None).unwrap(), p);
        let free_back = DesignFile::from_toml_str(&d.to_toml_string(), "mem").unwrap();
        assert_eq!(free_back, d);
    }

    #[test]
    fn spu_stroke_falls_back_to_actuator() {
        let text = REFERENCE
            .replace("rsu", "spu")
            .replace("psi_deg = [-90.0, 90.0]\ngamma = [0.001, 0.001]\ndelta = [0.001, 0.001]\n", "");
        let d = DesignFile::from_toml_str(&text, "spu").unwrap();
        let region = OperationalRegion::square_degrees(10.0, 2.0).unwrap();
        assert!(matches!(d.params(&region, ReparamOptions::default(), None), Err(ResolveError::Input(_))));
        let act = &crate::io::toy_catalog()[0];
        match d.params(&region, ReparamOptions::default(), Some(act)).unwrap() {
            MechanismParams::Spu(p) => assert_eq!(p.stroke[0].max - p.stroke[0].min, act.stroke.unwrap()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn malformed_designs_are_rejected() {
        let both = format!("{REFERENCE}crank_mm = [10.0, 10.0]\nrod_mm = [200.0, 200.0]\n");
        assert!(matches!(DesignFile::from_toml_str(&both, "x"), Err(IoError::Invalid { .. })));
        let no_psi = REFERENCE.replace("psi_deg = [-90.0, 90.0]\n", "");
        assert!(matches!(DesignFile::from_toml_str(&no_psi, "x"), Err(IoError::Invalid { .. })));
        let bad_gamma = REFERENCE.replace("gamma = [0.001, 0.001]", "gamma = [1.5, 0.001]");
        assert!(matches!(DesignFile::from_toml_str(&bad_gamma, "x"), Err(IoError::Invalid { .. })));
        assert!(matches!(DesignFile::from_toml_str("architecture = 3", "x"), Err(IoError::Parse { .. })));
    }

    #[test]
    fn baselines_load_relative_designs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("eng.toml"), REFERENCE).unwrap();
        let mech = dir.path().join("mech.toml");
        std::fs::write(&mech, "id = \"eng\"\nkind = \"mechanism\"\nactuator = \"r\"\ndesign = \"eng.toml\"\n").unwrap();
        let b = load_baseline(&mech).unwrap();
        assert!(matches!(b.kind, BaselineKind::Mechanism(_)));
        let serial = dir.path().join("serial.toml");
        std::fs::write(&serial, "id = \"s\"\nkind = \"serial\"\nactuator = \"r\"\ncompactness_mm = 50.0\n").unwrap();
        assert!(matches!(load_baseline(&serial), Err(IoError::Invalid { .. })));
    }
}
