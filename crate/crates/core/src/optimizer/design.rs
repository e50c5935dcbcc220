//! Design vectors and their decoding into mechanism geometry.
//!
//! Gene order, leg 1 then leg 2 within each group:
//! SPU `a_1, a_2, b_1, b_2` (12 genes); RSU adds `psi_1, psi_2, gamma_1,
//! gamma_2, delta_1, delta_2` (18 genes). In symmetric mode only leg 1 is
//! encoded and leg 2 is its mirror image in the sagittal plane `y = 0`:
//! anchors flip `y`, and `psi_2 = pi - psi_1`, so the same IK branch on both
//! legs gives mirror-image assemblies.

use serde::{Deserialize, Serialize};

use crate::mechkin::{normalize_angle, Architecture, Vec3};
use crate::reparam::{RsuFreeParams, RsuGeometry};

use super::OptimizerError;

pub type Bounds = (f64, f64);

/// Box bounds for one leg; leg 2 bounds are the mirror of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegBounds {
    /// Shin anchor `a` [mm], per coordinate.
    pub a: [Bounds; 3],
    /// Foot anchor `b` [mm], per coordinate.
    pub b: [Bounds; 3],
    /// RSU only: actuator-axis yaw [rad].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Bounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub arch: Architecture,
    pub symmetric: bool,
    pub leg: LegBounds,
}

fn mirror_bounds(b: Bounds) -> Bounds {
    (-b.1, -b.0)
}

fn mirror_psi_bounds(b: Bounds) -> Bounds {
    (std::f64::consts::PI - b.1, std::f64::consts::PI - b.0)
}

fn mirror(v: Vec3) -> Vec3 {
    Vec3::new(v.x, -v.y, v.z)
}

/// Geometry decoded from a design vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "lowercase")]
pub enum DesignGeometry {
    Spu { a: [Vec3; 2], b: [Vec3; 2] },
    Rsu(RsuFreeParams),
}

impl DesignSpace {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let rsu_fields = [self.leg.psi, self.leg.gamma, self.leg.delta];
        match self.arch {
            Architecture::Spu => {}
            Architecture::Rsu => {
                if rsu_fields.iter().any(Option::is_none) {
                    return Err(OptimizerError::InvalidConfig("RSU bounds need psi, gamma and delta".into()));
                }
                let (g, d) = (self.leg.gamma.unwrap(), self.leg.delta.unwrap());
                if !(g.0 >= 0.0 && g.1 < 1.0) {
                    return Err(OptimizerError::InvalidConfig("gamma bounds must lie in [0, 1)".into()));
                }
                if !(d.0 >= 0.0 && d.1 <= 1.0) {
                    return Err(OptimizerError::InvalidConfig("delta bounds must lie in [0, 1]".into()));
                }
            }
        }
        for (lo, hi) in self.gene_bounds() {
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(OptimizerError::InvalidConfig(format!("invalid gene bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn gene_names(&self) -> Vec<String> {
        let legs: &[usize] = if self.symmetric { &[1] } else { &[1, 2] };
        let mut names = Vec::new();
        for point in ["a", "b"] {
            for leg in legs {
                for axis in ["x", "y", "z"] {
                    names.push(format!("{point}{leg}_{axis}"));
                }
            }
        }
        if self.arch == Architecture::Rsu {
            for var in ["psi", "gamma", "delta"] {
                for leg in legs {
                    names.push(format!("{var}{leg}"));
                }
            }
        }
        names
    }

    pub fn gene_bounds(&self) -> Vec<Bounds> {
        let l = &self.leg;
        let mut bounds = Vec::new();
        let push_point = |bounds: &mut Vec<Bounds>, p: &[Bounds; 3]| {
            bounds.extend_from_slice(p);
            if !self.symmetric {
                bounds.extend_from_slice(&[p[0], mirror_bounds(p[1]), p[2]]);
            }
        };
        push_point(&mut bounds, &l.a);
        push_point(&mut bounds, &l.b);
        if self.arch == Architecture::Rsu {
            let psi = l.psi.unwrap_or((0.0, 0.0));
            bounds.push(psi);
            if !self.symmetric {
                bounds.push(mirror_psi_bounds(psi));
            }
            for var in [l.gamma, l.delta] {
                let v = var.unwrap_or((0.0, 0.0));
                bounds.push(v);
                if !self.symmetric {
                    bounds.push(v);
                }
            }
        }
        bounds
    }

    pub fn n_genes(&self) -> usize {
        let per_leg = match self.arch {
            Architecture::Spu => 6,
            Architecture::Rsu => 9,
        };
        if self.symmetric { per_leg } else { 2 * per_leg }
    }

    pub fn decode(&self, genes: &[f64]) -> Result<DesignGeometry, OptimizerError> {
        if genes.len() != self.n_genes() {
            return Err(OptimizerError::InvalidConfig(format!(
                "expected {} genes, got {}",
                self.n_genes(),
                genes.len()
            )));
        }
        let v = |k: usize| Vec3::new(genes[k], genes[k + 1], genes[k + 2]);
        let (a, b, tail) = if self.symmetric {
            let (a1, b1) = (v(0), v(3));
            ([a1, mirror(a1)], [b1, mirror(b1)], 6)
        } else {
            ([v(0), v(3)], [v(6), v(9)], 12)
        };
        Ok(match self.arch {
            Architecture::Spu => DesignGeometry::Spu { a, b },
            Architecture::Rsu => {
                let t = &genes[tail..];
                let (psi, gamma, delta) = if self.symmetric {
                    ([t[0], normalize_angle(std::f64::consts::PI - t[0])], [t[1]; 2], [t[2]; 2])
                } else {
                    ([t[0], t[1]], [t[2], t[3]], [t[4], t[5]])
                };
                DesignGeometry::Rsu(RsuFreeParams { geometry: RsuGeometry { a, b, psi }, gamma, delta })
            }
        })
    }

    /// Inverse of `decode` for geometry expressible in this space.
    pub fn encode(&self, geometry: &DesignGeometry) -> Vec<f64> {
        let (a, b) = match geometry {
            DesignGeometry::Spu { a, b } => (a, b),
            DesignGeometry::Rsu(f) => (&f.geometry.a, &f.geometry.b),
        };
        let legs = if self.symmetric { 1 } else { 2 };
        let mut genes = Vec::with_capacity(self.n_genes());
        for p in [a, b] {
            for v in p.iter().take(legs) {
                genes.extend_from_slice(&[v.x, v.y, v.z]);
            }
        }
        if let DesignGeometry::Rsu(f) = geometry {
            for var in [f.geometry.psi, f.gamma, f.delta] {
                genes.extend_from_slice(&var[..legs]);
            }
        }
        genes
    }
}

/// A point in the design space together with its tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    pub architecture: Architecture,
    pub symmetric: bool,
    pub genes: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn rsu_space(symmetric: bool) -> DesignSpace {
        DesignSpace {
            arch: Architecture::Rsu,
            symmetric,
            leg: LegBounds {
                a: [(-120.0, 0.0), (20.0, 80.0), (150.0, 300.0)],
                b: [(-80.0, 0.0), (20.0, 60.0), (0.0, 60.0)],
                psi: Some((-PI, 0.0)),
                gamma: Some((0.0, 0.9)),
                delta: Some((0.0, 1.0)),
            },
        }
    }

    #[test]
    fn gene_counts_and_names() {
        assert_eq!(rsu_space(false).n_genes(), 18);
        assert_eq!(rsu_space(true).n_genes(), 9);
        assert_eq!(rsu_space(false).gene_bounds().len(), 18);
        assert_eq!(rsu_space(true).gene_names()[..3], ["a1_x", "a1_y", "a1_z"]);
        assert_eq!(rsu_space(false).gene_names()[3], "a2_x");
        let spu = DesignSpace { arch: Architecture::Spu, ..rsu_space(false) };
        assert_eq!(spu.gene_bounds().len(), 12);
        // Leg 2 y-bounds are mirrored.
        assert_eq!(spu.gene_bounds()[4], (-80.0, -20.0));
    }

    #[test]
    fn symmetric_decode_mirrors_leg_two() {
        let space = rsu_space(true);
        let genes = [-86.0, 40.0, 235.0, -34.0, 36.0, 36.0, -PI / 2.0, 0.1, 0.2];
        let DesignGeometry::Rsu(f) = space.decode(&genes).unwrap() else { panic!() };
        assert_eq!(f.geometry.a[1], Vec3::new(-86.0, -40.0, 235.0));
        assert_eq!(f.geometry.b[1], Vec3::new(-34.0, -36.0, 36.0));
        assert!((f.geometry.psi[1] - normalize_angle(1.5 * PI)).abs() < 1e-15);
        assert_eq!(f.gamma, [0.1, 0.1]);
        assert_eq!(space.encode(&DesignGeometry::Rsu(f)), genes.to_vec());
    }

    #[test]
    fn asymmetric_round_trip() {
        let space = rsu_space(false);
        let genes: Vec<f64> = (0..18).map(|k| k as f64 * 0.01).collect();
        assert_eq!(space.encode(&space.decode(&genes).unwrap()), genes);
        assert!(space.decode(&genes[..17]).is_err());
    }
}
