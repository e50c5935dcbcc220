//! Feasibility-preserving reparameterization of RSU crank and rod lengths.
//!
//! For a fixed leg geometry `(a_i, b_i, psi_i)` and operational region, the
//! crank is bounded below by `c_min` and, for a chosen crank, the rod is
//! confined to `[r_min, r_max]`. Mapping `gamma in [0, 1)` to
//! `c = c_min / (1 - gamma)` and `delta in [0, 1]` to the convex combination
//! of the rod bounds yields a mechanism whose inverse kinematics exists at
//! every grid point of the region.
//!
//! All extrema are taken over the region's uniform grid. Grid values are
//! computed in parallel and reduced sequentially in grid order, so results
//! are bit-reproducible.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechkin::{
    leg_vector, polar_terms, FootOrientation, RsuExistence, RsuParams, Vec3, EXISTENCE_TOLERANCE,
};

/// Distances and `rho` below these are treated as degenerate.
const DISTANCE_TOLERANCE: f64 = 1e-9;
const RHO_TOLERANCE: f64 = 1e-9;
/// Relative slack allowed when the rod interval collapses to a point.
const INTERVAL_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReparamError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("leg {leg} geometry is degenerate at roll {roll:.4} rad, pitch {pitch:.4} rad")]
    DegenerateGeometry { leg: usize, roll: f64, pitch: f64 },
    #[error("leg {leg}: rod interval is empty (r_min {r_min:.6} > r_max {r_max:.6}); refine the grid")]
    EmptyInterval { leg: usize, r_min: f64, r_max: f64 },
    #[error("leg {leg}: rod {rod:.6} is not longer than crank {crank:.6}")]
    RodNotLongerThanCrank { leg: usize, crank: f64, rod: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    /// Uniform samples including both ends, spacing at most `step`.
    pub fn samples(&self, step: f64) -> Vec<f64> {
        let width = self.width();
        if width == 0.0 {
            return vec![self.lo];
        }
        // Guard against a step that divides the width up to round-off.
        let n = ((width / step) - 1e-9).ceil().max(1.0) as usize;
        let h = width / n as f64;
        (0..=n)
            .map(|k| if k == n { self.hi } else { self.lo + k as f64 * h })
            .collect()
    }
}

/// Rectangle of foot orientations with the grid step used to scan it.
/// Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperationalRegion {
    pub roll: Interval,
    pub pitch: Interval,
    pub step: f64,
}

impl OperationalRegion {
    pub fn new(roll: Interval, pitch: Interval, step: f64) -> Result<Self, ReparamError> {
        let region = Self { roll, pitch, step };
        region.validate()?;
        Ok(region)
    }

    pub fn from_degrees(roll: (f64, f64), pitch: (f64, f64), step: f64) -> Result<Self, ReparamError> {
        Self::new(
            Interval::new(roll.0.to_radians(), roll.1.to_radians()),
            Interval::new(pitch.0.to_radians(), pitch.1.to_radians()),
            step.to_radians(),
        )
    }

    /// `[-half, half]^2` in degrees.
    pub fn square_degrees(half: f64, step: f64) -> Result<Self, ReparamError> {
        Self::from_degrees((-half, half), (-half, half), step)
    }

    /// A single-pose region.
    pub fn point(pose: FootOrientation) -> Self {
        Self {
            roll: Interval::new(pose.roll, pose.roll),
            pitch: Interval::new(pose.pitch, pose.pitch),
            step: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ReparamError> {
        let finite = [self.roll.lo, self.roll.hi, self.pitch.lo, self.pitch.hi, self.step]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ReparamError::InvalidRegion("non-finite bound".into()));
        }
        if self.roll.lo > self.roll.hi || self.pitch.lo > self.pitch.hi {
            return Err(ReparamError::InvalidRegion("empty interval".into()));
        }
        if !(self.step > 0.0) {
            return Err(ReparamError::InvalidRegion("grid step must be positive".into()));
        }
        for width in [self.roll.width(), self.pitch.width()] {
            if width > 0.0 && self.step > width * (1.0 + 1e-12) {
                return Err(ReparamError::InvalidRegion("grid step exceeds interval width".into()));
            }
        }
        Ok(())
    }

    pub fn with_step(&self, step: f64) -> Self {
        Self { step, ..*self }
    }

    pub fn roll_samples(&self) -> Vec<f64> {
        self.roll.samples(self.step)
    }

    pub fn pitch_samples(&self) -> Vec<f64> {
        self.pitch.samples(self.step)
    }

    /// Grid poses, roll-major (pitch varies fastest).
    pub fn grid(&self) -> Vec<FootOrientation> {
        let pitch = self.pitch_samples();
        self.roll_samples()
            .into_iter()
            .flat_map(|r| pitch.iter().map(move |&p| FootOrientation::new(r, p)))
            .collect()
    }

    pub fn contains(&self, pose: FootOrientation) -> bool {
        self.roll.contains(pose.roll) && self.pitch.contains(pose.pitch)
    }

    pub fn contains_region(&self, other: &OperationalRegion) -> bool {
        self.roll.lo <= other.roll.lo
            && self.roll.hi >= other.roll.hi
            && self.pitch.lo <= other.pitch.lo
            && self.pitch.hi >= other.pitch.hi
    }
}

/// Leg geometry fixed by the design before crank and rod are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsuGeometry {
    pub a: [Vec3; 2],
    pub b: [Vec3; 2],
    pub psi: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsuFreeParams {
    pub geometry: RsuGeometry,
    pub gamma: [f64; 2],
    pub delta: [f64; 2],
}

impl RsuFreeParams {
    pub fn validate(&self) -> Result<(), ReparamError> {
        for leg in 0..2 {
            let (g, d) = (self.gamma[leg], self.delta[leg]);
            if !(0.0..1.0).contains(&g) {
                return Err(ReparamError::InvalidParams(format!("leg {}: gamma {g} outside [0, 1)", leg + 1)));
            }
            if !(0.0..=1.0).contains(&d) {
                return Err(ReparamError::InvalidParams(format!("leg {}: delta {d} outside [0, 1]", leg + 1)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrankBound {
    pub c_min: f64,
    pub d_star_min: f64,
    pub d_star_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodBounds {
    pub r_min: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReparamOptions {
    /// Inflates `c_min` by `(1 + crank_safety)` to absorb grid discretization.
    pub crank_safety: f64,
}

/// `(|d|, rho)` at every grid pose for one leg.
fn leg_samples(geom: &RsuGeometry, leg: usize, region: &OperationalRegion) -> Result<Vec<(f64, f64)>, ReparamError> {
    let grid = region.grid();
    let samples: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&pose| {
            let d = leg_vector(&geom.a[leg], &geom.b[leg], pose);
            let dist = d.norm();
            let rho = if dist > 0.0 { polar_terms(&(d / dist), geom.psi[leg]).0 } else { 0.0 };
            (dist, rho)
        })
        .collect();
    if let Some(k) = samples
        .iter()
        .position(|&(dist, rho)| !(dist >= DISTANCE_TOLERANCE && rho >= RHO_TOLERANCE))
    {
        return Err(ReparamError::DegenerateGeometry {
            leg: leg + 1,
            roll: grid[k].roll,
            pitch: grid[k].pitch,
        });
    }
    Ok(samples)
}

/// First-index maximum, so ties resolve deterministically.
fn fold_max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, |m, v| if v > m { v } else { m })
}

fn fold_min(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::INFINITY, |m, v| if v < m { v } else { m })
}

fn crank_bound(samples: &[(f64, f64)]) -> CrankBound {
    let d_star_min = fold_min(samples.iter().map(|s| s.0));
    let d_star_max = fold_max(samples.iter().map(|s| s.0));
    let product = d_star_max * d_star_min;
    let c_min = fold_max(
        samples
            .iter()
            .map(|&(dist, rho)| (product - dist * dist).abs() / (2.0 * dist * rho)),
    );
    CrankBound { c_min, d_star_min, d_star_max }
}

fn rod_bounds_from(samples: &[(f64, f64)], crank: f64, leg: usize) -> Result<RodBounds, ReparamError> {
    let c2 = crank * crank;
    let lower = fold_max(samples.iter().map(|&(d, rho)| c2 + d * d - 2.0 * crank * d * rho));
    let upper = fold_min(samples.iter().map(|&(d, rho)| c2 + d * d + 2.0 * crank * d * rho));
    let (r_min, r_max) = (lower.max(0.0).sqrt(), upper.max(0.0).sqrt());
    if lower > upper {
        if lower - upper > INTERVAL_SLACK * upper.abs().max(c2) {
            return Err(ReparamError::EmptyInterval { leg: leg + 1, r_min, r_max });
        }
        return Ok(RodBounds { r_min, r_max: r_min });
    }
    Ok(RodBounds { r_min, r_max })
}

/// Minimum admissible crank length of each leg over the region grid.
pub fn crank_min(geom: &RsuGeometry, region: &OperationalRegion) -> Result<[CrankBound; 2], ReparamError> {
    region.validate()?;
    Ok([crank_bound(&leg_samples(geom, 0, region)?), crank_bound(&leg_samples(geom, 1, region)?)])
}

/// Admissible rod interval of each leg for the given crank lengths.
pub fn rod_bounds(geom: &RsuGeometry, crank: [f64; 2], region: &OperationalRegion) -> Result<[RodBounds; 2], ReparamError> {
    region.validate()?;
    Ok([
        rod_bounds_from(&leg_samples(geom, 0, region)?, crank[0], 0)?,
        rod_bounds_from(&leg_samples(geom, 1, region)?, crank[1], 1)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegRealization {
    pub crank_bound: CrankBound,
    pub rod_bounds: RodBounds,
    pub crank: f64,
    pub rod: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub params: RsuParams,
    pub legs: [LegRealization; 2],
}

/// Maps `(gamma, delta)` to crank and rod lengths without checking that the
/// rod is longer than the crank.
pub fn realize_lengths(
    free: &RsuFreeParams,
    region: &OperationalRegion,
    options: ReparamOptions,
) -> Result<Realization, ReparamError> {
    free.validate()?;
    region.validate()?;
    let geom = &free.geometry;
    let mut legs = Vec::with_capacity(2);
    for leg in 0..2 {
        let samples = leg_samples(geom, leg, region)?;
        let crank_bound = crank_bound(&samples);
        let crank = crank_bound.c_min * (1.0 + options.crank_safety) / (1.0 - free.gamma[leg]);
        let rod_bounds = rod_bounds_from(&samples, crank, leg)?;
        let delta = free.delta[leg];
        let rod = (1.0 - delta) * rod_bounds.r_min + delta * rod_bounds.r_max;
        legs.push(LegRealization { crank_bound, rod_bounds, crank, rod });
    }
    let legs = [legs[0], legs[1]];
    Ok(Realization {
        params: RsuParams {
            a: geom.a,
            b: geom.b,
            psi: geom.psi,
            crank: legs.map(|l| l.crank),
            rod: legs.map(|l| l.rod),
        },
        legs,
    })
}

pub fn realize_with(
    free: &RsuFreeParams,
    region: &OperationalRegion,
    options: ReparamOptions,
) -> Result<Realization, ReparamError> {
    let realization = realize_lengths(free, region, options)?;
    for (leg, l) in realization.legs.iter().enumerate() {
        if !(l.rod > l.crank) {
            return Err(ReparamError::RodNotLongerThanCrank { leg: leg + 1, crank: l.crank, rod: l.rod });
        }
    }
    Ok(realization)
}

/// Realizes an RSU mechanism that can close at every grid pose of `region`.
pub fn realize(free: &RsuFreeParams, region: &OperationalRegion) -> Result<RsuParams, ReparamError> {
    realize_with(free, region, ReparamOptions::default()).map(|r| r.params)
}

/// IK solvability of both legs over a window of orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityMap {
    pub roll: Vec<f64>,
    pub pitch: Vec<f64>,
    /// `1 - |k/rho|` per leg, roll-major; `-inf` where the leg is degenerate.
    pub margin: [Vec<f64>; 2],
    /// Interpolated zero-margin points (crank and rod aligned) per leg.
    pub alignment_loci: [Vec<FootOrientation>; 2],
}

impl SolvabilityMap {
    fn index(&self, i_roll: usize, i_pitch: usize) -> usize {
        i_roll * self.pitch.len() + i_pitch
    }

    pub fn pose(&self, index: usize) -> FootOrientation {
        let n = self.pitch.len();
        FootOrientation::new(self.roll[index / n], self.pitch[index % n])
    }

    pub fn len(&self) -> usize {
        self.roll.len() * self.pitch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solvable(&self, leg: usize, index: usize) -> bool {
        self.margin[leg][index] >= -EXISTENCE_TOLERANCE
    }

    /// Writes `roll_deg,pitch_deg,solvable_leg1,solvable_leg2,margin_leg1,margin_leg2`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["roll_deg", "pitch_deg", "solvable_leg1", "solvable_leg2", "margin_leg1", "margin_leg2"])?;
        for k in 0..self.len() {
            let pose = self.pose(k);
            let flag = |leg| if self.solvable(leg, k) { "1" } else { "0" };
            w.write_record([
                pose.roll.to_degrees().to_string(),
                pose.pitch.to_degrees().to_string(),
                flag(0).to_string(),
                flag(1).to_string(),
                self.margin[0][k].to_string(),
                self.margin[1][k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn zero_crossings(map: &SolvabilityMap, leg: usize) -> Vec<FootOrientation> {
    let m = &map.margin[leg];
    let (nr, np) = (map.roll.len(), map.pitch.len());
    let mut points = Vec::new();
    let mut edge = |i0: usize, j0: usize, i1: usize, j1: usize| {
        let (m0, m1) = (m[map.index(i0, j0)], m[map.index(i1, j1)]);
        if !(m0.is_finite() && m1.is_finite()) {
            return;
        }
        if m0 == 0.0 {
            points.push(FootOrientation::new(map.roll[i0], map.pitch[j0]));
        } else if m0 * m1 < 0.0 {
            let t = m0 / (m0 - m1);
            points.push(FootOrientation::new(
                map.roll[i0] + t * (map.roll[i1] - map.roll[i0]),
                map.pitch[j0] + t * (map.pitch[j1] - map.pitch[j0]),
            ));
        }
    };
    for i in 0..nr {
        for j in 0..np {
            if i + 1 < nr {
                edge(i, j, i + 1, j);
            }
            if j + 1 < np {
                edge(i, j, i, j + 1);
            }
        }
    }
    points
}

/// Scans IK solvability of a realized mechanism over `window`.
pub fn configuration_space_scan(params: &RsuParams, window: &OperationalRegion) -> SolvabilityMap {
    let grid = window.grid();
    let margin = [0, 1].map(|leg| {
        grid.par_iter()
            .map(|&pose| RsuExistence::new(params, leg, pose).margin())
            .collect::<Vec<_>>()
    });
    let mut map = SolvabilityMap {
        roll: window.roll_samples(),
        pitch: window.pitch_samples(),
        margin,
        alignment_loci: [Vec::new(), Vec::new()],
    };
    map.alignment_loci = [zero_crossings(&map, 0), zero_crossings(&map, 1)];
    map
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Containment {
    Contained { min_margin: f64 },
    Violated { pose: FootOrientation, leg: usize, margin: f64 },
}

impl Containment {
    pub fn is_contained(&self) -> bool {
        matches!(self, Containment::Contained { .. })
    }
}

/// Checks IK solvability at every grid pose of `region`, reporting the first
/// failing pose in grid order.
pub fn check_containment(params: &RsuParams, region: &OperationalRegion) -> Containment {
    let grid = region.grid();
    let margins: Vec<[f64; 2]> = grid
        .par_iter()
        .map(|&pose| [0, 1].map(|leg| RsuExistence::new(params, leg, pose).margin()))
        .collect();
    let mut min_margin = f64::INFINITY;
    for (pose, m) in grid.iter().zip(&margins) {
        for leg in 0..2 {
            if !(m[leg] >= -EXISTENCE_TOLERANCE) {
                return Containment::Violated { pose: *pose, leg: leg + 1, margin: m[leg] };
            }
            min_margin = min_margin.min(m[leg]);
        }
    }
    Containment::Contained { min_margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechkin::{ik_rsu, Branch};
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn reference_geometry() -> RsuGeometry {
        RsuGeometry {
            a: [Vec3::new(-86.0, 40.0, 235.0), Vec3::new(-86.0, -40.0, 235.0)],
            b: [Vec3::new(-34.0, 36.0, 36.0), Vec3::new(-34.0, -36.0, 36.0)],
            psi: [-FRAC_PI_2, FRAC_PI_2],
        }
    }

    fn reference_free(gamma: f64, delta: f64) -> RsuFreeParams {
        RsuFreeParams { geometry: reference_geometry(), gamma: [gamma; 2], delta: [delta; 2] }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn interval_samples_hit_both_ends() {
        let s = Interval::new(-1.0, 1.0).samples(0.5);
        assert_eq!(s, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let s = Interval::new(0.0, 1.0).samples(0.3);
        assert_eq!(s.len(), 5);
        assert_eq!(*s.last().unwrap(), 1.0);
        assert!(s.windows(2).all(|w| w[1] - w[0] <= 0.3));
        assert_eq!(Interval::new(2.0, 2.0).samples(0.1), vec![2.0]);
    }

    #[test]
    fn region_validation() {
        assert!(OperationalRegion::from_degrees((10.0, -10.0), (0.0, 1.0), 1.0).is_err());
        assert!(OperationalRegion::from_degrees((-10.0, 10.0), (0.0, 1.0), 0.0).is_err());
        assert!(OperationalRegion::from_degrees((-1.0, 1.0), (-1.0, 1.0), 5.0).is_err());
        assert!(OperationalRegion::square_degrees(15.0, 2.0).is_ok());
    }

    #[test]
    fn symmetric_legs_share_bounds() {
        let region = OperationalRegion::square_degrees(15.0, 2.0).unwrap();
        let g = reference_geometry();
        let c = crank_min(&g, &region).unwrap();
        assert!(close(c[0].c_min, c[1].c_min, 1e-12));
        assert!(close(c[0].d_star_min, c[1].d_star_min, 1e-12));
        let r = rod_bounds(&g, [c[0].c_min; 2], &region).unwrap();
        assert!(close(r[0].r_min, r[1].r_min, 1e-12));
        assert!(close(r[0].r_max, r[1].r_max, 1e-12));
    }

    #[test]
    fn singleton_region_has_zero_crank_bound() {
        let region = OperationalRegion::point(FootOrientation::NEUTRAL);
        let g = reference_geometry();
        let c = crank_min(&g, &region).unwrap();
        let d0 = (g.a[0] - g.b[0]).norm();
        assert_eq!(c[0].d_star_min, c[0].d_star_max);
        assert!(close(c[0].d_star_min, d0, 1e-15));
        assert!(c[0].c_min.abs() < 1e-9);

        let crank = 30.0;
        let r = rod_bounds(&g, [crank; 2], &region).unwrap();
        let rho = polar_terms(&((g.a[0] - g.b[0]) / d0), g.psi[0]).0;
        let lo = crank * crank + d0 * d0 - 2.0 * crank * d0 * rho;
        let hi = crank * crank + d0 * d0 + 2.0 * crank * d0 * rho;
        assert!(lo > 0.0 && hi > 0.0);
        assert!(close(r[0].r_min * r[0].r_min, lo, 1e-12));
        assert!(close(r[0].r_max * r[0].r_max, hi, 1e-12));
    }

    #[test]
    fn endpoints_of_the_parameterization() {
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let r0 = realize_lengths(&reference_free(0.0, 0.0), &region, ReparamOptions::default()).unwrap();
        assert_eq!(r0.legs[0].crank, r0.legs[0].crank_bound.c_min);
        assert_eq!(r0.legs[0].rod, r0.legs[0].rod_bounds.r_min);
        let r1 = realize_lengths(&reference_free(0.0, 1.0), &region, ReparamOptions::default()).unwrap();
        assert_eq!(r1.legs[0].rod, r1.legs[0].rod_bounds.r_max);
    }

    #[test]
    fn crank_and_rod_increase_monotonically() {
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let opts = ReparamOptions::default();
        let mut last_crank = 0.0;
        for k in 0..10 {
            let g = k as f64 * 0.09;
            let r = realize_lengths(&reference_free(g, 0.5), &region, opts).unwrap();
            assert!(r.legs[0].crank > last_crank);
            last_crank = r.legs[0].crank;
        }
        let mut last_rod = 0.0;
        for k in 0..=10 {
            let r = realize_lengths(&reference_free(0.3, k as f64 * 0.1), &region, opts).unwrap();
            assert!(r.legs[0].rod_bounds.r_min < r.legs[0].rod_bounds.r_max);
            assert!(r.legs[0].rod > last_rod);
            last_rod = r.legs[0].rod;
        }
    }

    #[test]
    fn safety_factor_inflates_crank() {
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let base = realize_lengths(&reference_free(0.2, 0.5), &region, ReparamOptions::default()).unwrap();
        let safe = realize_lengths(&reference_free(0.2, 0.5), &region, ReparamOptions { crank_safety: 0.05 }).unwrap();
        assert!(close(safe.legs[0].crank, base.legs[0].crank * 1.05, 1e-12));
    }

    #[test]
    fn reference_realization_is_contained_for_all_regions() {
        for half in [15.0, 30.0, 60.0, 90.0, 120.0, 150.0] {
            let region = OperationalRegion::square_degrees(half, 2.0).unwrap();
            let params = realize(&reference_free(0.001, 0.001), &region).unwrap();
            let verdict = check_containment(&params, &region);
            assert!(verdict.is_contained(), "half-width {half}: {verdict:?}");
            for pose in region.grid() {
                assert!(ik_rsu(&params, pose, [Branch::Primary; 2]).is_ok());
            }
        }
    }

    #[test]
    fn near_zero_parameters_touch_the_alignment_locus() {
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let params = realize(&reference_free(0.001, 0.001), &region).unwrap();
        match check_containment(&params, &region) {
            Containment::Contained { min_margin } => assert!(min_margin >= 0.0 && min_margin < 2e-3, "{min_margin}"),
            other => panic!("{other:?}"),
        }
        let wide = realize(&reference_free(0.5, 0.5), &region).unwrap();
        match check_containment(&wide, &region) {
            Containment::Contained { min_margin } => assert!(min_margin > 0.01),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shrunk_crank_violates() {
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let mut params = realize(&reference_free(0.0, 0.0), &region).unwrap();
        params.crank = params.crank.map(|c| 0.8 * c);
        assert!(matches!(check_containment(&params, &region), Containment::Violated { .. }));
    }

    #[test]
    fn degenerate_geometry_is_reported() {
        // Leg axis along the revolute axis direction: rho vanishes at neutral.
        let geom = RsuGeometry {
            a: [Vec3::new(0.0, 100.0, 0.0), Vec3::new(0.0, -100.0, 0.0)],
            b: [Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0)],
            psi: [0.0, 0.0],
        };
        // d = (0, 100, 0): with psi = 0 the polar components are (d_y, d_z) = (1, 0), rho = 1.
        assert!(crank_min(&geom, &OperationalRegion::point(FootOrientation::NEUTRAL)).is_ok());
        let geom = RsuGeometry { psi: [FRAC_PI_2, FRAC_PI_2], ..geom };
        assert!(matches!(
            crank_min(&geom, &OperationalRegion::point(FootOrientation::NEUTRAL)),
            Err(ReparamError::DegenerateGeometry { leg: 1, .. })
        ));
    }

    #[test]
    fn scan_refinement_only_differs_near_the_locus() {
        let region = OperationalRegion::square_degrees(30.0, 2.0).unwrap();
        let params = realize(&reference_free(0.01, 0.01), &region).unwrap();
        let window = OperationalRegion::square_degrees(180.0, 4.0).unwrap();
        let coarse = configuration_space_scan(&params, &window);
        let fine = configuration_space_scan(&params, &window.with_step(1f64.to_radians()));
        assert_eq!(fine.roll.len(), 4 * (coarse.roll.len() - 1) + 1);
        let np = coarse.pitch.len();
        for leg in 0..2 {
            for fi in 0..fine.roll.len() {
                for fj in 0..fine.pitch.len() {
                    let (ci, cj) = ((fi / 4).min(coarse.roll.len() - 2), (fj / 4).min(np - 2));
                    let corners = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)]
                        .map(|(i, j)| coarse.solvable(leg, coarse.index(i, j)));
                    let fine_ok = fine.solvable(leg, fine.index(fi, fj));
                    if corners.iter().all(|&c| c == corners[0]) {
                        assert_eq!(fine_ok, corners[0], "leg {leg} at fine ({fi},{fj})");
                    }
                }
            }
            assert!(!coarse.alignment_loci[leg].is_empty());
        }
    }

    #[test]
    fn csv_has_contract_columns() {
        let params = realize(&reference_free(0.2, 0.2), &OperationalRegion::square_degrees(15.0, 5.0).unwrap()).unwrap();
        let map = configuration_space_scan(&params, &OperationalRegion::square_degrees(20.0, 10.0).unwrap());
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "roll_deg,pitch_deg,solvable_leg1,solvable_leg2,margin_leg1,margin_leg2");
        assert_eq!(lines.count(), 25);
    }
}
