use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stats::{region_densities, region_fractions, RegionDensities, RegionFractions};
use super::voxel::VoxelGrid;
use crate::geometry::RegionPartition;
use crate::{Error, Result};

/// In-silico Raymond-Roy occlusion class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OcclusionClass {
    I,
    II,
    IIIa,
    IIIb,
    Fail,
}

impl OcclusionClass {
    pub const ALL: [OcclusionClass; 5] = [Self::I, Self::II, Self::IIIa, Self::IIIb, Self::Fail];

    /// Position in the order `Fail < IIIb < IIIa <= II < I`; IIIa and II share a rank.
    pub fn rank(self) -> u8 {
        match self {
            Self::Fail => 0,
            Self::IIIb => 1,
            Self::IIIa | Self::II => 2,
            Self::I => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::II => "II",
            Self::IIIa => "IIIa",
            Self::IIIb => "IIIb",
            Self::Fail => "Fail",
        }
    }
}

impl fmt::Display for OcclusionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OcclusionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown occlusion class {s:?}")))
    }
}

/// A region counts as full when its own packing density reaches the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub core: f64,
    pub boundary: f64,
    pub sphere: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            core: 0.20,
            boundary: 0.18,
            sphere: 0.18,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("core", self.core), ("boundary", self.boundary), ("sphere", self.sphere)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} threshold must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub fn classify(core_pd: f64, boundary_pd: f64, sphere_pd: f64) -> OcclusionClass {
    classify_with(core_pd, boundary_pd, sphere_pd, &Thresholds::default())
}

pub fn classify_with(core_pd: f64, boundary_pd: f64, sphere_pd: f64, th: &Thresholds) -> OcclusionClass {
    let core = core_pd >= th.core;
    let boundary = boundary_pd >= th.boundary;
    let sphere = sphere_pd >= th.sphere;
    match (boundary, core) {
        (true, true) if sphere => OcclusionClass::I,
        (true, true) => OcclusionClass::II,
        (true, false) => OcclusionClass::IIIa,
        (false, true) => OcclusionClass::IIIb,
        (false, false) => OcclusionClass::Fail,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcclusionReport {
    pub fractions: RegionFractions,
    /// Ensemble standard deviations of the fractions; absent for a single run.
    pub std: Option<RegionFractions>,
    pub densities: RegionDensities,
    pub thresholds: Thresholds,
    pub class: OcclusionClass,
}

/// Classifies one deployment from its voxel grid.
pub fn occlusion_report(grid: &VoxelGrid, partition: &RegionPartition, th: &Thresholds) -> Result<OcclusionReport> {
    th.validate()?;
    let fractions = region_fractions(grid, partition)?;
    let densities = region_densities(grid, partition)?;
    Ok(OcclusionReport {
        fractions,
        std: None,
        densities,
        thresholds: *th,
        class: classify_with(densities.core, densities.boundary, densities.sphere, th),
    })
}
