//! Run configuration and the deploy → voxelize → classify pipeline.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{occlusion_report, voxelize_clipped, OcclusionReport, Thresholds, VoxelGrid};
use crate::contact::{Catheter, ContactParams};
use crate::dynamics::{insert_coil, length_for_packing, Cavity, Deployment, SimConfig};
use crate::geometry::{build_sdf, mesh_volume, neck_sphere, Lattice, NeckSpec, RegionPartition};
use crate::mesh::{SphereAneurysm, TriangleMesh};
use crate::shapes::{CoilSpec, ShapeSpec};
use crate::{Error, Result, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CavitySpec {
    /// Generated spherical sack with a cylindrical vessel stump along +z.
    Sphere {
        radius: f64,
        neck_radius: f64,
        vessel_length: f64,
        /// Longest mesh edge; defaults to `2 * d2`.
        #[serde(default)]
        max_edge: Option<f64>,
    },
    /// Sack closed at the neck, optionally with the full sack+vessel mesh
    /// used after insertion. Relative paths resolve against the config file.
    Mesh {
        necked: PathBuf,
        #[serde(default)]
        full: Option<PathBuf>,
        /// Factor converting file units to meters.
        #[serde(default = "unit_scale")]
        scale: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatheterSpec {
    /// Bezier control points; the tip is the last.
    pub control: [Vec3; 3],
    /// Lumen radius; defaults to `0.75 * d2`.
    #[serde(default)]
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Cells per axis of the analysis lattice.
    pub voxels: usize,
    /// Empty cells kept around the sack's bounding box on each side.
    pub margin_cells: usize,
    pub thresholds: Thresholds,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            voxels: 70,
            margin_cells: 2,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Coil geometry and material; `length` is replaced by the length that
    /// reaches `sim.target_packing`.
    #[serde(default)]
    pub coil: CoilSpec,
    pub shape: ShapeSpec,
    pub cavity: CavitySpec,
    /// Neck plane; derived for generated cavities, required for meshes.
    #[serde(default)]
    pub neck: Option<NeckSpec>,
    pub catheter: CatheterSpec,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

impl ScenarioConfig {
    /// Parses JSON; errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Everything a deployment needs that does not depend on the catheter tip.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: ScenarioConfig,
    pub coil: CoilSpec,
    pub natural: Vec<Vec3>,
    pub necked: TriangleMesh,
    pub full: Option<TriangleMesh>,
    pub volume: f64,
    pub catheter: Catheter,
    pub partition: RegionPartition,
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn load_mesh(key: &str, path: &Path, scale: f64) -> Result<TriangleMesh> {
    if !path.exists() {
        return Err(Error::InvalidParameter(format!(
            "{key}: mesh file {} does not exist",
            path.display()
        )));
    }
    TriangleMesh::load(path, scale)
        .map_err(|e| Error::InvalidParameter(format!("{key}: {}: {e}", path.display())))
}

/// Lattice of `n` cells per axis over `mesh`'s bounding box with `margin`
/// empty cells on every side.
pub fn analysis_lattice(mesh: &TriangleMesh, n: usize, margin: usize) -> Result<Lattice> {
    if n <= 2 * margin {
        return Err(Error::InvalidParameter(format!(
            "{n} voxels cannot hold a margin of {margin} cells"
        )));
    }
    let (lo, hi) = mesh.bounding_box();
    let e = hi - lo;
    let ext = e.x.max(e.y).max(e.z);
    let side = ext * n as f64 / (n - 2 * margin) as f64;
    Lattice::cube_around(&lo, &hi, n, (side - ext) / 2.0)
}

impl Prepared {
    /// Builds meshes, natural shape, catheter and region partition.
    /// `base` is the directory relative mesh paths resolve against.
    pub fn new(config: &ScenarioConfig, base: Option<&Path>) -> Result<Self> {
        config.coil.validate()?;
        config.sim.validate()?;
        config.analysis.thresholds.validate()?;
        let d2 = config.coil.d2;
        let (necked, full, neck) = match &config.cavity {
            CavitySpec::Sphere {
                radius,
                neck_radius,
                vessel_length,
                max_edge,
            } => {
                let an = SphereAneurysm::new(*radius, *neck_radius, *vessel_length)?;
                let edge = max_edge.unwrap_or(2.0 * d2);
                let (point, normal) = an.neck_plane();
                let neck = config.neck.clone().unwrap_or(NeckSpec {
                    point,
                    normal,
                    center: None,
                    radius: None,
                });
                (an.necked_mesh(edge)?, Some(an.full_mesh(edge)?), neck)
            }
            CavitySpec::Mesh { necked, full, scale } => {
                let neck = config.neck.clone().ok_or_else(|| {
                    Error::NeckNotDefined("neck: a mesh cavity needs a neck plane".into())
                })?;
                let necked = load_mesh("cavity.necked", &resolve(base, necked), *scale)?;
                let full = full
                    .as_ref()
                    .map(|p| load_mesh("cavity.full", &resolve(base, p), *scale))
                    .transpose()?;
                (necked, full, neck)
            }
        };
        let volume = mesh_volume(&necked)?;
        let coil = CoilSpec {
            length: length_for_packing(config.sim.target_packing, d2, volume),
            ..config.coil.clone()
        };
        let natural = config.shape.generate(&coil)?;
        let catheter = Catheter::new(
            config.catheter.control,
            config.catheter.radius.unwrap_or(0.75 * d2),
        )?;
        let lattice = analysis_lattice(&necked, config.analysis.voxels, config.analysis.margin_cells)?;
        let sdf = build_sdf(&necked, &lattice)?;
        let sphere = neck_sphere(full.as_ref().unwrap_or(&necked), &neck)?;
        let partition = RegionPartition::new(&sdf, sphere)?;
        Ok(Self {
            config: config.clone(),
            coil,
            natural,
            necked,
            full,
            volume,
            catheter,
            partition,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.partition.lattice
    }

    /// Deploys with the catheter tip moved by `tip_offset`.
    pub fn deploy(&self, tip_offset: &Vec3) -> Result<Deployment> {
        let catheter = self.catheter.with_tip_offset(tip_offset)?;
        let cavity = Cavity {
            necked: &self.necked,
            full: self.full.as_ref(),
            volume: self.volume,
        };
        insert_coil(
            &self.coil,
            &self.natural,
            cavity,
            &catheter,
            &self.config.contact,
            &self.config.sim,
        )
    }

    /// Voxelizes a final centerline and classifies it.
    pub fn analyze(&self, centerline: &[Vec3], thresholds: &Thresholds) -> Result<Analysis> {
        let lattice = self.lattice();
        let outside = centerline.iter().filter(|p| !lattice.covers(p)).count();
        let grid = voxelize_clipped(centerline, self.coil.d2, lattice)?;
        let report = occlusion_report(&grid, &self.partition, thresholds)?;
        Ok(Analysis {
            grid,
            report,
            nodes_outside_lattice: outside,
        })
    }

    /// Deploy and analyze in one go.
    pub fn run(&self, tip_offset: &Vec3) -> Result<(Deployment, Analysis)> {
        let dep = self.deploy(tip_offset)?;
        let positions = dep
            .final_state
            .as_ref()
            .map(|s| s.positions.clone())
            .unwrap_or_default();
        let analysis = self.analyze(&positions, &self.config.analysis.thresholds)?;
        Ok((dep, analysis))
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub grid: VoxelGrid,
    pub report: OcclusionReport,
    /// Nodes that ended outside the analysis lattice (clipped from the grid).
    pub nodes_outside_lattice: usize,
}
