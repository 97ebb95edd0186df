use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::sdf::{equal_volume_level, SignedDistanceGrid};
use crate::mesh::TriangleMesh;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn contains(&self, p: &Vec3) -> bool {
        (p - self.center).norm() <= self.radius
    }
}

/// Neck cut plane, with optional overrides of the derived sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckSpec {
    pub point: Vec3,
    pub normal: Vec3,
    #[serde(default)]
    pub center: Option<Vec3>,
    #[serde(default)]
    pub radius: Option<f64>,
}

/// Segments where `plane` cuts the mesh; triangles lying in the plane are skipped.
pub fn plane_section(mesh: &TriangleMesh, point: &Vec3, normal: &Vec3) -> Vec<[Vec3; 2]> {
    let n = normal.normalize();
    let scale = {
        let (lo, hi) = mesh.bounding_box();
        (hi - lo).norm()
    };
    let tol = 1e-12 * scale;
    let mut segs = Vec::new();
    for t in 0..mesh.triangle_count() {
        let v = mesh.triangle(t);
        let d = v.map(|p| (p - point).dot(&n));
        if d.iter().all(|x| x.abs() <= tol) {
            continue;
        }
        let mut pts: Vec<Vec3> = Vec::with_capacity(2);
        for a in 0..3 {
            let b = (a + 1) % 3;
            if d[a].abs() <= tol {
                pts.push(v[a]);
            } else if d[b].abs() > tol && (d[a] < 0.0) != (d[b] < 0.0) {
                let s = d[a] / (d[a] - d[b]);
                pts.push(v[a] + (v[b] - v[a]) * s);
            }
        }
        if pts.len() == 2 && (pts[0] - pts[1]).norm() > tol {
            segs.push([pts[0], pts[1]]);
        }
    }
    segs
}

/// Sphere at the neck: centered at the length-weighted centroid of the
/// contour where the neck plane cuts `mesh`, with radius half the largest
/// chord of that contour. Explicit center or radius in `spec` win.
pub fn neck_sphere(mesh: &TriangleMesh, spec: &NeckSpec) -> Result<Sphere> {
    if let (Some(center), Some(radius)) = (spec.center, spec.radius) {
        return checked(Sphere { center, radius });
    }
    if !(spec.normal.norm() > 0.0) {
        return Err(Error::NeckNotDefined("neck plane normal is zero".into()));
    }
    let segs = plane_section(mesh, &spec.point, &spec.normal);
    if segs.is_empty() {
        return Err(Error::NeckNotDefined(
            "the neck plane does not cut the mesh".into(),
        ));
    }
    let mut total = 0.0;
    let mut centroid = Vec3::zeros();
    for [a, b] in &segs {
        let w = (b - a).norm();
        total += w;
        centroid += (a + b) * (0.5 * w);
    }
    centroid /= total;
    let pts: Vec<Vec3> = segs.iter().flatten().copied().collect();
    let mut width: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            width = width.max((p - q).norm());
        }
    }
    checked(Sphere {
        center: spec.center.unwrap_or(centroid),
        radius: spec.radius.unwrap_or(width / 2.0),
    })
}

fn checked(s: Sphere) -> Result<Sphere> {
    if !(s.radius > 0.0 && s.radius.is_finite()) {
        return Err(Error::NeckNotDefined(format!(
            "neck sphere radius must be positive, got {}",
            s.radius
        )));
    }
    Ok(s)
}

/// Cavity cells split into an equal-volume core and boundary shell, and
/// the cavity cells inside the neck sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPartition {
    pub lattice: Lattice,
    pub cavity: Vec<bool>,
    pub core: Vec<bool>,
    pub boundary: Vec<bool>,
    pub sphere: Vec<bool>,
    pub neck: Sphere,
    pub level: f64,
}

/// Volumes of the partition regions [m^3].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionVolumes {
    pub aneurysm: f64,
    pub core: f64,
    pub boundary: f64,
    pub sphere: f64,
}

impl RegionPartition {
    /// The cavity is every cell with a negative signed distance.
    pub fn new(sdf: &SignedDistanceGrid, neck: Sphere) -> Result<Self> {
        let cavity = sdf.inside_mask();
        if !cavity.iter().any(|&c| c) {
            return Err(Error::InvalidParameter("cavity mask is empty".into()));
        }
        let split = equal_volume_level(sdf, &cavity)?;
        let boundary: Vec<bool> = cavity.iter().zip(&split.core).map(|(&a, &c)| a && !c).collect();
        let sphere: Vec<bool> = (0..cavity.len())
            .map(|i| cavity[i] && neck.contains(&sdf.lattice.center_of(i)))
            .collect();
        Ok(Self {
            lattice: sdf.lattice,
            cavity,
            core: split.core,
            boundary,
            sphere,
            neck,
            level: split.level,
        })
    }

    pub fn volumes(&self) -> RegionVolumes {
        let v = self.lattice.cell_volume();
        let count = |m: &[bool]| m.iter().filter(|&&x| x).count() as f64 * v;
        RegionVolumes {
            aneurysm: count(&self.cavity),
            core: count(&self.core),
            boundary: count(&self.boundary),
            sphere: count(&self.sphere),
        }
    }
}
