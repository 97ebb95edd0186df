use super::lattice::Lattice;
use crate::contact::Octree;
use crate::mesh::{closest_point_on_triangle, TriangleMesh};
use crate::{Error, Result, Vec3};

/// Enclosed volume of a closed mesh by the divergence theorem. Positive for
/// outward orientation; a negative value flags an inside-out mesh.
pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64> {
    mesh.check_watertight()?;
    Ok(mesh.signed_volume())
}

/// Unsigned point–mesh distance queries backed by an octree over the
/// triangle centroids.
#[derive(Clone, Debug)]
pub struct MeshDistance<'a> {
    mesh: &'a TriangleMesh,
    tree: Octree,
}

impl<'a> MeshDistance<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        Self {
            mesh,
            tree: Octree::build(mesh.centroids.clone(), mesh.bounding_radii.clone()),
        }
    }

    fn triangle_distance(&self, p: &Vec3, t: usize) -> f64 {
        let [a, b, c] = self.mesh.triangle(t);
        (closest_point_on_triangle(p, &a, &b, &c) - p).norm()
    }

    /// Exact distance from `p` to the surface given an upper bound on it.
    pub fn distance_bounded(&self, p: &Vec3, upper: f64) -> f64 {
        let mut best = f64::INFINITY;
        self.tree.query(p, upper, |t| {
            best = best.min(self.triangle_distance(p, t));
        });
        best
    }

    /// Exact distance from `p` to the surface.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let mut r = self
            .mesh
            .bounding_radii
            .iter()
            .fold(0.0, |m: f64, &x| m.max(x))
            .max(f64::MIN_POSITIVE);
        loop {
            let d = self.distance_bounded(p, r);
            if d <= r {
                return d;
            }
            r *= 2.0;
        }
    }

    /// Distance signed by the winding number: negative inside.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        let d = self.distance(p);
        if self.mesh.contains(p) {
            -d
        } else {
            d
        }
    }
}

/// Signed distance to a closed surface sampled at the cell centers of a
/// lattice; negative inside.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedDistanceGrid {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl SignedDistanceGrid {
    pub fn from_fn(lattice: Lattice, f: impl Fn(&Vec3) -> f64) -> Self {
        let values = (0..lattice.len()).map(|i| f(&lattice.center_of(i))).collect();
        Self { lattice, values }
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.lattice.index(i, j, k)]
    }

    /// Cells with centers inside the surface.
    pub fn inside_mask(&self) -> Vec<bool> {
        self.values.iter().map(|&v| v < 0.0).collect()
    }
}

/// Signed distance field of a watertight mesh on `lattice`.
///
/// Distances are exact point–triangle distances; each cell reuses its
/// neighbour's distance plus one spacing as the search bound. Signs come
/// from crossing parity along the `z` column through the cell center;
/// columns that graze an edge or vertex fall back to the winding number.
pub fn build_sdf(mesh: &TriangleMesh, lattice: &Lattice) -> Result<SignedDistanceGrid> {
    mesh.check_watertight()?;
    let dist = MeshDistance::new(mesh);
    let [nx, ny, nz] = lattice.dims;
    let h = lattice.spacing;
    let columns = column_crossings(mesh, lattice);
    let mut values = vec![0.0; lattice.len()];
    let mut prev: Option<(Vec3, f64)> = None;
    for j in 0..ny {
        for i in 0..nx {
            let col = &columns[i + nx * j];
            for k in 0..nz {
                let p = lattice.center(i, j, k);
                let d = match prev {
                    Some((q, dq)) => {
                        let bound = dq + (p - q).norm() * (1.0 + 1e-12) + 1e-12 * h;
                        let d = dist.distance_bounded(&p, bound);
                        if d <= bound {
                            d
                        } else {
                            dist.distance(&p)
                        }
                    }
                    None => dist.distance(&p),
                };
                prev = Some((p, d));
                let inside = match col {
                    Some(zs) => zs.iter().filter(|&&z| z < p.z).count() % 2 == 1,
                    None => mesh.contains(&p),
                };
                values[lattice.index(i, j, k)] = if inside { -d } else { d };
            }
        }
    }
    Ok(SignedDistanceGrid {
        lattice: *lattice,
        values,
    })
}

// Sorted z of the surface crossings of each cell column, or None where the
// column passes too close to an edge for parity to be trusted.
fn column_crossings(mesh: &TriangleMesh, lattice: &Lattice) -> Vec<Option<Vec<f64>>> {
    let [nx, ny, _] = lattice.dims;
    let mut cols: Vec<Option<Vec<f64>>> = vec![Some(Vec::new()); nx * ny];
    let lo_z = lattice.origin.z - 1.0;
    let hi_z = lattice.max_corner().z + 1.0;
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        let lo = Vec3::new(a.x.min(b.x).min(c.x), a.y.min(b.y).min(c.y), lo_z);
        let hi = Vec3::new(a.x.max(b.x).max(c.x), a.y.max(b.y).max(c.y), hi_z);
        let Some([(i0, i1), (j0, j1), _]) = lattice.cell_range(&lo, &hi) else {
            continue;
        };
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let scale = ((b - a).xy().norm_squared()).max((c - a).xy().norm_squared());
        for j in j0..=j1 {
            for i in i0..=i1 {
                let col = &mut cols[i + nx * j];
                if col.is_none() {
                    continue;
                }
                let p = lattice.center(i, j, 0);
                if det.abs() <= 1e-12 * scale {
                    // Edge-on triangle: a column through it is ambiguous.
                    if on_segment_2d(&p, &a, &b) || on_segment_2d(&p, &b, &c) || on_segment_2d(&p, &c, &a) {
                        *col = None;
                    }
                    continue;
                }
                let u = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / det;
                let v = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / det;
                let w = 1.0 - u - v;
                let eps = 1e-9;
                if u < -eps || v < -eps || w < -eps {
                    continue;
                }
                if u < eps || v < eps || w < eps {
                    *col = None;
                    continue;
                }
                col.as_mut().expect("checked").push(u * a.z + v * b.z + w * c.z);
            }
        }
    }
    for col in cols.iter_mut() {
        if let Some(zs) = col {
            if zs.len() % 2 == 1 {
                *col = None;
            } else {
                zs.sort_by(f64::total_cmp);
            }
        }
    }
    cols
}

fn on_segment_2d(p: &Vec3, a: &Vec3, b: &Vec3) -> bool {
    let ab = (b - a).xy();
    let ap = (p - a).xy();
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return ap.norm_squared() == 0.0;
    }
    let t = ap.dot(&ab) / len2;
    let cross = ab.x * ap.y - ab.y * ap.x;
    (-1e-9..=1.0 + 1e-9).contains(&t) && cross.abs() <= 1e-9 * len2
}

/// Split of the cells in `mask` by rank of their value: the `target`
/// deepest cells form the core. Ties are broken by cell index.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSplit {
    /// Value of the last core cell (`-inf` for an empty core).
    pub level: f64,
    pub core: Vec<bool>,
    pub core_cells: usize,
    pub masked_cells: usize,
}

/// Level `c*` such that the cells of `mask` at or below it (deepest first)
/// make up `fraction` of the masked cell count, rounded to the nearest cell.
pub fn level_for_fraction(sdf: &SignedDistanceGrid, mask: &[bool], fraction: f64) -> Result<LevelSplit> {
    if mask.len() != sdf.values.len() {
        return Err(Error::SizeMismatch {
            what: "cavity mask",
            expected: sdf.values.len(),
            found: mask.len(),
        });
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "volume fraction must be in [0, 1], got {fraction}"
        )));
    }
    let mut cells: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    cells.sort_by(|&a, &b| sdf.values[a].total_cmp(&sdf.values[b]).then(a.cmp(&b)));
    let target = (fraction * cells.len() as f64).round() as usize;
    let mut core = vec![false; mask.len()];
    for &c in &cells[..target] {
        core[c] = true;
    }
    Ok(LevelSplit {
        level: if target == 0 {
            f64::NEG_INFINITY
        } else {
            sdf.values[cells[target - 1]]
        },
        core,
        core_cells: target,
        masked_cells: cells.len(),
    })
}

/// Level splitting the cavity into a core and a boundary shell of equal volume.
pub fn equal_volume_level(sdf: &SignedDistanceGrid, mask: &[bool]) -> Result<LevelSplit> {
    level_for_fraction(sdf, mask, 0.5)
}
