use crate::geometry::Lattice;
use crate::{Error, Result, Vec3};

/// Cell-centered field on a lattice: 0/1 for a single deployment, values in
/// `[0, 1]` for ensemble means.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl VoxelGrid {
    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            values: vec![0.0; lattice.len()],
            lattice,
        }
    }

    pub fn occupied(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// Integral of the field over the lattice [m^3].
    pub fn volume(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.lattice.cell_volume()
    }
}

/// Binary voxelization of the tube of diameter `d2` around a centerline: a
/// cell is set iff its center lies within `d2/2` of the polyline.
pub fn voxelize(centerline: &[Vec3], d2: f64, lattice: &Lattice) -> Result<VoxelGrid> {
    if let Some((index, p)) = centerline.iter().enumerate().find(|(_, p)| !lattice.covers(p)) {
        return Err(Error::OutOfBounds {
            index,
            point: [p.x, p.y, p.z],
        });
    }
    voxelize_clipped(centerline, d2, lattice)
}

/// [`voxelize`] keeping only the part of the tube inside the lattice.
pub fn voxelize_clipped(centerline: &[Vec3], d2: f64, lattice: &Lattice) -> Result<VoxelGrid> {
    if !(d2 > 0.0) {
        return Err(Error::InvalidParameter(format!("D2 must be positive, got {d2}")));
    }
    let mut grid = VoxelGrid::zeros(*lattice);
    let r = d2 / 2.0;
    match centerline.len() {
        0 => {}
        1 => mark_segment(&mut grid, &centerline[0], &centerline[0], r),
        _ => {
            // Short pieces keep the scanned boxes tight around slanted segments.
            let piece = 4.0 * lattice.spacing.max(r);
            for w in centerline.windows(2) {
                let len = (w[1] - w[0]).norm();
                let parts = ((len / piece).ceil() as usize).max(1);
                for k in 0..parts {
                    let a = w[0] + (w[1] - w[0]) * (k as f64 / parts as f64);
                    let b = w[0] + (w[1] - w[0]) * ((k + 1) as f64 / parts as f64);
                    mark_segment(&mut grid, &a, &b, r);
                }
            }
        }
    }
    Ok(grid)
}

fn mark_segment(grid: &mut VoxelGrid, a: &Vec3, b: &Vec3, r: f64) {
    let lo = a.inf(b) - Vec3::repeat(r);
    let hi = a.sup(b) + Vec3::repeat(r);
    let Some([(i0, i1), (j0, j1), (k0, k1)]) = grid.lattice.cell_range(&lo, &hi) else {
        return;
    };
    let ab = b - a;
    let len2 = ab.norm_squared();
    for k in k0..=k1 {
        for j in j0..=j1 {
            for i in i0..=i1 {
                let idx = grid.lattice.index(i, j, k);
                if grid.values[idx] != 0.0 {
                    continue;
                }
                let p = grid.lattice.center(i, j, k);
                let t = if len2 > 0.0 {
                    ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                if (a + ab * t - p).norm_squared() <= r * r {
                    grid.values[idx] = 1.0;
                }
            }
        }
    }
}
