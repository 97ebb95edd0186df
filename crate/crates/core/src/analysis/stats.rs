use serde::{Deserialize, Serialize};

use super::voxel::VoxelGrid;
use crate::geometry::RegionPartition;
use crate::{Error, Result};

/// Pointwise mean and biased (divide by N) variance of an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub mean: VoxelGrid,
    pub variance: VoxelGrid,
}

pub fn ensemble_stats(grids: &[VoxelGrid]) -> Result<EnsembleStats> {
    let first = grids
        .first()
        .ok_or_else(|| Error::InvalidParameter("ensemble is empty".into()))?;
    for g in &grids[1..] {
        first.lattice.check_same(&g.lattice)?;
    }
    let n = grids.len() as f64;
    let mut mean = VoxelGrid::zeros(first.lattice);
    for g in grids {
        for (m, v) in mean.values.iter_mut().zip(&g.values) {
            *m += v;
        }
    }
    mean.values.iter_mut().for_each(|m| *m /= n);
    let mut variance = VoxelGrid::zeros(first.lattice);
    for g in grids {
        for ((s, v), m) in variance.values.iter_mut().zip(&g.values).zip(&mean.values) {
            *s += (v - m) * (v - m);
        }
    }
    variance.values.iter_mut().for_each(|s| *s /= n);
    Ok(EnsembleStats { mean, variance })
}

/// Coil volume in each region [m^3].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionIntegrals {
    pub aneurysm: f64,
    pub core: f64,
    pub boundary: f64,
    pub sphere: f64,
}

pub fn region_integrals(field: &VoxelGrid, partition: &RegionPartition) -> Result<RegionIntegrals> {
    field.lattice.check_same(&partition.lattice)?;
    let mut out = RegionIntegrals::default();
    for (i, &v) in field.values.iter().enumerate() {
        if partition.cavity[i] {
            out.aneurysm += v;
        }
        if partition.core[i] {
            out.core += v;
        }
        if partition.boundary[i] {
            out.boundary += v;
        }
        if partition.sphere[i] {
            out.sphere += v;
        }
    }
    let cell = field.lattice.cell_volume();
    out.aneurysm *= cell;
    out.core *= cell;
    out.boundary *= cell;
    out.sphere *= cell;
    Ok(out)
}

/// Volume fractions: boundary and core coil volume over the aneurysm
/// volume, aneurysm over aneurysm, sphere over sphere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionFractions {
    pub ba: f64,
    pub ca: f64,
    pub aa: f64,
    pub ss: f64,
}

impl RegionFractions {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ba, self.ca, self.aa, self.ss]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            ba: a[0],
            ca: a[1],
            aa: a[2],
            ss: a[3],
        }
    }

    pub const NAMES: [&'static str; 4] = ["ba", "ca", "aa", "ss"];
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn region_fractions(field: &VoxelGrid, partition: &RegionPartition) -> Result<RegionFractions> {
    let i = region_integrals(field, partition)?;
    let v = partition.volumes();
    Ok(RegionFractions {
        ba: ratio(i.boundary, v.aneurysm),
        ca: ratio(i.core, v.aneurysm),
        aa: ratio(i.aneurysm, v.aneurysm),
        ss: ratio(i.sphere, v.sphere),
    })
}

/// Packing density of each region relative to its own volume.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionDensities {
    pub core: f64,
    pub boundary: f64,
    pub sphere: f64,
}

pub fn region_densities(field: &VoxelGrid, partition: &RegionPartition) -> Result<RegionDensities> {
    let i = region_integrals(field, partition)?;
    let v = partition.volumes();
    Ok(RegionDensities {
        core: ratio(i.core, v.core),
        boundary: ratio(i.boundary, v.boundary),
        sphere: ratio(i.sphere, v.sphere),
    })
}

/// Fractions of the ensemble mean field and their standard deviations over
/// the samples, `sqrt(1/N sum_i (int_V mean - int_V psi_i)^2)` per region
/// with the same denominators as the fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFractions {
    pub mean: RegionFractions,
    pub std: RegionFractions,
}

pub fn ensemble_fractions(grids: &[VoxelGrid], partition: &RegionPartition) -> Result<EnsembleFractions> {
    if grids.is_empty() {
        return Err(Error::InvalidParameter("ensemble is empty".into()));
    }
    let per: Vec<[f64; 4]> = grids
        .iter()
        .map(|g| region_fractions(g, partition).map(|f| f.as_array()))
        .collect::<Result<_>>()?;
    let n = per.len() as f64;
    let mut mean = [0.0; 4];
    for f in &per {
        for k in 0..4 {
            mean[k] += f[k] / n;
        }
    }
    let mut var = [0.0; 4];
    for f in &per {
        for k in 0..4 {
            var[k] += (f[k] - mean[k]).powi(2) / n;
        }
    }
    Ok(EnsembleFractions {
        mean: RegionFractions::from_array(mean),
        std: RegionFractions::from_array(var.map(f64::sqrt)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Lattice, SignedDistanceGrid, Sphere};
    use crate::Vec3;
    use rand::{Rng, SeedableRng};

    fn lattice() -> Lattice {
        Lattice::new(Vec3::repeat(-1.2), 0.1, [24; 3]).unwrap()
    }

    fn ball_partition() -> RegionPartition {
        let sdf = SignedDistanceGrid::from_fn(lattice(), |p| p.norm() - 1.0);
        let neck = Sphere {
            center: Vec3::new(0.0, 0.0, 1.0),
            radius: 0.5,
        };
        RegionPartition::new(&sdf, neck).unwrap()
    }

    fn filled(v: f64) -> VoxelGrid {
        let mut g = VoxelGrid::zeros(lattice());
        g.values.iter_mut().for_each(|x| *x = v);
        g
    }

    #[test]
    fn identical_grids() {
        let g = filled(1.0);
        let s = ensemble_stats(&[g.clone(), g.clone(), g.clone()]).unwrap();
        assert_eq!(s.mean, g);
        assert!(s.variance.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_point_distribution() {
        let s = ensemble_stats(&[filled(0.0), filled(1.0)]).unwrap();
        assert!(s.mean.values.iter().all(|&v| v == 0.5));
        assert!(s.variance.values.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn mismatched_lattices() {
        let other = VoxelGrid::zeros(Lattice::new(Vec3::zeros(), 0.1, [24; 3]).unwrap());
        assert!(matches!(
            ensemble_stats(&[filled(0.0), other]),
            Err(Error::LatticeMismatch(_))
        ));
    }

    #[test]
    fn matches_two_pass_accumulation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let grids: Vec<VoxelGrid> = (0..7)
            .map(|_| {
                let mut g = VoxelGrid::zeros(lattice());
                g.values.iter_mut().for_each(|v| *v = if rng.random_bool(0.3) { 1.0 } else { 0.0 });
                g
            })
            .collect();
        let s = ensemble_stats(&grids).unwrap();
        for c in 0..lattice().len() {
            let xs: Vec<f64> = grids.iter().map(|g| g.values[c]).collect();
            let m = xs.iter().sum::<f64>() / 7.0;
            let sq = xs.iter().map(|x| x * x).sum::<f64>() / 7.0;
            assert!((s.mean.values[c] - m).abs() < 1e-12);
            assert!((s.variance.values[c] - (sq - m * m)).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&m));
            assert!(s.variance.values[c] <= m * (1.0 - m) + 1e-12);
        }
    }

    #[test]
    fn uniform_field_fractions() {
        let p = ball_partition();
        let f = region_fractions(&filled(0.2), &p).unwrap();
        let v = p.volumes();
        assert!((f.aa - 0.2).abs() < 1e-12 && (f.ss - 0.2).abs() < 1e-12);
        assert!((f.ba - 0.2 * v.boundary / v.aneurysm).abs() < 1e-12);
        // Equal-volume split: each half carries about 0.1.
        assert!((f.ba - 0.1).abs() < 0.2 * p.lattice.cell_volume() / v.aneurysm + 1e-12);
        assert!((f.ba + f.ca - f.aa).abs() < 1e-12);
        let d = region_densities(&filled(0.2), &p).unwrap();
        assert!((d.core - 0.2).abs() < 1e-12 && (d.boundary - 0.2).abs() < 1e-12);
        let z = region_fractions(&filled(0.0), &p).unwrap();
        assert_eq!(z, RegionFractions::default());
    }

    #[test]
    fn ensemble_std_of_fractions() {
        let p = ball_partition();
        let e = ensemble_fractions(&[filled(0.0), filled(1.0)], &p).unwrap();
        assert!((e.mean.aa - 0.5).abs() < 1e-12 && (e.std.aa - 0.5).abs() < 1e-12);
        let same = ensemble_fractions(&[filled(0.3), filled(0.3)], &p).unwrap();
        assert_eq!(same.std, RegionFractions::default());
    }
}
