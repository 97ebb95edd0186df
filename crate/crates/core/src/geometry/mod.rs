//! Cavity geometry: volumes, signed distance fields on a regular lattice,
//! the equal-volume core/boundary partition and the neck sphere.

mod lattice;
mod partition;
mod sdf;

pub use lattice::{read_raw_lattice, write_raw_lattice, Lattice, RawHeader};
pub use partition::{neck_sphere, plane_section, NeckSpec, RegionPartition, RegionVolumes, Sphere};
pub use sdf::{
    build_sdf, equal_volume_level, level_for_fraction, mesh_volume, LevelSplit, MeshDistance,
    SignedDistanceGrid,
};
