//! Collision detection and contact forces between coil edges, coil nodes
//! and rigid triangulated walls.

mod broad;
mod catheter;
mod forces;
mod narrow;
mod octree;

pub use broad::{
    broad_phase_self, broad_phase_self_brute, broad_phase_wall, broad_phase_wall_brute,
    conservative_self_radius, edge_centers, side_by_side_self_radius, MeshTree,
};
pub(crate) use broad::{self_candidate, wall_candidate};
pub use catheter::Catheter;
pub use forces::{coil_coil_force, coil_wall_force, ContactParams};
pub use narrow::{point_triangle_contact, segment_segment_distance, SegmentDistance, Sidedness, WallContact};
pub use octree::{Octree, DEFAULT_LEAF_CAPACITY, DEFAULT_MAX_DEPTH};
