//! Coil deployment simulator.
//!
//! A discrete elastic rod carrying an imprinted natural shape is fed through a
//! catheter into a closed triangulated cavity. Contacts with itself, the cavity
//! wall and the catheter tube are resolved with penalty forces and Coulomb
//! friction. Deployments are voxelized and classified by their regional
//! packing fractions.
//!
//! Module map:
//! - [`rod`]: rod state, frames, strain measures, energy and its gradients
//! - [`shapes`]: natural centerline generators and stiffness constants
//! - [`mesh`]: triangle meshes, IO and mesh generators
//! - [`contact`]: octree broad phase, distance tests, contact forces, catheter tube
//! - [`dynamics`]: time stepping, catheter feed and the insertion driver
//! - [`geometry`]: volumes, signed distance grids, region partition, neck sphere
//! - [`scenario`]: run configuration and the deploy, voxelize, classify pipeline
//! - [`analysis`]: voxelization, ensemble statistics, occlusion classification,
//!   parameter sweeps and perturbation ensembles

pub mod analysis;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod rod;
pub mod scenario;
pub mod shapes;

pub use error::{Error, Result};

/// 3-vector in SI units.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3x3 matrix.
pub type Mat3 = nalgebra::Matrix3<f64>;
