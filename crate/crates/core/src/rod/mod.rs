//! Discrete elastic rod: state, frames, strain measures, energy and gradients.

mod energy;
mod frame;
mod gradient;
mod state;

pub use energy::{
    edge_twists, energy_terms, kinetic_energy, material_frames, nodal_curvatures,
    reference_twists, total_energy, EnergyTerms,
};
pub use frame::{
    curvature_binormal, parallel_transport, signed_angle, transport_vector, Frame,
    ANTI_PARALLEL_EPS,
};
pub use gradient::{elastic_gradient, force_gradient, twist_moment_gradient, ElasticGradient};
pub use state::{
    bishop_frames, build_natural_shape, update_reference_frames, NaturalShape, RodState,
    Stiffness, FRAME_TOLERANCE,
};
