//! Time integration, catheter feed and the insertion driver.

mod config;
mod deploy;
mod integrator;
mod simulator;

pub use config::{stable_time_step, SimConfig, StepParams};
pub use deploy::{
    catheter_membership, insert_coil, length_for_packing, packing_density, step_params, Cavity,
    Deployment, RunSummary, Snapshot,
};
pub use integrator::{apply_step, step, Prescribed};
pub use simulator::{ContactStats, Feed, Simulator, Wall};
