use serde::{Deserialize, Serialize};

use crate::rod::Stiffness;
use crate::{Error, Result, Vec3};

/// Time-stepping and feed settings of a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Time step [s]; chosen by [`stable_time_step`] when absent.
    pub dt: Option<f64>,
    /// Fraction of the stability bound used for the automatic time step.
    pub dt_safety: f64,
    /// Feed speed `|v_push|` [m/s]; the direction is the catheter tip tangent.
    pub push_speed: f64,
    /// Translational damping `eta_X` [N s].
    pub eta_x: f64,
    /// Rotational damping `eta_Phi` [N m s].
    pub eta_phi: f64,
    /// Lumped node mass [kg]; derived from the coil when absent.
    pub node_mass: Option<f64>,
    /// Axial penalty `alpha` [J/m].
    pub stretch_penalty: f64,
    /// Packing density the inserted length is chosen for.
    pub target_packing: f64,
    /// Uniform body acceleration such as gravity [m/s^2].
    pub body_force: Option<[f64; 3]>,
    /// Relaxation time after the feed completes [s].
    pub settle_time: f64,
    /// Swap the necked-off cavity for the full geometry once the coil is in.
    pub release_wall_after_insertion: bool,
    /// Steps between checkpoints; 0 keeps only the final state.
    pub snapshot_every: u64,
    /// Steps over which feed progress is averaged for stall detection.
    pub stuck_window: u64,
    /// Hard cap on the number of steps.
    pub max_steps: Option<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: None,
            dt_safety: 0.5,
            push_speed: 3e-2,
            eta_x: 1e-2,
            eta_phi: 1e-9,
            node_mass: None,
            stretch_penalty: 1e-1,
            target_packing: 0.2,
            body_force: None,
            settle_time: 0.5,
            release_wall_after_insertion: true,
            snapshot_every: 0,
            stuck_window: 1000,
            max_steps: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad(format!("dt_safety must be in (0, 1], got {}", self.dt_safety));
        }
        if !(self.push_speed >= 0.0 && self.push_speed.is_finite()) {
            return bad(format!("push_speed must be >= 0, got {}", self.push_speed));
        }
        if !(self.eta_x >= 0.0) || !(self.eta_phi > 0.0) {
            return bad(format!(
                "damping must satisfy eta_x >= 0 and eta_phi > 0, got {} / {}",
                self.eta_x, self.eta_phi
            ));
        }
        if let Some(m) = self.node_mass {
            if !(m > 0.0) {
                return bad(format!("node mass must be positive, got {m}"));
            }
        }
        if !(self.stretch_penalty > 0.0) {
            return bad(format!(
                "stretch penalty must be positive, got {}",
                self.stretch_penalty
            ));
        }
        if !(self.target_packing > 0.0 && self.target_packing < 1.0) {
            return bad(format!(
                "target packing must be in (0, 1), got {}",
                self.target_packing
            ));
        }
        if !(self.settle_time >= 0.0) {
            return bad(format!("settle_time must be >= 0, got {}", self.settle_time));
        }
        if self.stuck_window == 0 {
            return bad("stuck_window must be positive".into());
        }
        Ok(())
    }

    pub fn body_acceleration(&self) -> Vec3 {
        self.body_force.map(Vec3::from).unwrap_or_else(Vec3::zeros)
    }
}

/// Resolved per-step constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub node_mass: f64,
    pub eta_x: f64,
    pub eta_phi: f64,
    pub body_acceleration: Vec3,
    /// Largest allowed node displacement per step (half the rest edge length).
    pub max_displacement: f64,
}

/// Largest stable time step of the explicit scheme.
///
/// Translational modes: symplectic Euler on `m x'' = -k x - eta x'` is stable
/// iff `k h^2 + 2 eta h < 4 m`, i.e. `h < (-eta + sqrt(eta^2 + 4 k m)) / k`,
/// with `k` the stiffest nodal mode `4 alpha/l + 16 b/l^3` plus the contact
/// penalties. Twist modes: the damped gradient flow on `phi` is stable iff
/// `h < eta_phi l / (2 beta)`.
pub fn stable_time_step(
    k: &Stiffness,
    edge_length: f64,
    node_mass: f64,
    eta_x: f64,
    eta_phi: f64,
    contact_stiffness: f64,
) -> f64 {
    let l = edge_length;
    let stiff = 4.0 * k.stretch / l + 16.0 * k.bend / l.powi(3) + contact_stiffness;
    let h_x = (-eta_x + (eta_x * eta_x + 4.0 * stiff * node_mass).sqrt()) / stiff;
    let h_phi = eta_phi * l / (2.0 * k.twist);
    h_x.min(h_phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undamped_bound_is_classic() {
        let k = Stiffness::new(1.0, 1e-12, 1e-12).unwrap();
        // Only stretch: k_eff = 4, m = 1 -> h < 2 / sqrt(4) = 1.
        let h = stable_time_step(&k, 1.0, 1.0, 0.0, 1.0, 0.0);
        assert!((h - 1.0).abs() < 1e-9);
    }

    #[test]
    fn damping_shrinks_bound() {
        let k = Stiffness::new(1.0, 1e-12, 1e-12).unwrap();
        let h0 = stable_time_step(&k, 1.0, 1.0, 0.0, 1.0, 0.0);
        let h1 = stable_time_step(&k, 1.0, 1.0, 0.5, 1.0, 0.0);
        assert!(h1 < h0);
        // Root of 4 h^2 + h - 4 = 0.
        assert!((h1 - (-1.0 + 65f64.sqrt()) / 8.0).abs() < 1e-10);
    }

    #[test]
    fn config_validation() {
        SimConfig::default().validate().unwrap();
        let bad = SimConfig {
            target_packing: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            eta_phi: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
