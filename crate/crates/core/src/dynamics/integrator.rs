use super::config::StepParams;
use crate::rod::{elastic_gradient, NaturalShape, RodState, Stiffness};
use crate::{Error, Result, Vec3};

/// Nodes `first..` move with a prescribed velocity (the part of the coil
/// still inside the catheter).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prescribed {
    pub first: usize,
    pub velocity: Vec3,
}

/// One semi-implicit (symplectic) Euler step:
///
/// ```text
/// v  <- v + dt/m (-dE/dx + F_ext + m g - eta_X v)
/// x  <- x + dt v
/// phi <- phi - dt/eta_Phi dE/dphi
/// ```
///
/// with prescribed nodes overridden to their velocity before the position
/// update, and reference frames transported to the new edges afterwards.
/// `external` holds contact forces (may be empty for none).
pub fn step(
    state: &mut RodState,
    nat: &NaturalShape,
    k: &Stiffness,
    external: &[Vec3],
    prescribed: Option<Prescribed>,
    p: &StepParams,
) -> Result<()> {
    let grad = elastic_gradient(state, nat, k)?;
    apply_step(state, &grad.positions, &grad.twist, external, prescribed, p)
}

/// [`step`] with the energy gradients already evaluated at the current state.
pub fn apply_step(
    state: &mut RodState,
    grad_x: &[Vec3],
    grad_phi: &[f64],
    external: &[Vec3],
    prescribed: Option<Prescribed>,
    p: &StepParams,
) -> Result<()> {
    let n = state.node_count();
    if !external.is_empty() && external.len() != n {
        return Err(Error::SizeMismatch {
            what: "external forces",
            expected: n,
            found: external.len(),
        });
    }
    let first_fixed = prescribed.map_or(n, |pr| pr.first.min(n));
    let gravity = p.body_acceleration * p.node_mass;
    let h_over_m = p.dt / p.node_mass;
    let mut max_disp2: f64 = 0.0;
    let mut next = state.positions.clone();
    for i in 0..n {
        let v = if i >= first_fixed {
            prescribed.expect("prescribed range").velocity
        } else {
            let mut f = gravity - grad_x[i] - state.velocities[i] * p.eta_x;
            if !external.is_empty() {
                f += external[i];
            }
            state.velocities[i] + f * h_over_m
        };
        state.velocities[i] = v;
        let dx = v * p.dt;
        max_disp2 = max_disp2.max(dx.norm_squared());
        next[i] += dx;
    }
    let max_disp = max_disp2.sqrt();
    if !(max_disp <= p.max_displacement) {
        return Err(Error::StepDiverged {
            step: 0,
            max_displacement: max_disp,
            limit: p.max_displacement,
        });
    }
    let h_over_eta = p.dt / p.eta_phi;
    for (phi, g) in state.twist_angles.iter_mut().zip(grad_phi) {
        *phi -= h_over_eta * g;
    }
    state.move_nodes(&next)
}
