use serde::{Deserialize, Serialize};

use super::narrow::{SegmentDistance, WallContact};
use crate::{Error, Result, Vec3};

/// Penalty, dissipation and friction coefficients of the contact model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactParams {
    /// Coil–coil penalty stiffness [N/m].
    pub k_sc: f64,
    /// Coil–coil dissipation [N s/m].
    pub gamma_sc: f64,
    /// Coil–wall penalty stiffness [N/m].
    pub k_w: f64,
    /// Coil–wall dissipation [N s/m].
    pub gamma_w: f64,
    pub mu_slip_cc: f64,
    pub mu_slip_cw: f64,
    pub mu_stick_cw: f64,
    /// Tangential speed below which a wall contact sticks [m/s].
    pub v_eps: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            k_sc: 4e2,
            gamma_sc: 1e-2,
            k_w: 4e2,
            gamma_w: 1e-2,
            mu_slip_cc: 0.6,
            mu_slip_cw: 0.6,
            mu_stick_cw: 0.9,
            v_eps: 1e-8,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_sc", self.k_sc),
            ("gamma_sc", self.gamma_sc),
            ("k_w", self.k_w),
            ("gamma_w", self.gamma_w),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        let ordered = |lo: f64, hi: f64| 0.0 <= lo && lo <= hi && hi <= 2.0;
        if !ordered(self.mu_slip_cw, self.mu_stick_cw) || !ordered(self.mu_slip_cc, 2.0) {
            return Err(Error::InvalidParameter(format!(
                "friction coefficients must satisfy 0 <= slip <= stick <= 2, got cc {} / cw {} / {}",
                self.mu_slip_cc, self.mu_slip_cw, self.mu_stick_cw
            )));
        }
        if !(self.v_eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "v_eps must be positive, got {}",
                self.v_eps
            )));
        }
        Ok(())
    }
}

/// Forces on the four nodes `[a, a+1, b, b+1]` of two touching edges.
///
/// `dist` comes from [`super::segment_segment_distance`] on the edges
/// `(x_a, x_a+1)` and `(x_b, x_b+1)`; `vel` holds the four node velocities.
/// With `d = d_min / |d_min|` and overlap `eps = d2 - |d_min|`, the force on
/// the first edge is `-(k_sc eps + gamma_sc v_rel . d) d` plus slip friction
/// `-mu |F_n| v_t / |v_t|` when `|v_t| >= v_eps`; the second edge receives
/// the opposite force. Each is split over its nodes by the contact parameter.
/// Returns `None` without overlap.
pub fn coil_coil_force(
    nodes: &[Vec3; 4],
    vel: &[Vec3; 4],
    dist: &SegmentDistance,
    d2: f64,
    params: &ContactParams,
) -> Option<[Vec3; 4]> {
    let len = dist.distance();
    let eps = d2 - len;
    if eps < 0.0 {
        return None;
    }
    let dir = if len > 1e-12 * d2 {
        dist.d_min / len
    } else {
        // Crossing axes: separate along the common normal, oriented from
        // the first edge's midpoint toward the second's.
        let n = (nodes[1] - nodes[0]).cross(&(nodes[3] - nodes[2]));
        let mid = (nodes[2] + nodes[3] - nodes[0] - nodes[1]) / 2.0;
        let n = if n.norm() > 0.0 {
            n.normalize()
        } else {
            let e = (nodes[1] - nodes[0]).normalize();
            (mid - e * mid.dot(&e)).try_normalize(0.0)?
        };
        if n.dot(&mid) < 0.0 {
            -n
        } else {
            n
        }
    };
    let (s, t) = (dist.s, dist.t);
    let v_a = vel[0] * (1.0 - s) + vel[1] * s;
    let v_b = vel[2] * (1.0 - t) + vel[3] * t;
    let v_rel = v_a - v_b;
    let normal_mag = (params.k_sc * eps + params.gamma_sc * v_rel.dot(&dir)).max(0.0);
    let mut f = -dir * normal_mag;
    let v_t = v_rel - dir * v_rel.dot(&dir);
    let vt = v_t.norm();
    if vt >= params.v_eps {
        f -= v_t * (params.mu_slip_cc * normal_mag / vt);
    }
    Some([f * (1.0 - s), f * s, -f * (1.0 - t), -f * t])
}

/// Force of a rigid wall on one node.
///
/// `load` is the force acting on the node before contacts (elastic plus
/// body forces). Its wall-directed part `F_n = max(0, load . n)` is the
/// support load; the tangential part `F_t` is what stick friction resists.
/// The normal force is `-(F_n + k_w eps + gamma_w v . n) n`. Tangentially,
/// a node with `|v_t| <= v_eps` sticks with `-min(|F_t|, mu_stick F_n) F_t/|F_t|`,
/// otherwise it slips with `-mu_slip F_n v_t/|v_t|`.
pub fn coil_wall_force(contact: &WallContact, vel: &Vec3, load: &Vec3, params: &ContactParams) -> Vec3 {
    if contact.penetration < 0.0 {
        return Vec3::zeros();
    }
    let n = contact.normal;
    let support = load.dot(&n).max(0.0);
    let normal_mag = (support + params.k_w * contact.penetration + params.gamma_w * vel.dot(&n)).max(0.0);
    let mut f = -n * normal_mag;
    let v_t = vel - n * vel.dot(&n);
    let vt = v_t.norm();
    if vt > params.v_eps {
        f -= v_t * (params.mu_slip_cw * support / vt);
    } else {
        let f_t = load - n * load.dot(&n);
        let ft = f_t.norm();
        if ft > 0.0 {
            f -= f_t * (ft.min(params.mu_stick_cw * support) / ft);
        }
    }
    f
}
