use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::{stable_time_step, SimConfig, StepParams};
use super::simulator::{Feed, Simulator, Wall};
use crate::contact::{Catheter, ContactParams, Sidedness};
use crate::mesh::TriangleMesh;
use crate::rod::{build_natural_shape, kinetic_energy, total_energy, RodState};
use crate::shapes::{spring_constants, CoilSpec};
use crate::{Error, Result, Vec3};

/// Inserted wire volume over cavity volume, `(pi d2^2/4 L) / V`.
pub fn packing_density(inserted_length: f64, d2: f64, cavity_volume: f64) -> f64 {
    PI * d2 * d2 / 4.0 * inserted_length / cavity_volume
}

/// Wire length that fills `cavity_volume` to packing density `psi`.
pub fn length_for_packing(psi: f64, d2: f64, cavity_volume: f64) -> f64 {
    psi * cavity_volume / (PI * d2 * d2 / 4.0)
}

/// Indices of the nodes inside the catheter tube.
pub fn catheter_membership(positions: &[Vec3], catheter: &Catheter) -> Vec<usize> {
    positions
        .iter()
        .enumerate()
        .filter(|(_, p)| catheter.contains(p))
        .map(|(i, _)| i)
        .collect()
}

/// Cavity the coil is deployed into.
#[derive(Clone, Copy, Debug)]
pub struct Cavity<'a> {
    /// Sack closed off at the neck; the wall during the feed.
    pub necked: &'a TriangleMesh,
    /// Sack plus vessel; swapped in once the coil is fully inserted.
    pub full: Option<&'a TriangleMesh>,
    /// Sack volume used for the packing density [m^3].
    pub volume: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub released: usize,
    pub elastic_energy: f64,
    pub kinetic_energy: f64,
    pub positions: Vec<Vec3>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub completed: bool,
    pub steps: u64,
    pub time: f64,
    pub dt: f64,
    pub node_count: usize,
    pub node_mass: f64,
    pub inserted_length: f64,
    pub packing_density: f64,
    pub wall_swap_time: Option<f64>,
    /// Deepest excursion of a node center past the cavity wall [m].
    pub max_penetration: f64,
    pub elastic_energy: f64,
    pub kinetic_energy: f64,
    /// Released nodes found back inside the catheter at a monitor check.
    pub membership_violations: usize,
}

#[derive(Clone, Debug)]
pub struct Deployment {
    pub final_state: Option<RodState>,
    pub snapshots: Vec<Snapshot>,
    pub summary: RunSummary,
}

/// Resolved step constants for a coil: node mass from the coil unless
/// given, time step from the stability bound unless given.
pub fn step_params(coil: &CoilSpec, contact: &ContactParams, cfg: &SimConfig) -> Result<StepParams> {
    cfg.validate()?;
    let l = coil.edge_length();
    let node_mass = cfg.node_mass.unwrap_or_else(|| coil.node_mass(l));
    let k = spring_constants(coil, cfg.stretch_penalty)?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => {
            cfg.dt_safety
                * stable_time_step(&k, l, node_mass, cfg.eta_x, cfg.eta_phi, contact.k_w + contact.k_sc)
        }
    };
    Ok(StepParams {
        dt,
        node_mass,
        eta_x: cfg.eta_x,
        eta_phi: cfg.eta_phi,
        body_acceleration: cfg.body_acceleration(),
        max_displacement: 0.5 * l,
    })
}

/// Feeds a coil with natural centerline `natural` out of `catheter` into
/// the cavity until every node has left the tip, swaps in the full
/// geometry and lets the coil settle.
///
/// The coil starts straight along the catheter's tip direction with its
/// first node at the tip, the rest trailing behind. Nodes that have not
/// passed the tip move with the feed velocity.
pub fn insert_coil(
    coil: &CoilSpec,
    natural: &[Vec3],
    cavity: Cavity<'_>,
    catheter: &Catheter,
    contact: &ContactParams,
    cfg: &SimConfig,
) -> Result<Deployment> {
    coil.validate()?;
    catheter.validate()?;
    let params = step_params(coil, contact, cfg)?;
    let length: f64 = natural.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if natural.len() < 2 || length == 0.0 {
        return Ok(Deployment {
            final_state: None,
            snapshots: Vec::new(),
            summary: RunSummary {
                completed: true,
                dt: params.dt,
                node_mass: params.node_mass,
                max_penetration: f64::NEG_INFINITY,
                ..Default::default()
            },
        });
    }
    let target = length_for_packing(cfg.target_packing, coil.d2, cavity.volume);
    let mean_edge = length / (natural.len() - 1) as f64;
    if (length - target).abs() > mean_edge {
        return Err(Error::InvalidParameter(format!(
            "coil length {length:.6e} m does not give packing density {} in a cavity of {:.6e} m^3 (needs {target:.6e} m)",
            cfg.target_packing, cavity.volume
        )));
    }

    let nat = build_natural_shape(natural)?;
    let k = spring_constants(coil, cfg.stretch_penalty)?;
    let dir = catheter.tip_direction();
    let tip = catheter.tip();
    let mut offset = 0.0;
    let start: Vec<Vec3> = nat
        .rest_edge_lengths
        .iter()
        .fold(vec![tip], |mut pts, l| {
            offset += l;
            pts.push(tip - dir * offset);
            pts
        });
    let state = RodState::from_centerline(start)?;
    let n = state.node_count();
    let mut sim = Simulator::new(state, nat, k, contact.clone(), coil.d2, params)?;
    let cavity_wall = sim.add_wall(Wall::new(cavity.necked.clone(), Sidedness::Inward));
    sim.add_wall(Wall::new(catheter.mesh_with_edge(2.0 * coil.d2)?, Sidedness::TwoSided));
    sim.set_feed(Feed {
        tip,
        direction: dir,
        speed: cfg.push_speed,
    })?;

    let mut snapshots = Vec::new();
    let mut violations = 0;
    let mut window_start = 0.0;
    let max_steps = cfg.max_steps.unwrap_or(u64::MAX);
    let snap = |sim: &Simulator| -> Result<Snapshot> {
        Ok(Snapshot {
            step: sim.steps(),
            time: sim.time(),
            released: sim.released(),
            elastic_energy: total_energy(&sim.state, sim.natural_shape(), sim.stiffness())?,
            kinetic_energy: kinetic_energy(&sim.state, sim.params().node_mass),
            positions: sim.state.positions.clone(),
        })
    };
    let mut completed = true;
    while sim.released() < n {
        if sim.steps() >= max_steps {
            completed = false;
            break;
        }
        sim.step()?;
        if cfg.snapshot_every > 0 && sim.steps() % cfg.snapshot_every == 0 {
            snapshots.push(snap(&sim)?);
        }
        if sim.steps() % cfg.stuck_window == 0 && cfg.push_speed > 0.0 {
            let advance = (sim.feed_advance() - window_start) / cfg.stuck_window as f64;
            let expected = cfg.push_speed * params.dt;
            if advance < 0.1 * expected {
                return Err(Error::CoilStuck {
                    time: sim.time(),
                    advance,
                    expected,
                });
            }
            window_start = sim.feed_advance();
            violations += catheter_membership(&sim.state.positions[..sim.released()], catheter).len();
        }
    }

    let mut wall_swap_time = None;
    if completed {
        if let (true, Some(full)) = (cfg.release_wall_after_insertion, cavity.full) {
            sim.replace_wall(cavity_wall, Wall::new(full.clone(), Sidedness::Inward));
            wall_swap_time = Some(sim.time());
        }
        let settle_steps = (cfg.settle_time / params.dt).ceil() as u64;
        for _ in 0..settle_steps {
            if sim.steps() >= max_steps {
                completed = false;
                break;
            }
            sim.step()?;
            if cfg.snapshot_every > 0 && sim.steps() % cfg.snapshot_every == 0 {
                snapshots.push(snap(&sim)?);
            }
        }
    }

    let last = snap(&sim)?;
    let inserted: f64 = (0..sim.released().saturating_sub(1))
        .map(|j| sim.natural_shape().rest_edge_lengths[j])
        .sum();
    let summary = RunSummary {
        completed,
        steps: sim.steps(),
        time: sim.time(),
        dt: params.dt,
        node_count: n,
        node_mass: params.node_mass,
        inserted_length: inserted,
        packing_density: packing_density(inserted, coil.d2, cavity.volume),
        wall_swap_time,
        max_penetration: sim.max_penetration(),
        elastic_energy: last.elastic_energy,
        kinetic_energy: last.kinetic_energy,
        membership_violations: violations,
    };
    if snapshots.last().map_or(true, |s| s.step != last.step) {
        snapshots.push(last);
    }
    Ok(Deployment {
        final_state: Some(sim.state),
        snapshots,
        summary,
    })
}
