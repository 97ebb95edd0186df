use super::config::StepParams;
use super::integrator::{apply_step, Prescribed};
use crate::contact::{
    coil_coil_force, coil_wall_force, edge_centers, point_triangle_contact, segment_segment_distance,
    self_candidate, wall_candidate, ContactParams, MeshTree, Octree, Sidedness, WallContact,
};
use crate::mesh::TriangleMesh;
use crate::rod::{elastic_gradient, NaturalShape, RodState, Stiffness};
use crate::{Error, Result, Vec3};

/// Rigid triangulated wall with its broad-phase tree.
#[derive(Clone, Debug)]
pub struct Wall {
    pub mesh: TriangleMesh,
    pub side: Sidedness,
    tree: MeshTree,
}

impl Wall {
    pub fn new(mesh: TriangleMesh, side: Sidedness) -> Self {
        let tree = MeshTree::new(&mesh);
        Self { mesh, side, tree }
    }
}

/// Constant-speed feed out of a catheter tip. Nodes that have not yet
/// crossed the plane through `tip` normal to `direction` move with the feed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feed {
    pub tip: Vec3,
    /// Unit feed direction.
    pub direction: Vec3,
    pub speed: f64,
}

impl Feed {
    pub fn velocity(&self) -> Vec3 {
        self.direction * self.speed
    }

    fn passed(&self, x: &Vec3) -> bool {
        (x - self.tip).dot(&self.direction) > 0.0
    }
}

// Per-node triangle candidates, valid while the node stays within `skin`
// of the position the list was built at.
#[derive(Clone, Debug)]
struct WallSlot {
    wall: Wall,
    lists: Vec<Vec<usize>>,
    anchors: Vec<Option<Vec3>>,
}

#[derive(Clone, Debug, Default)]
struct SelfList {
    pairs: Vec<(usize, usize)>,
    anchors: Vec<Vec3>,
    radius: f64,
    edges: usize,
    rebuilds: u64,
}

/// Contact counts of the last evaluated step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContactStats {
    pub self_contacts: usize,
    pub wall_contacts: usize,
}

/// Explicit rod dynamics with self contact, wall contact and catheter feed.
///
/// Broad-phase candidates are cached in Verlet-style lists padded by a skin
/// of `D2/2` and rebuilt once any relevant motion exceeds it; the exact
/// sphere predicates are re-applied every step, so the contact set equals a
/// from-scratch broad phase.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub state: RodState,
    nat: NaturalShape,
    k: Stiffness,
    contact: ContactParams,
    d2: f64,
    params: StepParams,
    skin: f64,
    walls: Vec<WallSlot>,
    self_list: SelfList,
    self_contact: bool,
    feed: Option<Feed>,
    released: usize,
    time: f64,
    steps: u64,
    max_penetration: f64,
    feed_advance: f64,
    stats: ContactStats,
    forces: Vec<Vec3>,
}

impl Simulator {
    pub fn new(
        state: RodState,
        nat: NaturalShape,
        k: Stiffness,
        contact: ContactParams,
        d2: f64,
        params: StepParams,
    ) -> Result<Self> {
        nat.check_compatible(&state)?;
        k.validate()?;
        contact.validate()?;
        if !(d2 > 0.0) {
            return Err(Error::InvalidParameter(format!("D2 must be positive, got {d2}")));
        }
        let n = state.node_count();
        Ok(Self {
            released: n,
            forces: vec![Vec3::zeros(); n],
            state,
            nat,
            k,
            contact,
            d2,
            params,
            skin: 0.5 * d2,
            walls: Vec::new(),
            self_list: SelfList::default(),
            self_contact: true,
            feed: None,
            time: 0.0,
            steps: 0,
            max_penetration: f64::NEG_INFINITY,
            feed_advance: 0.0,
            stats: ContactStats::default(),
        })
    }

    /// Starts feeding; nodes not yet past the tip become prescribed.
    pub fn set_feed(&mut self, feed: Feed) -> Result<()> {
        let dn = feed.direction.norm();
        if !((dn - 1.0).abs() < 1e-9) || !(feed.speed >= 0.0) {
            return Err(Error::InvalidParameter(
                "feed needs a unit direction and a non-negative speed".into(),
            ));
        }
        self.feed = Some(feed);
        self.released = 0;
        self.update_released();
        self.self_list.edges = usize::MAX;
        Ok(())
    }

    pub fn clear_feed(&mut self) {
        self.feed = None;
        self.released = self.state.node_count();
    }

    pub fn feed(&self) -> Option<&Feed> {
        self.feed.as_ref()
    }

    pub fn add_wall(&mut self, wall: Wall) -> usize {
        let n = self.state.node_count();
        self.walls.push(WallSlot {
            wall,
            lists: vec![Vec::new(); n],
            anchors: vec![None; n],
        });
        self.walls.len() - 1
    }

    pub fn replace_wall(&mut self, index: usize, wall: Wall) {
        let n = self.state.node_count();
        self.walls[index] = WallSlot {
            wall,
            lists: vec![Vec::new(); n],
            anchors: vec![None; n],
        };
    }

    pub fn wall(&self, index: usize) -> &Wall {
        &self.walls[index].wall
    }

    pub fn set_self_contact(&mut self, on: bool) {
        self.self_contact = on;
    }

    pub fn natural_shape(&self) -> &NaturalShape {
        &self.nat
    }

    pub fn stiffness(&self) -> &Stiffness {
        &self.k
    }

    pub fn params(&self) -> &StepParams {
        &self.params
    }

    /// Number of leading nodes that are free (all of them without a feed).
    pub fn released(&self) -> usize {
        self.released
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Deepest excursion of a node center past an inward wall plane seen so
    /// far (negative while no node has crossed a wall).
    pub fn max_penetration(&self) -> f64 {
        self.max_penetration
    }

    /// Accumulated advance of the most recently released node along the
    /// feed direction [m].
    pub fn feed_advance(&self) -> f64 {
        self.feed_advance
    }

    pub fn contact_stats(&self) -> ContactStats {
        self.stats
    }

    pub fn self_list_rebuilds(&self) -> u64 {
        self.self_list.rebuilds
    }

    /// Contact forces of the last step.
    pub fn contact_forces(&self) -> &[Vec3] {
        &self.forces
    }

    pub fn step(&mut self) -> Result<()> {
        let grad = elastic_gradient(&self.state, &self.nat, &self.k)?;
        self.evaluate_contacts(&grad.positions)?;
        let prescribed = self.feed.and_then(|f| {
            (self.released < self.state.node_count()).then(|| Prescribed {
                first: self.released,
                velocity: f.velocity(),
            })
        });
        apply_step(
            &mut self.state,
            &grad.positions,
            &grad.twist,
            &self.forces,
            prescribed,
            &self.params,
        )
        .map_err(|e| match e {
            Error::StepDiverged {
                max_displacement,
                limit,
                ..
            } => Error::StepDiverged {
                step: self.steps,
                max_displacement,
                limit,
            },
            other => other,
        })?;
        if let Some(f) = &self.feed {
            if self.released > 0 && self.released < self.state.node_count() {
                let v = self.state.velocities[self.released - 1];
                self.feed_advance += v.dot(&f.direction) * self.params.dt;
            }
        }
        self.steps += 1;
        self.time = self.steps as f64 * self.params.dt;
        self.update_released();
        Ok(())
    }

    fn update_released(&mut self) {
        if let Some(f) = &self.feed {
            let n = self.state.node_count();
            while self.released < n && f.passed(&self.state.positions[self.released]) {
                self.released += 1;
            }
        }
    }

    fn evaluate_contacts(&mut self, grad_x: &[Vec3]) -> Result<()> {
        for f in self.forces.iter_mut() {
            *f = Vec3::zeros();
        }
        self.stats = ContactStats::default();
        let free_edges = self.released.saturating_sub(1);
        if self.self_contact && free_edges >= 3 {
            let centers = edge_centers(&self.state.positions[..self.released]);
            let threshold = self.self_threshold(free_edges);
            self.refresh_self_list(&centers, threshold);
            let pairs = std::mem::take(&mut self.self_list.pairs);
            for &(i, j) in &pairs {
                if self_candidate(&centers[i], &centers[j], threshold) {
                    self.self_pair(i, j)?;
                }
            }
            self.self_list.pairs = pairs;
        }
        let hw = 0.5 * self.d2;
        let mut best: Vec<Option<WallContact>> = Vec::new();
        for w in 0..self.walls.len() {
            best.clear();
            best.resize(self.released, None);
            let slot = &mut self.walls[w];
            for (i, x) in self.state.positions[..self.released].iter().enumerate() {
                let stale = slot.anchors[i].map_or(true, |a| (x - a).norm() > self.skin);
                if stale {
                    slot.wall
                        .tree
                        .candidates(&slot.wall.mesh, x, hw + self.skin, &mut slot.lists[i]);
                    slot.anchors[i] = Some(*x);
                }
                best[i] = deepest_contact(&slot.wall, x, hw, slot.lists[i].iter().copied())?;
            }
            let side = slot.wall.side;
            for (i, c) in best.iter().enumerate() {
                if let Some(c) = c {
                    self.apply_wall(i, c, side, &grad_x[i]);
                }
            }
        }
        Ok(())
    }

    fn self_threshold(&self, free_edges: usize) -> f64 {
        let p = &self.state.positions;
        let l_max = (0..free_edges)
            .map(|j| (p[j + 1] - p[j]).norm())
            .fold(0.0, f64::max);
        l_max + self.d2
    }

    fn refresh_self_list(&mut self, centers: &[Vec3], threshold: f64) {
        let list = &mut self.self_list;
        let valid = list.edges == centers.len() && {
            let moved = centers
                .iter()
                .zip(&list.anchors)
                .map(|(c, a)| (c - a).norm())
                .fold(0.0, f64::max);
            moved <= self.skin && threshold + 2.0 * moved <= list.radius
        };
        if valid {
            return;
        }
        list.radius = threshold + 2.0 * self.skin;
        list.anchors = centers.to_vec();
        list.edges = centers.len();
        list.rebuilds += 1;
        list.pairs.clear();
        let tree = Octree::from_points(centers.to_vec());
        for (i, ci) in centers.iter().enumerate() {
            let start = list.pairs.len();
            let r = list.radius;
            let pairs = &mut list.pairs;
            tree.query(ci, r, |j| {
                if j >= i + 2 && self_candidate(ci, &centers[j], r) {
                    pairs.push((i, j));
                }
            });
            list.pairs[start..].sort_unstable();
        }
    }

    fn self_pair(&mut self, i: usize, j: usize) -> Result<()> {
        let p = &self.state.positions;
        let v = &self.state.velocities;
        let nodes = [p[i], p[i + 1], p[j], p[j + 1]];
        let dist = segment_segment_distance(&nodes[0], &nodes[1], &nodes[2], &nodes[3])?;
        let vel = [v[i], v[i + 1], v[j], v[j + 1]];
        if let Some(f) = coil_coil_force(&nodes, &vel, &dist, self.d2, &self.contact) {
            self.forces[i] += f[0];
            self.forces[i + 1] += f[1];
            self.forces[j] += f[2];
            self.forces[j + 1] += f[3];
            self.stats.self_contacts += 1;
        }
        Ok(())
    }

    fn apply_wall(&mut self, i: usize, c: &WallContact, side: Sidedness, grad: &Vec3) {
        let load = self.params.body_acceleration * self.params.node_mass - grad;
        self.forces[i] += coil_wall_force(c, &self.state.velocities[i], &load, &self.contact);
        self.stats.wall_contacts += 1;
        if side == Sidedness::Inward {
            self.max_penetration = self.max_penetration.max(c.penetration - 0.5 * self.d2);
        }
    }
}

fn deepest_contact(
    wall: &Wall,
    x: &Vec3,
    hw: f64,
    candidates: impl Iterator<Item = usize>,
) -> Result<Option<WallContact>> {
    let mesh = &wall.mesh;
    let mut best: Option<WallContact> = None;
    for t in candidates {
        if !wall_candidate(x, &mesh.centroids[t], hw, mesh.bounding_radii[t]) {
            continue;
        }
        let tri = mesh.triangle(t);
        if let Some(c) = point_triangle_contact(x, &tri, &mesh.normals[t], hw, wall.side, t)? {
            if best.map_or(true, |b| c.penetration > b.penetration) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}

/// Contact forces recomputed by testing every edge pair and every triangle;
/// the reference for the cached broad phase.
#[cfg(test)]
pub(crate) fn brute_contact_forces(sim: &Simulator, grad_x: &[Vec3]) -> Result<Vec<Vec3>> {
    let mut forces = vec![Vec3::zeros(); sim.state.node_count()];
    let p = &sim.state.positions;
    let v = &sim.state.velocities;
    let free_edges = sim.released.saturating_sub(1);
    if sim.self_contact && free_edges >= 3 {
        let centers = edge_centers(&p[..sim.released]);
        let thr = sim.self_threshold(free_edges);
        for i in 0..centers.len() {
            for j in i + 2..centers.len() {
                if !self_candidate(&centers[i], &centers[j], thr) {
                    continue;
                }
                let nodes = [p[i], p[i + 1], p[j], p[j + 1]];
                let dist = segment_segment_distance(&nodes[0], &nodes[1], &nodes[2], &nodes[3])?;
                let vel = [v[i], v[i + 1], v[j], v[j + 1]];
                if let Some(f) = coil_coil_force(&nodes, &vel, &dist, sim.d2, &sim.contact) {
                    forces[i] += f[0];
                    forces[i + 1] += f[1];
                    forces[j] += f[2];
                    forces[j + 1] += f[3];
                }
            }
        }
    }
    let hw = 0.5 * sim.d2;
    for slot in &sim.walls {
        let wall = &slot.wall;
        let mut found = Vec::new();
        for x in &p[..sim.released] {
            found.push(deepest_contact(wall, x, hw, 0..wall.mesh.triangle_count())?);
        }
        for (i, c) in found.iter().enumerate() {
            if let Some(c) = c {
                let load = sim.params.body_acceleration * sim.params.node_mass - grad_x[i];
                forces[i] += coil_wall_force(c, &v[i], &load, &sim.contact);
            }
        }
    }
    Ok(forces)
}
