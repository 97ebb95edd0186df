use serde::{Deserialize, Serialize};

use super::frame::{transport_vector, Frame};
use crate::{Error, Result, Vec3};

/// Tolerance on frame orthonormality and adaptedness checked by [`RodState::validate`].
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// Stretch, bend and twist constants of the strain energy.
///
/// Bending is isotropic: the bending matrix is `bend * I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stiffness {
    /// Axial penalty `alpha` [J/m].
    pub stretch: f64,
    /// Bending stiffness `b` [N m^2].
    pub bend: f64,
    /// Twisting stiffness `beta` [N m^2].
    pub twist: f64,
}

impl Stiffness {
    pub fn new(stretch: f64, bend: f64, twist: f64) -> Result<Self> {
        let k = Self {
            stretch,
            bend,
            twist,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stretch", self.stretch),
            ("bend", self.bend),
            ("twist", self.twist),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "stiffness {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Configuration of a discretized rod: `N` nodes, `N - 1` edges.
///
/// `twist_angles[j]` is the angle of the material frame of edge `j` measured
/// from its reference frame `ref_frames[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RodState {
    pub positions: Vec<Vec3>,
    pub twist_angles: Vec<f64>,
    pub velocities: Vec<Vec3>,
    pub ref_frames: Vec<Frame>,
}

impl RodState {
    /// At-rest rod along `positions` with space-parallel (Bishop) reference
    /// frames and zero twist angles.
    pub fn from_centerline(positions: Vec<Vec3>) -> Result<Self> {
        let ref_frames = bishop_frames(&positions, None)?;
        let n = positions.len();
        Ok(Self {
            twist_angles: vec![0.0; n - 1],
            velocities: vec![Vec3::zeros(); n],
            ref_frames,
            positions,
        })
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.positions.len().saturating_sub(1)
    }

    pub fn edge(&self, j: usize) -> Vec3 {
        self.positions[j + 1] - self.positions[j]
    }

    pub fn tangent(&self, j: usize) -> Vec3 {
        self.edge(j).normalize()
    }

    pub fn edge_center(&self, j: usize) -> Vec3 {
        (self.positions[j] + self.positions[j + 1]) * 0.5
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.edge_count()).map(|j| self.edge(j).norm()).collect()
    }

    /// Checks sizes, distinct consecutive nodes, and that every reference
    /// frame is orthonormal, right-handed and adapted to its edge.
    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if n < 2 {
            return Err(Error::DegenerateCenterline(format!(
                "rod needs at least 2 nodes, got {n}"
            )));
        }
        check_len("twist_angles", n - 1, self.twist_angles.len())?;
        check_len("velocities", n, self.velocities.len())?;
        check_len("ref_frames", n - 1, self.ref_frames.len())?;
        for (j, f) in self.ref_frames.iter().enumerate() {
            let e = self.edge(j);
            if e.norm() == 0.0 {
                return Err(Error::DegenerateCenterline(format!("edge {j} has zero length")));
            }
            if f.orthonormality_error() > FRAME_TOLERANCE
                || (f.d3 - e.normalize()).amax() > FRAME_TOLERANCE
            {
                return Err(Error::InvalidParameter(format!(
                    "reference frame {j} is not an adapted orthonormal triad"
                )));
            }
        }
        Ok(())
    }

    /// Moves the nodes to `new_positions`, parallel transporting every
    /// reference frame in time from its old tangent to the new one, followed
    /// by one Gram-Schmidt pass. Twist angles and velocities are kept.
    pub fn move_nodes(&mut self, new_positions: &[Vec3]) -> Result<()> {
        check_len("new_positions", self.positions.len(), new_positions.len())?;
        let mut frames = Vec::with_capacity(self.ref_frames.len());
        for (j, f) in self.ref_frames.iter().enumerate() {
            let e = new_positions[j + 1] - new_positions[j];
            let len = e.norm();
            if len == 0.0 {
                return Err(Error::DegenerateCenterline(format!(
                    "edge {j} collapsed to zero length"
                )));
            }
            let t_new = e / len;
            let d1 = transport_vector(&f.d3, &t_new, &f.d1)?;
            frames.push(Frame::new(d1, f.d2, t_new).orthonormalized(&t_new));
        }
        self.positions.copy_from_slice(new_positions);
        self.ref_frames = frames;
        Ok(())
    }
}

/// Returns a copy of `state` moved to `new_positions` with time-parallel
/// transported reference frames (see [`RodState::move_nodes`]).
pub fn update_reference_frames(state: &RodState, new_positions: &[Vec3]) -> Result<RodState> {
    let mut next = state.clone();
    next.move_nodes(new_positions)?;
    Ok(next)
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::SizeMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

/// Bishop frames along a polyline: the first frame is adapted to edge 0
/// (with `d1` from `first_d1` when given), each following frame is the
/// space-parallel transport of its predecessor.
pub fn bishop_frames(positions: &[Vec3], first_d1: Option<Vec3>) -> Result<Vec<Frame>> {
    if positions.len() < 2 {
        return Err(Error::DegenerateCenterline(format!(
            "need at least 2 points, got {}",
            positions.len()
        )));
    }
    let mut tangents = Vec::with_capacity(positions.len() - 1);
    for (j, w) in positions.windows(2).enumerate() {
        let e = w[1] - w[0];
        let len = e.norm();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::DegenerateCenterline(format!(
                "points {j} and {} coincide",
                j + 1
            )));
        }
        tangents.push(e / len);
    }
    let first = match first_d1 {
        Some(h) => Frame::from_tangent_and_hint(&tangents[0], &h),
        None => Frame::from_tangent(&tangents[0]),
    };
    let mut frames = Vec::with_capacity(tangents.len());
    frames.push(first);
    for j in 1..tangents.len() {
        let prev = frames[j - 1];
        let d1 = transport_vector(&tangents[j - 1], &tangents[j], &prev.d1)?;
        frames.push(Frame::new(d1, prev.d2, tangents[j]).orthonormalized(&tangents[j]));
    }
    Ok(frames)
}

/// Rest configuration of a coil: the imprinted centerline measured with its
/// Bishop frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaturalShape {
    /// `N - 1` rest edge lengths.
    pub rest_edge_lengths: Vec<f64>,
    /// `N - 2` Voronoi lengths of the interior nodes.
    pub voronoi_lengths: Vec<f64>,
    /// `N - 2` integrated rest curvatures `(kappa_1, kappa_2)`.
    pub rest_curvatures: Vec<[f64; 2]>,
    /// `N - 2` integrated rest twists.
    pub rest_twists: Vec<f64>,
}

impl NaturalShape {
    pub fn node_count(&self) -> usize {
        self.rest_edge_lengths.len() + 1
    }

    /// Straight rest shape with uniform edge length.
    pub fn straight(node_count: usize, edge_length: f64) -> Self {
        let interior = node_count.saturating_sub(2);
        Self {
            rest_edge_lengths: vec![edge_length; node_count.saturating_sub(1)],
            voronoi_lengths: vec![edge_length; interior],
            rest_curvatures: vec![[0.0; 2]; interior],
            rest_twists: vec![0.0; interior],
        }
    }

    pub fn check_compatible(&self, state: &RodState) -> Result<()> {
        let n = state.node_count();
        check_len("rest_edge_lengths", n - 1, self.rest_edge_lengths.len())?;
        check_len("voronoi_lengths", n.saturating_sub(2), self.voronoi_lengths.len())?;
        check_len("rest_curvatures", n.saturating_sub(2), self.rest_curvatures.len())?;
        check_len("rest_twists", n.saturating_sub(2), self.rest_twists.len())?;
        check_len("twist_angles", n - 1, state.twist_angles.len())?;
        check_len("ref_frames", n - 1, state.ref_frames.len())?;
        Ok(())
    }
}

/// Measures the natural shape of `centerline`: rest lengths from the
/// polyline, rest curvatures from its Bishop frame, zero rest twist.
pub fn build_natural_shape(centerline: &[Vec3]) -> Result<NaturalShape> {
    if centerline.len() < 3 {
        return Err(Error::DegenerateCenterline(format!(
            "natural shape needs at least 3 points, got {}",
            centerline.len()
        )));
    }
    let state = RodState::from_centerline(centerline.to_vec())?;
    let rest_edge_lengths = state.edge_lengths();
    let voronoi_lengths = rest_edge_lengths
        .windows(2)
        .map(|w| (w[0] + w[1]) / 2.0)
        .collect::<Vec<_>>();
    let rest_curvatures = super::energy::nodal_curvatures(&state)?;
    Ok(NaturalShape {
        rest_twists: vec![0.0; voronoi_lengths.len()],
        rest_edge_lengths,
        voronoi_lengths,
        rest_curvatures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rod::frame::parallel_transport;
    use crate::Mat3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wavy(n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let s = i as f64 * 0.1;
                Vec3::new(s, (2.0 * s).sin() * 0.3, (1.3 * s).cos() * 0.2)
            })
            .collect()
    }

    #[test]
    fn unchanged_positions_keep_frames() {
        let state = RodState::from_centerline(wavy(12)).unwrap();
        let moved = update_reference_frames(&state, &state.positions).unwrap();
        for (a, b) in state.ref_frames.iter().zip(&moved.ref_frames) {
            assert!((a.as_matrix() - b.as_matrix()).amax() < 1e-15);
        }
    }

    #[test]
    fn rigid_rotation_co_rotates_frames() {
        // Rotation axis orthogonal to every tangent: time transport of each
        // frame is exactly the rigid rotation.
        let planar: Vec<Vec3> = (0..10)
            .map(|i| Vec3::new(i as f64 * 0.1, (i as f64 * 0.7).sin() * 0.05, 0.0))
            .collect();
        let st = RodState::from_centerline(planar).unwrap();
        let rz: Mat3 = *nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), 0.9).matrix();
        let pos: Vec<Vec3> = st.positions.iter().map(|p| rz * p).collect();
        let moved = update_reference_frames(&st, &pos).unwrap();
        for (f0, f1) in st.ref_frames.iter().zip(&moved.ref_frames) {
            let e = f0.rotated_by(&rz);
            assert!((f1.as_matrix() - e.as_matrix()).amax() < 1e-10);
        }
    }

    #[test]
    fn random_small_steps_keep_frames_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = RodState::from_centerline(wavy(10)).unwrap();
        for _ in 0..10_000 {
            let pos: Vec<Vec3> = s
                .positions
                .iter()
                .map(|p| {
                    p + Vec3::new(
                        rng.random_range(-1e-3..1e-3),
                        rng.random_range(-1e-3..1e-3),
                        rng.random_range(-1e-3..1e-3),
                    )
                })
                .collect();
            s.move_nodes(&pos).unwrap();
        }
        let drift = s
            .ref_frames
            .iter()
            .map(|f| f.orthonormality_error())
            .fold(0.0, f64::max);
        assert!(drift < 1e-9, "drift {drift}");
        s.validate().unwrap();
    }

    #[test]
    fn bishop_frames_are_transported_copies() {
        let pts = wavy(9);
        let frames = bishop_frames(&pts, None).unwrap();
        for j in 1..frames.len() {
            let r = parallel_transport(&frames[j - 1].d3, &frames[j].d3).unwrap();
            assert!((r * frames[j - 1].d1 - frames[j].d1).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(bishop_frames(&[Vec3::zeros()], None).is_err());
        assert!(bishop_frames(&[Vec3::zeros(), Vec3::zeros()], None).is_err());
        assert!(build_natural_shape(&[Vec3::zeros(), Vec3::x()]).is_err());
        let mut s = RodState::from_centerline(wavy(5)).unwrap();
        s.twist_angles.pop();
        assert!(matches!(s.validate(), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn voronoi_lengths_average_neighbours() {
        let pts = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 2.0, 0.0),
            Vec3::new(1.0, 2.0, 0.5),
        ];
        let nat = build_natural_shape(&pts).unwrap();
        assert_eq!(nat.rest_edge_lengths, vec![1.0, 2.0, 0.5]);
        assert_eq!(nat.voronoi_lengths, vec![1.5, 1.25]);
        assert_eq!(nat.rest_twists, vec![0.0, 0.0]);
    }
}
