use super::frame::{curvature_binormal, signed_angle, transport_vector, Frame};
use super::state::{NaturalShape, RodState, Stiffness};
use crate::Result;

/// Material frames: each reference frame rotated about its tangent by the
/// edge's twist angle.
pub fn material_frames(state: &RodState) -> Vec<Frame> {
    state
        .ref_frames
        .iter()
        .zip(&state.twist_angles)
        .map(|(f, &phi)| f.rotated_about_tangent(phi))
        .collect()
}

/// Reference twist at each interior node: the signed angle about `t^i` from
/// the space-parallel transport of `u^{i-1}` to `u^i`. Zero for Bishop
/// reference frames.
pub fn reference_twists(state: &RodState) -> Result<Vec<f64>> {
    let f = &state.ref_frames;
    (1..f.len())
        .map(|i| {
            let u = transport_vector(&f[i - 1].d3, &f[i].d3, &f[i - 1].d1)?;
            Ok(signed_angle(&u, &f[i].d1, &f[i].d3))
        })
        .collect()
}

/// Integrated twist at each interior node `i`: `phi^i - phi^{i-1}` plus the
/// reference twist.
pub fn edge_twists(state: &RodState) -> Result<Vec<f64>> {
    let m = reference_twists(state)?;
    Ok(m
        .iter()
        .enumerate()
        .map(|(k, mk)| state.twist_angles[k + 1] - state.twist_angles[k] + mk)
        .collect())
}

/// Integrated nodal curvatures `(kappa_1, kappa_2)` of the interior nodes:
/// `kappa_1 = (d2^{i-1} + d2^i) . kb_i / 2`, `kappa_2 = -(d1^{i-1} + d1^i) . kb_i / 2`.
pub fn nodal_curvatures(state: &RodState) -> Result<Vec<[f64; 2]>> {
    let frames = material_frames(state);
    (1..frames.len())
        .map(|i| {
            let (a, b) = (&frames[i - 1], &frames[i]);
            let kb = curvature_binormal(&a.d3, &b.d3)?;
            Ok([
                0.5 * (a.d2 + b.d2).dot(&kb),
                -0.5 * (a.d1 + b.d1).dot(&kb),
            ])
        })
        .collect()
}

/// Stretching, bending and twisting parts of the strain energy [J].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyTerms {
    pub stretch: f64,
    pub bend: f64,
    pub twist: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.stretch + self.bend + self.twist
    }
}

pub fn energy_terms(state: &RodState, nat: &NaturalShape, k: &Stiffness) -> Result<EnergyTerms> {
    nat.check_compatible(state)?;
    let mut terms = EnergyTerms::default();
    for (j, &rest) in nat.rest_edge_lengths.iter().enumerate() {
        let strain = state.edge(j).norm() / rest - 1.0;
        terms.stretch += 0.5 * k.stretch * strain * strain * rest;
    }
    if state.node_count() < 3 {
        return Ok(terms);
    }
    let kappa = nodal_curvatures(state)?;
    let tau = edge_twists(state)?;
    for (i, l) in nat.voronoi_lengths.iter().enumerate() {
        let [k1, k2] = kappa[i];
        let [r1, r2] = nat.rest_curvatures[i];
        let d1 = k1 - r1;
        let d2 = k2 - r2;
        terms.bend += k.bend / (2.0 * l) * (d1 * d1 + d2 * d2);
        let dt = tau[i] - nat.rest_twists[i];
        terms.twist += k.twist / (2.0 * l) * dt * dt;
    }
    Ok(terms)
}

/// Discrete strain energy of the rod relative to its natural shape.
pub fn total_energy(state: &RodState, nat: &NaturalShape, k: &Stiffness) -> Result<f64> {
    energy_terms(state, nat, k).map(|t| t.total())
}

/// Kinetic energy of a rod with uniform lumped node mass.
pub fn kinetic_energy(state: &RodState, node_mass: f64) -> f64 {
    0.5 * node_mass * state.velocities.iter().map(|v| v.norm_squared()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rod::state::{bishop_frames, build_natural_shape};
    use crate::{Error, Vec3};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn planar_arc(n: usize, turn: f64) -> Vec<Vec3> {
        let mut pts = vec![Vec3::zeros()];
        let mut dir: f64 = 0.0;
        for _ in 1..n {
            let p = pts.last().unwrap() + Vec3::new(dir.cos(), dir.sin(), 0.0);
            pts.push(p);
            dir += turn;
        }
        pts
    }

    #[test]
    fn straight_rod_has_zero_curvature() {
        let pts: Vec<Vec3> = (0..6).map(|i| Vec3::new(0.0, 0.0, i as f64)).collect();
        let mut s = RodState::from_centerline(pts).unwrap();
        s.twist_angles = vec![0.1, -0.4, 2.0, 0.3, 1.0];
        for k in nodal_curvatures(&s).unwrap() {
            assert_eq!(k, [0.0, 0.0]);
        }
    }

    #[test]
    fn planar_arc_curvature_along_d2() {
        // Binormal is +z; reference d1 chosen so that d2 = +z on every edge.
        let pts = planar_arc(6, 0.3);
        let frames = bishop_frames(&pts, Some(Vec3::y())).unwrap();
        let mut s = RodState::from_centerline(pts).unwrap();
        s.ref_frames = frames;
        for f in &s.ref_frames {
            assert!((f.d2 - Vec3::z()).norm() < 1e-12);
        }
        let kb_mag = 2.0 * (0.3f64 / 2.0).tan();
        for [k1, k2] in nodal_curvatures(&s).unwrap() {
            assert!((k1 - kb_mag).abs() < 1e-12);
            assert!(k2.abs() < 1e-12);
        }
    }

    #[test]
    fn circle_curvature_converges() {
        let radius = 0.7;
        let mut prev_err = f64::INFINITY;
        for n in [16usize, 32, 64, 128] {
            let dtheta = 2.0 * PI / n as f64;
            let pts: Vec<Vec3> = (0..n / 2)
                .map(|i| {
                    let a = i as f64 * dtheta;
                    Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
                })
                .collect();
            let nat = build_natural_shape(&pts).unwrap();
            let [k1, k2] = nat.rest_curvatures[3];
            let kappa = (k1 * k1 + k2 * k2).sqrt() / nat.voronoi_lengths[3];
            let err = (kappa - 1.0 / radius).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err * radius < 1e-3);
    }

    #[test]
    fn material_frames_rotate_reference() {
        let pts = planar_arc(4, 0.2);
        let mut s = RodState::from_centerline(pts).unwrap();
        assert_eq!(material_frames(&s), s.ref_frames);
        s.twist_angles[1] = FRAC_PI_2;
        let m = material_frames(&s);
        assert!((m[1].d1 - s.ref_frames[1].d2).norm() < 1e-15);
        assert!((m[1].d2 + s.ref_frames[1].d1).norm() < 1e-15);
        s.twist_angles = vec![0.3, -7.0, 12.5];
        for f in material_frames(&s) {
            assert!(f.orthonormality_error() < 1e-12);
        }
    }

    #[test]
    fn twists_are_angle_increments() {
        let pts = planar_arc(4, 0.0);
        let mut s = RodState::from_centerline(pts).unwrap();
        assert_eq!(edge_twists(&s).unwrap(), vec![0.0, 0.0]);
        s.twist_angles = vec![0.0, 0.3, 0.3];
        let tau = edge_twists(&s).unwrap();
        assert!((tau[0] - 0.3).abs() < 1e-15 && tau[1].abs() < 1e-15);
    }

    #[test]
    fn natural_state_has_zero_energy() {
        let pts: Vec<Vec3> = (0..30)
            .map(|i| {
                let a = i as f64 * 0.3;
                Vec3::new(a.cos(), a.sin(), 0.05 * a)
            })
            .collect();
        let nat = build_natural_shape(&pts).unwrap();
        let s = RodState::from_centerline(pts).unwrap();
        let k = Stiffness::new(1.0, 2.0, 3.0).unwrap();
        assert!(total_energy(&s, &nat, &k).unwrap().abs() < 1e-14);
    }

    #[test]
    fn single_stretched_edge() {
        let nat = NaturalShape::straight(4, 0.5);
        let pts = vec![
            Vec3::zeros(),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(1.05, 0.0, 0.0),
            Vec3::new(1.55, 0.0, 0.0),
        ];
        let s = RodState::from_centerline(pts).unwrap();
        let k = Stiffness {
            stretch: 3.0,
            bend: 0.0,
            twist: 0.0,
        };
        let e = total_energy(&s, &nat, &k).unwrap();
        let expected = 0.5 * 3.0 * 0.1f64.powi(2) * 0.5;
        assert!((e - expected).abs() < 1e-14, "{e} vs {expected}");
    }

    #[test]
    fn size_mismatch_is_reported() {
        let nat = NaturalShape::straight(5, 1.0);
        let s = RodState::from_centerline(planar_arc(4, 0.1)).unwrap();
        let k = Stiffness::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            total_energy(&s, &nat, &k),
            Err(Error::SizeMismatch { .. })
        ));
    }
}
