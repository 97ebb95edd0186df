use crate::{Error, Mat3, Result, Vec3};

/// Tangent pairs with `t_from . t_to <= -1 + ANTI_PARALLEL_EPS` are rejected.
pub const ANTI_PARALLEL_EPS: f64 = 1e-9;

/// Orthonormal right-handed director triad attached to an edge.
///
/// The frame is adapted when `d3` equals the edge tangent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub d1: Vec3,
    pub d2: Vec3,
    pub d3: Vec3,
}

impl Frame {
    pub fn new(d1: Vec3, d2: Vec3, d3: Vec3) -> Self {
        Self { d1, d2, d3 }
    }

    /// Adapted frame for `tangent` with `d1` picked deterministically from the
    /// coordinate axis least aligned with the tangent.
    pub fn from_tangent(tangent: &Vec3) -> Self {
        let t = tangent.normalize();
        let a = t.abs();
        let axis = if a.x <= a.y && a.x <= a.z {
            Vec3::x()
        } else if a.y <= a.z {
            Vec3::y()
        } else {
            Vec3::z()
        };
        Self::from_tangent_and_hint(&t, &axis)
    }

    /// Adapted frame whose `d1` is the component of `hint` orthogonal to `tangent`.
    pub fn from_tangent_and_hint(tangent: &Vec3, hint: &Vec3) -> Self {
        let t = tangent.normalize();
        let d1 = (hint - t * hint.dot(&t)).normalize();
        Self {
            d1,
            d2: t.cross(&d1),
            d3: t,
        }
    }

    /// Rotates the two cross-section directors about `d3` by `angle`:
    /// `d1' = cos(a) d1 + sin(a) d2`, `d2' = -sin(a) d1 + cos(a) d2`.
    pub fn rotated_about_tangent(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            d1: self.d1 * c + self.d2 * s,
            d2: -self.d1 * s + self.d2 * c,
            d3: self.d3,
        }
    }

    pub fn transported(&self, t_from: &Vec3, t_to: &Vec3) -> Result<Self> {
        Ok(Self {
            d1: transport_vector(t_from, t_to, &self.d1)?,
            d2: transport_vector(t_from, t_to, &self.d2)?,
            d3: *t_to,
        })
    }

    /// One Gram-Schmidt pass that re-adapts the frame to `tangent`.
    pub fn orthonormalized(&self, tangent: &Vec3) -> Self {
        let d3 = tangent.normalize();
        let d1 = (self.d1 - d3 * self.d1.dot(&d3)).normalize();
        Self {
            d1,
            d2: d3.cross(&d1),
            d3,
        }
    }

    /// Largest deviation of the Gram matrix from identity, plus the
    /// handedness defect `|d1 x d2 - d3|`.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.as_matrix();
        let g = m.transpose() * m - Mat3::identity();
        let hand = (self.d1.cross(&self.d2) - self.d3).amax();
        g.amax().max(hand)
    }

    /// Directors as matrix columns.
    pub fn as_matrix(&self) -> Mat3 {
        Mat3::from_columns(&[self.d1, self.d2, self.d3])
    }

    pub fn rotated_by(&self, r: &Mat3) -> Self {
        Self {
            d1: r * self.d1,
            d2: r * self.d2,
            d3: r * self.d3,
        }
    }
}

fn check_dot(t_from: &Vec3, t_to: &Vec3) -> Result<f64> {
    let dot = t_from.dot(t_to);
    if dot <= -1.0 + ANTI_PARALLEL_EPS {
        return Err(Error::AntiParallelTangents { dot });
    }
    Ok(dot)
}

/// Rotation taking unit vector `t_from` onto unit vector `t_to` about the axis
/// `t_from x t_to` (Rodrigues form `I + K + K^2 / (1 + c)`).
pub fn parallel_transport(t_from: &Vec3, t_to: &Vec3) -> Result<Mat3> {
    let c = check_dot(t_from, t_to)?;
    let k = t_from.cross(t_to).cross_matrix();
    Ok(Mat3::identity() + k + k * k / (1.0 + c))
}

/// Applies [`parallel_transport`] to `v` without forming the matrix.
pub fn transport_vector(t_from: &Vec3, t_to: &Vec3, v: &Vec3) -> Result<Vec3> {
    let c = check_dot(t_from, t_to)?;
    let w = t_from.cross(t_to);
    let wv = w.cross(v);
    Ok(v + wv + w.cross(&wv) / (1.0 + c))
}

/// Discrete integrated curvature binormal `2 t_prev x t_next / (1 + t_prev . t_next)`.
pub fn curvature_binormal(t_prev: &Vec3, t_next: &Vec3) -> Result<Vec3> {
    let c = check_dot(t_prev, t_next)?;
    Ok(t_prev.cross(t_next) * (2.0 / (1.0 + c)))
}

/// Signed angle from `a` to `b` about `axis` (both assumed orthogonal to `axis`).
pub fn signed_angle(a: &Vec3, b: &Vec3, axis: &Vec3) -> f64 {
    a.cross(b).dot(axis).atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_3;

    fn random_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    #[test]
    fn transport_identity() {
        let t = Vec3::z();
        let r = parallel_transport(&t, &t).unwrap();
        assert!((r - Mat3::identity()).amax() < 1e-15);
    }

    #[test]
    fn transport_quarter_turn() {
        let r = parallel_transport(&Vec3::x(), &Vec3::y()).unwrap();
        // Rotation by pi/2 about z, evaluated by hand.
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((r - expected).amax() < 1e-15);
        assert!((r * Vec3::x() - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn transport_random_pairs_in_so3() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let a = random_unit(&mut rng);
            let b = random_unit(&mut rng);
            if a.dot(&b) <= -0.99 {
                continue;
            }
            let r = parallel_transport(&a, &b).unwrap();
            assert!((r.transpose() * r - Mat3::identity()).amax() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
            assert!((r * a - b).amax() < 1e-12);
            // axis is fixed
            let axis = a.cross(&b);
            if axis.norm() > 1e-6 {
                assert!((r * axis - axis).amax() < 1e-12);
            }
            let v = random_unit(&mut rng);
            assert!((r * v - transport_vector(&a, &b, &v).unwrap()).amax() < 1e-12);
        }
    }

    #[test]
    fn transport_rejects_anti_parallel() {
        let err = parallel_transport(&Vec3::x(), &-Vec3::x()).unwrap_err();
        assert!(matches!(err, Error::AntiParallelTangents { .. }));
        let nearly = Vec3::new(-1.0, 1e-6, 0.0).normalize();
        assert!(parallel_transport(&Vec3::x(), &nearly).is_err());
    }

    #[test]
    fn curvature_binormal_cases() {
        assert_eq!(curvature_binormal(&Vec3::x(), &Vec3::x()).unwrap(), Vec3::zeros());
        let kb = curvature_binormal(&Vec3::x(), &Vec3::y()).unwrap();
        assert!((kb - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-15);
        let t2 = Vec3::new(FRAC_PI_3.cos(), FRAC_PI_3.sin(), 0.0);
        let kb = curvature_binormal(&Vec3::x(), &t2).unwrap();
        assert!((kb.norm() - 2.0 * (FRAC_PI_3 / 2.0).tan()).abs() < 1e-14);
        assert!((kb.norm() - 1.1547005383792515).abs() < 1e-12);
        assert!(kb.dot(&Vec3::x()).abs() < 1e-15 && kb.dot(&t2).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_of_frame() {
        let f = Frame::from_tangent(&Vec3::z());
        let g = f.rotated_about_tangent(std::f64::consts::FRAC_PI_2);
        assert!((g.d1 - f.d2).norm() < 1e-15);
        assert!((g.d2 + f.d1).norm() < 1e-15);
        assert!(g.orthonormality_error() < 1e-15);
    }

    #[test]
    fn frames_from_tangent_are_right_handed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let t = random_unit(&mut rng);
            let f = Frame::from_tangent(&t);
            assert!(f.orthonormality_error() < 1e-14);
            assert!((f.d3 - t).norm() < 1e-15);
            let phi = rng.random_range(-10.0..10.0);
            assert!(f.rotated_about_tangent(phi).orthonormality_error() < 1e-12);
        }
    }
}
