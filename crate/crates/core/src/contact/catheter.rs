use serde::{Deserialize, Serialize};

use crate::mesh::TriangleMesh;
use crate::rod::{bishop_frames, Frame};
use crate::{Error, Result, Vec3};

/// Micro-catheter: a tube of `radius` around the quadratic Bezier curve
/// through control points `p0, p1, p2`. The coil leaves at `p2` (the tip).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catheter {
    pub control: [Vec3; 3],
    pub radius: f64,
}

impl Catheter {
    pub fn new(control: [Vec3; 3], radius: f64) -> Result<Self> {
        let c = Self { control, radius };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let [p0, p1, p2] = &self.control;
        let scale = (p2 - p0).norm().max((p1 - p0).norm());
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        if (p1 - p0).norm() <= tol || (p2 - p1).norm() <= tol || (p2 - p0).norm() <= tol {
            return Err(Error::DegenerateSpline("control points must be distinct".into()));
        }
        // The derivative 2((1-u)(p1-p0) + u(p2-p1)) vanishes somewhere on
        // [0, 1] only when the two legs are antiparallel.
        let (a, b) = ((p1 - p0).normalize(), (p2 - p1).normalize());
        if a.dot(&b) <= -1.0 + 1e-12 {
            return Err(Error::DegenerateSpline("spline folds back on itself".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::DegenerateSpline(format!(
                "tube radius must be positive, got {}",
                self.radius
            )));
        }
        Ok(())
    }

    pub fn point(&self, u: f64) -> Vec3 {
        let [p0, p1, p2] = &self.control;
        p0 * ((1.0 - u) * (1.0 - u)) + p1 * (2.0 * u * (1.0 - u)) + p2 * (u * u)
    }

    pub fn derivative(&self, u: f64) -> Vec3 {
        let [p0, p1, p2] = &self.control;
        ((p1 - p0) * (1.0 - u) + (p2 - p1) * u) * 2.0
    }

    pub fn tip(&self) -> Vec3 {
        self.control[2]
    }

    /// Unit feed direction at the tip.
    pub fn tip_direction(&self) -> Vec3 {
        self.derivative(1.0).normalize()
    }

    /// Same catheter with its tip moved by `offset`, the middle control
    /// point following so that the last leg keeps its direction.
    pub fn with_tip_offset(&self, offset: &Vec3) -> Result<Self> {
        let [p0, p1, p2] = self.control;
        Self::new([p0, p1 + offset, p2 + offset], self.radius)
    }

    /// Spline parameter of the axis point closest to `p`, and its distance.
    pub fn closest_axis_point(&self, p: &Vec3) -> (f64, f64) {
        let samples = 32;
        let mut best_u = 0.0;
        let mut best = f64::INFINITY;
        for k in 0..=samples {
            let u = k as f64 / samples as f64;
            let d = (self.point(u) - p).norm_squared();
            if d < best {
                best = d;
                best_u = u;
            }
        }
        let [p0, p1, p2] = &self.control;
        let second = (p0 - p1 * 2.0 + p2) * 2.0;
        let mut u = best_u;
        for _ in 0..20 {
            let r = self.point(u) - p;
            let d1 = self.derivative(u);
            let g = r.dot(&d1);
            let h = d1.norm_squared() + r.dot(&second);
            if h <= 0.0 {
                break;
            }
            let next = (u - g / h).clamp(0.0, 1.0);
            if (next - u).abs() < 1e-15 {
                u = next;
                break;
            }
            u = next;
        }
        let d = (self.point(u) - p).norm();
        if d * d <= best {
            (u, d)
        } else {
            (best_u, best.sqrt())
        }
    }

    /// Whether `p` is inside the tube: closer to the axis than the radius
    /// with its closest axis point strictly inside the tube's extent.
    pub fn contains(&self, p: &Vec3) -> bool {
        let (u, d) = self.closest_axis_point(p);
        d < self.radius && u > 0.0 && u < 1.0
    }

    /// Open tube (no caps) around the spline, `rings` cross-sections of
    /// `segments` vertices each, framed by parallel transport along the axis;
    /// normals point away from the axis.
    pub fn mesh(&self, rings: usize, segments: usize) -> Result<TriangleMesh> {
        self.validate()?;
        if rings < 2 || segments < 3 {
            return Err(Error::InvalidParameter(
                "catheter mesh needs at least 2 rings of 3 vertices".into(),
            ));
        }
        let axis: Vec<Vec3> = (0..rings)
            .map(|i| self.point(i as f64 / (rings - 1) as f64))
            .collect();
        let tangents: Vec<Vec3> = (0..rings)
            .map(|i| self.derivative(i as f64 / (rings - 1) as f64).normalize())
            .collect();
        // Frames on the axis polyline, then re-adapted to the exact tangents.
        let mut frames: Vec<Frame> = bishop_frames(&axis, None)?;
        frames.push(*frames.last().expect("at least one edge"));
        let frames: Vec<Frame> = frames
            .iter()
            .zip(&tangents)
            .map(|(f, t)| f.orthonormalized(t))
            .collect();
        let mut verts = Vec::with_capacity(rings * segments);
        for (c, f) in axis.iter().zip(&frames) {
            for j in 0..segments {
                let a = 2.0 * std::f64::consts::PI * j as f64 / segments as f64;
                verts.push(c + (f.d1 * a.cos() + f.d2 * a.sin()) * self.radius);
            }
        }
        let idx = |i: usize, j: usize| i * segments + j % segments;
        let mut tris = Vec::with_capacity(2 * (rings - 1) * segments);
        for i in 0..rings - 1 {
            for j in 0..segments {
                // Counter-clockwise seen from outside when d1 x d2 = t.
                tris.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
                tris.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
            }
        }
        TriangleMesh::new(verts, tris)
    }

    /// Mesh with rings and segments chosen so that edges stay below `max_edge`.
    pub fn mesh_with_edge(&self, max_edge: f64) -> Result<TriangleMesh> {
        let target = max_edge / 2f64.sqrt();
        let len = self.arc_length();
        let rings = ((len / target).ceil() as usize + 1).max(2);
        let segments = ((2.0 * std::f64::consts::PI * self.radius / target).ceil() as usize).max(6);
        self.mesh(rings, segments)
    }

    pub fn arc_length(&self) -> f64 {
        let n = 256;
        (0..n)
            .map(|k| (self.point((k + 1) as f64 / n as f64) - self.point(k as f64 / n as f64)).norm())
            .sum()
    }
}
