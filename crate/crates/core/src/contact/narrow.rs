use crate::{Error, Result, Vec3};

/// Closest points of two segments `p1 + s (q1 - p1)` and `p2 + t (q2 - p2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentDistance {
    /// Vector from the closest point on the first segment to the one on the second.
    pub d_min: Vec3,
    pub s: f64,
    pub t: f64,
}

impl SegmentDistance {
    pub fn distance(&self) -> f64 {
        self.d_min.norm()
    }
}

/// Minimum distance between two segments by clamped parameter minimization:
/// the unconstrained optimum of `s` is clamped, `t` is solved for and clamped,
/// and `s` is recomputed from the clamped `t`. Near-parallel pairs take the
/// closest of the four endpoint projections.
pub fn segment_segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> Result<SegmentDistance> {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let scale = (a + e + r.norm_squared()).max(f64::MIN_POSITIVE);
    if a <= 1e-24 * scale || e <= 1e-24 * scale {
        return Err(Error::DegenerateSegment);
    }
    let b = d1.dot(&d2);
    let c = d1.dot(&r);
    let f = d2.dot(&r);
    let denom = a * e - b * b;
    if denom <= 1e-14 * a * e {
        // (Nearly) parallel: the minimum lies on the boundary of the
        // parameter square, at an endpoint of one of the segments.
        return Ok(parallel_distance(p1, &d1, p2, &d2, a, e));
    }
    let mut s = ((b * f - c * e) / denom).clamp(0.0, 1.0);
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    Ok(SegmentDistance { d_min: c2 - c1, s, t })
}

fn parallel_distance(p1: &Vec3, d1: &Vec3, p2: &Vec3, d2: &Vec3, a: f64, e: f64) -> SegmentDistance {
    let mut best: Option<SegmentDistance> = None;
    let mut keep = |s: f64, t: f64| {
        let d_min = (p2 + d2 * t) - (p1 + d1 * s);
        if best.is_none_or(|b| d_min.norm_squared() < b.d_min.norm_squared()) {
            best = Some(SegmentDistance { d_min, s, t });
        }
    };
    for s in [0.0, 1.0] {
        let x = p1 + d1 * s;
        keep(s, ((x - p2).dot(d2) / e).clamp(0.0, 1.0));
    }
    for t in [0.0, 1.0] {
        let y = p2 + d2 * t;
        keep(((y - p1).dot(d1) / a).clamp(0.0, 1.0), t);
    }
    best.expect("four candidates")
}

/// Which side of a wall the rod is meant to stay on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sidedness {
    /// Closed cavity with outward normals: the rod lives inside and is pushed
    /// back even after crossing the wall plane.
    Inward,
    /// Thin shell (e.g. the catheter tube): the rod is repelled from
    /// whichever side it is on.
    TwoSided,
}

/// Node–wall contact found by projecting the node onto a triangle's plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallContact {
    /// `D2/2` minus the distance from the node to the wall plane on the rod's side.
    pub penetration: f64,
    /// Unit normal pointing from the node toward the wall.
    pub normal: Vec3,
    pub triangle: usize,
}

/// Projects `c` onto the plane of triangle `tri` (with unit `normal`). A
/// contact exists when the projection lies inside the triangle (closed) and
/// the plane distance on the rod's side is at most `half_width`.
pub fn point_triangle_contact(
    c: &Vec3,
    tri: &[Vec3; 3],
    normal: &Vec3,
    half_width: f64,
    side: Sidedness,
    triangle: usize,
) -> Result<Option<WallContact>> {
    let [a, b, v] = tri;
    let e0 = b - a;
    let e1 = v - a;
    let cross = e0.cross(&e1);
    let area2 = cross.norm_squared();
    if area2 <= 1e-24 * e0.norm_squared().max(e1.norm_squared()).powi(2) {
        return Err(Error::DegenerateTriangle);
    }
    let signed = (c - a).dot(normal);
    let q = c - normal * signed;
    // Barycentric coordinates of the projection.
    let w = q - a;
    let d00 = e0.dot(&e0);
    let d01 = e0.dot(&e1);
    let d11 = e1.dot(&e1);
    let d20 = w.dot(&e0);
    let d21 = w.dot(&e1);
    let den = d00 * d11 - d01 * d01;
    let beta = (d11 * d20 - d01 * d21) / den;
    let gamma = (d00 * d21 - d01 * d20) / den;
    let tol = 1e-12;
    if beta < -tol || gamma < -tol || beta + gamma > 1.0 + tol {
        return Ok(None);
    }
    let (height, n_c) = match side {
        // Rod side is opposite the outward normal.
        Sidedness::Inward => (-signed, *normal),
        Sidedness::TwoSided => {
            if signed >= 0.0 {
                (signed, -*normal)
            } else {
                (-signed, *normal)
            }
        }
    };
    if height > half_width {
        return Ok(None);
    }
    Ok(Some(WallContact {
        penetration: half_width - height,
        normal: n_c,
        triangle,
    }))
}
