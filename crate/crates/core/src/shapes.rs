//! Natural coil centerlines and stiffness constants derived from stock-wire data.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use nalgebra::{Rotation3, Unit};

use crate::rod::{Frame, Stiffness};
use crate::{Error, Result, Vec3};

/// Default axial penalty `alpha` [J/m].
pub const DEFAULT_STRETCH_PENALTY: f64 = 1e-1;

/// Geometry and material of a coil.
///
/// `d1` is the stock wire diameter, `d2` the diameter of the primary helix the
/// wire is wound into (the simulated rod), `d3` the diameter of the imprinted
/// secondary shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoilSpec {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Winding pitch relative to `d1`; the turn spacing is `p_c = d1 * pitch_factor`.
    pub pitch_factor: f64,
    /// Centerline length [m].
    pub length: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
}

impl Default for CoilSpec {
    fn default() -> Self {
        Self {
            d1: 50e-6,
            d2: 305e-6,
            d3: 4e-3,
            pitch_factor: 1.1,
            length: 0.1,
            youngs_modulus: 230e9,
            poisson_ratio: 0.4,
            density: 21e3,
        }
    }
}

impl CoilSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("youngs_modulus", self.youngs_modulus),
            ("density", self.density),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.d1 < self.d2 && self.d2 < self.d3) {
            return Err(Error::InvalidParameter(format!(
                "diameters must satisfy d1 < d2 < d3, got {} / {} / {}",
                self.d1, self.d2, self.d3
            )));
        }
        if !(self.pitch_factor > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pitch factor must exceed 1, got {}",
                self.pitch_factor
            )));
        }
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "length must be non-negative, got {}",
                self.length
            )));
        }
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "poisson ratio out of range: {}",
                self.poisson_ratio
            )));
        }
        Ok(())
    }

    /// Turn spacing of the primary winding `p_c = d1 * p`.
    pub fn turn_spacing(&self) -> f64 {
        self.d1 * self.pitch_factor
    }

    /// Rest edge length of the discretization (one primary diameter).
    pub fn edge_length(&self) -> f64 {
        self.d2
    }

    /// Lumped node mass: stock wire cross-section times the wire length
    /// wound into one centerline increment, `rho * pi d1^2/4 * edge * pi d2 / p_c`.
    pub fn node_mass(&self, edge_length: f64) -> f64 {
        let wire_length = edge_length * PI * self.d2 / self.turn_spacing();
        self.density * PI * self.d1 * self.d1 / 4.0 * wire_length
    }
}

/// Bending and twisting stiffness of the wound wire treated as a torsion spring:
/// `b = E d1^4 p_c / (32 (2 + mu) d2)`, `beta = E d1^4 p_c / (64 d2)`.
pub fn spring_constants(spec: &CoilSpec, stretch: f64) -> Result<Stiffness> {
    spec.validate()?;
    let numerator = spec.youngs_modulus * spec.d1.powi(4) * spec.turn_spacing();
    Stiffness::new(
        stretch,
        numerator / (32.0 * (2.0 + spec.poisson_ratio) * spec.d2),
        numerator / (64.0 * spec.d2),
    )
}

/// Node count for a centerline of length `length` sampled at `edge_length`.
pub fn node_count(length: f64, edge_length: f64) -> usize {
    if length <= 0.0 {
        return 0;
    }
    (length / edge_length).round() as usize + 1
}

fn check_sampling(length: f64, edge_length: f64) -> Result<()> {
    if !(length > 0.0 && edge_length > 0.0 && edge_length <= length) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < edge length <= length, got {edge_length} and {length}"
        )));
    }
    Ok(())
}

/// Straight centerline along +x starting at the origin.
pub fn make_straight(length: f64, edge_length: f64) -> Result<Vec<Vec3>> {
    check_sampling(length, edge_length)?;
    Ok((0..node_count(length, edge_length))
        .map(|i| Vec3::new(i as f64 * edge_length, 0.0, 0.0))
        .collect())
}

/// Helix of diameter `d3` about the z axis advancing `pitch` per turn,
/// sampled with chords of exactly `edge_length`.
pub fn make_helix(d3: f64, pitch: f64, length: f64, edge_length: f64) -> Result<Vec<Vec3>> {
    check_sampling(length, edge_length)?;
    if !(d3 > 0.0) || pitch < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "helix needs d3 > 0 and pitch >= 0, got {d3} / {pitch}"
        )));
    }
    let r = d3 / 2.0;
    let c = pitch / (2.0 * PI);
    if pitch == 0.0 && edge_length >= d3 {
        return Err(Error::InvalidParameter(
            "edge length must be below the circle diameter".into(),
        ));
    }
    let chord = |a: f64| (4.0 * r * r * (a / 2.0).sin().powi(2) + c * c * a * a).sqrt();
    // Chord length is increasing in the angle step on (0, pi].
    let (mut lo, mut hi) = (0.0, PI);
    if chord(hi) < edge_length {
        hi = edge_length / c.max(f64::MIN_POSITIVE);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chord(mid) < edge_length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let step = 0.5 * (lo + hi);
    Ok((0..node_count(length, edge_length))
        .map(|i| {
            let a = i as f64 * step;
            Vec3::new(r * a.cos(), r * a.sin(), c * a)
        })
        .collect())
}

/// Three-dimensional framing shape: a chain of circular loops of radius
/// `0.85 d3/2 * u` (`u ~ U[0.8, 1]`) inscribed in a sphere slightly smaller
/// than `d3`, so that the transitions between loops stay within diameter `d3`.
/// The curve follows each loop for a random 5/8 to 7/8 of a turn; the next
/// loop passes through the point where it left off, its plane tilted about
/// the radial direction so as to pull the running centroid back toward the
/// sphere center. Turning per edge is capped below that of a radius `0.2 d3`
/// arc.
/// Deterministic for a fixed seed.
pub fn make_3d_frame_shape(d3: f64, length: f64, edge_length: f64, seed: u64) -> Result<Vec<Vec3>> {
    check_sampling(length, edge_length)?;
    if !(d3 > 0.0) || edge_length >= 0.2 * d3 {
        return Err(Error::InvalidParameter(format!(
            "frame shape needs 0 < edge length < 0.2 d3, got {edge_length} / {d3}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Loops sit slightly inside the sphere, leaving room for the capped turns
    // between them.
    let sphere_r = 0.85 * d3 / 2.0;
    let max_turn = 0.98 * 2.0 * (2.5 * edge_length / d3).atan();
    let lookahead = 2.0 * edge_length;

    let n = node_count(length, edge_length);
    let start = random_unit(&mut rng);
    let side = Frame::from_tangent(&start).d1;
    let first_normal = loop_normal(&start, &side, rng.random_range(0.8..=1.0));
    let mut lp = Loop::through(&(start * sphere_r), &first_normal, sphere_r);
    let mut pos = lp.point_at(0.0);
    let mut tangent = lp.b;
    let mut pts = Vec::with_capacity(n);
    pts.push(pos);
    let mut progress = 0.0;
    let mut last_angle = lp.angle_of(&pos);
    let mut loops = 0.0;
    let mut sweep = rng.random_range(1.25 * PI..1.75 * PI);
    while pts.len() < n {
        let angle = lp.angle_of(&pos);
        let target = lp.point_at(angle + lookahead / lp.radius);
        let mut desired = (target - pos).normalize();
        if pos.norm() > sphere_r {
            // Outside the loop sphere: head back inward.
            let radial = pos.normalize();
            let out = desired.dot(&radial) + 0.5;
            if out > 0.0 {
                desired = (desired - radial * out).normalize();
            }
        }
        let turn = tangent.dot(&desired).clamp(-1.0, 1.0).acos();
        if turn > 1e-14 {
            let axis = tangent.cross(&desired);
            let axis = if axis.norm() > 1e-14 {
                axis.normalize()
            } else {
                Frame::from_tangent(&tangent).d1
            };
            let rot = Rotation3::from_axis_angle(&Unit::new_unchecked(axis), turn.min(max_turn));
            tangent = (rot * tangent).normalize();
        }
        pos += tangent * edge_length;
        pts.push(pos);

        let angle = lp.angle_of(&pos);
        let mut delta = angle - last_angle;
        if delta > PI {
            delta -= 2.0 * PI;
        } else if delta < -PI {
            delta += 2.0 * PI;
        }
        progress += delta;
        last_angle = angle;
        if progress >= sweep {
            let radial = pos.normalize();
            let mean: Vec3 = pts.iter().sum::<Vec3>() / pts.len() as f64;
            loops += 1.0;
            let drift = mean * (loops / sphere_r);
            let e1 = Frame::from_tangent_and_hint(&radial, &lp.normal).d1;
            // Among a few random tilts keep the one whose loop center best
            // pulls the running centroid back toward the origin.
            let mut best: Option<(f64, Vec3)> = None;
            for _ in 0..6 {
                let psi = rng.random_range(PI / 6.0..2.0 * PI / 3.0);
                let psi = if rng.random_bool(0.5) { psi } else { -psi };
                let u = rng.random_range(0.8..=1.0);
                let e = Rotation3::from_axis_angle(&Unit::new_unchecked(radial), psi) * e1;
                let normal = loop_normal(&radial, &e, u);
                let score = (drift + normal * normal.dot(&radial)).norm();
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, normal));
                }
            }
            let normal = best.map(|(_, n)| n).unwrap_or(e1);
            lp = Loop::through(&pos, &normal, sphere_r);
            // Travel the new loop in the direction closest to the current tangent.
            if lp.direction_at(&pos).dot(&tangent) < 0.0 {
                lp.b = -lp.b;
            }
            progress = 0.0;
            sweep = rng.random_range(1.25 * PI..1.75 * PI);
            last_angle = lp.angle_of(&pos);
        }
    }
    Ok(pts)
}

/// Normal of the loop through radial direction `radial` with radius fraction
/// `u`; `side` (orthogonal to `radial`) picks the tilt direction.
fn loop_normal(radial: &Vec3, side: &Vec3, u: f64) -> Vec3 {
    let s = (1.0 - u * u).max(0.0).sqrt();
    radial * s + side * u
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let cos_polar: f64 = rng.random_range(-1.0..=1.0);
    let sin_polar = (1.0 - cos_polar * cos_polar).sqrt();
    let az: f64 = rng.random_range(0.0..2.0 * PI);
    Vec3::new(sin_polar * az.cos(), sin_polar * az.sin(), cos_polar)
}

struct Loop {
    center: Vec3,
    normal: Vec3,
    a: Vec3,
    b: Vec3,
    radius: f64,
}

impl Loop {
    /// Circle on the sphere of radius `sphere_r` through `p` (projected onto
    /// the sphere) whose plane has normal `normal`.
    fn through(p: &Vec3, normal: &Vec3, sphere_r: f64) -> Self {
        let normal = normal.normalize();
        let q = p.normalize() * sphere_r;
        let center = normal * normal.dot(&q);
        let a = (q - center).normalize();
        Self {
            center,
            normal,
            a,
            b: normal.cross(&a),
            radius: (q - center).norm(),
        }
    }

    fn angle_of(&self, p: &Vec3) -> f64 {
        let d = p - self.center;
        d.dot(&self.b).atan2(d.dot(&self.a))
    }

    fn point_at(&self, angle: f64) -> Vec3 {
        self.center + (self.a * angle.cos() + self.b * angle.sin()) * self.radius
    }

    fn direction_at(&self, p: &Vec3) -> Vec3 {
        let ang = self.angle_of(p);
        -self.a * ang.sin() + self.b * ang.cos()
    }
}

/// Natural shape generator selectable by name from a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeSpec {
    Straight,
    Helix {
        /// Axial advance per turn [m]; defaults to `1.2 * d2`.
        #[serde(default)]
        pitch: Option<f64>,
    },
    Frame3d {
        #[serde(default)]
        seed: u64,
    },
}

impl ShapeSpec {
    pub fn generate(&self, coil: &CoilSpec) -> Result<Vec<Vec3>> {
        let edge = coil.edge_length();
        match self {
            ShapeSpec::Straight => make_straight(coil.length, edge),
            ShapeSpec::Helix { pitch } => {
                make_helix(coil.d3, pitch.unwrap_or(1.2 * coil.d2), coil.length, edge)
            }
            ShapeSpec::Frame3d { seed } => make_3d_frame_shape(coil.d3, coil.length, edge, *seed),
        }
    }
}

/// Reads a centerline with one `x,y,z` row per node; a non-numeric first row
/// is treated as a header.
pub fn read_centerline_csv<R: Read>(reader: R) -> Result<Vec<Vec3>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut pts = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidParameter(format!("csv row {row}: {e}")))?;
        if rec.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "csv row {row}: expected 3 columns, found {}",
                rec.len()
            )));
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => pts.push(Vec3::new(v[0], v[1], v[2])),
            Err(_) if row == 0 => continue,
            Err(e) => return Err(Error::InvalidParameter(format!("csv row {row}: {e}"))),
        }
    }
    Ok(pts)
}

pub fn write_centerline_csv<W: Write>(writer: W, pts: &[Vec3]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["x", "y", "z"]).map_err(io)?;
    for p in pts {
        w.write_record([
            format!("{:e}", p.x),
            format!("{:e}", p.y),
            format!("{:e}", p.z),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
