//! Triangle meshes: storage, validation, file IO and fixture generators.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::{Error, Result, Vec3};

/// Triangulated surface with cached per-triangle normal, centroid and
/// bounding-sphere radius about the centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<Vec3>,
    pub centroids: Vec<Vec3>,
    pub bounding_radii: Vec<f64>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut normals = Vec::with_capacity(triangles.len());
        let mut centroids = Vec::with_capacity(triangles.len());
        let mut radii = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::MeshFormat(format!(
                    "triangle {k} references a missing vertex"
                )));
            }
            let [a, b, c] = t.map(|i| vertices[i]);
            let n = (b - a).cross(&(c - a));
            let len = n.norm();
            let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
            if !(len > 1e-12 * scale * scale) {
                return Err(Error::DegenerateTriangle);
            }
            let g = (a + b + c) / 3.0;
            normals.push(n / len);
            centroids.push(g);
            radii.push((a - g).norm().max((b - g).norm()).max((c - g).norm()));
        }
        Ok(Self {
            vertices,
            triangles,
            normals,
            centroids,
            bounding_radii: radii,
        })
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, k: usize) -> [Vec3; 3] {
        self.triangles[k].map(|i| self.vertices[i])
    }

    /// Same surface with every triangle's winding reversed.
    pub fn flipped(&self) -> Self {
        let mut m = self.clone();
        for t in &mut m.triangles {
            t.swap(1, 2);
        }
        for n in &mut m.normals {
            *n = -*n;
        }
        m
    }

    /// Mesh with every vertex mapped through `f`.
    pub fn transformed(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self> {
        Self::new(self.vertices.iter().map(f).collect(), self.triangles.clone())
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Signed enclosed volume by the divergence theorem; positive when the
    /// normals point outward. Meaningful only for closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangle_count())
            .map(|k| {
                let [a, b, c] = self.triangle(k);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Edge incidence statistics used by [`Self::check_watertight`].
    pub fn topology(&self) -> Topology {
        // Directed edge counts keyed by the undirected edge.
        let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let e = edges.entry((a.min(b), a.max(b))).or_default();
                if a < b {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let mut topo = Topology {
            edges: edges.len(),
            ..Topology::default()
        };
        for &(fwd, back) in edges.values() {
            match fwd + back {
                1 => topo.boundary_edges += 1,
                2 if fwd == 1 => {}
                2 => topo.inconsistent_edges += 1,
                _ => topo.nonmanifold_edges += 1,
            }
        }
        let used: std::collections::HashSet<usize> =
            self.triangles.iter().flatten().copied().collect();
        topo.euler_characteristic =
            used.len() as i64 - topo.edges as i64 + self.triangles.len() as i64;
        topo
    }

    pub fn check_watertight(&self) -> Result<()> {
        let t = self.topology();
        if t.is_watertight() {
            Ok(())
        } else {
            Err(Error::NotWatertight(format!(
                "{} boundary, {} non-manifold, {} inconsistently wound edges",
                t.boundary_edges, t.nonmanifold_edges, t.inconsistent_edges
            )))
        }
    }

    /// Load-time summary: topology and the longest edge against `edge_limit`.
    pub fn report(&self, edge_limit: Option<f64>) -> MeshReport {
        MeshReport {
            vertices: self.vertices.len(),
            triangles: self.triangles.len(),
            topology: self.topology(),
            max_edge_length: self.max_edge_length(),
            edge_limit,
            volume: self.signed_volume(),
        }
    }

    /// Generalized winding number of the surface about `p`: 1 inside a closed
    /// outward-oriented mesh, 0 outside.
    pub fn winding_number(&self, p: &Vec3) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i] - p);
                let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
                let num = a.dot(&b.cross(&c));
                let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
                2.0 * num.atan2(den)
            })
            .sum::<f64>()
            / (4.0 * PI)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.winding_number(p) > 0.5
    }

    /// Reads STL (binary or ASCII) or OBJ depending on the file extension and
    /// multiplies coordinates by `scale` (e.g. 1e-3 for millimetre files).
    pub fn load(path: &Path, scale: f64) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("stl") => Self::load_stl(path, scale),
            Some("obj") => Self::load_obj(path, scale),
            _ => Err(Error::MeshFormat(format!(
                "unsupported mesh extension: {}",
                path.display()
            ))),
        }
    }

    pub fn load_stl(path: &Path, scale: f64) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let m = stl_io::read_stl(&mut r)?;
        let vertices = m
            .vertices
            .iter()
            .map(|v| Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64) * scale)
            .collect();
        let triangles = m.faces.iter().map(|f| f.vertices).collect();
        Self::new(vertices, triangles)
    }

    pub fn load_obj(path: &Path, scale: f64) -> Result<Self> {
        let opts = tobj::LoadOptions {
            triangulate: true,
            single_index: true,
            ignore_points: true,
            ignore_lines: true,
            ..Default::default()
        };
        let (models, _) =
            tobj::load_obj(path, &opts).map_err(|e| Error::MeshFormat(e.to_string()))?;
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for model in models {
            let base = vertices.len();
            let m = model.mesh;
            vertices.extend(m.positions.chunks_exact(3).map(|p| {
                Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * scale
            }));
            triangles.extend(m.indices.chunks_exact(3).map(|t| {
                [
                    base + t[0] as usize,
                    base + t[1] as usize,
                    base + t[2] as usize,
                ]
            }));
        }
        Self::new(vertices, triangles)
    }

    /// Writes binary STL with coordinates divided by `scale`.
    pub fn write_stl(&self, path: &Path, scale: f64) -> Result<()> {
        let to_f32 = |v: &Vec3| stl_io::Vector::new([v.x as f32, v.y as f32, v.z as f32]);
        let tris: Vec<stl_io::Triangle> = (0..self.triangle_count())
            .map(|k| stl_io::Triangle {
                normal: to_f32(&self.normals[k]),
                vertices: self.triangle(k).map(|v| to_f32(&(v / scale))),
            })
            .collect();
        let mut w = BufWriter::new(File::create(path)?);
        stl_io::write_stl(&mut w, tris.iter())?;
        Ok(())
    }
}

/// Edge incidence counts of a mesh.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Topology {
    pub edges: usize,
    /// Edges used by a single triangle.
    pub boundary_edges: usize,
    /// Edges used by more than two triangles.
    pub nonmanifold_edges: usize,
    /// Edges shared by two triangles traversing it in the same direction.
    pub inconsistent_edges: usize,
    pub euler_characteristic: i64,
}

impl Topology {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges == 0 && self.nonmanifold_edges == 0 && self.inconsistent_edges == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshReport {
    pub vertices: usize,
    pub triangles: usize,
    pub topology: Topology,
    pub max_edge_length: f64,
    pub edge_limit: Option<f64>,
    pub volume: f64,
}

impl MeshReport {
    pub fn edges_ok(&self) -> bool {
        self.edge_limit.is_none_or(|l| self.max_edge_length <= l)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let t = &self.topology;
        if !t.is_watertight() {
            w.push(format!(
                "mesh is not watertight ({} boundary, {} non-manifold, {} inconsistent edges)",
                t.boundary_edges, t.nonmanifold_edges, t.inconsistent_edges
            ));
        } else if self.volume < 0.0 {
            w.push("mesh normals point inward (negative volume)".into());
        }
        if let Some(limit) = self.edge_limit {
            if self.max_edge_length > limit {
                w.push(format!(
                    "longest edge {:.3e} m exceeds {:.3e} m; wall contacts near triangle borders may be missed",
                    self.max_edge_length, limit
                ));
            }
        }
        w
    }
}

impl fmt::Display for MeshReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} vertices, {} triangles, watertight: {}, volume {:.4e} m^3, longest edge {:.3e} m",
            self.vertices,
            self.triangles,
            self.topology.is_watertight(),
            self.volume,
            self.max_edge_length
        )?;
        for w in self.warnings() {
            write!(f, "\nwarning: {w}")?;
        }
        Ok(())
    }
}

/// Closest point to `p` on triangle `abc`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Icosahedron refined `subdivisions` times with vertices projected onto
/// the sphere; outward oriented.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> Result<TriangleMesh> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vec3::from(*v).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    TriangleMesh::new(
        verts.iter().map(|v| center + v * radius).collect(),
        tris,
    )
}

/// Closed surface of revolution about the z axis. `profile` lists
/// `(radius, z)` points and must start and end on the axis. Each profile
/// segment is subdivided and the angular resolution chosen so that no mesh
/// edge exceeds `max_edge`. Outward oriented.
pub fn revolve(profile: &[[f64; 2]], max_edge: f64) -> Result<TriangleMesh> {
    if profile.len() < 3 || !(max_edge > 0.0) {
        return Err(Error::InvalidParameter(
            "revolution profile needs at least 3 points and a positive edge length".into(),
        ));
    }
    let first = profile[0];
    let last = profile[profile.len() - 1];
    if first[0] != 0.0 || last[0] != 0.0 {
        return Err(Error::InvalidParameter(
            "revolution profile must start and end on the axis".into(),
        ));
    }
    // Quads are split along a diagonal, so both sides are held below max_edge/sqrt(2).
    let target = max_edge / 2f64.sqrt();
    let mut pts = vec![first];
    for w in profile.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let n = (len / target).ceil().max(1.0) as usize;
        for k in 1..=n {
            let s = k as f64 / n as f64;
            pts.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    let interior = &pts[1..pts.len() - 1];
    if interior.iter().any(|p| !(p[0] > 0.0)) {
        return Err(Error::InvalidParameter(
            "revolution profile touches the axis away from its ends".into(),
        ));
    }
    let r_max = interior.iter().map(|p| p[0]).fold(0.0, f64::max);
    let segs = ((2.0 * PI * r_max / target).ceil() as usize).max(8);

    let mut verts = vec![Vec3::new(0.0, 0.0, first[1])];
    for p in interior {
        for j in 0..segs {
            let a = 2.0 * PI * j as f64 / segs as f64;
            verts.push(Vec3::new(p[0] * a.cos(), p[0] * a.sin(), p[1]));
        }
    }
    verts.push(Vec3::new(0.0, 0.0, last[1]));
    let top = verts.len() - 1;
    let ring = |i: usize, j: usize| 1 + i * segs + j % segs;

    let rings = interior.len();
    let mut tris = Vec::new();
    for j in 0..segs {
        tris.push([0, ring(0, j + 1), ring(0, j)]);
    }
    for i in 0..rings - 1 {
        for j in 0..segs {
            let (a, b) = (ring(i, j), ring(i, j + 1));
            let (c, d) = (ring(i + 1, j), ring(i + 1, j + 1));
            tris.push([a, b, d]);
            tris.push([a, d, c]);
        }
    }
    for j in 0..segs {
        tris.push([top, ring(rings - 1, j), ring(rings - 1, j + 1)]);
    }
    let mesh = TriangleMesh::new(verts, tris)?;
    Ok(if mesh.signed_volume() < 0.0 {
        mesh.flipped()
    } else {
        mesh
    })
}

/// Idealized saccular aneurysm: a sphere of `radius` centered at the origin
/// with a cylindrical vessel stump of `neck_radius` leaving through the top
/// (+z) for `vessel_length` beyond the neck plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereAneurysm {
    pub radius: f64,
    pub neck_radius: f64,
    pub vessel_length: f64,
}

impl SphereAneurysm {
    pub fn new(radius: f64, neck_radius: f64, vessel_length: f64) -> Result<Self> {
        if !(radius > 0.0 && neck_radius > 0.0 && neck_radius < radius && vessel_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "aneurysm needs 0 < neck radius < radius and a positive vessel length, got {radius} / {neck_radius} / {vessel_length}"
            )));
        }
        Ok(Self {
            radius,
            neck_radius,
            vessel_length,
        })
    }

    /// Height of the neck plane.
    pub fn neck_height(&self) -> f64 {
        (self.radius * self.radius - self.neck_radius * self.neck_radius).sqrt()
    }

    /// Point on and unit normal (pointing out of the sack) of the neck plane.
    pub fn neck_plane(&self) -> (Vec3, Vec3) {
        (Vec3::new(0.0, 0.0, self.neck_height()), Vec3::z())
    }

    /// Volume of the sack below the neck plane.
    pub fn sack_volume(&self) -> f64 {
        let h = self.radius - self.neck_height();
        4.0 / 3.0 * PI * self.radius.powi(3) - PI * h * h * (3.0 * self.radius - h) / 3.0
    }

    fn sphere_profile(&self, max_edge: f64) -> Vec<[f64; 2]> {
        let top = (self.neck_height() / self.radius).acos();
        let n = ((PI - top) * self.radius / (0.5 * max_edge)).ceil().max(4.0) as usize;
        (0..=n)
            .map(|k| {
                let a = PI - (PI - top) * k as f64 / n as f64;
                [self.radius * a.sin(), self.radius * a.cos()]
            })
            .map(|[r, z]| [r.max(0.0), z])
            .map(|p| if p[0] < 1e-15 { [0.0, p[1]] } else { p })
            .collect()
    }

    /// Sack closed off by a flat disk at the neck plane.
    pub fn necked_mesh(&self, max_edge: f64) -> Result<TriangleMesh> {
        let mut p = self.sphere_profile(max_edge);
        p.push([0.0, self.neck_height()]);
        revolve(&p, max_edge)
    }

    /// Sack together with the vessel stump, capped at its far end.
    pub fn full_mesh(&self, max_edge: f64) -> Result<TriangleMesh> {
        let mut p = self.sphere_profile(max_edge);
        let top = self.neck_height() + self.vessel_length;
        p.push([self.neck_radius, top]);
        p.push([0.0, top]);
        revolve(&p, max_edge)
    }
}
