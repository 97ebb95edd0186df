use super::octree::Octree;
use crate::mesh::TriangleMesh;
use crate::Vec3;

/// Center distance below which two edges of rest length `edge_length` and
/// diameter `d2` are tested in the narrow phase, `sqrt((l/2)^2 + d2^2)`.
/// It catches edges lying side by side but can miss offset end-to-end
/// configurations; see [`conservative_self_radius`].
pub fn side_by_side_self_radius(edge_length: f64, d2: f64) -> f64 {
    (0.25 * edge_length * edge_length + d2 * d2).sqrt()
}

/// Center distance that guarantees no touching pair of edges (each at
/// most `max_edge_length` long) is skipped: `l_max + d2`.
pub fn conservative_self_radius(max_edge_length: f64, d2: f64) -> f64 {
    max_edge_length + d2
}

/// Midpoints of consecutive node pairs.
pub fn edge_centers(positions: &[Vec3]) -> Vec<Vec3> {
    positions.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

#[inline]
pub(crate) fn self_candidate(ci: &Vec3, cj: &Vec3, threshold: f64) -> bool {
    (cj - ci).norm() <= threshold
}

#[inline]
pub(crate) fn wall_candidate(c: &Vec3, centroid: &Vec3, half_width: f64, r_st: f64) -> bool {
    (c - centroid).norm() <= half_width + r_st
}

/// Unordered non-adjacent edge pairs `(i, j)`, `i + 2 <= j`, whose centers
/// lie within `threshold`; sorted.
pub fn broad_phase_self(centers: &[Vec3], threshold: f64) -> Vec<(usize, usize)> {
    let tree = Octree::from_points(centers.to_vec());
    let mut pairs = Vec::new();
    for (i, ci) in centers.iter().enumerate() {
        let start = pairs.len();
        tree.query(ci, threshold, |j| {
            if j >= i + 2 && self_candidate(ci, &centers[j], threshold) {
                pairs.push((i, j));
            }
        });
        pairs[start..].sort_unstable();
    }
    pairs
}

/// Same pair set as [`broad_phase_self`] by testing every pair.
pub fn broad_phase_self_brute(centers: &[Vec3], threshold: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..centers.len() {
        for j in i + 2..centers.len() {
            if self_candidate(&centers[i], &centers[j], threshold) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Octree over the triangle centroids of a mesh with the bounding radii as
/// item radii. Build once per static mesh.
#[derive(Clone, Debug)]
pub struct MeshTree {
    tree: Octree,
}

impl MeshTree {
    pub fn new(mesh: &TriangleMesh) -> Self {
        Self {
            tree: Octree::build(mesh.centroids.clone(), mesh.bounding_radii.clone()),
        }
    }

    /// Triangles passing the sphere test for a point of radius `half_width`, sorted.
    pub fn candidates(&self, mesh: &TriangleMesh, c: &Vec3, half_width: f64, out: &mut Vec<usize>) {
        out.clear();
        self.tree.query(c, half_width, |k| {
            if wall_candidate(c, &mesh.centroids[k], half_width, mesh.bounding_radii[k]) {
                out.push(k);
            }
        });
        out.sort_unstable();
    }
}

/// `(point, triangle)` pairs with `|c - c_T| <= half_width + r_ST`, sorted.
pub fn broad_phase_wall(
    points: &[Vec3],
    mesh: &TriangleMesh,
    tree: &MeshTree,
    half_width: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut buf = Vec::new();
    for (i, c) in points.iter().enumerate() {
        tree.candidates(mesh, c, half_width, &mut buf);
        pairs.extend(buf.iter().map(|&k| (i, k)));
    }
    pairs
}

pub fn broad_phase_wall_brute(points: &[Vec3], mesh: &TriangleMesh, half_width: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, c) in points.iter().enumerate() {
        for k in 0..mesh.triangle_count() {
            if wall_candidate(c, &mesh.centroids[k], half_width, mesh.bounding_radii[k]) {
                pairs.push((i, k));
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::narrow::segment_segment_distance;
    use crate::mesh::icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distant_rods_have_no_pairs() {
        let d2 = 0.3;
        let a: Vec<Vec3> = (0..20).map(|i| Vec3::new(i as f64 * d2, 0.0, 0.0)).collect();
        let mut centers = edge_centers(&a);
        let b: Vec<Vec3> = a.iter().map(|p| p + Vec3::new(0.0, 10.0 * d2, 0.0)).collect();
        let offset = centers.len();
        centers.extend(edge_centers(&b));
        let pairs = broad_phase_self(&centers, conservative_self_radius(d2, d2));
        assert!(pairs.iter().all(|&(i, j)| (i < offset) == (j < offset)));
        let adjacent_free = broad_phase_self(&centers[..offset], side_by_side_self_radius(d2, d2));
        assert!(adjacent_free.is_empty());
    }

    #[test]
    fn threshold_is_closed() {
        let centers = vec![Vec3::zeros(), Vec3::x(), Vec3::new(0.75, 0.0, 0.0) * 2.0, Vec3::new(0.0, 0.5, 0.0)];
        let pairs = broad_phase_self(&centers, 0.5);
        assert_eq!(pairs, vec![(0, 3)]);
        assert_eq!(broad_phase_self_brute(&centers, 0.5), pairs);
    }

    #[test]
    fn conservative_radius_never_misses_contacts() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (l, d2) = (1.0, 1.0);
        let r_tight = side_by_side_self_radius(l, d2);
        let r_safe = conservative_self_radius(l, d2);
        let mut tight_missed = 0;
        for _ in 0..20000 {
            let a0 = Vec3::zeros();
            let dir = |rng: &mut ChaCha8Rng| {
                Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    .normalize()
            };
            let a1 = dir(&mut rng) * l;
            let b0 = Vec3::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
            let b1 = b0 + dir(&mut rng) * l;
            let d = segment_segment_distance(&a0, &a1, &b0, &b1).unwrap().distance();
            let cdist = ((a0 + a1) / 2.0 - (b0 + b1) / 2.0).norm();
            if d <= d2 {
                assert!(cdist <= r_safe);
                if cdist > r_tight {
                    tight_missed += 1;
                }
            }
        }
        assert!(tight_missed > 0);
    }

    #[test]
    fn wall_candidates_match_brute_force() {
        let mesh = icosphere(Vec3::zeros(), 1.0, 3).unwrap();
        let tree = MeshTree::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec3> = (0..300)
            .map(|_| Vec3::new(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)))
            .collect();
        let got = broad_phase_wall(&pts, &mesh, &tree, 0.05);
        assert_eq!(got, broad_phase_wall_brute(&pts, &mesh, 0.05));
        assert!(!got.is_empty());
        let inner: Vec<Vec3> = pts.iter().map(|p| p * 0.1).collect();
        assert!(broad_phase_wall(&inner, &mesh, &tree, 0.05).is_empty());
    }
}
