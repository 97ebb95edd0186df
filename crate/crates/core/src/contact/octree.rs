use crate::Vec3;

pub const DEFAULT_LEAF_CAPACITY: usize = 16;
pub const DEFAULT_MAX_DEPTH: u32 = 12;

#[derive(Clone, Debug)]
struct Node {
    center: Vec3,
    half: f64,
    /// Largest item radius anywhere below this node.
    max_radius: f64,
    /// Index of the first of eight consecutive children, or `None` for a leaf.
    children: Option<u32>,
    /// Range into `Octree::order` covering the items below this node.
    start: u32,
    end: u32,
}

/// Static octree over points carrying a bounding radius each.
///
/// Items are stored once, in the leaf whose octant contains the point;
/// queries walk every node whose box, inflated by the largest item radius
/// below it, reaches the query sphere.
#[derive(Clone, Debug)]
pub struct Octree {
    points: Vec<Vec3>,
    radii: Vec<f64>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    leaf_capacity: usize,
    max_depth: u32,
}

impl Octree {
    pub fn build(points: Vec<Vec3>, radii: Vec<f64>) -> Self {
        Self::with_limits(points, radii, DEFAULT_LEAF_CAPACITY, DEFAULT_MAX_DEPTH)
    }

    /// Octree over zero-radius points.
    pub fn from_points(points: Vec<Vec3>) -> Self {
        let radii = vec![0.0; points.len()];
        Self::build(points, radii)
    }

    pub fn with_limits(
        points: Vec<Vec3>,
        radii: Vec<f64>,
        leaf_capacity: usize,
        max_depth: u32,
    ) -> Self {
        assert_eq!(points.len(), radii.len(), "one radius per point");
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let (center, half) = if points.is_empty() {
            (Vec3::zeros(), 1.0)
        } else {
            let c = (lo + hi) / 2.0;
            let h = 0.5 * (hi - lo).max();
            (c, if h > 0.0 { h * (1.0 + 1e-9) } else { 1.0 })
        };
        let n = points.len() as u32;
        let mut tree = Self {
            order: (0..n).collect(),
            points,
            radii,
            nodes: Vec::new(),
            leaf_capacity: leaf_capacity.max(1),
            max_depth,
        };
        tree.nodes.push(Node {
            center,
            half,
            max_radius: 0.0,
            children: None,
            start: 0,
            end: n,
        });
        tree.split(0, 0);
        tree
    }

    fn octant(center: &Vec3, p: &Vec3) -> usize {
        (p.x >= center.x) as usize | ((p.y >= center.y) as usize) << 1 | ((p.z >= center.z) as usize) << 2
    }

    fn split(&mut self, idx: usize, depth: u32) {
        let Node {
            center,
            half,
            start,
            end,
            ..
        } = self.nodes[idx].clone();
        let max_r = self.order[start as usize..end as usize]
            .iter()
            .map(|&i| self.radii[i as usize])
            .fold(0.0, f64::max);
        self.nodes[idx].max_radius = max_r;
        if (end - start) as usize <= self.leaf_capacity || depth >= self.max_depth {
            return;
        }
        // Counting sort of the node's items by octant.
        let items = &mut self.order[start as usize..end as usize];
        let mut counts = [0u32; 8];
        for &i in items.iter() {
            counts[Self::octant(&center, &self.points[i as usize])] += 1;
        }
        let mut offsets = [0u32; 8];
        for o in 1..8 {
            offsets[o] = offsets[o - 1] + counts[o - 1];
        }
        let mut sorted = vec![0u32; items.len()];
        let mut cursor = offsets;
        for &i in items.iter() {
            let o = Self::octant(&center, &self.points[i as usize]);
            sorted[cursor[o] as usize] = i;
            cursor[o] += 1;
        }
        items.copy_from_slice(&sorted);

        let first = self.nodes.len() as u32;
        self.nodes[idx].children = Some(first);
        let h = half / 2.0;
        for o in 0..8 {
            let sign = |bit: usize| if o & bit != 0 { h } else { -h };
            self.nodes.push(Node {
                center: center + Vec3::new(sign(1), sign(2), sign(4)),
                half: h,
                max_radius: 0.0,
                children: None,
                start: start + offsets[o],
                end: start + offsets[o] + counts[o],
            });
        }
        for o in 0..8 {
            let child = first as usize + o;
            if self.nodes[child].end > self.nodes[child].start {
                self.split(child, depth + 1);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &Vec3 {
        &self.points[i]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    /// Calls `visit` for every item whose sphere may reach the ball of
    /// `radius` about `center`. Every item with
    /// `|p - center| <= radius + r_item` is visited; others may be.
    pub fn query(&self, center: &Vec3, radius: f64, mut visit: impl FnMut(usize)) {
        if self.points.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx];
            if node.end == node.start {
                continue;
            }
            let d = (center - node.center).abs() - Vec3::repeat(node.half);
            let gap = d.sup(&Vec3::zeros()).norm();
            if gap > radius + node.max_radius {
                continue;
            }
            match node.children {
                Some(first) => stack.extend((0..8).map(|o| first as usize + o)),
                None => {
                    for &i in &self.order[node.start as usize..node.end as usize] {
                        visit(i as usize);
                    }
                }
            }
        }
    }

    /// Leaf index holding each item; used to check the partition invariant.
    pub fn leaf_of_items(&self) -> Vec<Vec<usize>> {
        let mut owners = vec![Vec::new(); self.points.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.children.is_none() {
                for &i in &self.order[node.start as usize..node.end as usize] {
                    owners[i as usize].push(idx);
                }
            }
        }
        owners
    }

    pub fn depth(&self) -> u32 {
        fn walk(t: &Octree, idx: usize) -> u32 {
            match t.nodes[idx].children {
                Some(first) => 1 + (0..8).map(|o| walk(t, first as usize + o)).max().unwrap_or(0),
                None => 0,
            }
        }
        walk(self, 0)
    }
}
