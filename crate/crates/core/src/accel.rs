//! Ray casting and segment visibility over patch rectangles, accelerated by a
//! median-split bounding volume hierarchy.

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::scene::Patch;

/// Self-intersection offset applied at ray origins and segment ends, meters.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Hits whose distances differ by less than this are tied; the lowest patch
/// id wins.
pub const TIE_TOLERANCE: f64 = 1e-9;

const LEAF_SIZE: usize = 4;
const BOX_PADDING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3, t_max: f64) -> Result<Self> {
        if !geom::is_finite(&origin) {
            return Err(Error::InvalidArgument("ray origin is not finite".into()));
        }
        if !geom::is_unit(&direction) {
            return Err(Error::InvalidArgument("ray direction is not unit length".into()));
        }
        if !(t_max > 0.0) {
            return Err(Error::InvalidArgument("ray t_max must be positive".into()));
        }
        Ok(Ray { origin, direction, t_max })
    }

    pub fn unbounded(origin: Vec3, direction: Vec3) -> Result<Self> {
        Self::new(origin, direction, f64::INFINITY)
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub patch_id: u32,
    /// Position of the patch in the list the index was built from.
    pub patch_index: usize,
    pub t: f64,
    pub point: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn of_patch(p: &Patch) -> Self {
        let mut b = Aabb::empty();
        for c in p.corners() {
            b.grow(&c);
        }
        b.min.add_scalar_mut(-BOX_PADDING);
        b.max.add_scalar_mut(BOX_PADDING);
        b
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.min[k] && self.max[k] >= o.max[k])
    }

    /// Entry distance of the ray into the box if it overlaps `[t0, t1]`.
    fn entry(&self, origin: &Vec3, inv_dir: &Vec3, t0: f64, t1: f64) -> Option<f64> {
        let (mut lo, mut hi) = (t0, t1);
        for k in 0..3 {
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            // NaN (0 · ∞) arises for rays in the slab plane; treat as unbounded
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            if !near.is_nan() {
                lo = lo.max(near);
            }
            if !far.is_nan() {
                hi = hi.min(far);
            }
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, len: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Bounding volume hierarchy over a fixed patch list. Immutable after build.
#[derive(Debug, Clone)]
pub struct AccelIndex {
    patches: Vec<Patch>,
    /// Patch indices in leaf order.
    order: Vec<usize>,
    nodes: Vec<Node>,
    epsilon: f64,
}

impl AccelIndex {
    /// Builds the hierarchy. Fails on an empty list or duplicate ids.
    pub fn build(patches: &[Patch]) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::Empty("acceleration index needs at least one patch"));
        }
        let mut seen = std::collections::HashSet::new();
        for p in patches {
            if !seen.insert(p.id) {
                return Err(Error::DuplicateId {
                    entity: "patch",
                    id: p.id.into(),
                });
            }
        }
        let boxes: Vec<Aabb> = patches.iter().map(Aabb::of_patch).collect();
        let centroids: Vec<Vec3> = boxes.iter().map(|b| (b.min + b.max) / 2.0).collect();
        let mut order: Vec<usize> = (0..patches.len()).collect();
        let mut nodes = Vec::with_capacity(2 * patches.len() / LEAF_SIZE + 1);
        build_node(&mut nodes, &mut order, 0, patches.len(), &boxes, &centroids);
        Ok(AccelIndex {
            patches: patches.to_vec(),
            order,
            nodes,
            epsilon: DEFAULT_EPSILON,
        })
    }

    /// An index over no patches: every ray misses, every segment is visible.
    pub fn empty() -> Self {
        AccelIndex {
            patches: Vec::new(),
            order: Vec::new(),
            nodes: Vec::new(),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn root_bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| *n.bounds())
    }

    /// Number of levels from the root down to the deepest leaf.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 1,
                Node::Inner { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    /// Checks the structural invariants: each patch in exactly one leaf and
    /// parents enclosing children.
    pub fn check_structure(&self) -> bool {
        let mut count = vec![0usize; self.patches.len()];
        for node in &self.nodes {
            match node {
                Node::Leaf { start, len, .. } => {
                    for &i in &self.order[*start..start + len] {
                        count[i] += 1;
                        if !node.bounds().contains(&Aabb::of_patch(&self.patches[i])) {
                            return false;
                        }
                    }
                }
                Node::Inner { bounds, left, right } => {
                    if !bounds.contains(self.nodes[*left].bounds()) || !bounds.contains(self.nodes[*right].bounds()) {
                        return false;
                    }
                }
            }
        }
        count.iter().all(|c| *c == 1)
    }

    /// Nearest hit in `(ε, t_max]`.
    pub fn cast_ray(&self, ray: &Ray) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = ray.direction.map(|d| 1.0 / d);
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let limit = (best + TIE_TOLERANCE).min(ray.t_max);
            let node = &self.nodes[n];
            if node.bounds().entry(&ray.origin, &inv_dir, 0.0, limit).is_none() {
                continue;
            }
            match node {
                Node::Leaf { start, len, .. } => {
                    for &i in &self.order[*start..start + len] {
                        if let Some(t) = intersect(&self.patches[i], &ray.origin, &ray.direction, self.epsilon, ray.t_max) {
                            if t <= best + TIE_TOLERANCE {
                                best = best.min(t);
                                candidates.push((t, i));
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        self.resolve(ray, &candidates)
    }

    /// Reference implementation that tests every patch.
    pub fn cast_ray_linear(&self, ray: &Ray) -> Option<Hit> {
        let candidates: Vec<(f64, usize)> = self
            .patches
            .iter()
            .enumerate()
            .filter_map(|(i, p)| intersect(p, &ray.origin, &ray.direction, self.epsilon, ray.t_max).map(|t| (t, i)))
            .collect();
        self.resolve(ray, &candidates)
    }

    fn resolve(&self, ray: &Ray, candidates: &[(f64, usize)]) -> Option<Hit> {
        let t_min = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        candidates
            .iter()
            .filter(|(t, _)| *t <= t_min + TIE_TOLERANCE)
            .min_by_key(|(_, i)| self.patches[*i].id)
            .map(|&(t, i)| Hit {
                patch_id: self.patches[i].id,
                patch_index: i,
                t,
                point: ray.at(t),
            })
    }

    /// True iff no patch outside `ignore` crosses the open segment `(a, b)`,
    /// shortened by ε at both ends. Symmetric in `a` and `b`.
    pub fn visible(&self, a: &Vec3, b: &Vec3, ignore: &[u32]) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        // always trace from the lexicographically smaller endpoint
        let (from, to) = if lex_less(b, a) { (b, a) } else { (a, b) };
        let delta = to - from;
        let length = delta.norm();
        if length <= 2.0 * self.epsilon {
            return true;
        }
        let dir = delta / length;
        let inv_dir = dir.map(|d| 1.0 / d);
        let t_end = length - self.epsilon;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds().entry(from, &inv_dir, 0.0, t_end).is_none() {
                continue;
            }
            match node {
                Node::Leaf { start, len, .. } => {
                    for &i in &self.order[*start..start + len] {
                        let p = &self.patches[i];
                        if ignore.contains(&p.id) {
                            continue;
                        }
                        if let Some(t) = intersect(p, from, &dir, self.epsilon, f64::INFINITY) {
                            if t < t_end {
                                return false;
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        true
    }
}

/// Builds the index over patches; errors on empty input or duplicate ids.
pub fn build_accel(patches: &[Patch]) -> Result<AccelIndex> {
    AccelIndex::build(patches)
}

fn lex_less(a: &Vec3, b: &Vec3) -> bool {
    for k in 0..3 {
        match a[k].total_cmp(&b[k]) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn build_node(nodes: &mut Vec<Node>, order: &mut [usize], start: usize, end: usize, boxes: &[Aabb], centroids: &[Vec3]) -> usize {
    let bounds = order[start..end].iter().fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i]));
    let slot = nodes.len();
    let len = end - start;
    if len <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, len });
        return slot;
    }
    let mut cbounds = Aabb::empty();
    for &i in &order[start..end] {
        cbounds.grow(&centroids[i]);
    }
    let extent = cbounds.max - cbounds.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    order[start..end].sort_by(|&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b)));
    let mid = start + len / 2;
    // placeholder, patched once children exist
    nodes.push(Node::Leaf { bounds, start, len: 0 });
    let left = build_node(nodes, order, start, mid, boxes, centroids);
    let right = build_node(nodes, order, mid, end, boxes, centroids);
    nodes[slot] = Node::Inner { bounds, left, right };
    slot
}

/// Distance along `dir` from `origin` to the patch rectangle, if within
/// `(epsilon, t_max]`. Rays parallel to the patch plane never hit.
fn intersect(p: &Patch, origin: &Vec3, dir: &Vec3, epsilon: f64, t_max: f64) -> Option<f64> {
    let denom = p.normal.dot(dir);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = p.normal.dot(&(p.center - origin)) / denom;
    if !(t > epsilon && t <= t_max) {
        return None;
    }
    let local = origin + dir * t - p.center;
    let s = local.dot(&p.tangent);
    let r = local.dot(&p.bitangent());
    (s.abs() <= p.half_extents[0] && r.abs() <= p.half_extents[1]).then_some(t)
}
