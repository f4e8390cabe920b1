//! Axis-aligned bounding volume hierarchy over triangles.

use glam::DVec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Aabb {
    pub min: DVec3,
    pub max: DVec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: DVec3::splat(f64::INFINITY),
            max: DVec3::splat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, other: &Aabb) {
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    fn of_points(pts: &[DVec3]) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.min = b.min.min(*p);
            b.max = b.max.max(*p);
        }
        b
    }

    pub fn distance_squared(&self, p: DVec3) -> f64 {
        let d = (self.min - p).max(p - self.max).max(DVec3::ZERO);
        d.length_squared()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: u32, len: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    /// Triangle indices, permuted so each leaf owns a contiguous run.
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(tris: &[[DVec3; 3]]) -> Self {
        let boxes: Vec<Aabb> = tris.iter().map(|t| Aabb::of_points(t)).collect();
        let centers: Vec<DVec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        if !tris.is_empty() {
            build_node(&mut nodes, &mut order, 0, tris.len(), &boxes, &centers);
        }
        Self { nodes, order }
    }

    /// Visits leaves best-first by box distance to `p`. `visit` receives each
    /// triangle index and returns the current best squared distance, which
    /// prunes boxes strictly farther than it (equal-distance boxes are still
    /// visited so callers can apply their own tie rule).
    pub fn nearest<F>(&self, p: DVec3, mut visit: F)
    where
        F: FnMut(u32) -> f64,
    {
        if self.nodes.is_empty() {
            return;
        }
        let mut best = f64::INFINITY;
        let mut stack: Vec<(u32, f64)> = vec![(0, self.nodes[0].bounds().distance_squared(p))];
        while let Some((idx, d2)) = stack.pop() {
            if d2 > best {
                continue;
            }
            match &self.nodes[idx as usize] {
                Node::Leaf { start, len, .. } => {
                    for &t in &self.order[*start as usize..(*start + *len) as usize] {
                        best = best.min(visit(t));
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[*left as usize].bounds().distance_squared(p);
                    let dr = self.nodes[*right as usize].bounds().distance_squared(p);
                    // Push the farther child first so the nearer pops first.
                    if dl <= dr {
                        stack.push((*right, dr));
                        stack.push((*left, dl));
                    } else {
                        stack.push((*left, dl));
                        stack.push((*right, dr));
                    }
                }
            }
        }
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centers: &[DVec3],
) -> u32 {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &t in &order[start..end] {
        bounds.grow(&boxes[t as usize]);
        let c = centers[t as usize];
        cbounds.min = cbounds.min.min(c);
        cbounds.max = cbounds.max.max(c);
    }
    let idx = nodes.len() as u32;
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            bounds,
            start: start as u32,
            len: (end - start) as u32,
        });
        return idx;
    }

    let ext = cbounds.max - cbounds.min;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    // Total order (center, then index) keeps the build deterministic.
    order[start..end].sort_unstable_by(|&a, &b| {
        centers[a as usize][axis]
            .total_cmp(&centers[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = (start + end) / 2;

    nodes.push(Node::Leaf {
        bounds,
        start: 0,
        len: 0,
    });
    let left = build_node(nodes, order, start, mid, boxes, centers);
    let right = build_node(nodes, order, mid, end, boxes, centers);
    nodes[idx as usize] = Node::Inner { bounds, left, right };
    idx
}
