//! Bounding volume hierarchy over scene primitives (median split on the
//! longest centroid axis).

use crate::scene::shape::Aabb;
use crate::{Ray, Vec3};

const LEAF_SIZE: usize = 2;

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first index into `order`; interior: index of the right child
    /// (the left child immediately follows its parent).
    offset: u32,
    /// Zero for interior nodes.
    count: u32,
}

#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(bounds: &[Aabb]) -> Self {
        let mut bvh = Bvh { nodes: Vec::new(), order: (0..bounds.len() as u32).collect() };
        if !bounds.is_empty() {
            let n = bounds.len();
            bvh.build_node(bounds, 0, n);
        }
        bvh
    }

    fn build_node(&mut self, bounds: &[Aabb], start: usize, end: usize) -> usize {
        let node_bounds = self.order[start..end]
            .iter()
            .fold(Aabb::empty(), |b, &i| b.union(bounds[i as usize]));
        let idx = self.nodes.len();
        self.nodes.push(Node { bounds: node_bounds, offset: start as u32, count: (end - start) as u32 });
        if end - start <= LEAF_SIZE {
            return idx;
        }
        let cb = self.order[start..end]
            .iter()
            .fold(Aabb::empty(), |b, &i| b.grow(bounds[i as usize].centroid()));
        let ext = cb.max - cb.min;
        let axis = if ext.x >= ext.y && ext.x >= ext.z { 0 } else if ext.y >= ext.z { 1 } else { 2 };
        let mid = (start + end) / 2;
        self.order[start..end].sort_by(|&a, &b| {
            let ca = bounds[a as usize].centroid()[axis];
            let cb = bounds[b as usize].centroid()[axis];
            ca.total_cmp(&cb).then(a.cmp(&b))
        });
        self.build_node(bounds, start, mid);
        let right = self.build_node(bounds, mid, end);
        self.nodes[idx].offset = right as u32;
        self.nodes[idx].count = 0;
        idx
    }

    /// Visits candidate primitives; `hit(i, t_max)` returns a closer distance
    /// when primitive `i` is hit, which then shrinks the search interval.
    #[inline]
    pub fn traverse(&self, ray: &Ray, t_min: f64, mut t_max: f64, mut hit: impl FnMut(usize, f64) -> Option<f64>) {
        if self.nodes.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z);
        let mut stack = [0usize; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let idx = stack[sp];
            let node = &self.nodes[idx];
            if !node.bounds.hit(ray.origin, inv, t_min, t_max) {
                continue;
            }
            if node.count > 0 {
                let s = node.offset as usize;
                for &p in &self.order[s..s + node.count as usize] {
                    if let Some(t) = hit(p as usize, t_max) {
                        t_max = t;
                    }
                }
            } else {
                stack[sp] = node.offset as usize;
                stack[sp + 1] = idx + 1;
                sp += 2;
            }
        }
    }
}
