use alloc::vec::Vec;

use crate::geometry::mesh::TriangleMesh;
use crate::math::Vec3;

/// Minimum hit distance for primary rays and the normal offset applied when
/// spawning secondary rays from a surface point, in world units.
pub const RAY_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Ray {
            origin,
            direction,
            t_min: RAY_EPSILON,
            t_max: f64::INFINITY,
        }
    }

    /// Secondary ray leaving a surface point. The origin is pushed off the
    /// surface along `normal` toward the side `direction` points into, so the
    /// source face sits behind the origin and any `t > 0` is a valid hit.
    pub fn spawn(point: Vec3, normal: Vec3, direction: Vec3) -> Self {
        let side = if normal.dot(direction) >= 0.0 { 1.0 } else { -1.0 };
        Ray {
            origin: point + normal * (side * RAY_EPSILON),
            direction,
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Nearest intersection of a ray with the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub face: usize,
    pub u: f64,
    pub v: f64,
    pub t: f64,
    pub position: Vec3,
    /// Geometric normal flipped to face the ray origin.
    pub normal: Vec3,
    /// True when the ray hit the side the winding-order normal points to.
    pub front_face: bool,
    pub material: usize,
}

/// Möller–Trumbore test. Returns `(t, u, v)` with `u` weighting `v1` and `v`
/// weighting `v2`.
pub fn intersect_triangle(ray: &Ray, tri: &[Vec3; 3]) -> Option<(f64, f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() <= 1e-14 * e1.length() * e2.length() {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    if t > ray.t_min && t < ray.t_max {
        Some((t, u, v))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    face: usize,
    t: f64,
    u: f64,
    v: f64,
}

impl Candidate {
    /// Orders by distance, then by face index so coincident hits resolve the
    /// same way regardless of traversal order.
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => self.t < o.t || (self.t == o.t && self.face < o.face),
        }
    }
}

fn finish(mesh: &TriangleMesh, ray: &Ray, c: Candidate) -> Hit {
    let n = mesh.face_normal(c.face);
    let front_face = n.dot(ray.direction) < 0.0;
    Hit {
        face: c.face,
        u: c.u,
        v: c.v,
        t: c.t,
        position: mesh.point_at(c.face, c.u, c.v),
        normal: if front_face { n } else { -n },
        front_face,
        material: mesh.face_material(c.face),
    }
}

/// Reference nearest-hit search over every face.
pub fn intersect_brute_force(mesh: &TriangleMesh, ray: &Ray) -> Option<Hit> {
    let mut best = None;
    for face in 0..mesh.face_count() {
        if let Some((t, u, v)) = intersect_triangle(ray, &mesh.face_vertices(face)) {
            let c = Candidate { face, t, u, v };
            if c.beats(&best) {
                best = Some(c);
            }
        }
    }
    best.map(|c| finish(mesh, ray, c))
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    const EMPTY: Aabb = Aabb {
        lo: Vec3::splat(f64::INFINITY),
        hi: Vec3::splat(f64::NEG_INFINITY),
    };

    fn grow(&mut self, p: Vec3) {
        self.lo = self.lo.min(p);
        self.hi = self.hi.max(p);
    }

    fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    fn surface_area(&self) -> f64 {
        let d = self.hi - self.lo;
        if d.x < 0.0 {
            return 0.0;
        }
        2.0 * (d.x * d.y + d.y * d.z + d.z * d.x)
    }

    /// Slab test; returns the entry distance when the box overlaps `[t_min, t_max]`.
    fn hit(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            let a = (self.lo[axis] - origin[axis]) * inv_dir[axis];
            let b = (self.hi[axis] - origin[axis]) * inv_dir[axis];
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            // NaN from 0 * inf keeps the current interval.
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive in `order`; interior: index of the right child
    /// (the left child immediately follows the node).
    offset: u32,
    /// Primitive count, zero for interior nodes.
    count: u32,
}

const MAX_LEAF: usize = 4;
/// Bounded by the fixed traversal stack.
const MAX_DEPTH: usize = 60;
const BINS: usize = 12;

/// Bounding-volume hierarchy over a mesh, built with binned SAH splits.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Bvh {
        let n = mesh.face_count();
        let mut boxes = Vec::with_capacity(n);
        let mut centroids = Vec::with_capacity(n);
        for f in 0..n {
            let mut b = Aabb::EMPTY;
            for p in mesh.face_vertices(f) {
                b.grow(p);
            }
            centroids.push((b.lo + b.hi) * 0.5);
            boxes.push(b);
        }
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * n),
            order: (0..n as u32).collect(),
        };
        if n > 0 {
            bvh.build_node(&boxes, &centroids, 0, n, 0);
        }
        bvh
    }

    fn build_node(
        &mut self,
        boxes: &[Aabb],
        centroids: &[Vec3],
        start: usize,
        end: usize,
        depth: usize,
    ) -> usize {
        let index = self.nodes.len();
        let mut bounds = Aabb::EMPTY;
        let mut cbounds = Aabb::EMPTY;
        for &p in &self.order[start..end] {
            bounds = bounds.union(&boxes[p as usize]);
            cbounds.grow(centroids[p as usize]);
        }
        self.nodes.push(Node {
            bounds,
            offset: start as u32,
            count: (end - start) as u32,
        });
        let count = end - start;
        if count <= MAX_LEAF || depth >= MAX_DEPTH {
            return index;
        }
        let Some((axis, split)) = Self::find_split(boxes, centroids, &self.order[start..end], &cbounds)
        else {
            return index;
        };
        let slice = &mut self.order[start..end];
        let mut mid = 0;
        for i in 0..slice.len() {
            if Self::bin_of(centroids[slice[i] as usize][axis], &cbounds, axis) < split {
                slice.swap(i, mid);
                mid += 1;
            }
        }
        if mid == 0 || mid == count {
            return index;
        }
        self.nodes[index].count = 0;
        self.build_node(boxes, centroids, start, start + mid, depth + 1);
        let right = self.build_node(boxes, centroids, start + mid, end, depth + 1);
        self.nodes[index].offset = right as u32;
        index
    }

    fn bin_of(c: f64, cbounds: &Aabb, axis: usize) -> usize {
        let extent = cbounds.hi[axis] - cbounds.lo[axis];
        let b = ((c - cbounds.lo[axis]) / extent * BINS as f64) as usize;
        b.min(BINS - 1)
    }

    /// Returns the split axis and the first bin of the right partition, or
    /// `None` when splitting does not beat a leaf.
    fn find_split(boxes: &[Aabb], centroids: &[Vec3], prims: &[u32], cbounds: &Aabb) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for axis in 0..3 {
            if !(cbounds.hi[axis] > cbounds.lo[axis]) {
                continue;
            }
            let mut bin_box = [Aabb::EMPTY; BINS];
            let mut bin_count = [0usize; BINS];
            for &p in prims {
                let b = Self::bin_of(centroids[p as usize][axis], cbounds, axis);
                bin_box[b] = bin_box[b].union(&boxes[p as usize]);
                bin_count[b] += 1;
            }
            let mut right_area = [0.0; BINS];
            let mut right_count = [0usize; BINS];
            let mut acc = Aabb::EMPTY;
            let mut cnt = 0;
            for b in (1..BINS).rev() {
                acc = acc.union(&bin_box[b]);
                cnt += bin_count[b];
                right_area[b] = acc.surface_area();
                right_count[b] = cnt;
            }
            let mut left = Aabb::EMPTY;
            let mut left_count = 0;
            for split in 1..BINS {
                left = left.union(&bin_box[split - 1]);
                left_count += bin_count[split - 1];
                if left_count == 0 || right_count[split] == 0 {
                    continue;
                }
                let cost = left.surface_area() * left_count as f64
                    + right_area[split] * right_count[split] as f64;
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, axis, split));
                }
            }
        }
        best.map(|(_, axis, split)| (axis, split))
    }

    /// Nearest hit with `ray.t_min < t < ray.t_max`.
    pub fn intersect(&self, mesh: &TriangleMesh, ray: &Ray) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = Vec3::new(1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z);
        let mut best: Option<Candidate> = None;
        let mut stack = [0u32; 64];
        let mut sp = 0;
        let mut node_index = 0usize;
        loop {
            let node = &self.nodes[node_index];
            let t_max = best.map_or(ray.t_max, |b| b.t);
            if node.bounds.hit(ray.origin, inv_dir, ray.t_min, t_max).is_some() {
                if node.count > 0 {
                    let first = node.offset as usize;
                    for &face in &self.order[first..first + node.count as usize] {
                        let face = face as usize;
                        if let Some((t, u, v)) = intersect_triangle(ray, &mesh.face_vertices(face)) {
                            let c = Candidate { face, t, u, v };
                            if c.beats(&best) {
                                best = Some(c);
                            }
                        }
                    }
                } else {
                    let left = node_index + 1;
                    let right = node.offset as usize;
                    let tl = self.nodes[left].bounds.hit(ray.origin, inv_dir, ray.t_min, t_max);
                    let tr = self.nodes[right].bounds.hit(ray.origin, inv_dir, ray.t_min, t_max);
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            let (near, far) = if a <= b { (left, right) } else { (right, left) };
                            stack[sp] = far as u32;
                            sp += 1;
                            node_index = near;
                            continue;
                        }
                        (Some(_), None) => {
                            node_index = left;
                            continue;
                        }
                        (None, Some(_)) => {
                            node_index = right;
                            continue;
                        }
                        (None, None) => {}
                    }
                }
            }
            if sp == 0 {
                break;
            }
            sp -= 1;
            node_index = stack[sp] as usize;
        }
        best.map(|c| finish(mesh, ray, c))
    }

    /// True when anything blocks the segment `[t_min, t_max)`.
    pub fn occluded(&self, mesh: &TriangleMesh, ray: &Ray) -> bool {
        self.intersect(mesh, ray).is_some()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.count > 0).count()
    }

    #[cfg(test)]
    fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            if nodes[i].count > 0 {
                1
            } else {
                1 + go(nodes, i + 1).max(go(nodes, nodes[i].offset as usize))
            }
        }
        go(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::rng;
    use rand::Rng;

    fn unit_triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Vec3::new(-1.0, -1.0, 0.0),
                Vec3::new(2.0, -1.0, 0.0),
                Vec3::new(-1.0, 2.0, 0.0),
            ],
            vec![[0, 1, 2]],
            vec![0],
            1,
        )
        .unwrap()
    }

    #[test]
    fn centroid_hit() {
        let mesh = unit_triangle();
        let bvh = Bvh::build(&mesh);
        assert_eq!(bvh.leaf_count(), 1);
        let ray = Ray::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1.0));
        let hit = bvh.intersect(&mesh, &ray).unwrap();
        assert!((hit.t - 1.0).abs() < 1e-12);
        assert!((hit.u - 1.0 / 3.0).abs() < 1e-12 && (hit.v - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(Some(hit), intersect_brute_force(&mesh, &ray));
        // Approaching from -z sees the back of a +z-wound face.
        assert!(!hit.front_face);
        assert_eq!(hit.normal, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn parallel_ray_misses() {
        let mesh = unit_triangle();
        let bvh = Bvh::build(&mesh);
        let ray = Ray::new(Vec3::new(-5.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert!(bvh.intersect(&mesh, &ray).is_none());
    }

    #[test]
    fn ray_outside_bounds_misses() {
        let mesh = unit_triangle();
        let bvh = Bvh::build(&mesh);
        let ray = Ray::new(Vec3::new(10.0, 10.0, 10.0), Vec3::new(0.0, 1.0, 0.0));
        assert!(bvh.intersect(&mesh, &ray).is_none());
    }

    #[test]
    fn stacked_triangles_hit_nearer() {
        let tri = |z: f64| {
            [
                Vec3::new(-1.0, -1.0, z),
                Vec3::new(2.0, -1.0, z),
                Vec3::new(-1.0, 2.0, z),
            ]
        };
        let mut verts = Vec::new();
        verts.extend_from_slice(&tri(3.0));
        verts.extend_from_slice(&tri(1.5));
        let mesh = TriangleMesh::new(verts, vec![[0, 1, 2], [3, 4, 5]], vec![0, 0], 1).unwrap();
        let bvh = Bvh::build(&mesh);
        let ray = Ray::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1.0));
        let hit = bvh.intersect(&mesh, &ray).unwrap();
        let oracle = intersect_brute_force(&mesh, &ray).unwrap();
        assert_eq!(hit.face, 1);
        assert_eq!((hit.face, hit.t), (oracle.face, oracle.t));
        assert!((hit.t - 2.5).abs() < 1e-12);
    }

    #[test]
    fn random_soup_matches_brute_force() {
        let mut r = rng::stream(11, 0);
        let mut verts = Vec::new();
        let mut faces = Vec::new();
        for f in 0..1000u32 {
            let c = Vec3::new(r.random(), r.random(), r.random()) * 4.0;
            for _ in 0..3 {
                let d = Vec3::new(r.random(), r.random(), r.random()) - Vec3::splat(0.5);
                verts.push(c + d * 0.6);
            }
            faces.push([3 * f, 3 * f + 1, 3 * f + 2]);
        }
        let mesh = TriangleMesh::new(verts, faces, vec![0; 1000], 1).unwrap();
        let bvh = Bvh::build(&mesh);
        assert!(bvh.depth() < 64);
        let mut hits = 0;
        for _ in 0..1000 {
            let o = Vec3::new(r.random(), r.random(), r.random()) * 6.0 - Vec3::splat(1.0);
            let d = (Vec3::new(r.random(), r.random(), r.random()) - Vec3::splat(0.5)).normalized();
            let ray = Ray::new(o, d);
            let a = bvh.intersect(&mesh, &ray);
            let b = intersect_brute_force(&mesh, &ray);
            assert_eq!(a.map(|h| (h.face, h.t)), b.map(|h| (h.face, h.t)));
            if let Some(h) = a {
                hits += 1;
                let p = mesh.point_at(h.face, h.u, h.v);
                assert!((p - ray.at(h.t)).length() < 1e-4);
                assert!(h.u >= 0.0 && h.v >= 0.0 && h.u + h.v <= 1.0);
                assert!((h.normal.length() - 1.0).abs() < 1e-6);
            }
        }
        assert!(hits > 100);
    }

    #[test]
    fn spawned_ray_leaves_surface() {
        let mesh = unit_triangle();
        let bvh = Bvh::build(&mesh);
        let p = mesh.point_at(0, 0.2, 0.2);
        let n = mesh.face_normal(0);
        let up = Ray::spawn(p, n, Vec3::new(0.1, 0.0, 1.0).normalized());
        assert!(bvh.intersect(&mesh, &up).is_none());
    }
}
