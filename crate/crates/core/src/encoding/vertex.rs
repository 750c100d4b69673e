//! Learnable features attached to mesh vertices, with per-face virtual
//! subdivision for extra resolution.
//!
//! An unrefined face (LOD `k = 1`) interpolates the features of its three
//! mesh vertices with barycentric weights `(1 - u - v, u, v)`. A face refined
//! to LOD `k` owns a block of `(k + 1)(k + 2) / 2` features laid out on the
//! regular triangular grid `{(a, b) : a + b ≤ k}`; a query is localized to one
//! of the `k²` sub-triangles and interpolated from its three grid corners.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::params::{Gradients, Parameterized};
use crate::real::Real;
use crate::rng;

/// Features per vertex used for static scenes.
pub const DEFAULT_FEATURE_WIDTH: usize = 4;

/// Magnitude of the uniform feature initializer.
pub const FEATURE_INIT_SCALE: f64 = 1e-4;

/// Tolerance for barycentric coordinates slightly outside the triangle.
const BARY_TOLERANCE: f64 = 1e-9;

/// Number of grid points of a face subdivided into `k` segments per edge.
pub const fn lod_vertex_count(k: u32) -> usize {
    let k = k as usize;
    (k + 1) * (k + 2) / 2
}

/// Position of grid point `(a, b)` inside a block of LOD `k`; rows are
/// ordered by `a`, each row holding `b = 0..=k - a`.
pub fn grid_index(a: u32, b: u32, k: u32) -> usize {
    debug_assert!(a + b <= k);
    let (a, b, k) = (a as usize, b as usize, k as usize);
    a * (k + 1) - a * a.saturating_sub(1) / 2 + b
}

/// Sub-triangle of a `k`-subdivided face containing a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubTriangleRef {
    /// Integer cell coordinates `(ū, v̄)`.
    pub cell: (u32, u32),
    /// Set when the fractional parts sum past one.
    pub upper: bool,
    /// Local barycentric `(u', v')` inside the sub-triangle.
    pub local: (f64, f64),
    /// Grid points receiving weights `1 - u' - v'`, `u'` and `v'`.
    pub corners: [(u32, u32); 3],
}

impl SubTriangleRef {
    pub fn weights(&self) -> [f64; 3] {
        let (u, v) = self.local;
        [1.0 - u - v, u, v]
    }

    /// Global barycentric coordinates of the local point.
    pub fn global(&self, k: u32) -> (f64, f64) {
        let w = self.weights();
        let mut u = 0.0;
        let mut v = 0.0;
        for (c, wi) in self.corners.iter().zip(w) {
            u += wi * c.0 as f64;
            v += wi * c.1 as f64;
        }
        (u / k as f64, v / k as f64)
    }
}

fn check_barycentric(u: f64, v: f64) -> Result<(f64, f64)> {
    if !(u >= -BARY_TOLERANCE && v >= -BARY_TOLERANCE && u + v <= 1.0 + BARY_TOLERANCE) {
        return Err(Error::OutsideTriangle { u, v });
    }
    let (u, v) = (u.max(0.0), v.max(0.0));
    let s = u + v;
    Ok(if s > 1.0 { (u / s, v / s) } else { (u, v) })
}

/// Finds the sub-triangle of a `k`-subdivided face containing `(u, v)`.
///
/// Cell coordinates are `ū = ⌊ku⌋`, `v̄ = ⌊kv⌋` clamped into the grid; the
/// lower triangle of the cell uses local `(ũ, ṽ)` and the upper triangle
/// uses `(1 - ũ, 1 - ṽ)` with the corner order that keeps the interpolated
/// field continuous across every shared edge.
pub fn locate(u: f64, v: f64, k: u32) -> Result<SubTriangleRef> {
    if k == 0 {
        return Err(Error::InvalidArgument("LOD factor must be >= 1".into()));
    }
    let (u, v) = check_barycentric(u, v)?;
    let kf = k as f64;
    let mut cu = ((kf * u) as u32).min(k - 1);
    let mut cv = ((kf * v) as u32).min(k - 1);
    // Points on the outer edge whose coordinates both round up.
    while cu + cv > k - 1 {
        if cu >= cv {
            cu -= 1;
        } else {
            cv -= 1;
        }
    }
    let fu = kf * u - cu as f64;
    let fv = kf * v - cv as f64;
    let last_diagonal = cu + cv == k - 1;
    if fu + fv <= 1.0 || last_diagonal {
        let s = fu + fv;
        let local = if s > 1.0 { (fu / s, fv / s) } else { (fu, fv) };
        Ok(SubTriangleRef {
            cell: (cu, cv),
            upper: false,
            local,
            corners: [(cu, cv), (cu + 1, cv), (cu, cv + 1)],
        })
    } else {
        Ok(SubTriangleRef {
            cell: (cu, cv),
            upper: true,
            local: (1.0 - fu, 1.0 - fv),
            corners: [(cu + 1, cv + 1), (cu, cv + 1), (cu + 1, cv)],
        })
    }
}

/// Indices of the three features contributing to a query, with weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureStencil {
    /// Parameter group holding the features (0 = base features,
    /// `1 + face` = virtual block of `face`).
    pub group: usize,
    /// Row offsets (in units of features) within the group.
    pub rows: [usize; 3],
    pub weights: [f64; 3],
}

/// Per-vertex base features plus per-face virtual blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFeatureStore<T> {
    width: usize,
    vertex_count: usize,
    faces: Vec<[u32; 3]>,
    base: Vec<T>,
    face_lod: Vec<u32>,
    /// Empty for faces with `k = 1`.
    blocks: Vec<Vec<T>>,
}

impl<T: Real> VertexFeatureStore<T> {
    /// Base features drawn i.i.d. from `U(-1e-4, 1e-4)`; every face starts
    /// unrefined.
    pub fn new(mesh: &TriangleMesh, width: usize, seed: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidArgument("feature width must be >= 1".into()));
        }
        let mut r = rng::stream(seed, 0x7665_7274);
        let base = (0..mesh.vertex_count() * width)
            .map(|_| T::from_f64(r.random_range(-FEATURE_INIT_SCALE..=FEATURE_INIT_SCALE)))
            .collect();
        Ok(VertexFeatureStore {
            width,
            vertex_count: mesh.vertex_count(),
            faces: mesh.faces().to_vec(),
            base,
            face_lod: vec![1; mesh.face_count()],
            blocks: vec![Vec::new(); mesh.face_count()],
        })
    }

    /// Reassembles a store from serialized parts, checking every invariant.
    pub fn from_parts(
        width: usize,
        faces: Vec<[u32; 3]>,
        base: Vec<T>,
        face_lod: Vec<u32>,
        blocks: Vec<Vec<T>>,
    ) -> Result<Self> {
        if width == 0 || base.len() % width != 0 {
            return Err(Error::InvalidArgument("base feature array shape".into()));
        }
        let vertex_count = base.len() / width;
        if face_lod.len() != faces.len() || blocks.len() != faces.len() {
            return Err(Error::ShapeMismatch {
                what: "per-face arrays",
                expected: faces.len(),
                found: face_lod.len().min(blocks.len()),
            });
        }
        for (face, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i as usize >= vertex_count) {
                return Err(Error::VertexIndexOutOfRange {
                    face,
                    index: index as usize,
                    vertex_count,
                });
            }
            let k = face_lod[face];
            let expected = if k == 1 { 0 } else { lod_vertex_count(k) * width };
            if k == 0 || blocks[face].len() != expected {
                return Err(Error::ShapeMismatch {
                    what: "virtual block",
                    expected,
                    found: blocks[face].len(),
                });
            }
        }
        Ok(VertexFeatureStore {
            width,
            vertex_count,
            faces,
            base,
            face_lod,
            blocks,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn base_features(&self) -> &[T] {
        &self.base
    }

    pub fn base_features_mut(&mut self) -> &mut [T] {
        &mut self.base
    }

    pub fn lod(&self, face: usize) -> u32 {
        self.face_lod[face]
    }

    pub fn face_lods(&self) -> &[u32] {
        &self.face_lod
    }

    pub fn block(&self, face: usize) -> &[T] {
        &self.blocks[face]
    }

    pub fn block_mut(&mut self, face: usize) -> &mut [T] {
        &mut self.blocks[face]
    }

    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    fn check_face(&self, face: usize) -> Result<()> {
        if face < self.faces.len() {
            Ok(())
        } else {
            Err(Error::FaceIndexOutOfRange {
                face,
                face_count: self.faces.len(),
            })
        }
    }

    /// Which stored features a query at `(u, v)` on `face` reads.
    pub fn stencil(&self, face: usize, u: f64, v: f64) -> Result<FeatureStencil> {
        self.check_face(face)?;
        let k = self.face_lod[face];
        if k == 1 {
            let (u, v) = check_barycentric(u, v)?;
            let [i, j, l] = self.faces[face];
            Ok(FeatureStencil {
                group: 0,
                rows: [i as usize, j as usize, l as usize],
                weights: [1.0 - u - v, u, v],
            })
        } else {
            let sub = locate(u, v, k)?;
            Ok(FeatureStencil {
                group: 1 + face,
                rows: sub.corners.map(|(a, b)| grid_index(a, b, k)),
                weights: sub.weights(),
            })
        }
    }

    fn group(&self, group: usize) -> &[T] {
        if group == 0 {
            &self.base
        } else {
            &self.blocks[group - 1]
        }
    }

    /// Interpolated feature at barycentric `(u, v)` of `face`, written to `out`.
    pub fn encode_into(&self, face: usize, u: f64, v: f64, out: &mut [T]) -> Result<()> {
        let st = self.stencil(face, u, v)?;
        let d = self.width;
        let data = self.group(st.group);
        out[..d].fill(T::zero());
        for (row, w) in st.rows.iter().zip(st.weights) {
            let w = T::from_f64(w);
            for (o, &f) in out[..d].iter_mut().zip(&data[row * d..row * d + d]) {
                *o += w * f;
            }
        }
        Ok(())
    }

    pub fn encode(&self, face: usize, u: f64, v: f64) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.width];
        self.encode_into(face, u, v, &mut out)?;
        Ok(out)
    }

    /// Adds `weight · upstream` to each of the three features read by the
    /// matching [`encode`](Self::encode) call.
    pub fn encode_backward(
        &self,
        face: usize,
        u: f64,
        v: f64,
        upstream: &[T],
        grads: &mut Gradients<T>,
    ) -> Result<()> {
        let st = self.stencil(face, u, v)?;
        let d = self.width;
        let g = &mut grads.groups[st.group];
        for (row, w) in st.rows.iter().zip(st.weights) {
            let w = T::from_f64(w);
            for (gi, &up) in g[row * d..row * d + d].iter_mut().zip(&upstream[..d]) {
                *gi += w * up;
            }
        }
        Ok(())
    }

    /// Raises the LOD of `face` to `new_k`. Each grid point `(a, b)` of the
    /// new block takes the value the current representation produces at
    /// `(a / new_k, b / new_k)`; afterwards the face reads only its block.
    pub fn refine_face(&mut self, face: usize, new_k: u32) -> Result<()> {
        self.check_face(face)?;
        let current = self.face_lod[face];
        if new_k <= current {
            return Err(Error::LodNotIncreasing {
                face,
                current,
                requested: new_k,
            });
        }
        let d = self.width;
        let mut block = vec![T::zero(); lod_vertex_count(new_k) * d];
        let kf = new_k as f64;
        for a in 0..=new_k {
            for b in 0..=new_k - a {
                let row = grid_index(a, b, new_k);
                self.encode_into(face, a as f64 / kf, b as f64 / kf, &mut block[row * d..row * d + d])?;
            }
        }
        self.blocks[face] = block;
        self.face_lod[face] = new_k;
        Ok(())
    }

    /// Base vertices still read by at least one unrefined face.
    pub fn used_base_vertices(&self) -> usize {
        let mut used = vec![false; self.vertex_count];
        for (f, face) in self.faces.iter().enumerate() {
            if self.face_lod[f] == 1 {
                for &i in face {
                    used[i as usize] = true;
                }
            }
        }
        used.iter().filter(|&&u| u).count()
    }

    /// Total grid points held in virtual blocks.
    pub fn virtual_vertex_count(&self) -> usize {
        self.face_lod
            .iter()
            .filter(|&&k| k > 1)
            .map(|&k| lod_vertex_count(k))
            .sum()
    }
}

impl<T: Real> Parameterized<T> for VertexFeatureStore<T> {
    /// Group 0 is the base array; group `1 + f` is the block of face `f`
    /// (empty while unrefined).
    fn param_groups(&self) -> Vec<&[T]> {
        let mut g = Vec::with_capacity(1 + self.blocks.len());
        g.push(self.base.as_slice());
        g.extend(self.blocks.iter().map(Vec::as_slice));
        g
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [T]> {
        let mut g = Vec::with_capacity(1 + self.blocks.len());
        g.push(self.base.as_mut_slice());
        g.extend(self.blocks.iter_mut().map(Vec::as_mut_slice));
        g
    }

    /// `d · (used base vertices + Σ block sizes)`.
    fn param_count(&self) -> usize {
        self.width * (self.used_base_vertices() + self.virtual_vertex_count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use rand::Rng;

    fn cube() -> TriangleMesh {
        let v = |x, y, z| Vec3::new(x, y, z);
        let verts = vec![
            v(0., 0., 0.),
            v(1., 0., 0.),
            v(1., 1., 0.),
            v(0., 1., 0.),
            v(0., 0., 1.),
            v(1., 0., 1.),
            v(1., 1., 1.),
            v(0., 1., 1.),
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [2, 3, 7],
            [2, 7, 6],
            [1, 2, 6],
            [1, 6, 5],
            [0, 4, 7],
            [0, 7, 3],
        ];
        TriangleMesh::new(verts, faces, vec![0; 12], 1).unwrap()
    }

    fn triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            vec![0],
            1,
        )
        .unwrap()
    }

    /// Affine test field ℓ(u, v) with four channels.
    fn affine(u: f64, v: f64) -> [f64; 4] {
        [
            0.3 + 1.2 * u - 0.7 * v,
            -0.1 + 0.4 * u + 2.0 * v,
            2.5 * u,
            1.0 - v,
        ]
    }

    #[test]
    fn init_is_small_and_deterministic() {
        let m = cube();
        let a = VertexFeatureStore::<f32>::new(&m, 4, 9).unwrap();
        let b = VertexFeatureStore::<f32>::new(&m, 4, 9).unwrap();
        assert_eq!(a.param_count(), 32);
        assert!(a.base_features().iter().all(|x| x.abs() <= 1e-4));
        assert!(a.base_features().iter().any(|x| *x != 0.0));
        assert_eq!(
            a.base_features().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.base_features().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert!(VertexFeatureStore::<f32>::new(&m, 0, 9).is_err());
    }

    #[test]
    fn locate_examples() {
        let r = locate(0.3, 0.3, 1).unwrap();
        assert_eq!((r.cell, r.upper), ((0, 0), false));
        assert!((r.local.0 - 0.3).abs() < 1e-15 && (r.local.1 - 0.3).abs() < 1e-15);

        let r = locate(0.25, 0.25, 2).unwrap();
        assert_eq!((r.cell, r.upper, r.local), ((0, 0), false, (0.5, 0.5)));

        let r = locate(0.4, 0.4, 2).unwrap();
        assert_eq!((r.cell, r.upper), ((0, 0), true));
        assert!((r.local.0 - 0.2).abs() < 1e-12 && (r.local.1 - 0.2).abs() < 1e-12);

        let r = locate(1.0, 0.0, 3).unwrap();
        assert_eq!((r.cell, r.upper, r.local), ((2, 0), false, (1.0, 0.0)));
        assert_eq!(r.corners[1], (3, 0));

        assert!(locate(0.7, 0.7, 2).is_err());
        assert!(locate(-0.1, 0.2, 2).is_err());
    }

    #[test]
    fn locate_handles_outer_edge_grid_points() {
        for k in 2..=8u32 {
            for a in 0..=k {
                let b = k - a;
                let (u, v) = (a as f64 / k as f64, b as f64 / k as f64);
                let r = locate(u, v, k).unwrap();
                let (gu, gv) = r.global(k);
                assert!((gu - u).abs() < 1e-12 && (gv - v).abs() < 1e-12, "k={k} a={a}");
                for c in r.corners {
                    assert!(c.0 + c.1 <= k);
                }
            }
        }
    }

    #[test]
    fn encode_interpolates_vertices() {
        let m = triangle();
        let mut s = VertexFeatureStore::<f64>::new(&m, 4, 0).unwrap();
        s.base_features_mut().copy_from_slice(&[
            1., 0., 0., 0., //
            0., 1., 0., 0., //
            0., 0., 1., 0.,
        ]);
        assert_eq!(s.encode(0, 0.0, 0.0).unwrap(), vec![1., 0., 0., 0.]);
        let f = s.encode(0, 0.2, 0.3).unwrap();
        for (a, b) in f.iter().zip([0.5, 0.2, 0.3, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(
            s.encode(3, 0.1, 0.1),
            Err(Error::FaceIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn refined_face_reproduces_affine_field() {
        let m = triangle();
        let mut s = VertexFeatureStore::<f64>::new(&m, 4, 0).unwrap();
        s.refine_face(0, 4).unwrap();
        let k = 4;
        for a in 0..=k {
            for b in 0..=k - a {
                let row = grid_index(a, b, k);
                let val = affine(a as f64 / 4.0, b as f64 / 4.0);
                s.block_mut(0)[row * 4..row * 4 + 4].copy_from_slice(&val);
            }
        }
        let mut r = rng::stream(5, 0);
        for _ in 0..100 {
            let (u, v) = crate::geometry::sampling::sample_point_in_triangle(&mut r);
            let f = s.encode(0, u, v).unwrap();
            for (x, y) in f.iter().zip(affine(u, v)) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn refinement_from_affine_base_samples_grid_points() {
        let m = triangle();
        let mut s = VertexFeatureStore::<f64>::new(&m, 4, 0).unwrap();
        let corners = [affine(0.0, 0.0), affine(1.0, 0.0), affine(0.0, 1.0)];
        let flat: Vec<f64> = corners.iter().flatten().copied().collect();
        s.base_features_mut().copy_from_slice(&flat);
        s.refine_face(0, 2).unwrap();
        assert_eq!(s.block(0).len(), 6 * 4);
        for a in 0..=2u32 {
            for b in 0..=2 - a {
                let row = grid_index(a, b, 2);
                let expect = affine(a as f64 / 2.0, b as f64 / 2.0);
                for (x, y) in s.block(0)[row * 4..row * 4 + 4].iter().zip(expect) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
        s.refine_face(0, 3).unwrap();
        assert_eq!(s.block(0).len(), 10 * 4);
        assert!(matches!(
            s.refine_face(0, 3),
            Err(Error::LodNotIncreasing { current: 3, requested: 3, .. })
        ));
    }

    #[test]
    fn refinement_preserves_values() {
        let m = cube();
        let mut s = VertexFeatureStore::<f64>::new(&m, 4, 3).unwrap();
        let mut r = rng::stream(8, 0);
        let pts: Vec<(f64, f64)> = (0..100)
            .map(|_| crate::geometry::sampling::sample_point_in_triangle(&mut r))
            .collect();
        for (face, k) in [(0usize, 2u32), (5, 3), (7, 5)] {
            let before: Vec<_> = pts.iter().map(|&(u, v)| s.encode(face, u, v).unwrap()).collect();
            s.refine_face(face, k).unwrap();
            for (&(u, v), b) in pts.iter().zip(&before) {
                let a = s.encode(face, u, v).unwrap();
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() < 1e-6);
                }
            }
        }
        // Doubling an already refined face is also exact.
        let before: Vec<_> = pts.iter().map(|&(u, v)| s.encode(0, u, v).unwrap()).collect();
        s.refine_face(0, 4).unwrap();
        for (&(u, v), b) in pts.iter().zip(&before) {
            let a = s.encode(0, u, v).unwrap();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_vertex_query_and_additivity() {
        let m = triangle();
        let s = VertexFeatureStore::<f64>::new(&m, 4, 0).unwrap();
        let mut g = Gradients::zeros_like(&s);
        s.encode_backward(0, 0.0, 0.0, &[1.0, 0.0, 0.0, 0.0], &mut g).unwrap();
        assert_eq!(g.groups[0], vec![1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.]);

        let mut g = Gradients::zeros_like(&s);
        let up = [0.5, -1.0, 2.0, 0.25];
        s.encode_backward(0, 0.2, 0.3, &up, &mut g).unwrap();
        s.encode_backward(0, 0.2, 0.3, &up, &mut g).unwrap();
        let w = [0.5, 0.2, 0.3];
        for (vtx, wv) in w.iter().enumerate() {
            for c in 0..4 {
                assert!((g.groups[0][vtx * 4 + c] - 2.0 * wv * up[c]).abs() < 1e-15);
            }
        }
    }

    /// Central differences of ⟨upstream, encode⟩ against the accumulated
    /// gradient, for unrefined and refined faces.
    #[test]
    fn backward_matches_finite_differences() {
        let m = cube();
        let mut s = VertexFeatureStore::<f64>::new(&m, 4, 1).unwrap();
        let mut r = rng::stream(4, 0);
        for x in s.base_features_mut() {
            *x = r.random_range(-1.0..1.0);
        }
        s.refine_face(2, 3).unwrap();
        let up = [0.3, -0.8, 1.1, 0.05];
        let h = 1e-4;
        for (face, u, v) in [(0usize, 0.2, 0.5), (2, 0.41, 0.37), (2, 0.05, 0.9)] {
            let mut g = Gradients::zeros_like(&s);
            s.encode_backward(face, u, v, &up, &mut g).unwrap();
            let st = s.stencil(face, u, v).unwrap();
            for &row in &st.rows {
                for c in 0..4 {
                    let idx = row * 4 + c;
                    let objective = |s: &VertexFeatureStore<f64>| -> f64 {
                        s.encode(face, u, v).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum()
                    };
                    let mut sp = s.clone();
                    sp.param_groups_mut()[st.group][idx] += h;
                    let mut sm = s.clone();
                    sm.param_groups_mut()[st.group][idx] -= h;
                    let fd = (objective(&sp) - objective(&sm)) / (2.0 * h);
                    let an = g.groups[st.group][idx];
                    assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "fd {fd} an {an}");
                }
            }
        }
    }

    #[test]
    fn param_count_accounting() {
        let m = cube();
        let mut s = VertexFeatureStore::<f32>::new(&m, 4, 0).unwrap();
        assert_eq!(s.param_count(), 32);
        s.refine_face(0, 2).unwrap();
        assert_eq!(s.param_count(), 32 + 6 * 4);
        for f in 1..12 {
            s.refine_face(f, 2).unwrap();
        }
        assert_eq!(s.used_base_vertices(), 0);
        assert_eq!(s.param_count(), 12 * 6 * 4);
        assert_eq!(lod_vertex_count(3), 10);
    }

    #[test]
    fn from_parts_checks_block_sizes() {
        let m = triangle();
        let mut s = VertexFeatureStore::<f32>::new(&m, 4, 0).unwrap();
        s.refine_face(0, 2).unwrap();
        let rebuilt = VertexFeatureStore::from_parts(
            4,
            s.faces().to_vec(),
            s.base_features().to_vec(),
            s.face_lods().to_vec(),
            s.blocks().to_vec(),
        )
        .unwrap();
        assert_eq!(rebuilt, s);
        assert!(VertexFeatureStore::<f32>::from_parts(
            4,
            s.faces().to_vec(),
            s.base_features().to_vec(),
            vec![3],
            s.blocks().to_vec(),
        )
        .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = (f64, f64)> {
            (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| {
                if a + b > 1.0 {
                    (1.0 - a, 1.0 - b)
                } else {
                    (a, b)
                }
            })
        }

        proptest! {
            #[test]
            fn locate_partitions_the_triangle((u, v) in point(), k in 1u32..=8) {
                let r = locate(u, v, k).unwrap();
                let (cu, cv) = r.cell;
                prop_assert!(cu + cv < k);
                prop_assert!(r.local.0 >= 0.0 && r.local.1 >= 0.0);
                prop_assert!(r.local.0 + r.local.1 <= 1.0 + 1e-9);
                if r.upper {
                    prop_assert!(cu + cv + 2 <= k);
                }
                let (gu, gv) = r.global(k);
                prop_assert!((gu - u).abs() < 1e-9 && (gv - v).abs() < 1e-9);
                let w = r.weights();
                prop_assert!(w.iter().all(|&x| x >= -1e-12));
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}
