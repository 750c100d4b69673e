use alloc::vec::Vec;

use rand::Rng;

use crate::encoding::{lod_vertex_count, SurfacePoint};
use crate::error::{Error, Result};
use crate::geometry::sampling::sample_point_in_triangle;
use crate::geometry::{Scene, TriangleMesh};
use crate::math::{Rgb, Vec3};

/// A point drawn on the scene surface together with its density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: SurfacePoint,
    /// Winding-order normal.
    pub normal: Vec3,
    pub albedo: Rgb,
    pub emission: Rgb,
    /// Density with respect to surface area: `p(face) / A(face)`.
    pub pdf_area: f64,
}

/// Face probabilities mixing an area term and a feature-count term:
/// `p(i) = α·A(i)/A_total + (1 − α)·N(i)/N_total`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceDistribution {
    alpha: f64,
    probabilities: Vec<f64>,
    cdf: Vec<f64>,
}

impl FaceDistribution {
    /// `lods` gives `k_i` per face; `None` treats every face as unrefined.
    pub fn build(mesh: &TriangleMesh, lods: Option<&[u32]>, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(alloc::format!("alpha {alpha} outside [0, 1]")));
        }
        let n = mesh.face_count();
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        if let Some(l) = lods {
            if l.len() != n {
                return Err(Error::ShapeMismatch {
                    what: "per-face LOD",
                    expected: n,
                    found: l.len(),
                });
            }
        }
        let area_total = mesh.total_area();
        if !(area_total > 0.0) {
            return Err(Error::ZeroTotalArea);
        }
        let count = |i: usize| lod_vertex_count(lods.map_or(1, |l| l[i])) as f64;
        let count_total: f64 = (0..n).map(count).sum();
        let probabilities: Vec<f64> = (0..n)
            .map(|i| alpha * mesh.face_area(i) / area_total + (1.0 - alpha) * count(i) / count_total)
            .collect();
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &p in &probabilities {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        cdf[n - 1] = 1.0;
        Ok(FaceDistribution {
            alpha,
            probabilities,
            cdf,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn probability(&self, face: usize) -> f64 {
        self.probabilities[face]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Inverts the cumulative table at `r ∈ [0, 1)`.
    pub fn sample_face(&self, r: f64) -> usize {
        self.cdf.partition_point(|&c| c <= r).min(self.cdf.len() - 1)
    }

    pub fn sample_surface<R: Rng + ?Sized>(&self, scene: &Scene, rng: &mut R) -> SurfaceSample {
        let face = self.sample_face(rng.random());
        let (u, v) = sample_point_in_triangle(rng);
        let material = scene.material_of(face);
        SurfaceSample {
            point: SurfacePoint {
                face,
                u,
                v,
                position: scene.mesh.point_at(face, u, v),
            },
            normal: scene.mesh.face_normal(face),
            albedo: material.albedo,
            emission: material.emission,
            pdf_area: self.probabilities[face] / scene.mesh.face_area(face),
        }
    }
}
