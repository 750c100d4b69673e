use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::error::Result;
use crate::geometry::sampling::{cosine_hemisphere, to_world};
use crate::geometry::{Bvh, Ray, Scene};
use crate::math::{Rgb, Vec3};
use crate::trainer::distribution::SurfaceSample;
use crate::trainer::model::{RadianceField, ShadingQuery};

/// One residual `L(x, ωo) − L_e(x) − albedo(x) ⊙ (1/M)·Σ_k L(x′_k, −ω_k)`
/// expressed as indices into the query list of its [`ResidualPlan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTerm {
    pub lhs: usize,
    /// Queries at the surfaces hit by the `M` reflected rays.
    pub rhs: Range<usize>,
    /// Reflected rays that left the scene.
    pub escaped: u32,
    pub m: u32,
    pub albedo: Rgb,
    pub emission: Rgb,
}

/// Ray-traced queries for a batch of residuals, evaluated in one call to
/// the radiance field.
#[derive(Debug, Clone, Default)]
pub struct ResidualPlan {
    pub queries: Vec<ShadingQuery>,
    pub terms: Vec<ResidualTerm>,
}

impl ResidualPlan {
    pub fn clear(&mut self) {
        self.queries.clear();
        self.terms.clear();
    }

    /// Traces `m` cosine-distributed reflection rays from `x`. Nothing is
    /// traced when the albedo is black, since those terms are multiplied by
    /// zero.
    pub fn push<R: Rng + ?Sized>(
        &mut self,
        scene: &Scene,
        bvh: &Bvh,
        x: &SurfaceSample,
        wo: Vec3,
        m: u32,
        rng: &mut R,
    ) {
        let lhs = self.queries.len();
        self.queries.push(ShadingQuery {
            point: x.point,
            normal: x.normal,
            wo,
            albedo: x.albedo,
            emission: x.emission,
        });
        let start = self.queries.len();
        let mut escaped = 0;
        if !x.albedo.is_black() {
            for _ in 0..m {
                let wi = to_world(x.normal, cosine_hemisphere(rng.random(), rng.random()));
                let ray = Ray::spawn(x.point.position, x.normal, wi);
                match bvh.intersect(&scene.mesh, &ray) {
                    Some(hit) => self.queries.push(ShadingQuery::at_hit(scene, &hit, -wi)),
                    None => escaped += 1,
                }
            }
        }
        self.terms.push(ResidualTerm {
            lhs,
            rhs: start..self.queries.len(),
            escaped,
            m,
            albedo: x.albedo,
            emission: x.emission,
        });
    }

    /// Mean incoming radiance over the reflected rays of `term`.
    pub fn incoming(&self, term: &ResidualTerm, radiance: &[Rgb], environment: Rgb) -> Rgb {
        if term.albedo.is_black() || term.m == 0 {
            return Rgb::BLACK;
        }
        let mut sum = environment * term.escaped as f64;
        for &l in &radiance[term.rhs.clone()] {
            sum += l;
        }
        sum / term.m as f64
    }

    /// Residual of every term given the radiance of every query.
    pub fn residuals(&self, radiance: &[Rgb], environment: Rgb) -> Vec<Rgb> {
        self.terms
            .iter()
            .map(|t| radiance[t.lhs] - t.emission - t.albedo * self.incoming(t, radiance, environment))
            .collect()
    }
}

/// Single-sample Monte Carlo residual at `x` in direction `wo`.
pub fn estimate_residual<F: RadianceField + ?Sized, R: Rng + ?Sized>(
    scene: &Scene,
    bvh: &Bvh,
    field: &F,
    x: &SurfaceSample,
    wo: Vec3,
    m: u32,
    rng: &mut R,
) -> Result<Rgb> {
    let mut plan = ResidualPlan::default();
    plan.push(scene, bvh, x, wo, m, rng);
    let radiance = field.radiance(&plan.queries)?;
    Ok(plan.residuals(&radiance, scene.environment)[0])
}
