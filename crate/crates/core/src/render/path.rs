use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::sampling::{cosine_hemisphere, to_world};
use crate::geometry::{Bvh, Ray, Scene};
use crate::math::Rgb;
use crate::render::image::Image;
use crate::rng::{self, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathTraceConfig {
    pub spp: u32,
    /// Surface interactions per path; no Russian roulette.
    pub max_depth: u32,
    pub seed: u64,
}

impl Default for PathTraceConfig {
    fn default() -> Self {
        PathTraceConfig {
            spp: 64,
            max_depth: 16,
            seed: 0,
        }
    }
}

impl PathTraceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spp == 0 {
            return Err(Error::InvalidArgument("spp must be >= 1".into()));
        }
        Ok(())
    }
}

/// Random stream for pixel `(x, y)`, shared by both renderers.
pub fn pixel_stream(seed: u64, width: u32, x: u32, y: u32) -> RngStream {
    rng::stream(seed, y as u64 * width as u64 + x as u64)
}

/// Radiance along `ray` from one Lambertian path with cosine-weighted
/// bounces. Emission is picked up on either side of a surface.
pub fn trace_path<R: Rng + ?Sized>(scene: &Scene, bvh: &Bvh, mut ray: Ray, max_depth: u32, rng: &mut R) -> Rgb {
    let mut radiance = Rgb::BLACK;
    let mut throughput = Rgb::splat(1.0);
    for _ in 0..max_depth {
        let Some(hit) = bvh.intersect(&scene.mesh, &ray) else {
            radiance += throughput * scene.environment;
            break;
        };
        let material = scene.materials[hit.material];
        radiance += throughput * material.emission;
        throughput = throughput * material.albedo;
        if throughput.is_black() {
            break;
        }
        let wi = to_world(hit.normal, cosine_hemisphere(rng.random(), rng.random()));
        ray = Ray::spawn(hit.position, hit.normal, wi);
    }
    radiance
}

/// Rows `rows` of the reference image, as interleaved RGB.
pub fn path_trace_rows(scene: &Scene, bvh: &Bvh, config: &PathTraceConfig, rows: Range<u32>) -> Vec<f32> {
    let cam = &scene.camera;
    let mut out = Vec::with_capacity(3 * cam.width as usize * rows.len());
    for y in rows {
        for x in 0..cam.width {
            let mut r = pixel_stream(config.seed, cam.width, x, y);
            let mut sum = Rgb::BLACK;
            for _ in 0..config.spp {
                let ray = cam.generate_ray(x, y, (r.random(), r.random()));
                sum += trace_path(scene, bvh, ray, config.max_depth, &mut r);
            }
            let l = sum / config.spp as f64;
            out.extend(l.0.iter().map(|&c| c as f32));
        }
    }
    out
}

pub fn path_trace(scene: &Scene, bvh: &Bvh, config: &PathTraceConfig) -> Result<Image> {
    config.validate()?;
    let cam = &scene.camera;
    Image::from_data(cam.width, cam.height, path_trace_rows(scene, bvh, config, 0..cam.height))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Material, TriangleMesh};
    use crate::testutil::cube;
    use alloc::vec;

    fn small(mut s: Scene, w: u32, h: u32) -> Scene {
        s.camera.width = w;
        s.camera.height = h;
        s
    }

    #[test]
    fn emissive_box_is_exact() {
        let s = small(cube(Material::emitter(Rgb::splat(1.0))), 8, 8);
        let bvh = Bvh::build(&s.mesh);
        let img = path_trace(&s, &bvh, &PathTraceConfig { spp: 4, max_depth: 3, seed: 1 }).unwrap();
        assert!(img.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn furnace_is_one() {
        let s = small(cube(Material::new(Rgb::splat(0.5), Rgb::splat(0.5))), 8, 8);
        let bvh = Bvh::build(&s.mesh);
        let img = path_trace(&s, &bvh, &PathTraceConfig { spp: 256, max_depth: 64, seed: 2 }).unwrap();
        let m = img.mean();
        for c in 0..3 {
            assert!((m[c] - 1.0).abs() <= 0.01, "{m:?}");
        }
    }

    /// Cube lit by the two triangles behind the camera.
    fn lit_cube(albedos: &[Rgb]) -> Scene {
        let base = cube(Material::diffuse(Rgb::splat(0.5)));
        let mut materials = vec![Material::emitter(Rgb::splat(4.0))];
        materials.extend(albedos.iter().map(|&a| Material::diffuse(a)));
        let fm = (0..12u32).map(|f| if f == 2 || f == 3 { 0 } else { 1 + f % albedos.len() as u32 }).collect();
        let mesh = TriangleMesh::new(
            base.mesh.vertices().to_vec(),
            base.mesh.faces().to_vec(),
            fm,
            materials.len(),
        )
        .unwrap();
        let mut cam = base.camera;
        cam.width = 8;
        cam.height = 8;
        Scene::new(mesh, materials, cam).unwrap()
    }

    #[test]
    fn doubling_spp_halves_variance() {
        let s = lit_cube(&[Rgb::splat(0.6), Rgb::new(0.8, 0.3, 0.3)]);
        let bvh = Bvh::build(&s.mesh);
        let seeds = 64;
        let variance = |spp: u32| {
            let imgs: Vec<Image> = (0..seeds)
                .map(|seed| path_trace(&s, &bvh, &PathTraceConfig { spp, max_depth: 8, seed }).unwrap())
                .collect();
            let n = imgs[0].data().len();
            let mut total = 0.0;
            for i in 0..n {
                let mean = imgs.iter().map(|im| im.data()[i] as f64).sum::<f64>() / seeds as f64;
                total += imgs.iter().map(|im| (im.data()[i] as f64 - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
            }
            total / n as f64
        };
        let ratio = variance(4) / variance(8);
        assert!((ratio - 2.0).abs() <= 0.4, "variance ratio {ratio}");
    }

    #[test]
    fn energy_is_bounded() {
        let s = lit_cube(&[Rgb::splat(0.9), Rgb::new(0.2, 0.7, 0.4)]);
        let bvh = Bvh::build(&s.mesh);
        let img = path_trace(&s, &bvh, &PathTraceConfig { spp: 16, max_depth: 200, seed: 3 }).unwrap();
        // The emitter itself has albedo 0, so ρ_max over the scene is 0.9.
        let bound = 4.0 / (1.0 - 0.9);
        assert!(img.data().iter().all(|&v| (v as f64) <= bound + 1e-6));
    }

    #[test]
    fn rows_compose_the_image() {
        let s = lit_cube(&[Rgb::splat(0.6)]);
        let bvh = Bvh::build(&s.mesh);
        let cfg = PathTraceConfig { spp: 2, max_depth: 4, seed: 9 };
        let full = path_trace(&s, &bvh, &cfg).unwrap();
        let mut parts = path_trace_rows(&s, &bvh, &cfg, 5..8);
        let mut head = path_trace_rows(&s, &bvh, &cfg, 0..5);
        head.append(&mut parts);
        assert_eq!(full.data(), head.as_slice());
    }
}
