use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Bvh, Scene};
use crate::math::Rgb;
use crate::render::image::Image;
use crate::render::path::pixel_stream;
use crate::trainer::model::{RadianceField, ShadingQuery};

/// Rows `rows` of the cached-radiance image: each jittered camera ray is
/// intersected once and the field is queried at the hit. Misses read the
/// environment.
pub fn neural_render_rows<F: RadianceField + ?Sized>(
    scene: &Scene,
    bvh: &Bvh,
    field: &F,
    spp: u32,
    seed: u64,
    rows: Range<u32>,
) -> Result<Vec<f32>> {
    if spp == 0 {
        return Err(Error::InvalidArgument("spp must be >= 1".into()));
    }
    let cam = &scene.camera;
    let width = cam.width as usize;
    let mut out = Vec::with_capacity(3 * width * rows.len());
    let mut queries = Vec::new();
    let mut owner = Vec::new();
    for y in rows {
        queries.clear();
        owner.clear();
        let mut row = vec![Rgb::BLACK; width];
        for x in 0..cam.width {
            let mut r = pixel_stream(seed, cam.width, x, y);
            for _ in 0..spp {
                let ray = cam.generate_ray(x, y, (r.random(), r.random()));
                match bvh.intersect(&scene.mesh, &ray) {
                    Some(hit) => {
                        queries.push(ShadingQuery::at_hit(scene, &hit, -ray.direction));
                        owner.push(x as usize);
                    }
                    None => row[x as usize] += scene.environment,
                }
            }
        }
        for (l, &x) in field.radiance(&queries)?.iter().zip(&owner) {
            row[x] += *l;
        }
        for l in row {
            out.extend((l / spp as f64).0.iter().map(|&c| c as f32));
        }
    }
    Ok(out)
}

pub fn neural_render<F: RadianceField + ?Sized>(scene: &Scene, bvh: &Bvh, field: &F, spp: u32, seed: u64) -> Result<Image> {
    let cam = &scene.camera;
    let data = neural_render_rows(scene, bvh, field, spp, seed, 0..cam.height)?;
    Image::from_data(cam.width, cam.height, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Material, TriangleMesh};
    use crate::render::path::{path_trace, PathTraceConfig};
    use crate::testutil::cube;
    use crate::trainer::model::{ConstantRadiance, EmittedRadiance};

    #[test]
    fn furnace_oracle_matches_reference() {
        let mut s = cube(Material::new(Rgb::splat(0.5), Rgb::splat(0.5)));
        s.camera.width = 8;
        s.camera.height = 8;
        let bvh = Bvh::build(&s.mesh);
        let neural = neural_render(&s, &bvh, &ConstantRadiance(Rgb::splat(1.0)), 4, 0).unwrap();
        let reference = path_trace(&s, &bvh, &PathTraceConfig { spp: 64, max_depth: 64, seed: 1 }).unwrap();
        // Every reference path returns 1 − 2⁻⁶⁴, so the noise floor is rounding.
        for (a, b) in neural.data().iter().zip(reference.data()) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn black_scene_is_black() {
        let mut s = cube(Material::diffuse(Rgb::BLACK));
        s.camera.width = 4;
        s.camera.height = 4;
        let bvh = Bvh::build(&s.mesh);
        let img = neural_render(&s, &bvh, &EmittedRadiance, 2, 0).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn misses_read_environment() {
        let mut s = cube(Material::diffuse(Rgb::BLACK));
        s.mesh = TriangleMesh::new(
            vec![
                crate::Vec3::new(10.0, 10.0, 10.0),
                crate::Vec3::new(11.0, 10.0, 10.0),
                crate::Vec3::new(10.0, 11.0, 10.0),
            ],
            vec![[0, 1, 2]],
            vec![0],
            1,
        )
        .unwrap();
        s.environment = Rgb::splat(0.25);
        s.camera.width = 2;
        s.camera.height = 2;
        let bvh = Bvh::build(&s.mesh);
        let img = neural_render(&s, &bvh, &EmittedRadiance, 3, 0).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn spp_only_changes_noise() {
        // Distinct emission per face makes pixels straddling edges noisy.
        let base = cube(Material::diffuse(Rgb::BLACK));
        let materials: Vec<Material> = (0..12).map(|f| Material::emitter(Rgb::splat(f as f64 / 4.0))).collect();
        let mesh = TriangleMesh::new(
            base.mesh.vertices().to_vec(),
            base.mesh.faces().to_vec(),
            (0..12).collect(),
            12,
        )
        .unwrap();
        let mut cam = base.camera;
        cam.width = 16;
        cam.height = 16;
        let s = Scene::new(mesh, materials, cam).unwrap();
        let bvh = Bvh::build(&s.mesh);
        let one = neural_render(&s, &bvh, &EmittedRadiance, 1, 5).unwrap();
        let many = neural_render(&s, &bvh, &EmittedRadiance, 32, 6).unwrap();
        let diffs: Vec<f64> = one
            .data()
            .iter()
            .zip(many.data())
            .map(|(&a, &b)| a as f64 - b as f64)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(var > 0.0);
        assert!(mean.abs() <= 3.0 * libm::sqrt(var / n), "{mean}");
    }
}
