//! Warps from the unit square to triangles, hemispheres and spheres.

use core::f64::consts::PI;

use rand::Rng;

use crate::math::Vec3;

/// Uniform barycentric `(u, v)` from two uniform numbers using the
/// square-root warp `u = 1 - √r₁`, `v = r₂√r₁`.
pub fn triangle_from_unit_square(r1: f64, r2: f64) -> (f64, f64) {
    let s = libm::sqrt(r1);
    (1.0 - s, r2 * s)
}

pub fn sample_point_in_triangle<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    triangle_from_unit_square(rng.random(), rng.random())
}

/// Cosine-weighted direction around +z; pdf is `cos θ / π`.
pub fn cosine_hemisphere(r1: f64, r2: f64) -> Vec3 {
    let r = libm::sqrt(r1);
    let phi = 2.0 * PI * r2;
    Vec3::new(r * libm::cos(phi), r * libm::sin(phi), libm::sqrt((1.0 - r1).max(0.0)))
}

/// Uniform direction on the +z hemisphere; pdf is `1 / 2π`.
pub fn uniform_hemisphere(r1: f64, r2: f64) -> Vec3 {
    let z = r1;
    let r = libm::sqrt((1.0 - z * z).max(0.0));
    let phi = 2.0 * PI * r2;
    Vec3::new(r * libm::cos(phi), r * libm::sin(phi), z)
}

pub fn uniform_sphere(r1: f64, r2: f64) -> Vec3 {
    let z = 1.0 - 2.0 * r1;
    let r = libm::sqrt((1.0 - z * z).max(0.0));
    let phi = 2.0 * PI * r2;
    Vec3::new(r * libm::cos(phi), r * libm::sin(phi), z)
}

pub const UNIFORM_HEMISPHERE_PDF: f64 = 1.0 / (2.0 * PI);

/// Maps a direction expressed around +z into the frame of unit `normal`.
pub fn to_world(normal: Vec3, local: Vec3) -> Vec3 {
    let (t, b) = normal.orthonormal_basis();
    t * local.x + b * local.y + normal * local.z
}
