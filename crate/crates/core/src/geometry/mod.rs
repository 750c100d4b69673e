//! Scene geometry: indexed triangle meshes, BVH ray casting and surface
//! sampling primitives.

mod bvh;
mod mesh;
pub mod sampling;

pub use bvh::{intersect_brute_force, intersect_triangle, Bvh, Hit, Ray, RAY_EPSILON};
pub use mesh::{Camera, Material, Scene, TriangleMesh};
