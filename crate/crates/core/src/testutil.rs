use alloc::vec;

use crate::geometry::{Camera, Material, Scene, TriangleMesh};
use crate::math::Vec3;

/// Unit cube, faces wound to point inward.
pub fn cube(material: Material) -> Scene {
    let v = (0..8)
        .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let quads: [[u32; 4]; 6] = [
        [0, 1, 3, 2],
        [4, 6, 7, 5],
        [0, 4, 5, 1],
        [2, 3, 7, 6],
        [0, 2, 6, 4],
        [1, 5, 7, 3],
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    let mesh = TriangleMesh::new(v, faces, vec![0; 12], 1).unwrap();
    let camera = Camera {
        position: Vec3::splat(0.5),
        look_at: Vec3::new(0.5, 0.5, 0.0),
        up: Vec3::new(0.0, 1.0, 0.0),
        fov_degrees: 60.0,
        width: 4,
        height: 4,
    };
    Scene::new(mesh, vec![material], camera).unwrap()
}

