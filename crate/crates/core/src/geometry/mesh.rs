use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::bvh::Ray;
use crate::math::{Rgb, Vec3};

/// Lambertian surface description. The BRDF is `albedo / π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub albedo: Rgb,
    pub emission: Rgb,
}

impl Material {
    pub const fn new(albedo: Rgb, emission: Rgb) -> Self {
        Material { albedo, emission }
    }

    pub fn diffuse(albedo: Rgb) -> Self {
        Material::new(albedo, Rgb::BLACK)
    }

    pub fn emitter(emission: Rgb) -> Self {
        Material::new(Rgb::BLACK, emission)
    }

    pub fn is_emissive(&self) -> bool {
        self.emission.0.iter().any(|&c| c > 0.0)
    }

    fn validate(&self) -> Result<()> {
        let albedo_ok = self.albedo.0.iter().all(|&c| (0.0..=1.0).contains(&c));
        let emission_ok = self.emission.0.iter().all(|&c| c.is_finite() && c >= 0.0);
        if albedo_ok && emission_ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!(
                "material out of range: albedo {:?}, emission {:?}",
                self.albedo.0,
                self.emission.0
            )))
        }
    }
}

/// Indexed triangle mesh with per-face material references.
///
/// Areas and geometric normals are computed once at construction; the mesh
/// is immutable afterwards.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    face_material: Vec<u32>,
    face_area: Vec<f64>,
    face_normal: Vec<Vec3>,
    total_area: f64,
}

impl TriangleMesh {
    /// Validates indices and rejects degenerate faces.
    ///
    /// `material_count` bounds the entries of `face_material`.
    pub fn new(
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        face_material: Vec<u32>,
        material_count: usize,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if face_material.len() != faces.len() {
            return Err(Error::ShapeMismatch {
                what: "face material count",
                expected: faces.len(),
                found: face_material.len(),
            });
        }
        let mut face_area = Vec::with_capacity(faces.len());
        let mut face_normal = Vec::with_capacity(faces.len());
        for (i, face) in faces.iter().enumerate() {
            for &index in face {
                if index as usize >= vertices.len() {
                    return Err(Error::VertexIndexOutOfRange {
                        face: i,
                        index: index as usize,
                        vertex_count: vertices.len(),
                    });
                }
            }
            if face_material[i] as usize >= material_count {
                return Err(Error::MaterialIndexOutOfRange {
                    face: i,
                    material: face_material[i] as usize,
                });
            }
            let [a, b, c] = face.map(|k| vertices[k as usize]);
            let e1 = b - a;
            let e2 = c - a;
            let cross = e1.cross(e2);
            let area = 0.5 * cross.length();
            let scale = e1.length_squared().max(e2.length_squared());
            if !(area > 1e-12 * scale) || !area.is_finite() {
                return Err(Error::DegenerateFace { face: i });
            }
            face_area.push(area);
            face_normal.push(cross / (2.0 * area));
        }
        let total_area = face_area.iter().sum();
        Ok(TriangleMesh {
            vertices,
            faces,
            face_material,
            face_area,
            face_normal,
            total_area,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_material(&self, face: usize) -> usize {
        self.face_material[face] as usize
    }

    pub fn face_materials(&self) -> &[u32] {
        &self.face_material
    }

    pub fn face_area(&self, face: usize) -> f64 {
        self.face_area[face]
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_area
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Unit normal from the winding order `(v1 - v0) × (v2 - v0)`.
    pub fn face_normal(&self, face: usize) -> Vec3 {
        self.face_normal[face]
    }

    pub fn face_vertices(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|k| self.vertices[k as usize])
    }

    /// World position of barycentric `(u, v)` on `face`, with weights
    /// `(1 - u - v, u, v)` on the face's three vertices.
    pub fn point_at(&self, face: usize, u: f64, v: f64) -> Vec3 {
        let [a, b, c] = self.face_vertices(face);
        a * (1.0 - u - v) + b * u + c * v
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        self.vertices.iter().fold(
            (Vec3::splat(f64::INFINITY), Vec3::splat(f64::NEG_INFINITY)),
            |(lo, hi), &p| (lo.min(p), hi.max(p)),
        )
    }
}

/// Pinhole camera. `fov_degrees` is the vertical field of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub fov_degrees: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        let forward = self.look_at - self.position;
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("camera resolution must be >= 1".into()));
        }
        if !(self.fov_degrees > 0.0 && self.fov_degrees < 180.0) {
            return Err(Error::InvalidArgument("camera fov must be in (0, 180)".into()));
        }
        if forward.length_squared() == 0.0 || forward.cross(self.up).length_squared() == 0.0 {
            return Err(Error::InvalidArgument(
                "camera look_at/up do not define a frame".into(),
            ));
        }
        Ok(())
    }

    /// Primary ray through pixel `(px, py)` (row 0 at the top) offset by
    /// `jitter` in `[0, 1)²` within the pixel.
    pub fn generate_ray(&self, px: u32, py: u32, jitter: (f64, f64)) -> Ray {
        let forward = (self.look_at - self.position).normalized();
        let right = forward.cross(self.up).normalized();
        let up = right.cross(forward);
        let tan_half = libm::tan(0.5 * self.fov_degrees.to_radians());
        let aspect = self.width as f64 / self.height as f64;
        let sx = (2.0 * (px as f64 + jitter.0) / self.width as f64 - 1.0) * tan_half * aspect;
        let sy = (1.0 - 2.0 * (py as f64 + jitter.1) / self.height as f64) * tan_half;
        Ray::new(self.position, (forward + right * sx + up * sy).normalized())
    }
}

/// A mesh together with its materials, camera and light list.
#[derive(Debug, Clone)]
pub struct Scene {
    pub mesh: TriangleMesh,
    pub materials: Vec<Material>,
    pub camera: Camera,
    /// Indices of faces with emissive materials.
    pub lights: Vec<usize>,
    /// Radiance returned by rays that leave the scene.
    pub environment: Rgb,
}

impl Scene {
    pub fn new(mesh: TriangleMesh, materials: Vec<Material>, camera: Camera) -> Result<Self> {
        for m in &materials {
            m.validate()?;
        }
        camera.validate()?;
        if let Some((face, &material)) = mesh
            .face_materials()
            .iter()
            .enumerate()
            .find(|(_, &m)| m as usize >= materials.len())
        {
            return Err(Error::MaterialIndexOutOfRange {
                face,
                material: material as usize,
            });
        }
        let lights = (0..mesh.face_count())
            .filter(|&f| materials[mesh.face_material(f)].is_emissive())
            .collect();
        Ok(Scene {
            mesh,
            materials,
            camera,
            lights,
            environment: Rgb::BLACK,
        })
    }

    pub fn material_of(&self, face: usize) -> &Material {
        &self.materials[self.mesh.face_material(face)]
    }
}
