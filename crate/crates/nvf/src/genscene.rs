//! Procedural test scenes.

use std::collections::HashMap;

use nvf_core::geometry::{Camera, Material, Scene, TriangleMesh};
use nvf_core::{Rgb, Vec3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    /// Closed cube, every face emitting 0.5 with albedo 0.5.
    Furnace,
    /// Closed box with a ceiling light, red and green side walls and a block.
    Cornell,
    /// Two-triangle wall lit by a small, close emitter.
    Quadwall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    /// Grid cells per edge: cube faces for furnace and cornell, the emitter
    /// for quadwall. `None` picks a per-kind default.
    pub subdiv: Option<u32>,
    /// Square image size.
    pub resolution: u32,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            subdiv: None,
            resolution: 32,
        }
    }
}

impl SceneKind {
    pub fn default_subdiv(self) -> u32 {
        match self {
            SceneKind::Furnace => 1,
            SceneKind::Cornell => 6,
            SceneKind::Quadwall => 16,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SceneKind::Furnace => "furnace",
            SceneKind::Cornell => "cornell",
            SceneKind::Quadwall => "quadwall",
        }
    }
}

pub fn generate(kind: SceneKind, options: &GenOptions) -> Result<Scene> {
    let n = options.subdiv.unwrap_or(kind.default_subdiv());
    if n == 0 || options.resolution == 0 {
        return Err(Error::Invalid("subdiv and resolution must be >= 1".into()));
    }
    match kind {
        SceneKind::Furnace => furnace(n, options.resolution),
        SceneKind::Cornell => cornell(n, options.resolution),
        SceneKind::Quadwall => quadwall(n, options.resolution),
    }
}

/// Accumulates quads, welding vertices that coincide to 1e-9.
#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    materials: Vec<u32>,
    index: HashMap<[i64; 3], u32>,
}

impl Builder {
    fn vertex(&mut self, p: Vec3) -> u32 {
        let key = p.to_array().map(|c| (c * 1e9).round() as i64);
        let next = self.vertices.len() as u32;
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            next
        })
    }

    /// `n × n` grid of quads spanning `corner + [0,1]·eu + [0,1]·ev`, two
    /// triangles each, facing `eu × ev`.
    fn grid(&mut self, corner: Vec3, eu: Vec3, ev: Vec3, n: u32, material: impl Fn(u32, u32) -> u32) {
        let at = |i: u32, j: u32| corner + eu * (i as f64 / n as f64) + ev * (j as f64 / n as f64);
        for j in 0..n {
            for i in 0..n {
                let p00 = self.vertex(at(i, j));
                let p10 = self.vertex(at(i + 1, j));
                let p11 = self.vertex(at(i + 1, j + 1));
                let p01 = self.vertex(at(i, j + 1));
                let m = material(i, j);
                self.faces.push([p00, p10, p11]);
                self.faces.push([p00, p11, p01]);
                self.materials.extend([m, m]);
            }
        }
    }

    fn finish(self, materials: Vec<Material>, camera: Camera) -> Result<Scene> {
        let mesh = TriangleMesh::new(self.vertices, self.faces, self.materials, materials.len())?;
        Ok(Scene::new(mesh, materials, camera)?)
    }
}

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Inside faces of the unit cube, in the order floor, ceiling, back,
/// front, left (x = 0), right (x = 1).
fn unit_box(b: &mut Builder, n: u32, material: impl Fn(usize, u32, u32) -> u32) {
    let (x, y, z) = (v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(0.0, 0.0, 1.0));
    let o = Vec3::default();
    let walls = [(o, z, x), (y, x, z), (o, x, y), (z, y, x), (o, y, z), (x, z, y)];
    for (w, (corner, eu, ev)) in walls.into_iter().enumerate() {
        b.grid(corner, eu, ev, n, |i, j| material(w, i, j));
    }
}

pub fn furnace(n: u32, resolution: u32) -> Result<Scene> {
    let mut b = Builder::default();
    unit_box(&mut b, n, |_, _, _| 0);
    let camera = Camera {
        position: v(0.5, 0.5, 0.9),
        look_at: v(0.5, 0.5, 0.0),
        up: v(0.0, 1.0, 0.0),
        fov_degrees: 60.0,
        width: resolution,
        height: resolution,
    };
    b.finish(vec![Material::new(Rgb::splat(0.5), Rgb::splat(0.5))], camera)
}

pub fn cornell(n: u32, resolution: u32) -> Result<Scene> {
    const WHITE: u32 = 0;
    const RED: u32 = 1;
    const GREEN: u32 = 2;
    const LIGHT: u32 = 3;
    if n < 3 {
        return Err(Error::Invalid("cornell needs subdiv >= 3".into()));
    }
    // The light covers the middle third of the ceiling, rounded to cells.
    let (lo, hi) = (n / 3, n - n / 3);
    let mut b = Builder::default();
    unit_box(&mut b, n, |wall, i, j| match wall {
        1 if (lo..hi).contains(&i) && (lo..hi).contains(&j) => LIGHT,
        4 => RED,
        5 => GREEN,
        _ => WHITE,
    });
    let (x0, x1, h, z0, z1) = (0.55, 0.85, 0.4, 0.2, 0.5);
    let (dx, dy, dz) = (v(x1 - x0, 0.0, 0.0), v(0.0, h, 0.0), v(0.0, 0.0, z1 - z0));
    for (corner, eu, ev) in [
        (v(x0, h, z0), dz, dx),
        (v(x0, 0.0, z0), dz, dy),
        (v(x1, 0.0, z0), dy, dz),
        (v(x0, 0.0, z0), dy, dx),
        (v(x0, 0.0, z1), dx, dy),
    ] {
        b.grid(corner, eu, ev, 1, |_, _| WHITE);
    }
    let camera = Camera {
        position: v(0.5, 0.5, 0.95),
        look_at: v(0.5, 0.5, 0.0),
        up: v(0.0, 1.0, 0.0),
        fov_degrees: 62.0,
        width: resolution,
        height: resolution,
    };
    let materials = vec![
        Material::diffuse(Rgb::splat(0.73)),
        Material::diffuse(Rgb::new(0.65, 0.06, 0.05)),
        Material::diffuse(Rgb::new(0.12, 0.45, 0.15)),
        Material::emitter(Rgb::splat(8.0)),
    ];
    b.finish(materials, camera)
}

/// Centre of the quadwall emitter, above the lower-right wall triangle.
pub const QUADWALL_EMITTER_CENTER: [f64; 3] = [0.45, -0.45, 0.12];

pub fn quadwall(n: u32, resolution: u32) -> Result<Scene> {
    let mut b = Builder::default();
    b.grid(v(-1.0, -1.0, 0.0), v(2.0, 0.0, 0.0), v(0.0, 2.0, 0.0), 1, |_, _| 0);
    let side = 0.25;
    let [cx, cy, cz] = QUADWALL_EMITTER_CENTER;
    b.grid(
        v(cx - side / 2.0, cy - side / 2.0, cz),
        v(0.0, side, 0.0),
        v(side, 0.0, 0.0),
        n,
        |_, _| 1,
    );
    let camera = Camera {
        position: v(0.0, -1.9, 1.5),
        look_at: v(0.0, -0.1, 0.0),
        up: v(0.0, 0.0, 1.0),
        fov_degrees: 55.0,
        width: resolution,
        height: resolution,
    };
    let materials = vec![Material::diffuse(Rgb::splat(0.8)), Material::emitter(Rgb::splat(10.0))];
    b.finish(materials, camera)
}
