//! JSON scene description with inline or OBJ-referenced geometry.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nvf_core::geometry::{Camera, Material, Scene, TriangleMesh};
use nvf_core::{Rgb, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub mesh: MeshSource,
    pub materials: Vec<MaterialSpec>,
    /// May be omitted when there is a single material.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_materials: Option<Vec<u32>>,
    pub camera: CameraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    /// OBJ file, relative to the scene file.
    Path(PathBuf),
    Inline(InlineMesh),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub albedo: [f64; 3],
    #[serde(default)]
    pub emission: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    pub fov_degrees: f64,
    pub width: u32,
    pub height: u32,
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

impl From<&Camera> for CameraSpec {
    fn from(c: &Camera) -> Self {
        CameraSpec {
            position: c.position.to_array(),
            look_at: c.look_at.to_array(),
            up: c.up.to_array(),
            fov_degrees: c.fov_degrees,
            width: c.width,
            height: c.height,
        }
    }
}

impl From<CameraSpec> for Camera {
    fn from(c: CameraSpec) -> Self {
        Camera {
            position: Vec3::from_array(c.position),
            look_at: Vec3::from_array(c.look_at),
            up: Vec3::from_array(c.up),
            fov_degrees: c.fov_degrees,
            width: c.width,
            height: c.height,
        }
    }
}

impl SceneFile {
    /// Inline description of `scene`.
    pub fn from_scene(scene: &Scene) -> Self {
        let mesh = &scene.mesh;
        SceneFile {
            mesh: MeshSource::Inline(InlineMesh {
                vertices: mesh.vertices().iter().map(|v| v.to_array()).collect(),
                faces: mesh.faces().to_vec(),
            }),
            materials: scene
                .materials
                .iter()
                .map(|m| MaterialSpec {
                    albedo: m.albedo.0,
                    emission: m.emission.0,
                })
                .collect(),
            face_materials: Some(mesh.face_materials().to_vec()),
            camera: CameraSpec::from(&scene.camera),
            environment: (!scene.environment.is_black()).then_some(scene.environment.0),
        }
    }

    /// Builds and validates the scene. `base_dir` resolves a relative OBJ path.
    pub fn build(&self, base_dir: &Path) -> Result<Scene> {
        let (vertices, faces) = match &self.mesh {
            MeshSource::Inline(m) => (m.vertices.iter().map(|&v| Vec3::from_array(v)).collect(), m.faces.clone()),
            MeshSource::Path(p) => load_obj(&base_dir.join(p))?,
        };
        let face_materials = match &self.face_materials {
            Some(fm) => fm.clone(),
            None if self.materials.len() == 1 => vec![0; faces.len()],
            None => {
                return Err(Error::Invalid(
                    "face_materials is required when there is more than one material".into(),
                ))
            }
        };
        let materials: Vec<Material> = self
            .materials
            .iter()
            .map(|m| Material::new(Rgb(m.albedo), Rgb(m.emission)))
            .collect();
        let mesh = TriangleMesh::new(vertices, faces, face_materials, materials.len())?;
        let mut scene = Scene::new(mesh, materials, self.camera.into())?;
        if let Some(env) = self.environment {
            let env = Rgb(env);
            if !env.is_finite() || env.0.iter().any(|&c| c < 0.0) {
                return Err(Error::Invalid("environment must be finite and non-negative".into()));
            }
            scene.environment = env;
        }
        Ok(scene)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_scene(text: &str, path: &Path) -> Result<SceneFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let file = parse_scene(&read_text(path)?, path)?;
    file.build(path.parent().unwrap_or(Path::new(".")))
}

pub fn save_scene(path: &Path, file: &SceneFile) -> Result<()> {
    let text = serde_json::to_string_pretty(file).map_err(|e| Error::Invalid(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Vertices and triangles of a Wavefront OBJ file. Texture coordinates,
/// normals, groups and materials are ignored.
pub fn parse_obj(text: &str, path: &Path) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let err = |column: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            column,
            message,
        };
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(err(1, format!("vertex needs 3 coordinates, found {}", coords.len())));
                }
                let mut p = [0.0; 3];
                for (i, c) in coords[..3].iter().enumerate() {
                    p[i] = c
                        .parse()
                        .ok()
                        .filter(|x: &f64| x.is_finite())
                        .ok_or_else(|| err(column_of(raw, c), format!("bad coordinate {c:?}")))?;
                }
                vertices.push(Vec3::from_array(p));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(err(
                        1,
                        format!("only triangles are supported, face has {} vertices", refs.len()),
                    ));
                }
                let mut face = [0u32; 3];
                for (i, r) in refs.iter().enumerate() {
                    let index = r.split('/').next().unwrap_or("");
                    let k: i64 = index
                        .parse()
                        .map_err(|_| err(column_of(raw, r), format!("bad vertex reference {r:?}")))?;
                    let resolved = match k {
                        k if k > 0 => k - 1,
                        k if k < 0 => vertices.len() as i64 + k,
                        _ => -1,
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(err(column_of(raw, r), format!("vertex reference {k} out of range")));
                    }
                    face[i] = resolved as u32;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

fn column_of(line: &str, token: &str) -> usize {
    token.as_ptr() as usize - line.as_ptr() as usize + 1
}

pub fn load_obj(path: &Path) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    parse_obj(&read_text(path)?, path)
}

/// OBJ text for `mesh`, one group per face so that per-face data written
/// alongside can be matched by index.
pub fn mesh_to_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
