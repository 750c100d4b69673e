use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyMesh,
    /// A face references a vertex that does not exist.
    VertexIndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    FaceIndexOutOfRange {
        face: usize,
        face_count: usize,
    },
    MaterialIndexOutOfRange {
        face: usize,
        material: usize,
    },
    DegenerateFace {
        face: usize,
    },
    ZeroTotalArea,
    /// Barycentric coordinates outside the closed unit triangle.
    OutsideTriangle {
        u: f64,
        v: f64,
    },
    NotUnitVector,
    LodNotIncreasing {
        face: usize,
        current: u32,
        requested: u32,
    },
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    InvalidArgument(String),
    GeometryMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyMesh => write!(f, "mesh has no faces"),
            Error::VertexIndexOutOfRange {
                face,
                index,
                vertex_count,
            } => write!(
                f,
                "face {face} references vertex {index} but the mesh has {vertex_count} vertices"
            ),
            Error::FaceIndexOutOfRange { face, face_count } => {
                write!(f, "face index {face} out of range ({face_count} faces)")
            }
            Error::MaterialIndexOutOfRange { face, material } => {
                write!(f, "face {face} references unknown material {material}")
            }
            Error::DegenerateFace { face } => write!(f, "face {face} has zero area"),
            Error::ZeroTotalArea => write!(f, "all faces have zero area"),
            Error::OutsideTriangle { u, v } => {
                write!(f, "barycentric ({u}, {v}) lies outside the unit triangle")
            }
            Error::NotUnitVector => write!(f, "direction is not normalized"),
            Error::LodNotIncreasing {
                face,
                current,
                requested,
            } => write!(
                f,
                "face {face}: requested LOD {requested} does not exceed current LOD {current}"
            ),
            Error::ShapeMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected {expected}, found {found}"),
            Error::InvalidArgument(msg) => f.write_str(msg),
            Error::GeometryMismatch => {
                write!(f, "checkpoint was trained on different geometry")
            }
        }
    }
}

impl core::error::Error for Error {}
