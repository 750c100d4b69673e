//! Trainable position encoders: vertex features and the hash-grid baseline.

pub mod hashgrid;
pub mod vertex;

use alloc::vec::Vec;

pub use hashgrid::{HashGridConfig, HashGridEncoder};
pub use vertex::{locate, lod_vertex_count, SubTriangleRef, VertexFeatureStore};

use crate::error::Result;
use crate::math::Vec3;
use crate::params::{Gradients, Parameterized};
use crate::real::Real;

/// A point on the scene surface, addressable by either encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub face: usize,
    pub u: f64,
    pub v: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Vertex,
    HashGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PositionEncoder<T> {
    Vertex(VertexFeatureStore<T>),
    HashGrid(HashGridEncoder<T>),
}

impl<T: Real> PositionEncoder<T> {
    pub fn kind(&self) -> EncoderKind {
        match self {
            PositionEncoder::Vertex(_) => EncoderKind::Vertex,
            PositionEncoder::HashGrid(_) => EncoderKind::HashGrid,
        }
    }

    pub fn output_width(&self) -> usize {
        match self {
            PositionEncoder::Vertex(s) => s.width(),
            PositionEncoder::HashGrid(g) => g.output_width(),
        }
    }

    /// Stored feature vectors read per query.
    pub fn gathers_per_query(&self) -> usize {
        match self {
            PositionEncoder::Vertex(_) => 3,
            PositionEncoder::HashGrid(g) => 8 * g.config().levels as usize,
        }
    }

    pub fn encode_into(&self, p: &SurfacePoint, out: &mut [T]) -> Result<()> {
        match self {
            PositionEncoder::Vertex(s) => s.encode_into(p.face, p.u, p.v, out),
            PositionEncoder::HashGrid(g) => {
                g.encode_into(p.position, out);
                Ok(())
            }
        }
    }

    pub fn encode_backward(&self, p: &SurfacePoint, upstream: &[T], grads: &mut Gradients<T>) -> Result<()> {
        match self {
            PositionEncoder::Vertex(s) => s.encode_backward(p.face, p.u, p.v, upstream, grads),
            PositionEncoder::HashGrid(g) => {
                g.encode_backward(p.position, upstream, grads);
                Ok(())
            }
        }
    }

    pub fn as_vertex(&self) -> Option<&VertexFeatureStore<T>> {
        match self {
            PositionEncoder::Vertex(s) => Some(s),
            PositionEncoder::HashGrid(_) => None,
        }
    }

    pub fn as_vertex_mut(&mut self) -> Option<&mut VertexFeatureStore<T>> {
        match self {
            PositionEncoder::Vertex(s) => Some(s),
            PositionEncoder::HashGrid(_) => None,
        }
    }
}

impl<T: Real> Parameterized<T> for PositionEncoder<T> {
    fn param_groups(&self) -> Vec<&[T]> {
        match self {
            PositionEncoder::Vertex(s) => s.param_groups(),
            PositionEncoder::HashGrid(g) => g.param_groups(),
        }
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [T]> {
        match self {
            PositionEncoder::Vertex(s) => s.param_groups_mut(),
            PositionEncoder::HashGrid(g) => g.param_groups_mut(),
        }
    }

    fn param_count(&self) -> usize {
        match self {
            PositionEncoder::Vertex(s) => s.param_count(),
            PositionEncoder::HashGrid(g) => g.param_count(),
        }
    }
}
