//! Reference path tracer, cached-radiance renderer and image metrics.

pub mod image;
pub mod neural;
pub mod path;

pub use image::{mse, relmse, Image, DEFAULT_RELMSE_EPSILON};
pub use neural::{neural_render, neural_render_rows};
pub use path::{path_trace, path_trace_rows, trace_path, PathTraceConfig};
