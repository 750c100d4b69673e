//! File formats, scene generators, parallel rendering and the `nvf`
//! command line, on top of `nvf-core`.

pub mod bench;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod genscene;
pub mod image_io;
pub mod manifest;
pub mod render;
pub mod scene_file;
pub mod training;

pub use error::{Error, Result};
