//! Learnable features stored at mesh vertices, with per-face virtual
//! subdivision, and a radiance cache trained by minimizing the residual of
//! the rendering equation.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the CLI
//! and anything touching the operating system live in the `nvf` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod encoding;
pub mod error;
pub mod geometry;
pub mod math;
pub mod neural;
pub mod params;
pub mod real;
pub mod render;
pub mod rng;
#[cfg(test)]
mod testutil;
pub mod trainer;

pub use error::{Error, Result};
pub use math::{Rgb, Vec3};
