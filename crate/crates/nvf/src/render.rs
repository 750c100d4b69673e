//! Row-parallel wrappers around the core renderers.
//!
//! Each pixel owns its random stream, so the image does not depend on how
//! rows are split between workers.

use nvf_core::geometry::{Bvh, Scene};
use nvf_core::render::{neural_render_rows, path_trace_rows, Image, PathTraceConfig};
use nvf_core::trainer::RadianceField;
use rayon::prelude::*;

use crate::error::{Error, Result};

const ROWS_PER_TASK: u32 = 4;

fn row_blocks(height: u32) -> Vec<std::ops::Range<u32>> {
    (0..height)
        .step_by(ROWS_PER_TASK as usize)
        .map(|y| y..(y + ROWS_PER_TASK).min(height))
        .collect()
}

/// Runs `f` on `threads` workers, or on rayon's global pool for `None`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn reference_image(scene: &Scene, bvh: &Bvh, config: &PathTraceConfig) -> Result<Image> {
    config.validate()?;
    let cam = &scene.camera;
    let data: Vec<f32> = row_blocks(cam.height)
        .into_par_iter()
        .map(|rows| path_trace_rows(scene, bvh, config, rows))
        .collect::<Vec<_>>()
        .concat();
    Ok(Image::from_data(cam.width, cam.height, data)?)
}

pub fn neural_image<F: RadianceField + Sync + ?Sized>(
    scene: &Scene,
    bvh: &Bvh,
    field: &F,
    spp: u32,
    seed: u64,
) -> Result<Image> {
    let cam = &scene.camera;
    let parts = row_blocks(cam.height)
        .into_par_iter()
        .map(|rows| neural_render_rows(scene, bvh, field, spp, seed, rows))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Image::from_data(cam.width, cam.height, parts.concat())?)
}
