use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::Rgb;

pub const DEFAULT_RELMSE_EPSILON: f64 = 1e-2;

/// Linear RGB image, 32-bit float, rows stored top to bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        Self::from_data(width, height, vec![0.0; 3 * width as usize * height as usize])
    }

    pub fn from_data(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image dimensions must be >= 1".into()));
        }
        let expected = 3 * width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                what: "image data",
                expected,
                found: data.len(),
            });
        }
        Ok(Image { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        3 * (y as usize * self.width as usize + x as usize)
    }

    pub fn get(&self, x: u32, y: u32) -> [f32; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [f32; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Mean over pixels, per channel.
    pub fn mean(&self) -> Rgb {
        let mut sum = [0.0f64; 3];
        for px in self.data.chunks_exact(3) {
            for c in 0..3 {
                sum[c] += px[c] as f64;
            }
        }
        Rgb(sum) / self.pixel_count() as f64
    }
}

fn check_same_size(a: &Image, b: &Image) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::InvalidArgument(alloc::format!(
            "image size mismatch: {}x{} vs {}x{}",
            a.width,
            a.height,
            b.width,
            b.height
        )));
    }
    Ok(())
}

/// Mean of squared channel differences.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_same_size(a, b)?;
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data.len() as f64)
}

/// Like [`mse`], with each pixel's squared differences divided by
/// `‖b‖² + epsilon`.
pub fn relmse(a: &Image, b: &Image, epsilon: f64) -> Result<f64> {
    check_same_size(a, b)?;
    let mut sum = 0.0;
    for (pa, pb) in a.data.chunks_exact(3).zip(b.data.chunks_exact(3)) {
        let norm: f64 = pb.iter().map(|&v| v as f64 * v as f64).sum();
        let diff: f64 = pa
            .iter()
            .zip(pb)
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum();
        sum += diff / (norm + epsilon);
    }
    Ok(sum / a.data.len() as f64)
}
