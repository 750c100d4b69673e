//! Multi-resolution hashed voxel grid, used as the baseline position
//! encoder.
//!
//! Each level stores `2^table_size_log2` feature vectors. Levels whose dense
//! vertex lattice fits in the table are indexed directly; finer levels use a
//! spatial hash and let colliding voxels share entries.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::params::{Gradients, Parameterized};
use crate::real::Real;
use crate::rng;

const PRIMES: [u32; 3] = [1, 2_654_435_761, 805_459_861];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashGridConfig {
    pub levels: u32,
    pub base_resolution: u32,
    pub per_level_scale: f64,
    pub features_per_level: u32,
    pub table_size_log2: u32,
}

impl Default for HashGridConfig {
    fn default() -> Self {
        HashGridConfig {
            levels: 8,
            base_resolution: 4,
            per_level_scale: 2.0,
            features_per_level: 4,
            table_size_log2: 17,
        }
    }
}

impl HashGridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(10..=24).contains(&self.table_size_log2) {
            return Err(Error::InvalidArgument(alloc::format!(
                "hash table size log2 {} outside [10, 24]",
                self.table_size_log2
            )));
        }
        if self.levels == 0 || self.base_resolution == 0 || self.features_per_level == 0 {
            return Err(Error::InvalidArgument(
                "hash grid levels, resolution and feature count must be >= 1".into(),
            ));
        }
        if !(self.per_level_scale >= 1.0) || !self.per_level_scale.is_finite() {
            return Err(Error::InvalidArgument("per-level scale must be >= 1".into()));
        }
        Ok(())
    }

    pub fn table_size(&self) -> usize {
        1 << self.table_size_log2
    }

    /// `⌊base · scale^level⌋`.
    pub fn resolution(&self, level: u32) -> u32 {
        libm::floor(self.base_resolution as f64 * libm::pow(self.per_level_scale, level as f64)) as u32
    }

    pub fn output_width(&self) -> usize {
        (self.levels * self.features_per_level) as usize
    }

    pub fn param_count(&self) -> usize {
        self.levels as usize * self.table_size() * self.features_per_level as usize
    }
}

/// Tight bounds of `points` dilated by 1% of the largest extent on each side.
pub fn dilated_bounds(lo: Vec3, hi: Vec3) -> (Vec3, Vec3) {
    let pad = Vec3::splat(0.01 * (hi - lo).max_element().max(1e-6));
    (lo - pad, hi + pad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashGridEncoder<T> {
    config: HashGridConfig,
    bounds: (Vec3, Vec3),
    tables: Vec<Vec<T>>,
}

/// Table rows and trilinear weights of the 8 voxel corners at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelStencil {
    pub rows: [usize; 8],
    pub weights: [f64; 8],
}

impl<T: Real> HashGridEncoder<T> {
    /// Tables drawn i.i.d. from `U(-1e-4, 1e-4)`.
    pub fn new(config: HashGridConfig, bounds: (Vec3, Vec3), seed: u64) -> Result<Self> {
        config.validate()?;
        let extent = bounds.1 - bounds.0;
        if !(extent.x > 0.0 && extent.y > 0.0 && extent.z > 0.0) {
            return Err(Error::InvalidArgument("hash grid bounds must have positive extent".into()));
        }
        let mut r = rng::stream(seed, 0x6861_7368);
        let n = config.table_size() * config.features_per_level as usize;
        let tables = (0..config.levels)
            .map(|_| {
                (0..n)
                    .map(|_| T::from_f64(r.random_range(-1e-4..=1e-4)))
                    .collect()
            })
            .collect();
        Ok(HashGridEncoder {
            config,
            bounds,
            tables,
        })
    }

    pub fn from_parts(config: HashGridConfig, bounds: (Vec3, Vec3), tables: Vec<Vec<T>>) -> Result<Self> {
        config.validate()?;
        let n = config.table_size() * config.features_per_level as usize;
        if tables.len() != config.levels as usize || tables.iter().any(|t| t.len() != n) {
            return Err(Error::ShapeMismatch {
                what: "hash grid tables",
                expected: config.levels as usize * n,
                found: tables.iter().map(Vec::len).sum(),
            });
        }
        Ok(HashGridEncoder {
            config,
            bounds,
            tables,
        })
    }

    pub fn config(&self) -> &HashGridConfig {
        &self.config
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        self.bounds
    }

    pub fn tables(&self) -> &[Vec<T>] {
        &self.tables
    }

    pub fn tables_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.tables
    }

    pub fn output_width(&self) -> usize {
        self.config.output_width()
    }

    /// Position mapped into `[0, 1]³`, clamped.
    fn normalize(&self, x: Vec3) -> [f64; 3] {
        let (lo, hi) = self.bounds;
        [0, 1, 2].map(|a| ((x[a] - lo[a]) / (hi[a] - lo[a])).clamp(0.0, 1.0))
    }

    fn corner_row(&self, res: u32, c: [u32; 3]) -> usize {
        let size = self.config.table_size();
        let side = res as u64 + 1;
        if side * side * side <= size as u64 {
            (c[0] as u64 + c[1] as u64 * side + c[2] as u64 * side * side) as usize
        } else {
            let h = (c[0].wrapping_mul(PRIMES[0])) ^ (c[1].wrapping_mul(PRIMES[1])) ^ (c[2].wrapping_mul(PRIMES[2]));
            h as usize & (size - 1)
        }
    }

    pub fn stencil(&self, level: u32, x: Vec3) -> VoxelStencil {
        let res = self.config.resolution(level);
        let p = self.normalize(x);
        let mut cell = [0u32; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let s = p[a] * res as f64;
            cell[a] = (s as u32).min(res - 1);
            frac[a] = s - cell[a] as f64;
        }
        let mut rows = [0usize; 8];
        let mut weights = [0.0; 8];
        for corner in 0..8 {
            let mut c = cell;
            let mut w = 1.0;
            for a in 0..3 {
                if corner >> a & 1 == 1 {
                    c[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            rows[corner] = self.corner_row(res, c);
            weights[corner] = w;
        }
        VoxelStencil { rows, weights }
    }

    /// Concatenated per-level trilinear features at world position `x`.
    pub fn encode_into(&self, x: Vec3, out: &mut [T]) {
        let f = self.config.features_per_level as usize;
        out[..self.output_width()].fill(T::zero());
        for level in 0..self.config.levels {
            let st = self.stencil(level, x);
            let table = &self.tables[level as usize];
            let o = &mut out[level as usize * f..(level as usize + 1) * f];
            for (row, w) in st.rows.iter().zip(st.weights) {
                let w = T::from_f64(w);
                for (oi, &t) in o.iter_mut().zip(&table[row * f..row * f + f]) {
                    *oi += w * t;
                }
            }
        }
    }

    pub fn encode(&self, x: Vec3) -> Vec<T> {
        let mut out = vec![T::zero(); self.output_width()];
        self.encode_into(x, &mut out);
        out
    }

    /// Scatters `upstream` into the table gradients with trilinear weights.
    pub fn encode_backward(&self, x: Vec3, upstream: &[T], grads: &mut Gradients<T>) {
        let f = self.config.features_per_level as usize;
        for level in 0..self.config.levels as usize {
            let st = self.stencil(level as u32, x);
            let g = &mut grads.groups[level];
            let up = &upstream[level * f..(level + 1) * f];
            for (row, w) in st.rows.iter().zip(st.weights) {
                let w = T::from_f64(w);
                for (gi, &u) in g[row * f..row * f + f].iter_mut().zip(up) {
                    *gi += w * u;
                }
            }
        }
    }
}

impl<T: Real> Parameterized<T> for HashGridEncoder<T> {
    fn param_groups(&self) -> Vec<&[T]> {
        self.tables.iter().map(Vec::as_slice).collect()
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [T]> {
        self.tables.iter_mut().map(Vec::as_mut_slice).collect()
    }

    fn param_count(&self) -> usize {
        self.config.param_count()
    }
}
