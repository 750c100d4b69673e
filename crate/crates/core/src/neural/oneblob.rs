//! One-blob encoding: a Gaussian kernel integrated over equal bins.

pub const DEFAULT_BINS: usize = 4;

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x * core::f64::consts::FRAC_1_SQRT_2))
}

/// Mass of a Gaussian with `σ = 1 / bins` centred at `x` (clamped to
/// `[0, 1]`) falling into each of `bins` equal sub-intervals of `[0, 1]`.
pub fn oneblob_encode_into(x: f64, bins: usize, out: &mut [f64]) {
    let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
    let sigma = 1.0 / bins as f64;
    let mut lo = normal_cdf((0.0 - x) / sigma);
    for (i, o) in out[..bins].iter_mut().enumerate() {
        let hi = normal_cdf(((i + 1) as f64 / bins as f64 - x) / sigma);
        *o = hi - lo;
        lo = hi;
    }
}

pub fn oneblob_encode(x: f64, bins: usize) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec![0.0; bins];
    oneblob_encode_into(x, bins, &mut out);
    out
}
