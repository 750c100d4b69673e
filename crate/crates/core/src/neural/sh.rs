//! Real spherical-harmonic basis up to degree 4.

use crate::error::{Error, Result};
use crate::math::Vec3;

pub const MAX_SH_DEGREE: u32 = 4;
pub const DEFAULT_SH_DEGREE: u32 = 3;

pub const fn sh_coefficient_count(degree: u32) -> usize {
    ((degree + 1) * (degree + 1)) as usize
}

/// Writes the orthonormal real SH basis at `dir` into `out`, ordered by
/// `(l, m)` with `m` running from `-l` to `l`.
pub fn sh_encode_into(dir: Vec3, degree: u32, out: &mut [f64]) -> Result<()> {
    if degree > MAX_SH_DEGREE {
        return Err(Error::InvalidArgument(alloc::format!(
            "SH degree {degree} exceeds {MAX_SH_DEGREE}"
        )));
    }
    if (dir.length() - 1.0).abs() > 1e-4 {
        return Err(Error::NotUnitVector);
    }
    let (x, y, z) = (dir.x, dir.y, dir.z);
    let (xx, yy, zz) = (x * x, y * y, z * z);
    let out = &mut out[..sh_coefficient_count(degree)];
    out[0] = 0.282_094_791_773_878_14;
    if degree >= 1 {
        out[1] = -0.488_602_511_902_919_9 * y;
        out[2] = 0.488_602_511_902_919_9 * z;
        out[3] = -0.488_602_511_902_919_9 * x;
    }
    if degree >= 2 {
        out[4] = 1.092_548_430_592_079_2 * x * y;
        out[5] = -1.092_548_430_592_079_2 * y * z;
        out[6] = 0.315_391_565_252_520_05 * (2.0 * zz - xx - yy);
        out[7] = -1.092_548_430_592_079_2 * x * z;
        out[8] = 0.546_274_215_296_039_6 * (xx - yy);
    }
    if degree >= 3 {
        out[9] = -0.590_043_589_926_643_5 * y * (3.0 * xx - yy);
        out[10] = 2.890_611_442_640_554 * x * y * z;
        out[11] = -0.457_045_799_464_465_8 * y * (4.0 * zz - xx - yy);
        out[12] = 0.373_176_332_590_115_4 * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
        out[13] = -0.457_045_799_464_465_8 * x * (4.0 * zz - xx - yy);
        out[14] = 1.445_305_721_320_277 * z * (xx - yy);
        out[15] = -0.590_043_589_926_643_5 * x * (xx - 3.0 * yy);
    }
    if degree >= 4 {
        out[16] = 2.503_342_941_796_704_6 * x * y * (xx - yy);
        out[17] = -1.770_130_769_779_930_4 * y * z * (3.0 * xx - yy);
        out[18] = 0.946_174_695_757_560_1 * x * y * (7.0 * zz - 1.0);
        out[19] = -0.669_046_543_557_289_2 * y * z * (7.0 * zz - 3.0);
        out[20] = 0.105_785_546_915_204_31 * (35.0 * zz * zz - 30.0 * zz + 3.0);
        out[21] = -0.669_046_543_557_289_2 * x * z * (7.0 * zz - 3.0);
        out[22] = 0.473_087_347_878_780_04 * (xx - yy) * (7.0 * zz - 1.0);
        out[23] = -1.770_130_769_779_930_4 * x * z * (xx - 3.0 * yy);
        out[24] = 0.625_835_735_449_176_1 * (xx * (xx - 3.0 * yy) - yy * (3.0 * xx - yy));
    }
    Ok(())
}

pub fn sh_encode(dir: Vec3, degree: u32) -> Result<alloc::vec::Vec<f64>> {
    let mut out = alloc::vec![0.0; sh_coefficient_count(degree.min(MAX_SH_DEGREE))];
    sh_encode_into(dir, degree, &mut out)?;
    Ok(out)
}
