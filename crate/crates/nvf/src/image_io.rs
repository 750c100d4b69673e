//! Portable Float Map and 8-bit PPM.

use std::fs;
use std::path::Path;

use nvf_core::render::Image;

use crate::error::{Error, Result};

/// Little-endian RGB float map: rows bottom to top.
pub fn encode_pfm(image: &Image) -> Vec<u8> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let mut out = format!("PF\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(12 * w * h);
    for row in image.data().chunks_exact(3 * w).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Reads colour float maps of either byte order. `path` only labels errors.
pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<Image> {
    let bad = |m: &str| Error::format(path, m);
    let mut pos = 0;
    let mut token = || -> Result<&[u8]> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        Ok(&bytes[start..pos])
    };
    match token()? {
        b"PF" => {}
        b"Pf" => return Err(bad("greyscale float maps are not supported")),
        _ => return Err(bad("not a PFM file")),
    }
    let mut number = |what: &str| -> Result<String> {
        let t = token()?;
        std::str::from_utf8(t)
            .map(str::to_owned)
            .map_err(|_| bad(&format!("bad {what}")))
    };
    let w: u32 = number("width")?.parse().map_err(|_| bad("bad width"))?;
    let h: u32 = number("height")?.parse().map_err(|_| bad("bad height"))?;
    let scale: f32 = number("scale")?.parse().map_err(|_| bad("bad scale"))?;
    if w == 0 || h == 0 {
        return Err(bad("zero image dimension"));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be finite and non-zero"));
    }
    let little = scale < 0.0;
    let data_start = pos + 1;
    let (w, h) = (w as usize, h as usize);
    let expected = 12 * w * h;
    if bytes.len() < data_start || bytes.len() - data_start != expected {
        return Err(bad(&format!(
            "expected {expected} bytes of pixel data, found {}",
            bytes.len().saturating_sub(data_start)
        )));
    }
    let mut data = vec![0.0f32; 3 * w * h];
    for (i, chunk) in bytes[data_start..].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (row, col) = (i / (3 * w), i % (3 * w));
        data[(h - 1 - row) * 3 * w + col] = v;
    }
    Ok(Image::from_data(w as u32, h as u32, data)?)
}

pub fn write_pfm(path: &Path, image: &Image) -> Result<()> {
    fs::write(path, encode_pfm(image)).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<Image> {
    decode_pfm(&fs::read(path).map_err(|e| Error::io(path, e))?, path)
}

/// Binary PPM after clamping to [0, 1] and a 1/2.2 gamma.
pub fn encode_ppm(image: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.data().iter().map(|&v| {
        let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
        (v.powf(1.0 / 2.2) * 255.0).round() as u8
    }));
    out
}

pub fn write_ppm(path: &Path, image: &Image) -> Result<()> {
    fs::write(path, encode_ppm(image)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.pfm")
    }

    #[test]
    fn single_pixel_round_trip() {
        let img = Image::from_data(1, 1, vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(decode_pfm(&encode_pfm(&img), p()).unwrap(), img);
    }

    #[test]
    fn two_by_one_fixture() {
        let img = Image::from_data(2, 1, vec![1.0, 0.0, -2.5, 0.25, 3.0, 1e-3]).unwrap();
        let mut fixture = b"PF\n2 1\n-1.0\n".to_vec();
        for v in [1.0f32, 0.0, -2.5, 0.25, 3.0, 1e-3] {
            fixture.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(encode_pfm(&img), fixture);
        assert_eq!(decode_pfm(&fixture, p()).unwrap(), img);
    }

    #[test]
    fn rows_are_stored_bottom_up() {
        let img = Image::from_data(1, 2, vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0]).unwrap();
        let bytes = encode_pfm(&img);
        let body = &bytes[bytes.len() - 24..];
        assert_eq!(&body[..4], &2.0f32.to_le_bytes());
        assert_eq!(&body[12..16], &1.0f32.to_le_bytes());
    }

    #[test]
    fn big_endian_is_read() {
        let mut bytes = b"PF\n1 1\n1.0\n".to_vec();
        for v in [0.1f32, 0.2, 0.3] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        assert_eq!(decode_pfm(&bytes, p()).unwrap().data(), &[0.1, 0.2, 0.3]);
    }

    #[test]
    fn bit_exact_for_odd_values() {
        let data = vec![f32::MIN_POSITIVE, -0.0, 1.0 / 3.0, f32::MAX, 1e-40, 7.0];
        let img = Image::from_data(1, 2, data).unwrap();
        let back = decode_pfm(&encode_pfm(&img), p()).unwrap();
        let bits = |i: &Image| i.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&img));
    }

    #[test]
    fn malformed_files_are_errors() {
        let img = Image::from_data(2, 2, vec![0.5; 12]).unwrap();
        let good = encode_pfm(&img);
        assert!(decode_pfm(&good[..good.len() - 1], p()).is_err());
        assert!(decode_pfm(b"PF\n2", p()).is_err());
        assert!(decode_pfm(b"P6\n1 1\n255\n\0\0\0", p()).is_err());
        assert!(decode_pfm(b"PF\n1 1\n0.0\n\0\0\0\0\0\0\0\0\0\0\0\0", p()).is_err());
        assert!(decode_pfm(b"PF\n0 1\n-1.0\n", p()).is_err());
    }

    #[test]
    fn ppm_is_gamma_encoded() {
        let img = Image::from_data(3, 1, vec![0.0, 1.0, 2.0, 0.5, -1.0, 0.2176376, 0.0, 0.0, 0.0]).unwrap();
        let bytes = encode_ppm(&img);
        assert!(bytes.starts_with(b"P6\n3 1\n255\n"));
        let body = &bytes[bytes.len() - 9..];
        assert_eq!(&body[..3], &[0, 255, 255]);
        assert_eq!(body[3], 186);
        assert_eq!(body[4], 0);
        assert_eq!(body[5], 127);
    }
}
