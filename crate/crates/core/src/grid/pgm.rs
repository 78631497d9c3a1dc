//! Binary PGM (`P5`) masks.
//!
//! Image row `r` holds grid row `j = r`; column `c` is `i = c`. Masks are
//! written with maxval 255 (255 = in the set, 0 = out) and read back with the
//! threshold `value >= 128`. Files with a smaller maxval are rescaled to 255
//! before thresholding.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BinaryMask, GridDomain};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u8>,
}

pub fn read_pgm(path: &Path) -> Result<PgmImage> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes).map_err(|m| Error::parse(path, m))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<PgmImage, String> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while let Some(&c) = bytes.get(pos) {
                        pos += 1;
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err("malformed header number".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| "header number out of range".to_string())?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("maxval {maxval} unsupported (need 1..=255)"));
    }
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err("missing separator before raster".into()),
    }
    let n = width * height;
    if bytes.len() < pos + n {
        return Err(format!("raster has {} bytes, expected {n}", bytes.len() - pos));
    }
    Ok(PgmImage { width, height, maxval: maxval as u16, pixels: bytes[pos..pos + n].to_vec() })
}

/// Read a mask. With no domain, the unit grid `(0, 0, 1, width, height)` is
/// used; otherwise the image dimensions must match the domain.
pub fn read_mask_pgm(path: &Path, domain: Option<GridDomain>) -> Result<BinaryMask> {
    let img = read_pgm(path)?;
    let domain = match domain {
        Some(d) => {
            if d.nx != img.width || d.ny != img.height {
                return Err(Error::DomainMismatch(format!(
                    "{} is {}x{} but the domain is {}x{}",
                    path.display(),
                    img.width,
                    img.height,
                    d.nx,
                    d.ny
                )));
            }
            d
        }
        None => GridDomain::new(0.0, 0.0, 1.0, img.width, img.height)?,
    };
    let max = img.maxval as u32;
    let cells = img.pixels.iter().map(|&p| (p as u32 * 255) / max >= 128).collect();
    BinaryMask::new(domain, cells)
}

pub fn encode_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    let d = mask.domain();
    let mut out = format!("P5\n{} {}\n255\n", d.nx, d.ny).into_bytes();
    out.extend(mask.cells().iter().map(|&c| if c { 255u8 } else { 0u8 }));
    out
}

pub fn write_mask_pgm(path: &Path, mask: &BinaryMask) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_mask_pgm(mask))?;
    Ok(())
}
