//! File formats: binary PPM (P6) for RGB images, binary PGM (P5) for planes,
//! and a small raw container for mosaic data.
//!
//! The mosaic container is an ASCII header line `CFA1 <width> <height> GRBG`
//! terminated by a newline, followed by `width·height` 8-bit samples in
//! row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::image::{quantize_u8, BayerImage, PlaneImage, RgbImage};
use crate::{Error, Result};

/// Incremental ASCII-token reader for PNM headers. Skips whitespace and
/// `#`-comments, which PNM allows anywhere between tokens.
struct HeaderScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        HeaderScanner { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::stream(start, "unexpected end of header"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<usize> {
        let at = self.pos;
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::stream(at, "expected a decimal number"))
    }

    /// Consumes the single whitespace byte that separates the header from the
    /// binary payload and returns the payload offset.
    fn payload_offset(mut self) -> usize {
        self.pos += 1;
        self.pos
    }
}

fn parse_pnm(bytes: &[u8], magic: &[u8], channels: usize) -> Result<(usize, usize, Vec<u8>)> {
    let mut scan = HeaderScanner::new(bytes);
    let got = scan.token()?;
    if got != magic {
        return Err(Error::stream(
            0,
            format!("expected {} magic", String::from_utf8_lossy(magic)),
        ));
    }
    let width = scan.number()?;
    let height = scan.number()?;
    let maxval = scan.number()?;
    if maxval != 255 {
        return Err(Error::stream(0, format!("only maxval 255 is supported, got {maxval}")));
    }
    let offset = scan.payload_offset();
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::stream(offset, "image dimensions overflow"))?;
    let payload = bytes
        .get(offset..offset + need)
        .ok_or_else(|| Error::stream(offset, "truncated pixel data"))?;
    Ok((width, height, payload.to_vec()))
}

/// Reads a binary PPM (P6, maxval 255) image.
pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path)?;
    let (width, height, px) = parse_pnm(&bytes, b"P6", 3)?;
    let mut img = RgbImage::new(width, height)?;
    for y in 0..height {
        for x in 0..width {
            let i = (y * width + x) * 3;
            img.set(x, y, [px[i] as f64, px[i + 1] as f64, px[i + 2] as f64]);
        }
    }
    Ok(img)
}

/// Writes a binary PPM (P6). Samples are quantized to 8 bits here.
pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let mut out = Vec::with_capacity(img.width() * img.height() * 3 + 32);
    write!(out, "P6\n{} {}\n255\n", img.width(), img.height())?;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let px = img.get(x, y);
            out.extend_from_slice(&px.map(quantize_u8));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a binary PGM (P5, maxval 255) plane.
pub fn read_pgm(path: &Path) -> Result<PlaneImage> {
    let bytes = fs::read(path)?;
    let (width, height, px) = parse_pnm(&bytes, b"P5", 1)?;
    if width == 0 || height == 0 {
        return Err(Error::geometry("empty plane".to_string()));
    }
    Ok(PlaneImage::from_fn(width, height, |x, y| px[y * width + x] as f64))
}

/// Writes a binary PGM (P5). Samples are quantized to 8 bits here.
pub fn write_pgm(path: &Path, plane: &PlaneImage) -> Result<()> {
    let mut out = Vec::with_capacity(plane.width() * plane.height() + 32);
    write!(out, "P5\n{} {}\n255\n", plane.width(), plane.height())?;
    for y in 0..plane.height() {
        for x in 0..plane.width() {
            out.push(quantize_u8(plane.get(x, y)));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes raw mosaic data with its one-line ASCII header.
pub fn write_cfa(path: &Path, cfa: &BayerImage) -> Result<()> {
    let mut out = Vec::with_capacity(cfa.width() * cfa.height() + 32);
    writeln!(out, "CFA1 {} {} GRBG", cfa.width(), cfa.height())?;
    for y in 0..cfa.height() {
        for x in 0..cfa.width() {
            out.push(quantize_u8(cfa.get(x, y)));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads raw mosaic data written by [`write_cfa`].
pub fn read_cfa(path: &Path) -> Result<BayerImage> {
    let bytes = fs::read(path)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::stream(0, "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::stream(0, "header is not ASCII"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "CFA1" {
        return Err(Error::stream(0, "expected `CFA1 <width> <height> GRBG`"));
    }
    if fields[3] != "GRBG" {
        return Err(Error::stream(0, format!("unsupported pattern {}", fields[3])));
    }
    let width: usize = fields[1].parse().map_err(|_| Error::stream(0, "bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| Error::stream(0, "bad height"))?;
    let payload = bytes
        .get(nl + 1..nl + 1 + width * height)
        .ok_or_else(|| Error::stream(nl + 1, "truncated sample data"))?;
    BayerImage::from_fn(width, height, |x, y| payload[y * width + x] as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::mosaic;

    #[test]
    fn ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let img = RgbImage::from_fn(6, 4, |x, y| [x as f64 * 40.0, y as f64 * 60.0, 255.0]).unwrap();
        write_ppm(&path, &img).unwrap();
        let back = read_ppm(&path).unwrap();
        assert_eq!(back.width(), 6);
        assert_eq!(back.height(), 4);
        for y in 0..4 {
            for x in 0..6 {
                let a = img.get(x, y);
                let b = back.get(x, y);
                for c in 0..3 {
                    assert!((a[c] - b[c]).abs() < 0.5 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn ppm_header_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let mut bytes = b"P6 # comment\n# another\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0u8; 12]);
        std::fs::write(&path, bytes).unwrap();
        let img = read_ppm(&path).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let plane = PlaneImage::from_fn(5, 3, |x, y| (x * 50 + y) as f64);
        write_pgm(&path, &plane).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back, plane);
    }

    #[test]
    fn cfa_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.cfa");
        let rgb = RgbImage::from_fn(4, 4, |x, y| [(x * 9) as f64, (y * 7) as f64, 13.0]).unwrap();
        let cfa = mosaic(&rgb);
        write_cfa(&path, &cfa).unwrap();
        let back = read_cfa(&path).unwrap();
        assert_eq!(back, cfa);
        // Header is the documented ASCII line.
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"CFA1 4 4 GRBG\n"));
    }

    #[test]
    fn truncated_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ppm");
        std::fs::write(&path, b"P6\n4 4\n255\nxx").unwrap();
        assert!(matches!(read_ppm(&path), Err(Error::Stream { .. })));
    }
}
