//! Image containers and the Bayer mosaic model.
//!
//! Every container stores `f64` samples in row-major order with the origin at
//! the top-left corner. Samples stay real-valued throughout the pipelines;
//! quantization to 8 bits happens only when an image is written out (see
//! [`quantize_u8`]).
//!
//! The mosaic uses one fixed pattern: even rows alternate G,R,G,R,… and odd
//! rows alternate B,G,B,G,… (a "GRBG" 2×2 tile). Green samples therefore sit
//! exactly where `x + y` is even.

use crate::{Error, Result};

/// The color carried by a single CFA sensor cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfaColor {
    Red,
    Green,
    Blue,
}

/// Color of the mosaic cell at `(x, y)`.
#[inline]
pub fn color_at(x: usize, y: usize) -> CfaColor {
    if (x + y).is_multiple_of(2) {
        CfaColor::Green
    } else if y.is_multiple_of(2) {
        CfaColor::Red
    } else {
        CfaColor::Blue
    }
}

fn check_even_dims(what: &str, width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 2 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::geometry(format!(
            "{what} dimensions must be even and at least 2×2, got {width}×{height}"
        )));
    }
    Ok(())
}

/// Dense RGB image with samples in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    /// Creates a black image. Dimensions must be even and at least 2×2.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_even_dims("image", width, height)?;
        Ok(RgbImage {
            width,
            height,
            data: vec![[0.0; 3]; width * height],
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel. The result is
    /// clamped into `[0, 255]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut img = RgbImage::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                img.set(x, y, px.map(|c| c.clamp(0.0, 255.0)));
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    /// Stores a pixel. Debug builds check the range invariant.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [f64; 3]) {
        debug_assert!(
            px.iter().all(|c| c.is_finite() && (0.0..=255.0).contains(c)),
            "RGB sample out of range: {px:?}"
        );
        self.data[y * self.width + x] = px;
    }

    /// Stores a pixel after clamping each channel into `[0, 255]`. Decoded
    /// data may overshoot the nominal range; this is the entry point for it.
    #[inline]
    pub fn set_clamped(&mut self, x: usize, y: usize, px: [f64; 3]) {
        self.data[y * self.width + x] = px.map(|c| c.clamp(0.0, 255.0));
    }
}

/// Raw mosaic data: one sample per pixel, color given by [`color_at`].
///
/// Samples are real-valued and may leave `[0, 255]` while data is in flight
/// through lossy pipelines; [`BayerImage::clamp`] pulls them back before
/// demosaicing.
#[derive(Debug, Clone, PartialEq)]
pub struct BayerImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl BayerImage {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_even_dims("mosaic", width, height)?;
        Ok(BayerImage {
            width,
            height,
            data: vec![0.0; width * height],
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut img = BayerImage::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                img.set(x, y, f(x, y));
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Color of the sample stored at `(x, y)`.
    #[inline]
    pub fn color_at(&self, x: usize, y: usize) -> CfaColor {
        color_at(x, y)
    }

    /// Clamps every sample into `[0, 255]` in place.
    pub fn clamp(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 255.0);
        }
    }
}

/// Simulates the sensor: keeps the pattern color of each pixel and drops the
/// other two channels.
pub fn mosaic(rgb: &RgbImage) -> BayerImage {
    let mut out = BayerImage::new(rgb.width(), rgb.height()).expect("RgbImage dims are validated");
    for y in 0..rgb.height() {
        for x in 0..rgb.width() {
            let px = rgb.get(x, y);
            let v = match color_at(x, y) {
                CfaColor::Red => px[0],
                CfaColor::Green => px[1],
                CfaColor::Blue => px[2],
            };
            out.set(x, y, v);
        }
    }
    out
}

/// A single-channel plane of unbounded real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl PlaneImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be positive");
        PlaneImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut p = PlaneImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                p.set(x, y, f(x, y));
            }
        }
        p
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Per-pixel validity flags for planes that cover only part of their
/// bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl ShapeMask {
    pub fn new_invalid(width: usize, height: usize) -> Self {
        ShapeMask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = ShapeMask::new_invalid(width, height);
        for y in 0..height {
            for x in 0..width {
                m.set(x, y, f(x, y));
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, valid: bool) {
        self.data[y * self.width + x] = valid;
    }

    pub fn count_valid(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }
}

/// Luma samples on the quincunx lattice: the green positions of the mosaic,
/// i.e. pixels with `x + y` even. Invalid positions hold 0.0 and are never
/// read by the transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct QuincunxPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl QuincunxPlane {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_even_dims("quincunx plane", width, height)?;
        Ok(QuincunxPlane {
            width,
            height,
            data: vec![0.0; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn is_valid(x: usize, y: usize) -> bool {
        (x + y).is_multiple_of(2)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(Self::is_valid(x, y), "read of invalid quincunx position");
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        debug_assert!(Self::is_valid(x, y), "write to invalid quincunx position");
        self.data[y * self.width + x] = v;
    }

    /// Number of populated samples: always `width·height/2`.
    pub fn valid_count(&self) -> usize {
        self.width * self.height / 2
    }

    /// The validity pattern as an explicit mask.
    pub fn mask(&self) -> ShapeMask {
        ShapeMask::from_fn(self.width, self.height, Self::is_valid)
    }
}

/// Final 8-bit emission: round half away from zero, clamp to `[0, 255]`.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
