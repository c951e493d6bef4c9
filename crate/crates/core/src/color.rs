//! RGB ↔ YCbCr format conversions that operate directly on mosaic data.
//!
//! The forward direction turns a Bayer image into one luma plane on the
//! quincunx lattice (the green positions) plus two quarter-rate chroma
//! planes, without ever producing a full RGB image. Two flavors exist:
//!
//! * **2×2** — each mosaic block `[G R / B G]` is mapped through a fixed 4×4
//!   matrix to `[Y_ul, Y_lr, Cb, Cr]`. Exactly invertible per block.
//! * **Block W×H** — missing RGB components are first bilinearly
//!   interpolated *inside* the block (neighbors outside the block never
//!   contribute; averages renormalize over the neighbors present), then the
//!   3×3 matrix is applied per pixel: Y at green positions, Cb at blue
//!   positions, Cr at red positions. Inversion solves the dense linear
//!   system for the whole block, so decoding large blocks is expensive; the
//!   factored systems are cached per block geometry.
//!
//! Chroma bookkeeping is shared by both flavors: `cb[(bx,by)]` corresponds
//! to the blue site `(2bx, 2by+1)` and `cr[(bx,by)]` to the red site
//! `(2bx+1, 2by)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::image::{BayerImage, CfaColor, PlaneImage, QuincunxPlane};
use crate::linalg::{lu_factor, LuFactors};
use crate::{Error, Result};

/// Which 3×3 RGB→YCbCr matrix to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    /// Full-precision JFIF coefficients (first row 0.299, 0.587, 0.114).
    Jfif,
    /// The same matrix with every entry rounded to three decimals and a
    /// 0.297 luma/red weight. Kept for reproducing published numbers.
    Rounded,
}

/// RGB→YCbCr conversion matrix plus its inverse. Offsets are fixed at
/// `(0, 128, 128)`.
#[derive(Debug, Clone)]
pub struct ConversionMatrix {
    kind: MatrixKind,
    a: [[f64; 3]; 3],
    inv: [[f64; 3]; 3],
}

pub const CHROMA_OFFSET: f64 = 128.0;

impl ConversionMatrix {
    pub fn jfif() -> Self {
        let (kr, kb) = (0.299, 0.114);
        let kg = 1.0 - kr - kb;
        Self::from_rows(
            MatrixKind::Jfif,
            [
                [kr, kg, kb],
                [-0.5 * kr / (1.0 - kb), -0.5 * kg / (1.0 - kb), 0.5],
                [0.5, -0.5 * kg / (1.0 - kr), -0.5 * kb / (1.0 - kr)],
            ],
        )
    }

    pub fn rounded() -> Self {
        Self::from_rows(
            MatrixKind::Rounded,
            [
                [0.297, 0.587, 0.114],
                [-0.169, -0.331, 0.500],
                [0.500, -0.419, -0.081],
            ],
        )
    }

    pub fn from_kind(kind: MatrixKind) -> Self {
        match kind {
            MatrixKind::Jfif => Self::jfif(),
            MatrixKind::Rounded => Self::rounded(),
        }
    }

    fn from_rows(kind: MatrixKind, a: [[f64; 3]; 3]) -> Self {
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        let inv_flat = lu_factor(flat, 3)
            .expect("conversion matrices are nonsingular")
            .inverse();
        let mut inv = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                inv[r][c] = inv_flat[r * 3 + c];
            }
        }
        ConversionMatrix { kind, a, inv }
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.a
    }

    /// `[R,G,B]` → `[Y, Cb, Cr]` including the chroma offsets.
    #[inline]
    pub fn forward_px(&self, rgb: [f64; 3]) -> [f64; 3] {
        let d = |r: &[f64; 3]| r[0] * rgb[0] + r[1] * rgb[1] + r[2] * rgb[2];
        [
            d(&self.a[0]),
            d(&self.a[1]) + CHROMA_OFFSET,
            d(&self.a[2]) + CHROMA_OFFSET,
        ]
    }

    /// `[Y, Cb, Cr]` → `[R,G,B]`.
    #[inline]
    pub fn inverse_px(&self, ycc: [f64; 3]) -> [f64; 3] {
        let v = [ycc[0], ycc[1] - CHROMA_OFFSET, ycc[2] - CHROMA_OFFSET];
        let d = |r: &[f64; 3]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
        [d(&self.inv[0]), d(&self.inv[1]), d(&self.inv[2])]
    }

    /// Cache key that distinguishes matrices by exact value.
    fn bits(&self) -> [u64; 9] {
        let mut k = [0u64; 9];
        for (i, v) in self.a.iter().flatten().enumerate() {
            k[i] = v.to_bits();
        }
        k
    }
}

/// How a [`YCbCrCfa`] was produced; the inverse must match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConversionMode {
    Block2x2,
    BlockN { bw: usize, bh: usize },
}

/// Mosaic data in YCbCr form: quincunx luma plus quarter-rate chroma.
#[derive(Debug, Clone)]
pub struct YCbCrCfa {
    pub y: QuincunxPlane,
    pub cb: PlaneImage,
    pub cr: PlaneImage,
    pub mode: ConversionMode,
}

impl YCbCrCfa {
    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }

    /// Total stored samples: always exactly `width·height`.
    pub fn sample_count(&self) -> usize {
        self.y.valid_count() + self.cb.width() * self.cb.height() + self.cr.width() * self.cr.height()
    }
}

/// The 4×4 matrix of the 2×2 conversion and its inverse.
/// Input order `[R, G_ul, G_lr, B]`, output `[Y_ul, Y_lr, Cb, Cr]`.
#[derive(Debug, Clone)]
pub struct Block2x2Matrix {
    pub m: [[f64; 4]; 4],
    pub inv: [[f64; 4]; 4],
}

impl Block2x2Matrix {
    pub fn new(cm: &ConversionMatrix) -> Self {
        let a = &cm.a;
        let m = [
            [a[0][0], a[0][1], 0.0, a[0][2]],
            [a[0][0], 0.0, a[0][1], a[0][2]],
            [a[1][0], a[1][1] / 2.0, a[1][1] / 2.0, a[1][2]],
            [a[2][0], a[2][1] / 2.0, a[2][1] / 2.0, a[2][2]],
        ];
        let flat: Vec<f64> = m.iter().flatten().copied().collect();
        let inv_flat = lu_factor(flat, 4)
            .expect("2x2 conversion matrix is nonsingular")
            .inverse();
        let mut inv = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                inv[r][c] = inv_flat[r * 4 + c];
            }
        }
        Block2x2Matrix { m, inv }
    }
}

fn mul4(m: &[[f64; 4]; 4], v: [f64; 4]) -> [f64; 4] {
    let d = |r: &[f64; 4]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2] + r[3] * v[3];
    [d(&m[0]), d(&m[1]), d(&m[2]), d(&m[3])]
}

/// 2×2 forward conversion. Each mosaic block contributes two Y samples (at
/// its green positions) and one Cb/Cr pair.
pub fn convert_2x2_forward(cfa: &BayerImage, cm: &ConversionMatrix) -> Result<YCbCrCfa> {
    let (w, h) = (cfa.width(), cfa.height());
    let m4 = Block2x2Matrix::new(cm);
    let mut y = QuincunxPlane::new(w, h)?;
    let mut cb = PlaneImage::new(w / 2, h / 2);
    let mut cr = PlaneImage::new(w / 2, h / 2);
    for by in 0..h / 2 {
        for bx in 0..w / 2 {
            let (x0, y0) = (2 * bx, 2 * by);
            let v = [
                cfa.get(x0 + 1, y0),     // R
                cfa.get(x0, y0),         // G upper-left
                cfa.get(x0 + 1, y0 + 1), // G lower-right
                cfa.get(x0, y0 + 1),     // B
            ];
            let out = mul4(&m4.m, v);
            y.set(x0, y0, out[0]);
            y.set(x0 + 1, y0 + 1, out[1]);
            cb.set(bx, by, out[2] + CHROMA_OFFSET);
            cr.set(bx, by, out[3] + CHROMA_OFFSET);
        }
    }
    Ok(YCbCrCfa {
        y,
        cb,
        cr,
        mode: ConversionMode::Block2x2,
    })
}

/// Exact inverse of [`convert_2x2_forward`].
pub fn convert_2x2_inverse(ycc: &YCbCrCfa, cm: &ConversionMatrix) -> Result<BayerImage> {
    if ycc.mode != ConversionMode::Block2x2 {
        return Err(Error::config("conversion mode mismatch: expected 2x2"));
    }
    let (w, h) = (ycc.width(), ycc.height());
    let m4 = Block2x2Matrix::new(cm);
    let mut cfa = BayerImage::new(w, h)?;
    for by in 0..h / 2 {
        for bx in 0..w / 2 {
            let (x0, y0) = (2 * bx, 2 * by);
            let v = [
                ycc.y.get(x0, y0),
                ycc.y.get(x0 + 1, y0 + 1),
                ycc.cb.get(bx, by) - CHROMA_OFFSET,
                ycc.cr.get(bx, by) - CHROMA_OFFSET,
            ];
            let rgb = mul4(&m4.inv, v);
            cfa.set(x0 + 1, y0, rgb[0]);
            cfa.set(x0, y0, rgb[1]);
            cfa.set(x0 + 1, y0 + 1, rgb[2]);
            cfa.set(x0, y0 + 1, rgb[3]);
        }
    }
    Ok(cfa)
}

/// Bilinear interpolation of the two missing channels at every position of a
/// standalone block, restricted to samples inside the block. The block
/// origin must be even so local parity equals mosaic parity.
fn block_rgb_fill(samples: &[f64], bw: usize, bh: usize) -> Vec<[f64; 3]> {
    let at = |x: usize, y: usize| samples[y * bw + x];
    let inb = |x: isize, y: isize| x >= 0 && y >= 0 && (x as usize) < bw && (y as usize) < bh;
    let avg = |pts: &[(isize, isize)]| {
        let mut sum = 0.0;
        let mut n = 0usize;
        for &(x, y) in pts {
            if inb(x, y) {
                sum += at(x as usize, y as usize);
                n += 1;
            }
        }
        debug_assert!(n > 0, "even-sized blocks always have an in-block neighbor");
        sum / n as f64
    };
    let mut rgb = vec![[0.0; 3]; bw * bh];
    for y in 0..bh {
        for x in 0..bw {
            let (xi, yi) = (x as isize, y as isize);
            let horiz = [(xi - 1, yi), (xi + 1, yi)];
            let vert = [(xi, yi - 1), (xi, yi + 1)];
            let four = [(xi - 1, yi), (xi + 1, yi), (xi, yi - 1), (xi, yi + 1)];
            let diag = [
                (xi - 1, yi - 1),
                (xi + 1, yi - 1),
                (xi - 1, yi + 1),
                (xi + 1, yi + 1),
            ];
            let px = match crate::image::color_at(x, y) {
                CfaColor::Green => {
                    if y % 2 == 0 {
                        // Red row: R left/right, B above/below.
                        [avg(&horiz), at(x, y), avg(&vert)]
                    } else {
                        [avg(&vert), at(x, y), avg(&horiz)]
                    }
                }
                CfaColor::Red => [at(x, y), avg(&four), avg(&diag)],
                CfaColor::Blue => [avg(&diag), avg(&four), at(x, y)],
            };
            rgb[y * bw + x] = px;
        }
    }
    rgb
}

/// Linear part of the block forward conversion: component value (without the
/// chroma offset) at every block position, row-major.
fn block_component_values(samples: &[f64], bw: usize, bh: usize, cm: &ConversionMatrix) -> Vec<f64> {
    let rgb = block_rgb_fill(samples, bw, bh);
    let mut out = vec![0.0; bw * bh];
    for y in 0..bh {
        for x in 0..bw {
            let row = match crate::image::color_at(x, y) {
                CfaColor::Green => &cm.a[0],
                CfaColor::Blue => &cm.a[1],
                CfaColor::Red => &cm.a[2],
            };
            let p = rgb[y * bw + x];
            out[y * bw + x] = row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
        }
    }
    out
}

fn check_block_dims(w: usize, h: usize, bw: usize, bh: usize) -> Result<()> {
    if bw < 2 || bh < 2 || !bw.is_multiple_of(2) || !bh.is_multiple_of(2) {
        return Err(Error::config(format!(
            "conversion block must be even and at least 2×2, got {bw}×{bh}"
        )));
    }
    if bw > w || bh > h {
        return Err(Error::config(format!(
            "conversion block {bw}×{bh} exceeds image {w}×{h}"
        )));
    }
    Ok(())
}

/// Block W×H forward conversion: in-block bilinear RGB fill followed by the
/// per-pixel matrix. Y lands on green positions, Cb on blue, Cr on red.
pub fn convert_blockn_forward(
    cfa: &BayerImage,
    bw: usize,
    bh: usize,
    cm: &ConversionMatrix,
) -> Result<YCbCrCfa> {
    let (w, h) = (cfa.width(), cfa.height());
    check_block_dims(w, h, bw, bh)?;
    let mut y = QuincunxPlane::new(w, h)?;
    let mut cb = PlaneImage::new(w / 2, h / 2);
    let mut cr = PlaneImage::new(w / 2, h / 2);
    let mut block = Vec::new();
    for y0 in (0..h).step_by(bh) {
        for x0 in (0..w).step_by(bw) {
            let cur_w = bw.min(w - x0);
            let cur_h = bh.min(h - y0);
            block.clear();
            block.extend((0..cur_h).flat_map(|dy| (0..cur_w).map(move |dx| (dx, dy))))
            ;
            let samples: Vec<f64> = block.iter().map(|&(dx, dy)| cfa.get(x0 + dx, y0 + dy)).collect();
            let vals = block_component_values(&samples, cur_w, cur_h, cm);
            for (i, &(dx, dy)) in block.iter().enumerate() {
                let (gx, gy) = (x0 + dx, y0 + dy);
                match crate::image::color_at(gx, gy) {
                    CfaColor::Green => y.set(gx, gy, vals[i]),
                    CfaColor::Blue => cb.set(gx / 2, (gy - 1) / 2, vals[i] + CHROMA_OFFSET),
                    CfaColor::Red => cr.set((gx - 1) / 2, gy / 2, vals[i] + CHROMA_OFFSET),
                }
            }
        }
    }
    Ok(YCbCrCfa {
        y,
        cb,
        cr,
        mode: ConversionMode::BlockN { bw, bh },
    })
}

type CacheKey = (usize, usize, [u64; 9]);

fn reverse_cache() -> &'static Mutex<HashMap<CacheKey, Arc<LuFactors>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<LuFactors>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Row-major dense matrix of the block forward conversion (offsets removed):
/// entry `(i, j)` is the weight of CFA sample `j` in the component at
/// position `i`, both row-major within the block.
pub fn build_block_forward_matrix(bw: usize, bh: usize, cm: &ConversionMatrix) -> Vec<f64> {
    let n = bw * bh;
    let mut m = vec![0.0; n * n];
    let mut impulse = vec![0.0; n];
    for j in 0..n {
        impulse[j] = 1.0;
        let col = block_component_values(&impulse, bw, bh, cm);
        impulse[j] = 0.0;
        for i in 0..n {
            m[i * n + j] = col[i];
        }
    }
    m
}

/// Factored reverse system for one block geometry, built on first use and
/// cached for the life of the process (large blocks are expensive to
/// factor).
pub fn reverse_factors(bw: usize, bh: usize, cm: &ConversionMatrix) -> Result<Arc<LuFactors>> {
    let key = (bw, bh, cm.bits());
    if let Some(f) = reverse_cache().lock().unwrap().get(&key) {
        return Ok(f.clone());
    }
    let factors = Arc::new(lu_factor(build_block_forward_matrix(bw, bh, cm), bw * bh)?);
    reverse_cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| factors.clone());
    Ok(factors)
}

/// Inverse of [`convert_blockn_forward`]: solves the dense per-block system.
pub fn convert_blockn_inverse(ycc: &YCbCrCfa, cm: &ConversionMatrix) -> Result<BayerImage> {
    let (bw, bh) = match ycc.mode {
        ConversionMode::BlockN { bw, bh } => (bw, bh),
        ConversionMode::Block2x2 => {
            return Err(Error::config("conversion mode mismatch: expected block W×H"))
        }
    };
    let (w, h) = (ycc.width(), ycc.height());
    check_block_dims(w, h, bw, bh)?;
    let mut cfa = BayerImage::new(w, h)?;
    let mut v = Vec::new();
    for y0 in (0..h).step_by(bh) {
        for x0 in (0..w).step_by(bw) {
            let cur_w = bw.min(w - x0);
            let cur_h = bh.min(h - y0);
            let factors = reverse_factors(cur_w, cur_h, cm)?;
            v.clear();
            for dy in 0..cur_h {
                for dx in 0..cur_w {
                    let (gx, gy) = (x0 + dx, y0 + dy);
                    v.push(match crate::image::color_at(gx, gy) {
                        CfaColor::Green => ycc.y.get(gx, gy),
                        CfaColor::Blue => ycc.cb.get(gx / 2, (gy - 1) / 2) - CHROMA_OFFSET,
                        CfaColor::Red => ycc.cr.get((gx - 1) / 2, gy / 2) - CHROMA_OFFSET,
                    });
                }
            }
            factors.solve_in_place(&mut v);
            for dy in 0..cur_h {
                for dx in 0..cur_w {
                    cfa.set(x0 + dx, y0 + dy, v[dy * cur_w + dx]);
                }
            }
        }
    }
    Ok(cfa)
}

/// Dispatches on the mode recorded in the data.
pub fn convert_inverse(ycc: &YCbCrCfa, cm: &ConversionMatrix) -> Result<BayerImage> {
    match ycc.mode {
        ConversionMode::Block2x2 => convert_2x2_inverse(ycc, cm),
        ConversionMode::BlockN { .. } => convert_blockn_inverse(ycc, cm),
    }
}

/// Full-resolution YCbCr planes of an RGB image (used by the
/// compress-after-interpolation paths and by the metrics).
pub fn rgb_to_ycbcr_planes(img: &crate::image::RgbImage, cm: &ConversionMatrix) -> [PlaneImage; 3] {
    let (w, h) = (img.width(), img.height());
    let mut planes = [PlaneImage::new(w, h), PlaneImage::new(w, h), PlaneImage::new(w, h)];
    for y in 0..h {
        for x in 0..w {
            let ycc = cm.forward_px(img.get(x, y));
            for c in 0..3 {
                planes[c].set(x, y, ycc[c]);
            }
        }
    }
    planes
}

/// Inverse of [`rgb_to_ycbcr_planes`]; the result is clamped into `[0, 255]`.
pub fn ycbcr_planes_to_rgb(planes: &[PlaneImage; 3], cm: &ConversionMatrix) -> Result<crate::image::RgbImage> {
    let (w, h) = (planes[0].width(), planes[0].height());
    if planes.iter().any(|p| p.width() != w || p.height() != h) {
        return Err(Error::geometry("YCbCr planes must share dimensions"));
    }
    let mut img = crate::image::RgbImage::new(w, h)?;
    for y in 0..h {
        for x in 0..w {
            let ycc = [planes[0].get(x, y), planes[1].get(x, y), planes[2].get(x, y)];
            img.set_clamped(x, y, cm.inverse_px(ycc));
        }
    }
    Ok(img)
}
