//! Deterministic synthetic test images.
//!
//! Rate–distortion comparisons need inputs with natural-image statistics:
//! energy concentrated at low frequencies, fine texture and sensor-style
//! noise that deny the coders an easy ceiling, and genuine sharp edges
//! (the part demosaicing methods disagree on). This module builds such
//! images from seeded value noise plus a handful of composited shapes,
//! so every experiment is reproducible from a seed.

use crate::image::{PlaneImage, RgbImage};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Parameters of the generator.
#[derive(Debug, Clone, Copy)]
pub struct CorpusConfig {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Weight of the finest noise octaves and of the per-pixel sensor
    /// noise, `0.0..=1.0`. Higher values make the image harder to compress.
    pub detail: f64,
    /// Opacity of the composited shapes, `0.0..=1.0`. Higher values make
    /// stronger edges.
    pub edge_strength: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            width: 512,
            height: 512,
            seed: 7,
            detail: 0.3,
            edge_strength: 0.8,
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Smooth random field in `[-1, 1]` from a `cells`-wide lattice of values,
/// interpolated with a cubic fade.
fn value_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, cells: usize) -> PlaneImage {
    let gw = cells + 1;
    let gh = cells + 1;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PlaneImage::from_fn(w, h, |x, y| {
        let fx = x as f64 / w as f64 * cells as f64;
        let fy = y as f64 / h as f64 * cells as f64;
        let (ix, iy) = (fx as usize, fy as usize);
        let (tx, ty) = (smoothstep(fx - ix as f64), smoothstep(fy - iy as f64));
        let at = |gx: usize, gy: usize| lattice[gy.min(cells) * gw + gx.min(cells)];
        let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
        let bot = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bot * ty
    })
}

/// Generates a reproducible natural-statistics test image.
pub fn synthetic_image(cfg: &CorpusConfig) -> Result<RgbImage> {
    let (w, h) = (cfg.width, cfg.height);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let detail = cfg.detail.clamp(0.0, 1.0);
    let edge = cfg.edge_strength.clamp(0.0, 1.0);

    // Luminance: octaves with amplitude halving as frequency doubles, the
    // finest two scaled by the detail knob.
    let octaves = [(4usize, 1.0), (8, 0.5), (16, 0.25), (32, 0.125), (64, 0.0625 * detail), (128, 0.03125 * detail)];
    let fields: Vec<(PlaneImage, f64)> = octaves
        .iter()
        .map(|&(cells, amp)| (value_noise(&mut rng, w, h, cells), amp))
        .collect();
    // Slow chroma fields give the image large-scale color variation.
    let cb_field = value_noise(&mut rng, w, h, 4);
    let cr_field = value_noise(&mut rng, w, h, 6);

    // A few opaque-ish shapes with sharp borders.
    struct Shape {
        kind: u8, // 0 rectangle, 1 disc
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        color: [f64; 3],
    }
    let shapes: Vec<Shape> = (0..6)
        .map(|_| Shape {
            kind: rng.gen_range(0..2),
            cx: rng.gen_range(0.1..0.9) * w as f64,
            cy: rng.gen_range(0.1..0.9) * h as f64,
            rx: rng.gen_range(0.04..0.18) * w as f64,
            ry: rng.gen_range(0.04..0.18) * h as f64,
            color: [rng.gen_range(30.0..225.0), rng.gen_range(30.0..225.0), rng.gen_range(30.0..225.0)],
        })
        .collect();

    // Per-pixel, per-channel sensor noise. Applied on top of the composited
    // scene so that flat regions and shape interiors keep a realistic noise
    // floor instead of coding down to nothing.
    let noise_sd = 5.0 * detail;
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let noise: Vec<[f64; 3]> = (0..w * h)
        .map(|_| [gauss.sample(&mut rng), gauss.sample(&mut rng), gauss.sample(&mut rng)])
        .collect();

    RgbImage::from_fn(w, h, |x, y| {
        let mut l = 120.0;
        for (f, amp) in &fields {
            l += 70.0 * amp * f.get(x, y);
        }
        // slow diagonal illumination gradient
        l += 18.0 * ((x + y) as f64 / (w + h) as f64 - 0.5);
        let cb = 35.0 * cb_field.get(x, y);
        let cr = 35.0 * cr_field.get(x, y);
        let mut px = [l + cr, l - 0.3 * (cb + cr), l + cb];
        for s in &shapes {
            let inside = match s.kind {
                0 => (x as f64 - s.cx).abs() < s.rx && (y as f64 - s.cy).abs() < s.ry,
                _ => {
                    let dx = (x as f64 - s.cx) / s.rx;
                    let dy = (y as f64 - s.cy) / s.ry;
                    dx * dx + dy * dy < 1.0
                }
            };
            if inside {
                for (p, c) in px.iter_mut().zip(&s.color) {
                    *p += edge * (c - *p);
                }
            }
        }
        for (p, n) in px.iter_mut().zip(&noise[y * w + x]) {
            *p += noise_sd * n;
        }
        px
    })
}
