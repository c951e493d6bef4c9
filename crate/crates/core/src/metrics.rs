//! Objective quality metrics: per-component YCbCr PSNR and mean CIELAB
//! color difference (CIE76), plus the report struct the benchmark harness
//! serializes.
//!
//! PSNR converts both images to full-resolution YCbCr with the same
//! conversion matrix the codec uses and reports `10·log10(255²/MSE)` per
//! component; identical components give `+∞` (serialized as `"inf"`).
//! ΔE clamps to 8-bit range, linearizes sRGB, converts through XYZ (D65)
//! to L*a*b*, and averages the Euclidean distances.

use crate::color::{rgb_to_ycbcr_planes, ConversionMatrix};
use crate::image::RgbImage;
use crate::{Error, Result};

/// Everything the benchmark records about one decoded image.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub psnr_y: f64,
    pub psnr_cb: f64,
    pub psnr_cr: f64,
    pub mean_delta_e: f64,
    /// Container size on disk.
    pub bytes: usize,
    /// Raw RGB bytes (3·w·h) divided by container bytes.
    pub compression_ratio: f64,
}

/// Formats a dB value, spelling infinity as `inf` for CSV stability.
pub fn db_to_string(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::config(format!(
            "image dimensions differ: {}×{} vs {}×{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

/// PSNR of the Y, Cb, Cr components between two images of equal size.
pub fn psnr_components(out: &RgbImage, reference: &RgbImage, cm: &ConversionMatrix) -> Result<(f64, f64, f64)> {
    check_dims(out, reference)?;
    let a = rgb_to_ycbcr_planes(out, cm);
    let b = rgb_to_ycbcr_planes(reference, cm);
    let n = (out.width() * out.height()) as f64;
    let mut mse = [0.0f64; 3];
    for c in 0..3 {
        let mut acc = 0.0;
        for (&x, &y) in a[c].samples().iter().zip(b[c].samples()) {
            acc += (x - y) * (x - y);
        }
        mse[c] = acc / n;
    }
    Ok((psnr_from_mse(mse[0]), psnr_from_mse(mse[1]), psnr_from_mse(mse[2])))
}

const D65: [f64; 3] = [0.95047, 1.0, 1.08883];
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

fn srgb_linearize(c8: f64) -> f64 {
    let c = c8.clamp(0.0, 255.0) / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// 8-bit-range sRGB triple → CIELAB (D65 white).
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = [
        srgb_linearize(rgb[0]),
        srgb_linearize(rgb[1]),
        srgb_linearize(rgb[2]),
    ];
    let mut xyz = [0.0f64; 3];
    for (i, row) in SRGB_TO_XYZ.iter().enumerate() {
        xyz[i] = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let f = [
        lab_f(xyz[0] / D65[0]),
        lab_f(xyz[1] / D65[1]),
        lab_f(xyz[2] / D65[2]),
    ];
    [116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])]
}

/// CIE76 distance between two sRGB triples.
pub fn delta_e_pixel(a: [f64; 3], b: [f64; 3]) -> f64 {
    let la = srgb_to_lab(a);
    let lb = srgb_to_lab(b);
    ((la[0] - lb[0]).powi(2) + (la[1] - lb[1]).powi(2) + (la[2] - lb[2]).powi(2)).sqrt()
}

/// Mean CIE76 color difference between two images of equal size.
pub fn mean_delta_e(out: &RgbImage, reference: &RgbImage) -> Result<f64> {
    check_dims(out, reference)?;
    let (w, h) = (out.width(), out.height());
    let mut acc = 0.0;
    for y in 0..h {
        for x in 0..w {
            acc += delta_e_pixel(out.get(x, y), reference.get(x, y));
        }
    }
    Ok(acc / (w * h) as f64)
}

/// Full report for one decoded image against its reference.
pub fn quality_report(
    out: &RgbImage,
    reference: &RgbImage,
    cm: &ConversionMatrix,
    bytes: usize,
) -> Result<QualityReport> {
    let (psnr_y, psnr_cb, psnr_cr) = psnr_components(out, reference, cm)?;
    let mean_delta_e = mean_delta_e(out, reference)?;
    let raw = 3 * out.width() * out.height();
    Ok(QualityReport {
        psnr_y,
        psnr_cb,
        psnr_cr,
        mean_delta_e,
        bytes,
        compression_ratio: raw as f64 / bytes as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn uniform(w: usize, h: usize, v: [f64; 3]) -> RgbImage {
        RgbImage::from_fn(w, h, |_, _| v).unwrap()
    }

    #[test]
    fn identical_images_give_infinite_psnr_and_zero_delta_e() {
        let cm = ConversionMatrix::jfif();
        let img = uniform(8, 8, [10.0, 200.0, 45.0]);
        let (y, cb, cr) = psnr_components(&img, &img, &cm).unwrap();
        assert!(y.is_infinite() && cb.is_infinite() && cr.is_infinite());
        assert_eq!(db_to_string(y), "inf");
        assert_eq!(mean_delta_e(&img, &img).unwrap(), 0.0);
    }

    #[test]
    fn constant_luma_offset_hits_the_closed_form() {
        let cm = ConversionMatrix::jfif();
        let a = uniform(16, 16, [0.0, 0.0, 0.0]);
        let b = uniform(16, 16, [16.0, 16.0, 16.0]);
        let (y, cb, cr) = psnr_components(&a, &b, &cm).unwrap();
        // Gray offsets move Y only: MSE = 256 → 10·log10(255²/256) = 24.04840.
        assert!((y - 24.04840).abs() < 1e-3, "psnr_y = {y}");
        assert!(cb.is_infinite() && cr.is_infinite());
    }

    #[test]
    fn psnr_is_symmetric() {
        let cm = ConversionMatrix::jfif();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = RgbImage::from_fn(8, 8, |_, _| {
            [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)]
        })
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let b = RgbImage::from_fn(8, 8, |_, _| {
            [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)]
        })
        .unwrap();
        let fwd = psnr_components(&a, &b, &cm).unwrap();
        let rev = psnr_components(&b, &a, &cm).unwrap();
        assert!((fwd.0 - rev.0).abs() < 1e-12);
        assert!((fwd.1 - rev.1).abs() < 1e-12);
        assert!((fwd.2 - rev.2).abs() < 1e-12);
    }

    #[test]
    fn lab_conversion_matches_reference_values() {
        // Mid gray: L* ≈ 53.585, neutral chroma.
        let lab = srgb_to_lab([128.0, 128.0, 128.0]);
        assert!((lab[0] - 53.585016).abs() < 1e-4, "L = {}", lab[0]);
        assert!(lab[1].abs() < 1e-4 && lab[2].abs() < 1e-4);
        // One-step red perturbation of mid gray.
        let d = delta_e_pixel([128.0, 128.0, 128.0], [129.0, 128.0, 128.0]);
        assert!((d - 0.405699).abs() < 1e-4, "delta E = {d}");
    }

    #[test]
    fn black_to_white_spans_the_l_axis() {
        let a = uniform(4, 4, [0.0, 0.0, 0.0]);
        let b = uniform(4, 4, [255.0, 255.0, 255.0]);
        let d = mean_delta_e(&a, &b).unwrap();
        assert!((d - 100.0).abs() < 1e-3, "delta E = {d}");
    }

    #[test]
    fn delta_e_is_a_metric_on_random_triples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = |rng: &mut rand_chacha::ChaCha8Rng| -> [f64; 3] {
                [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)]
            };
            let (a, b, c) = (p(&mut rng), p(&mut rng), p(&mut rng));
            let (ab, ba) = (delta_e_pixel(a, b), delta_e_pixel(b, a));
            assert!((ab - ba).abs() < 1e-12);
            assert!(delta_e_pixel(a, c) <= ab + delta_e_pixel(b, c) + 1e-9);
            assert!(ab >= 0.0);
        }
    }

    #[test]
    fn psnr_decreases_with_noise_variance() {
        let cm = ConversionMatrix::jfif();
        let base = uniform(64, 64, [128.0, 128.0, 128.0]);
        let mut last = f64::INFINITY;
        for (i, sigma) in [2.0, 6.0, 18.0].iter().enumerate() {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100 + i as u64);
            let noisy = RgbImage::from_fn(64, 64, |_, _| {
                let n = |rng: &mut rand_chacha::ChaCha8Rng| 128.0 + rng.gen_range(-sigma..*sigma);
                [n(&mut rng), n(&mut rng), n(&mut rng)]
            })
            .unwrap();
            let (y, _, _) = psnr_components(&noisy, &base, &cm).unwrap();
            assert!(y < last, "sigma {sigma}: {y} not below {last}");
            last = y;
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = uniform(4, 4, [0.0; 3]);
        let b = uniform(4, 6, [0.0; 3]);
        assert!(psnr_components(&a, &b, &ConversionMatrix::jfif()).is_err());
        assert!(mean_delta_e(&a, &b).is_err());
    }

    #[test]
    fn report_fills_ratio_from_bytes() {
        let cm = ConversionMatrix::jfif();
        let img = uniform(32, 32, [50.0, 60.0, 70.0]);
        let r = quality_report(&img, &img, &cm, 1024).unwrap();
        assert_eq!(r.bytes, 1024);
        assert!((r.compression_ratio - 3.0).abs() < 1e-12);
    }
}
