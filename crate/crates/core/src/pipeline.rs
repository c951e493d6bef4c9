//! End-to-end encode/decode pipelines and the rate–distortion sweep.
//!
//! Four methods are wired to two plane coders:
//!
//! * `cai` — demosaic first, convert the dense image to YCbCr, code three
//!   dense planes (optionally with 2:1 horizontal chroma for the DCT path).
//! * `iad-shift` — direct 2×2 conversion of the mosaic; the quincunx luma
//!   is packed row-wise into a half-width dense plane.
//! * `iad-rot2x2` — direct 2×2 conversion; the quincunx luma is rotated 45°
//!   and coded under its diamond-shaped validity mask.
//! * `iad-rot-block` — block conversion of configurable size, same rotated
//!   luma path.
//!
//! Chroma planes are quarter-rate and dense in every `iad` method. The
//! decoder needs nothing beyond the container: plane masks are rebuilt from
//! the recorded dimensions, and demosaicing (for the `iad` paths) happens
//! after reassembling the mosaic, with whichever method the container
//! names — interpolation is part of *decoding*, not of the stored data.

use crate::color::{self, ConversionMatrix, ConversionMode, MatrixKind, YCbCrCfa};
use crate::container::{CodedContainer, Coder, Method, PlaneRecord, PlaneRole};
use crate::dct::{self, PlaneKind, Subsampling};
use crate::demosaic::{demosaic, InterpMethod};
use crate::geometry::{self, RotatedPlane, ShiftedPlane};
use crate::image::{mosaic, BayerImage, PlaneImage, RgbImage, ShapeMask};
use crate::metrics::{quality_report, QualityReport};
use crate::spiht::{self, DEFAULT_Y_FRACTION};
use crate::wavelet::{self, WaveletConfig};
use crate::{Error, Result};
use rayon::prelude::*;

/// Everything an encode run needs to know.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub method: Method,
    pub coder: Coder,
    /// Demosaicing method: used at encode time by `cai`, at decode time by
    /// the `iad` methods (and recorded in the container either way).
    pub interp: InterpMethod,
    pub matrix: MatrixKind,
    /// DCT quality, `[1, 100]`.
    pub quality: u8,
    /// Chroma layout of the dense DCT path.
    pub subsampling: Subsampling,
    /// Total byte budget over the three plane payloads (wavelet coder).
    pub budget_bytes: usize,
    /// Fraction of the budget given to luma (wavelet coder).
    pub y_fraction: f64,
    /// Conversion block size for `iad-rot-block`.
    pub block: (usize, usize),
    /// Decomposition depth (wavelet coder); `None` picks the deepest depth
    /// (at most 5) each plane supports.
    pub levels: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            method: Method::IadRot2x2,
            coder: Coder::Dct,
            interp: InterpMethod::Bilinear,
            matrix: MatrixKind::Jfif,
            quality: 75,
            subsampling: Subsampling::S422,
            budget_bytes: 61_440,
            y_fraction: DEFAULT_Y_FRACTION,
            block: (64, 64),
            levels: None,
        }
    }
}

fn full_mask(w: usize, h: usize) -> ShapeMask {
    ShapeMask::from_fn(w, h, |_, _| true)
}

/// Deepest usable decomposition for a plane: every level halves both sides,
/// and the set-partitioning stage needs an even approximation band of at
/// least 2×2 — so depth `L` requires both dimensions divisible by `2^(L+1)`.
fn auto_levels(w: usize, h: usize, requested: Option<usize>) -> Result<usize> {
    if let Some(l) = requested {
        return Ok(l); // downstream stages validate against the plane
    }
    (1..=5usize)
        .rev()
        .find(|&l| {
            let d = 1usize << (l + 1);
            w.is_multiple_of(d) && h.is_multiple_of(d)
        })
        .ok_or_else(|| {
            Error::config(format!(
                "no usable decomposition depth for a {w}×{h} plane; dimensions must be divisible by 4"
            ))
        })
}

// ---------------------------------------------------------------------------
// Per-plane coding. DCT payloads carry [quality, layout] ahead of the
// entropy-coded data, where layout 1 means "horizontally halved chroma".
// Wavelet payloads are self-describing.

fn dct_plane_encode(plane: &PlaneImage, mask: &ShapeMask, quality: u8, kind: PlaneKind, halved: bool) -> Result<Vec<u8>> {
    let mut payload = vec![quality, halved as u8];
    payload.extend(dct::dct_encode(plane, mask, quality, kind)?);
    Ok(payload)
}

/// Returns the decoded plane and whether it was coded horizontally halved.
fn dct_plane_decode(payload: &[u8], full_dims: (usize, usize), shaped_mask: Option<&ShapeMask>, kind: PlaneKind) -> Result<(PlaneImage, bool)> {
    if payload.len() < 2 {
        return Err(Error::stream(0, "plane payload shorter than its header"));
    }
    let quality = payload[0];
    let halved = match payload[1] {
        0 => false,
        1 => true,
        other => return Err(Error::stream(1, format!("unknown plane layout {other}"))),
    };
    let mask = match shaped_mask {
        Some(m) => {
            if halved {
                return Err(Error::stream(1, "shaped planes cannot be halved"));
            }
            m.clone()
        }
        None => {
            let (w, h) = full_dims;
            if halved {
                full_mask(w / 2, h)
            } else {
                full_mask(w, h)
            }
        }
    };
    let plane = dct::dct_decode(&payload[2..], &mask, quality, kind)?;
    Ok((plane, halved))
}

fn spiht_plane_encode(plane: &PlaneImage, mask: &ShapeMask, levels: usize, budget: usize) -> Result<Vec<u8>> {
    let pyr = wavelet::sadwt_forward(plane, mask, WaveletConfig { levels })?;
    spiht::spiht_encode(&pyr, budget)
}

fn spiht_plane_decode(payload: &[u8], mask: &ShapeMask) -> Result<PlaneImage> {
    if payload.is_empty() {
        return Err(Error::stream(0, "empty plane payload"));
    }
    let levels = payload[0] as usize;
    let band_mask = wavelet::transform_mask(mask, levels)?;
    let pyr = spiht::spiht_decode(payload, &band_mask)?;
    let (plane, _) = wavelet::sadwt_inverse(&pyr)?;
    Ok(plane)
}

// ---------------------------------------------------------------------------
// Encoding.

struct LumaGeometry {
    plane: PlaneImage,
    /// `None` for dense planes (the shift layout), the diamond mask for the
    /// rotated layouts.
    mask: Option<ShapeMask>,
}

fn restructure_luma(ycc: &YCbCrCfa, method: Method) -> Result<LumaGeometry> {
    match method {
        Method::IadShift => {
            let sp = geometry::shift_forward(&ycc.y);
            Ok(LumaGeometry { plane: sp.plane, mask: None })
        }
        Method::IadRot2x2 | Method::IadRotBlock => {
            let rp = geometry::rotate_forward(&ycc.y)?;
            Ok(LumaGeometry { plane: rp.plane, mask: Some(rp.mask) })
        }
        Method::Cai => unreachable!("cai has no mosaic-domain luma"),
    }
}

/// Compresses a mosaic into a coded container.
pub fn encode(cfa: &BayerImage, cfg: &PipelineConfig) -> Result<CodedContainer> {
    let cm = ConversionMatrix::from_kind(cfg.matrix);
    let (w, h) = (cfa.width(), cfa.height());

    let (planes, block) = match cfg.method {
        Method::Cai => {
            let rgb = demosaic(cfa, cfg.interp);
            let [py, pcb, pcr] = color::rgb_to_ycbcr_planes(&rgb, &cm);
            let records = match cfg.coder {
                Coder::Dct => {
                    let halve = cfg.subsampling == Subsampling::S422;
                    let (cb, cr) = if halve {
                        (dct::downsample_h2(&pcb)?, dct::downsample_h2(&pcr)?)
                    } else {
                        (pcb, pcr)
                    };
                    vec![
                        PlaneRecord {
                            role: PlaneRole::Luma,
                            payload: dct_plane_encode(&py, &full_mask(w, h), cfg.quality, PlaneKind::Luma, false)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cb,
                            payload: dct_plane_encode(&cb, &full_mask(cb.width(), cb.height()), cfg.quality, PlaneKind::Chroma, halve)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cr,
                            payload: dct_plane_encode(&cr, &full_mask(cr.width(), cr.height()), cfg.quality, PlaneKind::Chroma, halve)?,
                        },
                    ]
                }
                Coder::Spiht => {
                    let (by, bcb, bcr) = spiht::allocate_rates(cfg.budget_bytes, cfg.y_fraction)?;
                    let levels = auto_levels(w, h, cfg.levels)?;
                    vec![
                        PlaneRecord {
                            role: PlaneRole::Luma,
                            payload: spiht_plane_encode(&py, &full_mask(w, h), levels, by)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cb,
                            payload: spiht_plane_encode(&pcb, &full_mask(w, h), levels, bcb)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cr,
                            payload: spiht_plane_encode(&pcr, &full_mask(w, h), levels, bcr)?,
                        },
                    ]
                }
            };
            (records, (0u16, 0u16))
        }
        method => {
            let ycc = match method {
                Method::IadShift | Method::IadRot2x2 => color::convert_2x2_forward(cfa, &cm)?,
                Method::IadRotBlock => color::convert_blockn_forward(cfa, cfg.block.0, cfg.block.1, &cm)?,
                Method::Cai => unreachable!(),
            };
            if cfg.coder == Coder::Dct && method != Method::IadShift && (w % 16 != 0 || h % 16 != 0) {
                return Err(Error::config(format!(
                    "rotated block coding needs dimensions divisible by 16, got {w}×{h}"
                )));
            }
            let luma = restructure_luma(&ycc, method)?;
            let y_mask = match &luma.mask {
                Some(m) => m.clone(),
                None => full_mask(luma.plane.width(), luma.plane.height()),
            };
            let records = match cfg.coder {
                Coder::Dct => {
                    let q = cfg.quality;
                    vec![
                        PlaneRecord {
                            role: PlaneRole::Luma,
                            payload: dct_plane_encode(&luma.plane, &y_mask, q, PlaneKind::Luma, false)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cb,
                            payload: dct_plane_encode(&ycc.cb, &full_mask(w / 2, h / 2), q, PlaneKind::Chroma, false)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cr,
                            payload: dct_plane_encode(&ycc.cr, &full_mask(w / 2, h / 2), q, PlaneKind::Chroma, false)?,
                        },
                    ]
                }
                Coder::Spiht => {
                    let (by, bcb, bcr) = spiht::allocate_rates(cfg.budget_bytes, cfg.y_fraction)?;
                    let ly = auto_levels(luma.plane.width(), luma.plane.height(), cfg.levels)?;
                    let lc = auto_levels(w / 2, h / 2, cfg.levels)?;
                    vec![
                        PlaneRecord {
                            role: PlaneRole::Luma,
                            payload: spiht_plane_encode(&luma.plane, &y_mask, ly, by)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cb,
                            payload: spiht_plane_encode(&ycc.cb, &full_mask(w / 2, h / 2), lc, bcb)?,
                        },
                        PlaneRecord {
                            role: PlaneRole::Cr,
                            payload: spiht_plane_encode(&ycc.cr, &full_mask(w / 2, h / 2), lc, bcr)?,
                        },
                    ]
                }
            };
            let block = match method {
                Method::IadRotBlock => (cfg.block.0 as u16, cfg.block.1 as u16),
                _ => (0, 0),
            };
            (records, block)
        }
    };

    Ok(CodedContainer {
        method: cfg.method,
        coder: cfg.coder,
        width: w as u32,
        height: h as u32,
        interp: cfg.interp,
        matrix: cfg.matrix,
        block,
        planes,
    })
}

// ---------------------------------------------------------------------------
// Decoding.

fn decode_dense_plane(rec: &PlaneRecord, coder: Coder, dims: (usize, usize), kind: PlaneKind) -> Result<PlaneImage> {
    match coder {
        Coder::Dct => {
            let (plane, halved) = dct_plane_decode(&rec.payload, dims, None, kind)?;
            Ok(if halved { dct::upsample_h2(&plane) } else { plane })
        }
        Coder::Spiht => spiht_plane_decode(&rec.payload, &full_mask(dims.0, dims.1)),
    }
}

/// Decompresses a container back to a displayable image.
pub fn decode(c: &CodedContainer) -> Result<RgbImage> {
    let cm = ConversionMatrix::from_kind(c.matrix);
    let (w, h) = (c.width as usize, c.height as usize);
    if w < 2 || h < 2 || w % 2 != 0 || h % 2 != 0 {
        return Err(Error::stream(7, format!("implausible image dimensions {w}×{h}")));
    }

    match c.method {
        Method::Cai => {
            let y = decode_dense_plane(c.plane(PlaneRole::Luma)?, c.coder, (w, h), PlaneKind::Luma)?;
            let cb = decode_dense_plane(c.plane(PlaneRole::Cb)?, c.coder, (w, h), PlaneKind::Chroma)?;
            let cr = decode_dense_plane(c.plane(PlaneRole::Cr)?, c.coder, (w, h), PlaneKind::Chroma)?;
            color::ycbcr_planes_to_rgb(&[y, cb, cr], &cm)
        }
        method => {
            let yrec = c.plane(PlaneRole::Luma)?;
            let y = match method {
                Method::IadShift => {
                    let plane = match c.coder {
                        Coder::Dct => dct_plane_decode(&yrec.payload, (w / 2, h), None, PlaneKind::Luma)?.0,
                        Coder::Spiht => spiht_plane_decode(&yrec.payload, &full_mask(w / 2, h))?,
                    };
                    geometry::shift_inverse(&ShiftedPlane::from_parts(plane, w, h)?)?
                }
                _ => {
                    let mask = geometry::rotation_mask(w, h)?;
                    let plane = match c.coder {
                        Coder::Dct => dct_plane_decode(&yrec.payload, (mask.width(), mask.height()), Some(&mask), PlaneKind::Luma)?.0,
                        Coder::Spiht => spiht_plane_decode(&yrec.payload, &mask)?,
                    };
                    geometry::rotate_inverse(&RotatedPlane::from_parts(plane, w, h)?)?
                }
            };
            let cb = decode_dense_plane(c.plane(PlaneRole::Cb)?, c.coder, (w / 2, h / 2), PlaneKind::Chroma)?;
            let cr = decode_dense_plane(c.plane(PlaneRole::Cr)?, c.coder, (w / 2, h / 2), PlaneKind::Chroma)?;
            let mode = match method {
                Method::IadRotBlock => {
                    if c.block.0 < 2 || c.block.1 < 2 {
                        return Err(Error::stream(17, format!("implausible conversion block {}×{}", c.block.0, c.block.1)));
                    }
                    ConversionMode::BlockN { bw: c.block.0 as usize, bh: c.block.1 as usize }
                }
                _ => ConversionMode::Block2x2,
            };
            let ycc = YCbCrCfa { y, cb, cr, mode };
            let mut cfa = color::convert_inverse(&ycc, &cm)?;
            cfa.clamp();
            Ok(demosaic(&cfa, c.interp))
        }
    }
}

/// The comparison baseline for a mosaic: what a lossless pipeline would
/// show, i.e. the mosaic demosaiced directly.
pub fn reference_image(cfa: &BayerImage, interp: InterpMethod) -> RgbImage {
    demosaic(cfa, interp)
}

/// Convenience: demosaic an RGB original's mosaic (the baseline used when
/// experiments start from a dense image rather than a raw capture).
pub fn reference_from_rgb(img: &RgbImage, interp: InterpMethod) -> RgbImage {
    reference_image(&mosaic(img), interp)
}

// ---------------------------------------------------------------------------
// Rate–distortion sweeps.

/// One experiment of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub cfg: PipelineConfig,
}

/// Result of one experiment; failures are reported, not fatal.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub method: Method,
    pub coder: Coder,
    pub interp: InterpMethod,
    pub quality: u8,
    pub budget_bytes: usize,
    pub bytes: usize,
    pub outcome: std::result::Result<QualityReport, String>,
}

/// Runs every point against the same mosaic, in parallel. Each row compares
/// the decoded image to the mosaic demosaiced with the same method, and
/// reports the full serialized size.
pub fn rd_sweep(cfa: &BayerImage, points: &[SweepPoint]) -> Vec<SweepRow> {
    points
        .par_iter()
        .map(|p| {
            let cfg = &p.cfg;
            let outcome = (|| -> Result<(usize, QualityReport)> {
                let container = encode(cfa, cfg)?;
                let bytes = container.total_bytes();
                let out = decode(&container)?;
                let reference = reference_image(cfa, cfg.interp);
                let cm = ConversionMatrix::from_kind(cfg.matrix);
                Ok((bytes, quality_report(&out, &reference, &cm, bytes)?))
            })();
            let (bytes, outcome) = match outcome {
                Ok((b, r)) => (b, Ok(r)),
                Err(e) => (0, Err(e.to_string())),
            };
            SweepRow {
                label: p.label.clone(),
                method: cfg.method,
                coder: cfg.coder,
                interp: cfg.interp,
                quality: cfg.quality,
                budget_bytes: cfg.budget_bytes,
                bytes,
                outcome,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthetic_image, CorpusConfig};

    fn test_cfa(w: usize, h: usize, seed: u64) -> BayerImage {
        let img = synthetic_image(&CorpusConfig { width: w, height: h, seed, ..Default::default() }).unwrap();
        mosaic(&img)
    }

    fn report(cfa: &BayerImage, cfg: &PipelineConfig) -> (CodedContainer, QualityReport) {
        let container = encode(cfa, cfg).unwrap();
        let out = decode(&container).unwrap();
        let reference = reference_image(cfa, cfg.interp);
        let cm = ConversionMatrix::from_kind(cfg.matrix);
        let r = quality_report(&out, &reference, &cm, container.total_bytes()).unwrap();
        (container, r)
    }

    #[test]
    fn cai_dct_round_trips_through_bytes() {
        let cfa = test_cfa(64, 64, 3);
        let cfg = PipelineConfig { method: Method::Cai, coder: Coder::Dct, quality: 85, ..Default::default() };
        let container = encode(&cfa, &cfg).unwrap();
        let bytes = container.to_bytes();
        let parsed = CodedContainer::from_bytes(&bytes).unwrap();
        assert_eq!(parsed, container);
        let out = decode(&parsed).unwrap();
        assert_eq!((out.width(), out.height()), (64, 64));
        let reference = reference_image(&cfa, cfg.interp);
        let cm = ConversionMatrix::jfif();
        let r = quality_report(&out, &reference, &cm, bytes.len()).unwrap();
        assert!(r.psnr_y > 26.0, "cai/dct PSNR-Y {:.2}", r.psnr_y);
        assert!(r.mean_delta_e.is_finite() && r.mean_delta_e < 12.0);
    }

    #[test]
    fn every_method_coder_pair_runs_on_a_small_image() {
        let cfa = test_cfa(64, 64, 4);
        for method in Method::ALL {
            for coder in Coder::ALL {
                let cfg = PipelineConfig {
                    method,
                    coder,
                    quality: 80,
                    budget_bytes: 4000,
                    block: (16, 16),
                    ..Default::default()
                };
                let (container, r) = report(&cfa, &cfg);
                assert_eq!(container.method, method);
                assert!(r.psnr_y > 18.0, "{method}/{coder} PSNR-Y {:.2}", r.psnr_y);
                assert!(r.mean_delta_e.is_finite(), "{method}/{coder}");
            }
        }
    }

    #[test]
    fn wavelet_budget_covers_the_payloads() {
        let cfa = test_cfa(64, 64, 5);
        for method in [Method::Cai, Method::IadShift, Method::IadRot2x2] {
            let cfg = PipelineConfig {
                method,
                coder: Coder::Spiht,
                budget_bytes: 2500,
                ..Default::default()
            };
            let container = encode(&cfa, &cfg).unwrap();
            assert!(
                container.payload_bytes() <= 2500,
                "{method}: {} > 2500",
                container.payload_bytes()
            );
            // the framing is small and fixed
            assert_eq!(container.total_bytes(), container.payload_bytes() + 22 + 3 * 5);
        }
    }

    #[test]
    fn iad_coded_luma_ignores_the_demosaicing_choice() {
        let cfa = test_cfa(32, 32, 6);
        let base = PipelineConfig { method: Method::IadShift, coder: Coder::Dct, ..Default::default() };
        let a = encode(&cfa, &PipelineConfig { interp: InterpMethod::Bilinear, ..base }).unwrap();
        let b = encode(&cfa, &PipelineConfig { interp: InterpMethod::Median, ..base }).unwrap();
        for role in [PlaneRole::Luma, PlaneRole::Cb, PlaneRole::Cr] {
            assert_eq!(a.plane(role).unwrap().payload, b.plane(role).unwrap().payload);
        }
        // and the two containers decode with their own demosaicing
        assert_ne!(decode(&a).unwrap(), decode(&b).unwrap());
    }

    #[test]
    fn rotated_dct_rejects_unaligned_dimensions() {
        let cfa = test_cfa(24, 24, 7);
        let cfg = PipelineConfig { method: Method::IadRot2x2, coder: Coder::Dct, ..Default::default() };
        assert!(matches!(encode(&cfa, &cfg), Err(Error::Config(_))));
        // the shift layout pads freely and accepts the same image
        let cfg = PipelineConfig { method: Method::IadShift, coder: Coder::Dct, ..Default::default() };
        encode(&cfa, &cfg).unwrap();
    }

    #[test]
    fn depth_is_chosen_per_plane_for_awkward_sizes() {
        // 80×48: the shifted luma is 40×48 (depth 2), chroma 40×24 (depth 2)
        let cfa = test_cfa(80, 48, 8);
        let cfg = PipelineConfig {
            method: Method::IadShift,
            coder: Coder::Spiht,
            budget_bytes: 3000,
            ..Default::default()
        };
        let container = encode(&cfa, &cfg).unwrap();
        assert_eq!(container.plane(PlaneRole::Luma).unwrap().payload[0], 2);
        let out = decode(&container).unwrap();
        assert_eq!((out.width(), out.height()), (80, 48));
    }

    #[test]
    fn missing_plane_is_a_decode_error() {
        let cfa = test_cfa(32, 32, 9);
        let cfg = PipelineConfig { method: Method::Cai, coder: Coder::Dct, ..Default::default() };
        let mut container = encode(&cfa, &cfg).unwrap();
        container.planes.pop();
        assert!(matches!(decode(&container), Err(Error::Stream { .. })));
    }

    #[test]
    fn sweep_reports_failures_as_rows() {
        let cfa = test_cfa(32, 32, 10);
        let points = vec![
            SweepPoint {
                label: "ok".into(),
                cfg: PipelineConfig { method: Method::Cai, coder: Coder::Dct, quality: 60, ..Default::default() },
            },
            SweepPoint {
                label: "broken".into(),
                cfg: PipelineConfig {
                    method: Method::Cai,
                    coder: Coder::Spiht,
                    levels: Some(7), // too deep for 32×32
                    ..Default::default()
                },
            },
        ];
        let rows = rd_sweep(&cfa, &points);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, "ok");
        assert!(rows[0].outcome.is_ok());
        assert!(rows[0].bytes > 0);
        assert!(rows[1].outcome.is_err());
    }

    #[test]
    fn block_conversion_size_travels_in_the_container() {
        let cfa = test_cfa(64, 64, 11);
        let cfg = PipelineConfig {
            method: Method::IadRotBlock,
            coder: Coder::Spiht,
            budget_bytes: 5000,
            block: (8, 8),
            ..Default::default()
        };
        let container = encode(&cfa, &cfg).unwrap();
        assert_eq!(container.block, (8, 8));
        let out = decode(&container).unwrap();
        assert_eq!((out.width(), out.height()), (64, 64));
    }
}
