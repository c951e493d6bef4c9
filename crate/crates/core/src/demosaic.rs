//! Demosaicing: reconstructing full RGB from Bayer samples.
//!
//! Four methods with different quality/cost trade-offs:
//!
//! * `Bilinear` — plain neighbor averaging per channel.
//! * `Hue` — green first, then red/blue through locally constant R/G and
//!   B/G ratios (guarded against small denominators).
//! * `Gradient` — green direction chosen by second differences of the
//!   native channel (edge-following), red/blue via color differences.
//! * `Median` — bilinear pass refined by a 3×3 median filter on color
//!   differences; native samples stay untouched.
//!
//! All methods are pure functions of the CFA samples and preserve native
//! samples at their own positions (the median method's second pass only
//! rewrites interpolated components). Border pixels average over whichever
//! neighbors exist.

use crate::image::{color_at, BayerImage, CfaColor, PlaneImage, RgbImage};
use crate::{Error, Result};

/// Interpolation method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpMethod {
    Bilinear,
    Hue,
    Gradient,
    Median,
}

impl InterpMethod {
    pub const ALL: [InterpMethod; 4] = [
        InterpMethod::Bilinear,
        InterpMethod::Hue,
        InterpMethod::Gradient,
        InterpMethod::Median,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InterpMethod::Bilinear => "bilinear",
            InterpMethod::Hue => "hue",
            InterpMethod::Gradient => "gradient",
            InterpMethod::Median => "median",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(InterpMethod::Bilinear),
            "hue" => Ok(InterpMethod::Hue),
            "gradient" => Ok(InterpMethod::Gradient),
            "median" => Ok(InterpMethod::Median),
            other => Err(Error::config(format!(
                "unknown interpolation method '{other}' (expected bilinear|hue|gradient|median)"
            ))),
        }
    }
}

impl std::fmt::Display for InterpMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

const HORIZ: [(isize, isize); 2] = [(-1, 0), (1, 0)];
const VERT: [(isize, isize); 2] = [(0, -1), (0, 1)];
const FOUR: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const DIAG: [(isize, isize); 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];

/// Offsets of the nearest sites carrying `channel`, as seen from a pixel of
/// CFA class `at`. `None` means the pixel owns the channel natively.
fn neighbor_offsets(at: CfaColor, y: usize, channel: CfaColor) -> Option<&'static [(isize, isize)]> {
    use CfaColor::*;
    match (at, channel) {
        (Green, Green) | (Red, Red) | (Blue, Blue) => None,
        (Green, Red) => Some(if y.is_multiple_of(2) { &HORIZ } else { &VERT }),
        (Green, Blue) => Some(if y.is_multiple_of(2) { &VERT } else { &HORIZ }),
        (Red, Green) | (Blue, Green) => Some(&FOUR),
        (Red, Blue) | (Blue, Red) => Some(&DIAG),
    }
}

/// Indicator-normalized average of the CFA over in-bounds offsets.
fn avg_at(cfa: &BayerImage, x: usize, y: usize, offs: &[(isize, isize)]) -> f64 {
    let (w, h) = (cfa.width() as isize, cfa.height() as isize);
    let mut sum = 0.0;
    let mut n = 0usize;
    for &(dx, dy) in offs {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        if nx >= 0 && nx < w && ny >= 0 && ny < h {
            sum += cfa.get(nx as usize, ny as usize);
            n += 1;
        }
    }
    debug_assert!(n > 0, "even-dimension images always have one such neighbor");
    sum / n as f64
}

/// Bilinear estimate of one channel at every position (native where owned).
fn channel_bilinear(cfa: &BayerImage, channel: CfaColor) -> PlaneImage {
    let (w, h) = (cfa.width(), cfa.height());
    PlaneImage::from_fn(w, h, |x, y| {
        match neighbor_offsets(color_at(x, y), y, channel) {
            None => cfa.get(x, y),
            Some(offs) => avg_at(cfa, x, y, offs),
        }
    })
}

fn bilinear_planes(cfa: &BayerImage) -> [PlaneImage; 3] {
    [
        channel_bilinear(cfa, CfaColor::Red),
        channel_bilinear(cfa, CfaColor::Green),
        channel_bilinear(cfa, CfaColor::Blue),
    ]
}

fn planes_to_rgb(planes: &[PlaneImage; 3]) -> RgbImage {
    RgbImage::from_fn(planes[0].width(), planes[0].height(), |x, y| {
        [planes[0].get(x, y), planes[1].get(x, y), planes[2].get(x, y)]
    })
    .expect("plane dimensions are valid image dimensions")
}

/// Green plane with edge-following direction selection at red/blue sites:
/// the interpolation direction is the one with the smaller second difference
/// of the site's own channel; ties average both directions.
fn green_gradient(cfa: &BayerImage) -> PlaneImage {
    let (w, h) = (cfa.width() as isize, cfa.height() as isize);
    let second_diff = |x: usize, y: usize, dx: isize, dy: isize| -> Option<f64> {
        let (ax, ay) = (x as isize - 2 * dx, y as isize - 2 * dy);
        let (bx, by) = (x as isize + 2 * dx, y as isize + 2 * dy);
        if ax >= 0 && ax < w && ay >= 0 && ay < h && bx >= 0 && bx < w && by >= 0 && by < h {
            let c = cfa.get(x, y);
            Some((2.0 * c - cfa.get(ax as usize, ay as usize) - cfa.get(bx as usize, by as usize)).abs())
        } else {
            None
        }
    };
    PlaneImage::from_fn(cfa.width(), cfa.height(), |x, y| {
        if color_at(x, y) == CfaColor::Green {
            return cfa.get(x, y);
        }
        let gh = second_diff(x, y, 1, 0);
        let gv = second_diff(x, y, 0, 1);
        match (gh, gv) {
            (Some(a), Some(b)) if a < b => avg_at(cfa, x, y, &HORIZ),
            (Some(a), Some(b)) if b < a => avg_at(cfa, x, y, &VERT),
            (Some(_), Some(_)) => avg_at(cfa, x, y, &FOUR),
            (Some(_), None) => avg_at(cfa, x, y, &HORIZ),
            (None, Some(_)) => avg_at(cfa, x, y, &VERT),
            (None, None) => avg_at(cfa, x, y, &FOUR),
        }
    })
}

/// Red/blue plane from a finished green plane, interpolating the color
/// difference (channel − green) from the neighboring native sites.
fn channel_via_differences(cfa: &BayerImage, green: &PlaneImage, channel: CfaColor) -> PlaneImage {
    let (w, h) = (cfa.width() as isize, cfa.height() as isize);
    PlaneImage::from_fn(cfa.width(), cfa.height(), |x, y| {
        match neighbor_offsets(color_at(x, y), y, channel) {
            None => cfa.get(x, y),
            Some(offs) => {
                let mut sum = 0.0;
                let mut n = 0usize;
                for &(dx, dy) in offs {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx >= 0 && nx < w && ny >= 0 && ny < h {
                        let (nx, ny) = (nx as usize, ny as usize);
                        sum += cfa.get(nx, ny) - green.get(nx, ny);
                        n += 1;
                    }
                }
                green.get(x, y) + sum / n as f64
            }
        }
    })
}

/// Red/blue plane from a finished green plane through locally constant
/// channel/green ratios. Denominators are guarded by `max(G, 1)` so a small
/// green error cannot blow up the estimate; for images with G ≥ 1 the guard
/// is inactive.
fn channel_via_ratios(cfa: &BayerImage, green: &PlaneImage, channel: CfaColor) -> PlaneImage {
    let (w, h) = (cfa.width() as isize, cfa.height() as isize);
    let guard = |g: f64| g.max(1.0);
    PlaneImage::from_fn(cfa.width(), cfa.height(), |x, y| {
        match neighbor_offsets(color_at(x, y), y, channel) {
            None => cfa.get(x, y),
            Some(offs) => {
                let mut sum = 0.0;
                let mut n = 0usize;
                for &(dx, dy) in offs {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx >= 0 && nx < w && ny >= 0 && ny < h {
                        let (nx, ny) = (nx as usize, ny as usize);
                        sum += cfa.get(nx, ny) / guard(green.get(nx, ny));
                        n += 1;
                    }
                }
                guard(green.get(x, y)) * (sum / n as f64)
            }
        }
    })
}

fn median(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaNs in image data"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Bilinear pass refined per pixel: each interpolated component becomes
/// native sample + median of (component − native-channel) differences over
/// the 3×3 window of the first pass.
fn median_planes(cfa: &BayerImage) -> [PlaneImage; 3] {
    let (w, h) = (cfa.width(), cfa.height());
    let first = bilinear_planes(cfa);
    let mut out = first.clone();
    let mut window = Vec::with_capacity(9);
    for y in 0..h {
        for x in 0..w {
            let own = match color_at(x, y) {
                CfaColor::Red => 0,
                CfaColor::Green => 1,
                CfaColor::Blue => 2,
            };
            for c in 0..3 {
                if c == own {
                    out[c].set(x, y, cfa.get(x, y));
                    continue;
                }
                window.clear();
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx >= 0 && (nx as usize) < w && ny >= 0 && (ny as usize) < h {
                            let (nx, ny) = (nx as usize, ny as usize);
                            window.push(first[c].get(nx, ny) - first[own].get(nx, ny));
                        }
                    }
                }
                out[c].set(x, y, cfa.get(x, y) + median(&mut window));
            }
        }
    }
    out
}

/// Reconstructs full RGB from Bayer data. Samples may be distorted reals
/// (post-decode); output channels are clamped to `[0, 255]`.
pub fn demosaic(cfa: &BayerImage, method: InterpMethod) -> RgbImage {
    let planes = match method {
        InterpMethod::Bilinear => bilinear_planes(cfa),
        InterpMethod::Hue => {
            let g = channel_bilinear(cfa, CfaColor::Green);
            let r = channel_via_ratios(cfa, &g, CfaColor::Red);
            let b = channel_via_ratios(cfa, &g, CfaColor::Blue);
            [r, g, b]
        }
        InterpMethod::Gradient => {
            let g = green_gradient(cfa);
            let r = channel_via_differences(cfa, &g, CfaColor::Red);
            let b = channel_via_differences(cfa, &g, CfaColor::Blue);
            [r, g, b]
        }
        InterpMethod::Median => median_planes(cfa),
    };
    planes_to_rgb(&planes)
}
