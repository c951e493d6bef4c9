//! Embedded bit-plane coding of wavelet pyramids by set partitioning
//! (Said–Pearlman style), with shape awareness and byte-budget control.
//!
//! Coefficient magnitudes are rounded to integers and emitted most
//! significant bit plane first: each pass sorts newly significant
//! coefficients and set entries, then refines previously significant ones.
//! The stream is embedded — any prefix decodes to a valid approximation,
//! and a complete stream reconstructs the integer magnitudes exactly.
//!
//! Shape awareness: coefficients outside the validity mask never enter any
//! list and never cost a bit; set entries are created only when their
//! descendant sets contain at least one valid coefficient. Trees rooted in
//! fully blank regions are therefore never visited, and a decoder — which
//! derives the same masks from the image dimensions — reconstructs exact
//! zeros there.
//!
//! Payload layout: an 8-byte header (decomposition levels, filter id,
//! top bit plane, reserved byte, exact payload bit count as a little-endian
//! u32), then the bit stream padded with zeros to a byte boundary.

use crate::image::ShapeMask;
use crate::wavelet::CoeffPyramid;
use crate::{Error, Result};

/// Bytes of bookkeeping at the front of every coded plane.
pub const HEADER_BYTES: usize = 8;

const FILTER_ID: u8 = 0; // 9/7 lifting
const NMAX_EMPTY: u8 = 0xFF; // nothing significant anywhere

// ---------------------------------------------------------------------------
// Bit transport
// ---------------------------------------------------------------------------

struct BitWriter {
    bytes: Vec<u8>,
    bit_count: u64,
    budget_bits: u64,
}

impl BitWriter {
    fn new(budget_bits: u64) -> Self {
        BitWriter {
            bytes: Vec::new(),
            bit_count: 0,
            budget_bits,
        }
    }

    /// Appends one bit, MSB first; `None` once the budget is exhausted.
    fn put(&mut self, bit: bool) -> Option<()> {
        if self.bit_count >= self.budget_bits {
            return None;
        }
        let slot = (self.bit_count % 8) as u8;
        if slot == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> slot;
        }
        self.bit_count += 1;
        Some(())
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8], limit_bits: u64) -> Self {
        let available = bytes.len() as u64 * 8;
        BitReader {
            bytes,
            pos: 0,
            limit: limit_bits.min(available),
        }
    }

    fn get(&mut self) -> Option<bool> {
        if self.pos >= self.limit {
            return None;
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Some(bit)
    }
}

// ---------------------------------------------------------------------------
// Tree structure over the pyramid layout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SetType {
    /// All descendants.
    A,
    /// Descendants excluding direct children.
    B,
}

struct TreeGeom {
    w: usize,
    h: usize,
    /// Approximation-band dimensions.
    rw: usize,
    rh: usize,
}

impl TreeGeom {
    fn new(w: usize, h: usize, levels: usize) -> Result<Self> {
        if levels == 0 || levels > 31 {
            return Err(Error::config("invalid level count"));
        }
        let div = 1usize << levels;
        if w == 0 || h == 0 || !w.is_multiple_of(div) || !h.is_multiple_of(div) {
            return Err(Error::config(format!(
                "plane {w}×{h} incompatible with {levels} levels"
            )));
        }
        let (rw, rh) = (w >> levels, h >> levels);
        if rw < 2 || rh < 2 || rw % 2 != 0 || rh % 2 != 0 {
            return Err(Error::config(format!(
                "approximation band {rw}×{rh} too small for 2×2 tree roots (dimensions must be divisible by {})",
                div * 2
            )));
        }
        Ok(TreeGeom { w, h, rw, rh })
    }

    #[inline]
    fn idx(&self, x: usize, y: usize) -> usize {
        y * self.w + x
    }

    /// Offspring coordinates: approximation-band cells map into the three
    /// coarsest detail bands by group position; detail cells double their
    /// coordinates; finest-band cells are leaves.
    fn children(&self, x: usize, y: usize) -> Option<[(usize, usize); 4]> {
        if x < self.rw && y < self.rh {
            let (dx, dy) = (x % 2, y % 2);
            if dx == 0 && dy == 0 {
                return None;
            }
            let (gx, gy) = (x - dx, y - dy);
            let (ox, oy) = (dx * self.rw + gx, dy * self.rh + gy);
            return Some([(ox, oy), (ox + 1, oy), (ox, oy + 1), (ox + 1, oy + 1)]);
        }
        if x >= self.w / 2 || y >= self.h / 2 {
            return None;
        }
        Some([
            (2 * x, 2 * y),
            (2 * x + 1, 2 * y),
            (2 * x, 2 * y + 1),
            (2 * x + 1, 2 * y + 1),
        ])
    }
}

/// Mask-derived facts both encoder and decoder can compute, plus the
/// encoder-only magnitude maxima (zeroed on the decoder side, unused there).
struct Structure {
    geom: TreeGeom,
    valid: Vec<bool>,
    /// Any valid coefficient among the descendants?
    has_desc: Vec<bool>,
    /// Any valid coefficient below the direct children?
    has_grand: Vec<bool>,
    /// Max magnitude over valid descendants.
    desc_max: Vec<u32>,
    /// Max magnitude over valid descendants excluding direct children.
    grand_max: Vec<u32>,
}

impl Structure {
    fn build(mask: &ShapeMask, levels: usize, mags: Option<&[u32]>) -> Result<Self> {
        let geom = TreeGeom::new(mask.width(), mask.height(), levels)?;
        let n = geom.w * geom.h;
        let valid: Vec<bool> = (0..n).map(|i| mask.get(i % geom.w, i / geom.w)).collect();
        let mut s = Structure {
            geom,
            valid,
            has_desc: vec![false; n],
            has_grand: vec![false; n],
            desc_max: vec![0; n],
            grand_max: vec![0; n],
        };
        let mag_of = |s: &Structure, i: usize| -> u32 {
            if s.valid[i] {
                mags.map_or(0, |m| m[i])
            } else {
                0
            }
        };
        // Post-order: returns (max magnitude in subtree incl. self,
        // any valid cell in subtree incl. self).
        fn visit(s: &mut Structure, x: usize, y: usize, mag_of: &dyn Fn(&Structure, usize) -> u32) -> (u32, bool) {
            let i = s.geom.idx(x, y);
            if let Some(children) = s.geom.children(x, y) {
                let mut dmax = 0u32;
                let mut gmax = 0u32;
                let mut any = false;
                let mut any_grand = false;
                for (cx, cy) in children {
                    let (cmax, cany) = visit(s, cx, cy, mag_of);
                    let ci = s.geom.idx(cx, cy);
                    dmax = dmax.max(cmax);
                    gmax = gmax.max(s.desc_max[ci]);
                    any |= cany;
                    any_grand |= s.has_desc[ci];
                }
                s.desc_max[i] = dmax;
                s.grand_max[i] = gmax;
                s.has_desc[i] = any;
                s.has_grand[i] = any_grand;
            }
            (
                s.desc_max[i].max(mag_of(s, i)),
                s.has_desc[i] || s.valid[i],
            )
        }
        for y in 0..s.geom.rh {
            for x in 0..s.geom.rw {
                visit(&mut s, x, y, &mag_of);
            }
        }
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// The shared pass schedule
// ---------------------------------------------------------------------------

/// Either writes bits it computes from the true magnitudes (encoder) or
/// reads them and updates a reconstruction (decoder). The list logic is
/// driven purely by the transported bits, which keeps both sides in step.
trait Transport {
    fn coeff_sig(&mut self, idx: usize, n: u8) -> Option<bool>;
    fn sign_neg(&mut self, idx: usize, n: u8) -> Option<bool>;
    fn set_sig(&mut self, idx: usize, ty: SetType, n: u8) -> Option<bool>;
    fn refine(&mut self, idx: usize, n: u8) -> Option<()>;
}

struct Encoder<'a> {
    mag: &'a [u32],
    neg: &'a [bool],
    desc_max: &'a [u32],
    grand_max: &'a [u32],
    out: BitWriter,
}

impl Transport for Encoder<'_> {
    fn coeff_sig(&mut self, idx: usize, n: u8) -> Option<bool> {
        let bit = self.mag[idx] >= (1 << n);
        self.out.put(bit)?;
        Some(bit)
    }

    fn sign_neg(&mut self, idx: usize, _n: u8) -> Option<bool> {
        self.out.put(self.neg[idx])?;
        Some(self.neg[idx])
    }

    fn set_sig(&mut self, idx: usize, ty: SetType, n: u8) -> Option<bool> {
        let max = match ty {
            SetType::A => self.desc_max[idx],
            SetType::B => self.grand_max[idx],
        };
        let bit = max >= (1 << n);
        self.out.put(bit)?;
        Some(bit)
    }

    fn refine(&mut self, idx: usize, n: u8) -> Option<()> {
        self.out.put(self.mag[idx] & (1 << n) != 0)
    }
}

struct Decoder<'a> {
    input: BitReader<'a>,
    mag: Vec<u32>,
    neg: Vec<bool>,
    /// Lowest bit plane whose bit is known, per significant coefficient.
    low_known: Vec<u8>,
}

impl Transport for Decoder<'_> {
    fn coeff_sig(&mut self, _idx: usize, _n: u8) -> Option<bool> {
        self.input.get()
    }

    fn sign_neg(&mut self, idx: usize, n: u8) -> Option<bool> {
        let bit = self.input.get()?;
        self.neg[idx] = bit;
        self.mag[idx] = 1 << n;
        self.low_known[idx] = n;
        Some(bit)
    }

    fn set_sig(&mut self, _idx: usize, _ty: SetType, _n: u8) -> Option<bool> {
        self.input.get()
    }

    fn refine(&mut self, idx: usize, n: u8) -> Option<()> {
        let bit = self.input.get()?;
        if bit {
            self.mag[idx] |= 1 << n;
        }
        self.low_known[idx] = n;
        Some(())
    }
}

struct LisEntry {
    x: usize,
    y: usize,
    ty: SetType,
    dead: bool,
}

/// Runs the full pass schedule; stops early (returning `None`) when the
/// transport runs out of budget or stream — a legal truncation point.
fn run<T: Transport>(s: &Structure, n_max: u8, t: &mut T) -> Option<()> {
    let g = &s.geom;
    let mut lip: Vec<usize> = Vec::new();
    let mut lis: Vec<LisEntry> = Vec::new();
    let mut lsp: Vec<usize> = Vec::new();
    for y in 0..g.rh {
        for x in 0..g.rw {
            let i = g.idx(x, y);
            if s.valid[i] {
                lip.push(i);
            }
            if (x % 2, y % 2) != (0, 0) && s.has_desc[i] {
                lis.push(LisEntry {
                    x,
                    y,
                    ty: SetType::A,
                    dead: false,
                });
            }
        }
    }

    for n in (0..=n_max).rev() {
        let lsp_old = lsp.len();

        // Sorting: coefficients that were insignificant so far.
        let mut kept = Vec::with_capacity(lip.len());
        for &i in &lip {
            if t.coeff_sig(i, n)? {
                t.sign_neg(i, n)?;
                lsp.push(i);
            } else {
                kept.push(i);
            }
        }
        lip = kept;

        // Sorting: sets, including ones spawned during this pass.
        let mut e = 0;
        while e < lis.len() {
            let (x, y, ty) = (lis[e].x, lis[e].y, lis[e].ty);
            let i = g.idx(x, y);
            match ty {
                SetType::A => {
                    if t.set_sig(i, SetType::A, n)? {
                        for (cx, cy) in g.children(x, y).expect("type-A entries have children") {
                            let ci = g.idx(cx, cy);
                            if !s.valid[ci] {
                                continue;
                            }
                            if t.coeff_sig(ci, n)? {
                                t.sign_neg(ci, n)?;
                                lsp.push(ci);
                            } else {
                                lip.push(ci);
                            }
                        }
                        if s.has_grand[i] {
                            lis.push(LisEntry {
                                x,
                                y,
                                ty: SetType::B,
                                dead: false,
                            });
                        }
                        lis[e].dead = true;
                    }
                }
                SetType::B => {
                    if t.set_sig(i, SetType::B, n)? {
                        for (cx, cy) in g.children(x, y).expect("type-B entries have children") {
                            let ci = g.idx(cx, cy);
                            if s.has_desc[ci] {
                                lis.push(LisEntry {
                                    x: cx,
                                    y: cy,
                                    ty: SetType::A,
                                    dead: false,
                                });
                            }
                        }
                        lis[e].dead = true;
                    }
                }
            }
            e += 1;
        }
        lis.retain(|e| !e.dead);

        // Refinement: coefficients significant before this pass.
        for &i in &lsp[..lsp_old] {
            t.refine(i, n)?;
        }
        if n == 0 {
            break;
        }
    }
    Some(())
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Encodes a pyramid into at most `budget_bytes` bytes (header included).
/// The stream is embedded: decoding any prefix yields an approximation, and
/// an undisturbed complete stream reconstructs every rounded magnitude
/// exactly.
pub fn spiht_encode(pyr: &CoeffPyramid, budget_bytes: usize) -> Result<Vec<u8>> {
    if budget_bytes < HEADER_BYTES {
        return Err(Error::config(format!(
            "byte budget {budget_bytes} below the {HEADER_BYTES}-byte header"
        )));
    }
    let n = pyr.width() * pyr.height();
    let mut mag = vec![0u32; n];
    let mut neg = vec![false; n];
    for (i, &v) in pyr.data.samples().iter().enumerate() {
        mag[i] = v.abs().round() as u32;
        neg[i] = v < 0.0;
    }
    let s = Structure::build(&pyr.mask, pyr.levels, Some(&mag))?;
    let max_mag = (0..n).map(|i| if s.valid[i] { mag[i] } else { 0 }).max().unwrap_or(0);

    let mut header = vec![
        pyr.levels as u8,
        FILTER_ID,
        NMAX_EMPTY,
        0u8,
    ];
    if max_mag == 0 {
        header.extend_from_slice(&0u32.to_le_bytes());
        return Ok(header);
    }
    let n_max = (31 - max_mag.leading_zeros()) as u8;
    header[2] = n_max;

    let budget_bits = ((budget_bytes - HEADER_BYTES) as u64) * 8;
    let mut enc = Encoder {
        mag: &mag,
        neg: &neg,
        desc_max: &s.desc_max,
        grand_max: &s.grand_max,
        out: BitWriter::new(budget_bits),
    };
    let _ = run(&s, n_max, &mut enc); // early stop simply truncates
    header.extend_from_slice(&(enc.out.bit_count as u32).to_le_bytes());
    header.extend_from_slice(&enc.out.bytes);
    Ok(header)
}

/// Decodes a stream against the band-domain validity mask the encoder used
/// (rebuildable from the image dimensions via `wavelet::transform_mask`).
/// Truncated payloads decode to best-effort approximations.
pub fn spiht_decode(bytes: &[u8], band_mask: &ShapeMask) -> Result<CoeffPyramid> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::stream(bytes.len(), "truncated header"));
    }
    let levels = bytes[0] as usize;
    if bytes[1] != FILTER_ID {
        return Err(Error::stream(1, format!("unknown filter id {}", bytes[1])));
    }
    let n_max = bytes[2];
    let bit_count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as u64;
    let n = band_mask.width() * band_mask.height();

    let mut data = crate::image::PlaneImage::new(band_mask.width(), band_mask.height());
    let pyr_mask = band_mask.clone();
    if n_max == NMAX_EMPTY {
        // Nothing was significant; geometry must still be coherent.
        TreeGeom::new(band_mask.width(), band_mask.height(), levels)?;
        return Ok(CoeffPyramid {
            data,
            mask: pyr_mask,
            levels,
        });
    }
    if n_max > 31 {
        return Err(Error::stream(2, format!("invalid top bit plane {n_max}")));
    }
    let s = Structure::build(band_mask, levels, None)?;
    let mut dec = Decoder {
        input: BitReader::new(&bytes[HEADER_BYTES..], bit_count),
        mag: vec![0u32; n],
        neg: vec![false; n],
        low_known: vec![0u8; n],
    };
    let _ = run(&s, n_max, &mut dec); // stream exhaustion is a valid stop

    for i in 0..n {
        if dec.mag[i] == 0 {
            continue;
        }
        // Midpoint of the still-unresolved interval; exact when every
        // plane was received.
        let correction = if dec.low_known[i] > 0 {
            (1u64 << (dec.low_known[i] - 1)) as f64
        } else {
            0.0
        };
        let v = dec.mag[i] as f64 + correction;
        data.samples_mut()[i] = if dec.neg[i] { -v } else { v };
    }
    Ok(CoeffPyramid {
        data,
        mask: pyr_mask,
        levels,
    })
}

/// Splits a total byte budget across Y, Cb, Cr. The default fraction 2/3
/// gives each chroma plane a quarter of the luma budget; every plane is
/// floored at the header size.
pub fn allocate_rates(total: usize, y_frac: f64) -> Result<(usize, usize, usize)> {
    if !(0.0..1.0).contains(&y_frac) || y_frac == 0.0 {
        return Err(Error::config(format!(
            "luma budget fraction must be in (0,1), got {y_frac}"
        )));
    }
    if total < 3 * HEADER_BYTES {
        return Err(Error::config(format!(
            "total budget {total} cannot fit three {HEADER_BYTES}-byte headers"
        )));
    }
    let y = ((total as f64 * y_frac).round() as usize)
        .clamp(HEADER_BYTES, total - 2 * HEADER_BYTES);
    let rest = total - y;
    let cb = rest / 2;
    let cr = rest - cb;
    Ok((y, cb, cr))
}

/// The default luma share: chroma planes get a quarter of the luma bytes
/// each, i.e. luma takes two thirds of the total.
pub const DEFAULT_Y_FRACTION: f64 = 2.0 / 3.0;
