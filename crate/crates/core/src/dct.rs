//! Block-DCT plane coder.
//!
//! A baseline transform coder over 8×8 blocks: level shift by −128, 2-D
//! DCT, scalar quantization with a quality-scaled matrix, zigzag scan, and
//! Huffman-coded (run, size) symbols with differential DC — the classic
//! still-image layout, reimplemented here so it can code *shaped* planes.
//!
//! A plane comes with a validity mask. Blocks fall into three classes:
//!
//! * **data** — fully valid, coded as usual;
//! * **blank** — fully invalid, skipped outright (no bits at all, and the
//!   DC predictor is left untouched);
//! * **boundary** — cut by one of the four diagonal edges produced by the
//!   45° rearrangement. Missing samples are filled by mirroring valid
//!   samples across the cut before the transform, which keeps the block
//!   smooth instead of leaking a synthetic edge into every frequency.
//!
//! Dense planes (all-valid masks) of arbitrary size are handled by edge
//! replication up to the next multiple of 8; shaped planes must already be
//! block-aligned.

mod tables;

use crate::image::{PlaneImage, ShapeMask};
use crate::{Error, Result};
pub use tables::{scaled_quant, QUANT_CHROMA_BASE, QUANT_LUMA_BASE};
use tables::{chroma_tables, luma_tables, zigzag, HuffTable, TableSet, EOB, ZRL};

/// Chroma layout used by the dense (non-mosaic) coding path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsampling {
    /// Full-resolution chroma.
    S444,
    /// Chroma halved horizontally (pair averaging down, replication up).
    S422,
}

/// Settings for the DCT coding path.
#[derive(Debug, Clone, Copy)]
pub struct DctConfig {
    /// Quality in `[1, 100]`; 50 uses the base quantization matrices.
    pub quality: u8,
    /// Chroma layout for dense RGB-origin coding.
    pub subsampling: Subsampling,
}

impl Default for DctConfig {
    fn default() -> Self {
        DctConfig {
            quality: 75,
            subsampling: Subsampling::S422,
        }
    }
}

/// Which fixed table set a plane is coded with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneKind {
    Luma,
    Chroma,
}

impl PlaneKind {
    fn tables(self) -> &'static TableSet {
        match self {
            PlaneKind::Luma => luma_tables(),
            PlaneKind::Chroma => chroma_tables(),
        }
    }

    fn quant_base(self) -> &'static [u16; 64] {
        match self {
            PlaneKind::Luma => &QUANT_LUMA_BASE,
            PlaneKind::Chroma => &QUANT_CHROMA_BASE,
        }
    }
}

// ---------------------------------------------------------------------------
// Bit I/O (most-significant bit first; the final byte is padded with 1s,
// which can never form a valid coded symbol).

struct BitWriter {
    bytes: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            acc: 0,
            nbits: 0,
        }
    }

    fn put_bits(&mut self, code: u32, len: u32) {
        debug_assert!(len <= 16 && (len == 32 || code < (1 << len)));
        self.acc = (self.acc << len) | code;
        self.nbits += len;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.bytes.push((self.acc >> self.nbits) as u8);
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.put_bits((1 << pad) - 1, pad);
        }
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize, // bit position
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn byte_offset(&self) -> usize {
        self.pos / 8
    }

    fn bit(&mut self) -> Result<u32> {
        let byte = self.pos / 8;
        if byte >= self.bytes.len() {
            return Err(Error::stream(byte, "coded data ended mid-block"));
        }
        let b = (self.bytes[byte] >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(b as u32)
    }

    fn bits(&mut self, n: u32) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }
}

fn decode_symbol(r: &mut BitReader, t: &HuffTable) -> Result<u8> {
    let mut code = 0i32;
    for len in 1..=16usize {
        code = (code << 1) | r.bit()? as i32;
        if t.max_code[len] >= 0 && code <= t.max_code[len] {
            return Ok(t.vals[t.val_ptr[len] + (code - t.min_code[len]) as usize]);
        }
    }
    Err(Error::stream(r.byte_offset(), "bit pattern matches no code"))
}

/// Magnitude category: the number of bits needed for `|v|`.
fn category(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

fn put_value_bits(w: &mut BitWriter, v: i32, cat: u32) {
    if cat == 0 {
        return;
    }
    let bits = if v >= 0 { v } else { v - 1 + (1 << cat) } as u32;
    w.put_bits(bits & ((1 << cat) - 1), cat);
}

fn receive_extend(r: &mut BitReader, cat: u32) -> Result<i32> {
    if cat == 0 {
        return Ok(0);
    }
    let raw = r.bits(cat)? as i32;
    Ok(if raw < (1 << (cat - 1)) {
        raw - (1 << cat) + 1
    } else {
        raw
    })
}

// ---------------------------------------------------------------------------
// The 8×8 transform. `BASIS[u][x] = C(u)/2 · cos((2x+1)uπ/16)` is an
// orthonormal matrix, so the inverse is its transpose.

fn basis() -> &'static [[f64; 8]; 8] {
    static B: std::sync::OnceLock<[[f64; 8]; 8]> = std::sync::OnceLock::new();
    B.get_or_init(|| {
        let mut b = [[0.0; 8]; 8];
        for (u, row) in b.iter_mut().enumerate() {
            let c = if u == 0 { (0.5f64).sqrt() } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = 0.5 * c * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        b
    })
}

/// In-place 2-D DCT of a row-major 8×8 block.
fn fdct(block: &mut [f64; 64]) {
    let b = basis();
    let mut tmp = [0.0f64; 64];
    // rows
    for y in 0..8 {
        for u in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                s += b[u][x] * block[y * 8 + x];
            }
            tmp[y * 8 + u] = s;
        }
    }
    // columns
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                s += b[v][y] * tmp[y * 8 + u];
            }
            block[v * 8 + u] = s;
        }
    }
}

/// In-place 2-D inverse DCT of a row-major 8×8 block.
fn idct(block: &mut [f64; 64]) {
    let b = basis();
    let mut tmp = [0.0f64; 64];
    for v in 0..8 {
        for x in 0..8 {
            let mut s = 0.0;
            for u in 0..8 {
                s += b[u][x] * block[v * 8 + u];
            }
            tmp[v * 8 + x] = s;
        }
    }
    for x in 0..8 {
        for y in 0..8 {
            let mut s = 0.0;
            for v in 0..8 {
                s += b[v][y] * tmp[v * 8 + x];
            }
            block[y * 8 + x] = s;
        }
    }
}

// ---------------------------------------------------------------------------
// Block classification and boundary padding.

/// How an 8×8 block sits relative to the plane's valid region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockClass {
    /// No valid samples; the block is skipped entirely.
    Blank,
    /// Cut by a diagonal edge; padded by mirroring before coding.
    Boundary,
    /// Fully valid.
    Data,
}

/// Classifies every 8×8 block of a block-aligned mask, row-major.
pub fn classify_blocks(mask: &ShapeMask) -> Result<Vec<BlockClass>> {
    let (w, h) = (mask.width(), mask.height());
    if w % 8 != 0 || h % 8 != 0 {
        return Err(Error::geometry(format!(
            "mask dimensions must be multiples of 8 for block coding, got {w}×{h}"
        )));
    }
    let mut grid = Vec::with_capacity((w / 8) * (h / 8));
    for by in 0..h / 8 {
        for bx in 0..w / 8 {
            let mut n = 0;
            for y in 0..8 {
                for x in 0..8 {
                    if mask.get(bx * 8 + x, by * 8 + y) {
                        n += 1;
                    }
                }
            }
            grid.push(match n {
                0 => BlockClass::Blank,
                64 => BlockClass::Data,
                _ => BlockClass::Boundary,
            });
        }
    }
    Ok(grid)
}

// The only partial blocks the 45° rearrangement produces (for source sides
// divisible by 16) are cut by one of the two diagonals, on either side.
// Each pattern pairs a validity predicate with the valid cell that a missing
// cell mirrors from.
type CutPattern = (fn(usize, usize) -> bool, fn(usize, usize) -> (usize, usize));

const CUT_PATTERNS: [CutPattern; 4] = [
    // valid below/on the main diagonal; mirror across it
    (|x, y| x >= y, |x, y| (y, x)),
    // valid strictly above the main diagonal; mirror across it, nudged inside
    (|x, y| x < y, |x, y| (y.saturating_sub(1), (x + 1).min(7))),
    // valid below/on the anti-diagonal; mirror across it
    (|x, y| x + y >= 7, |x, y| (7 - y, 7 - x)),
    // valid strictly above the anti-diagonal; mirror across it, nudged inside
    (|x, y| x + y <= 6, |x, y| (6usize.saturating_sub(y), 6usize.saturating_sub(x))),
];

/// Fills the invalid samples of a partial block by mirroring valid ones
/// across the diagonal cut. Fully valid blocks pass through unchanged;
/// validity patterns other than the four diagonal cuts are rejected.
pub fn pad_boundary_block(vals: &mut [f64; 64], valid: &[bool; 64]) -> Result<()> {
    if valid.iter().all(|&v| v) {
        return Ok(());
    }
    for (pattern, source) in CUT_PATTERNS {
        let matches = (0..64).all(|i| valid[i] == pattern(i % 8, i / 8));
        if !matches {
            continue;
        }
        for y in 0..8 {
            for x in 0..8 {
                if !pattern(x, y) {
                    let (sx, sy) = source(x, y);
                    debug_assert!(pattern(sx, sy), "mirror source must be valid");
                    vals[y * 8 + x] = vals[sy * 8 + sx];
                }
            }
        }
        return Ok(());
    }
    Err(Error::geometry(
        "partial block does not match any supported diagonal cut",
    ))
}

// ---------------------------------------------------------------------------
// Plane encode / decode.

/// Edge-replicates a plane up to dimensions `(tw, th)`.
fn replicate_pad(plane: &PlaneImage, tw: usize, th: usize) -> PlaneImage {
    PlaneImage::from_fn(tw, th, |x, y| {
        plane.get(x.min(plane.width() - 1), y.min(plane.height() - 1))
    })
}

struct BlockLayout {
    grid: Vec<BlockClass>,
    bw: usize,
    bh: usize,
    /// Mask at the (possibly padded) coded dimensions.
    mask: ShapeMask,
    /// Original plane dimensions, for cropping after decode.
    orig_w: usize,
    orig_h: usize,
}

/// Works out the coded dimensions and block classes for a plane/mask pair.
/// Dense masks may have any dimensions (the plane is padded to the next
/// block multiple); shaped masks must already be block-aligned.
fn layout(mask: &ShapeMask) -> Result<BlockLayout> {
    let (w, h) = (mask.width(), mask.height());
    let dense = mask.count_valid() == w * h;
    let (cw, ch) = if dense {
        (w.div_ceil(8) * 8, h.div_ceil(8) * 8)
    } else {
        if w % 8 != 0 || h % 8 != 0 {
            return Err(Error::geometry(format!(
                "shaped plane dimensions must be multiples of 8, got {w}×{h}"
            )));
        }
        (w, h)
    };
    let coded_mask = if dense {
        ShapeMask::from_fn(cw, ch, |_, _| true)
    } else {
        mask.clone()
    };
    let grid = classify_blocks(&coded_mask)?;
    Ok(BlockLayout {
        grid,
        bw: cw / 8,
        bh: ch / 8,
        mask: coded_mask,
        orig_w: w,
        orig_h: h,
    })
}

/// Encodes one plane. `skip_blank` controls whether fully invalid blocks
/// cost zero bits (the normal mode) or are coded as empty blocks anyway,
/// which exists to make the cost of skipping observable.
pub fn dct_encode_with(
    plane: &PlaneImage,
    mask: &ShapeMask,
    quality: u8,
    kind: PlaneKind,
    skip_blank: bool,
) -> Result<Vec<u8>> {
    if plane.width() != mask.width() || plane.height() != mask.height() {
        return Err(Error::geometry("plane and mask dimensions differ"));
    }
    if !(1..=100).contains(&quality) {
        return Err(Error::config(format!("quality must be in [1, 100], got {quality}")));
    }
    let lay = layout(mask)?;
    let coded = if (lay.bw * 8, lay.bh * 8) == (plane.width(), plane.height()) {
        plane.clone()
    } else {
        replicate_pad(plane, lay.bw * 8, lay.bh * 8)
    };
    let steps = scaled_quant(kind.quant_base(), quality);
    let tables = kind.tables();
    let zz = zigzag();
    let mut w = BitWriter::new();
    let mut pred = 0i32;
    for (bi, &class) in lay.grid.iter().enumerate() {
        if class == BlockClass::Blank {
            if !skip_blank {
                // an empty block: zero DC difference, no coefficients
                let (c, l) = tables.dc.code(0);
                w.put_bits(c as u32, l as u32);
                let (c, l) = tables.ac.code(EOB);
                w.put_bits(c as u32, l as u32);
            }
            continue;
        }
        let (bx, by) = (bi % lay.bw, bi / lay.bw);
        let mut vals = [0.0f64; 64];
        let mut valid = [false; 64];
        for y in 0..8 {
            for x in 0..8 {
                vals[y * 8 + x] = coded.get(bx * 8 + x, by * 8 + y);
                valid[y * 8 + x] = lay.mask.get(bx * 8 + x, by * 8 + y);
            }
        }
        pad_boundary_block(&mut vals, &valid)?;
        for v in vals.iter_mut() {
            *v -= 128.0;
        }
        fdct(&mut vals);
        let mut q = [0i32; 64];
        for k in 0..64 {
            let raster = zz[k];
            let quantized = (vals[raster] / steps[raster] as f64).round() as i32;
            // Level-shifted in-range samples bound the DC to [-1024, 1016]
            // and every AC to [-1024, 1024]; clamping keeps pathological
            // inputs inside the categories the code tables cover (DC
            // differences ≤ 11, AC magnitudes ≤ 10).
            q[k] = if k == 0 {
                quantized.clamp(-1024, 1016)
            } else {
                quantized.clamp(-1023, 1023)
            };
        }
        let diff = q[0] - pred;
        pred = q[0];
        let cat = category(diff);
        let (c, l) = tables.dc.code(cat as u8);
        w.put_bits(c as u32, l as u32);
        put_value_bits(&mut w, diff, cat);
        let mut run = 0u32;
        for &v in &q[1..] {
            if v == 0 {
                run += 1;
                continue;
            }
            while run >= 16 {
                let (c, l) = tables.ac.code(ZRL);
                w.put_bits(c as u32, l as u32);
                run -= 16;
            }
            let cat = category(v);
            let (c, l) = tables.ac.code(((run as u8) << 4) | cat as u8);
            w.put_bits(c as u32, l as u32);
            put_value_bits(&mut w, v, cat);
            run = 0;
        }
        if run > 0 {
            let (c, l) = tables.ac.code(EOB);
            w.put_bits(c as u32, l as u32);
        }
    }
    Ok(w.finish())
}

/// Encodes one plane with blank-block skipping on.
pub fn dct_encode(plane: &PlaneImage, mask: &ShapeMask, quality: u8, kind: PlaneKind) -> Result<Vec<u8>> {
    dct_encode_with(plane, mask, quality, kind, true)
}

/// Decodes one plane coded by [`dct_encode_with`] with the same mask,
/// quality, kind, and skipping mode. Invalid samples come back as 0.
pub fn dct_decode_with(
    bytes: &[u8],
    mask: &ShapeMask,
    quality: u8,
    kind: PlaneKind,
    skip_blank: bool,
) -> Result<PlaneImage> {
    if !(1..=100).contains(&quality) {
        return Err(Error::config(format!("quality must be in [1, 100], got {quality}")));
    }
    let lay = layout(mask)?;
    let steps = scaled_quant(kind.quant_base(), quality);
    let tables = kind.tables();
    let zz = zigzag();
    let mut r = BitReader::new(bytes);
    let mut out = PlaneImage::new(lay.bw * 8, lay.bh * 8);
    let mut pred = 0i32;
    for (bi, &class) in lay.grid.iter().enumerate() {
        if class == BlockClass::Blank && skip_blank {
            continue;
        }
        let mut q = [0i32; 64];
        // DC
        let cat = decode_symbol(&mut r, &tables.dc)? as u32;
        if cat > 15 {
            return Err(Error::stream(r.byte_offset(), "DC category out of range"));
        }
        let diff = receive_extend(&mut r, cat)?;
        pred += diff;
        q[0] = pred;
        // AC
        let mut k = 1usize;
        while k < 64 {
            let sym = decode_symbol(&mut r, &tables.ac)?;
            if sym == EOB {
                break;
            }
            if sym == ZRL {
                k += 16;
                if k > 64 {
                    return Err(Error::stream(r.byte_offset(), "zero run overflows block"));
                }
                continue;
            }
            let run = (sym >> 4) as usize;
            let cat = (sym & 0xf) as u32;
            k += run;
            if k >= 64 {
                return Err(Error::stream(r.byte_offset(), "coefficient index overflows block"));
            }
            q[k] = receive_extend(&mut r, cat)?;
            k += 1;
        }
        if class == BlockClass::Blank {
            continue; // coded as empty, nothing to place
        }
        let mut vals = [0.0f64; 64];
        for k in 0..64 {
            vals[zz[k]] = q[k] as f64 * steps[zz[k]] as f64;
        }
        idct(&mut vals);
        let (bx, by) = (bi % lay.bw, bi / lay.bw);
        for y in 0..8 {
            for x in 0..8 {
                if lay.mask.get(bx * 8 + x, by * 8 + y) {
                    out.set(bx * 8 + x, by * 8 + y, vals[y * 8 + x] + 128.0);
                }
            }
        }
    }
    if (lay.orig_w, lay.orig_h) == (out.width(), out.height()) {
        Ok(out)
    } else {
        Ok(PlaneImage::from_fn(lay.orig_w, lay.orig_h, |x, y| out.get(x, y)))
    }
}

/// Decodes one plane coded with blank-block skipping on.
pub fn dct_decode(bytes: &[u8], mask: &ShapeMask, quality: u8, kind: PlaneKind) -> Result<PlaneImage> {
    dct_decode_with(bytes, mask, quality, kind, true)
}

// ---------------------------------------------------------------------------
// Horizontal 2:1 chroma resampling for the dense coding path.

/// Halves a plane horizontally by averaging sample pairs.
pub fn downsample_h2(plane: &PlaneImage) -> Result<PlaneImage> {
    if !plane.width().is_multiple_of(2) {
        return Err(Error::geometry("horizontal downsampling needs an even width"));
    }
    Ok(PlaneImage::from_fn(plane.width() / 2, plane.height(), |x, y| {
        0.5 * (plane.get(2 * x, y) + plane.get(2 * x + 1, y))
    }))
}

/// Doubles a plane horizontally by sample replication.
pub fn upsample_h2(plane: &PlaneImage) -> PlaneImage {
    PlaneImage::from_fn(plane.width() * 2, plane.height(), |x, y| plane.get(x / 2, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotation_mask;

    fn full_mask(w: usize, h: usize) -> ShapeMask {
        ShapeMask::from_fn(w, h, |_, _| true)
    }

    fn plane_mse(a: &PlaneImage, b: &PlaneImage, mask: &ShapeMask) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in 0..a.height() {
            for x in 0..a.width() {
                if mask.get(x, y) {
                    sum += (a.get(x, y) - b.get(x, y)).powi(2);
                    n += 1;
                }
            }
        }
        sum / n as f64
    }

    /// A textured but compressible test plane.
    fn textured(w: usize, h: usize) -> PlaneImage {
        PlaneImage::from_fn(w, h, |x, y| {
            let s = 128.0
                + 60.0 * ((x as f64) * 0.11).sin() * ((y as f64) * 0.07).cos()
                + 25.0 * ((x as f64 + 2.0 * y as f64) * 0.31).sin();
            s.clamp(0.0, 255.0)
        })
    }

    #[test]
    fn transform_pair_inverts_and_concentrates_constants() {
        let mut block = [0.0f64; 64];
        for (i, v) in block.iter_mut().enumerate() {
            *v = ((i * 37 + 11) % 256) as f64 - 128.0;
        }
        let orig = block;
        fdct(&mut block);
        idct(&mut block);
        for (a, b) in block.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-9);
        }

        let mut c = [72.0f64; 64];
        fdct(&mut c);
        assert!((c[0] - 576.0).abs() < 1e-9, "DC of a constant block is 8× its level");
        for &v in &c[1..] {
            assert!(v.abs() < 1e-9);
        }
    }

    /// The coded result of a single block must agree with a direct
    /// evaluation of the textbook transform + quantizer, written out
    /// independently of the codec internals.
    #[test]
    fn single_block_matches_direct_evaluation() {
        let w = 8;
        let plane = PlaneImage::from_fn(w, w, |x, y| {
            (128.0 + 40.0 * ((x * x + 3 * y) as f64 * 0.1).sin()).clamp(0.0, 255.0)
        });
        let quality = 75;

        // direct: F(u,v) = 1/4 C(u) C(v) ΣΣ f(x,y) cos((2x+1)uπ/16) cos((2y+1)vπ/16)
        let mut expect = [0.0f64; 64];
        let steps = scaled_quant(&QUANT_LUMA_BASE, quality);
        let mut coefs = [0.0f64; 64];
        for u in 0..8 {
            for v in 0..8 {
                let cu = if u == 0 { (0.5f64).sqrt() } else { 1.0 };
                let cv = if v == 0 { (0.5f64).sqrt() } else { 1.0 };
                let mut s = 0.0;
                for x in 0..8 {
                    for y in 0..8 {
                        s += (plane.get(x, y) - 128.0)
                            * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()
                            * ((2 * y + 1) as f64 * v as f64 * std::f64::consts::PI / 16.0).cos();
                    }
                }
                coefs[v * 8 + u] = 0.25 * cu * cv * s;
            }
        }
        for i in 0..64 {
            let q = (coefs[i] / steps[i] as f64).round();
            coefs[i] = q * steps[i] as f64;
        }
        for x in 0..8 {
            for y in 0..8 {
                let mut s = 0.0;
                for u in 0..8 {
                    for v in 0..8 {
                        let cu = if u == 0 { (0.5f64).sqrt() } else { 1.0 };
                        let cv = if v == 0 { (0.5f64).sqrt() } else { 1.0 };
                        s += 0.25
                            * cu
                            * cv
                            * coefs[v * 8 + u]
                            * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()
                            * ((2 * y + 1) as f64 * v as f64 * std::f64::consts::PI / 16.0).cos();
                    }
                }
                expect[y * 8 + x] = s + 128.0;
            }
        }

        let mask = full_mask(w, w);
        let bytes = dct_encode(&plane, &mask, quality, PlaneKind::Luma).unwrap();
        let out = dct_decode(&bytes, &mask, quality, PlaneKind::Luma).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert!((out.get(x, y) - expect[y * 8 + x]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn uniform_plane_codes_to_six_bits_per_block_and_reconstructs_exactly() {
        let plane = PlaneImage::from_fn(16, 16, |_, _| 200.0);
        let mask = full_mask(16, 16);
        // 4 blocks: first DC diff is nonzero, rest are zero-diff + EOB.
        let bytes = dct_encode(&plane, &mask, 50, PlaneKind::Luma).unwrap();
        let out = dct_decode(&bytes, &mask, 50, PlaneKind::Luma).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                assert!((out.get(x, y) - 200.0).abs() < 1e-9);
            }
        }
        // per-block cost for an already-predicted uniform block is 6 bits
        // (2-bit zero DC category + 4-bit end-of-block)
        let uniform128 = PlaneImage::from_fn(16, 16, |_, _| 128.0);
        let bytes = dct_encode(&uniform128, &mask, 50, PlaneKind::Luma).unwrap();
        assert_eq!(bytes.len(), 3, "4 blocks × 6 bits = 24 bits = 3 bytes");
    }

    #[test]
    fn skipping_a_blank_block_saves_exactly_six_bits() {
        // left block valid and flat, right block fully invalid
        let plane = PlaneImage::from_fn(16, 8, |_, _| 128.0);
        let mask = ShapeMask::from_fn(16, 8, |x, _| x < 8);
        let skipped = dct_encode_with(&plane, &mask, 50, PlaneKind::Luma, true).unwrap();
        let coded = dct_encode_with(&plane, &mask, 50, PlaneKind::Luma, false).unwrap();
        assert_eq!(skipped.len(), 1, "6 bits");
        assert_eq!(coded.len(), 2, "12 bits");
        for blank_mode in [true, false] {
            let src = if blank_mode { &skipped } else { &coded };
            let out = dct_decode_with(src, &mask, 50, PlaneKind::Luma, blank_mode).unwrap();
            for y in 0..8 {
                for x in 0..16 {
                    let want = if x < 8 { 128.0 } else { 0.0 };
                    assert!((out.get(x, y) - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rotated_layout_counts_blocks_and_blank_savings() {
        let mask = rotation_mask(512, 512).unwrap();
        let grid = classify_blocks(&mask).unwrap();
        assert_eq!(grid.len(), 4096);
        let blank = grid.iter().filter(|&&c| c == BlockClass::Blank).count();
        let boundary = grid.iter().filter(|&&c| c == BlockClass::Boundary).count();
        let data = grid.iter().filter(|&&c| c == BlockClass::Data).count();
        assert_eq!((blank, boundary, data), (1984, 128, 1984));
        // coded blocks vs the dense half-size rearrangement of the same data
        let coded = 4096 - blank;
        assert_eq!(coded, 512 * 512 / 128 + (512 + 512) / 16);

        // skipping blank blocks saves exactly 6 bits each: 1984 × 6 = 11904
        // bits = 1488 bytes
        let plane = PlaneImage::from_fn(512, 512, |x, y| {
            if mask.get(x, y) {
                (128.0 + 50.0 * ((x as f64) * 0.05).sin() * ((y as f64) * 0.03).cos()).clamp(0.0, 255.0)
            } else {
                0.0
            }
        });
        let skipped = dct_encode_with(&plane, &mask, 50, PlaneKind::Luma, true).unwrap();
        let coded = dct_encode_with(&plane, &mask, 50, PlaneKind::Luma, false).unwrap();
        assert_eq!(coded.len() - skipped.len(), 1488);
    }

    #[test]
    fn boundary_padding_mirrors_across_each_cut() {
        // fully valid block is untouched
        let mut vals: [f64; 64] = std::array::from_fn(|i| i as f64);
        let orig = vals;
        pad_boundary_block(&mut vals, &[true; 64]).unwrap();
        assert_eq!(vals, orig);

        for (pattern, _) in CUT_PATTERNS {
            // a constant valid region must pad to a constant block
            let valid: [bool; 64] = std::array::from_fn(|i| pattern(i % 8, i / 8));
            let mut vals = [0.0f64; 64];
            for (i, v) in vals.iter_mut().enumerate() {
                if valid[i] {
                    *v = 42.0;
                }
            }
            pad_boundary_block(&mut vals, &valid).unwrap();
            assert!(vals.iter().all(|&v| v == 42.0));
        }

        // main-diagonal cut with a ramp: the fill is the transpose
        let valid: [bool; 64] = std::array::from_fn(|i| i % 8 >= i / 8);
        let mut vals = [0.0f64; 64];
        for y in 0..8 {
            for x in 0..8 {
                if x >= y {
                    vals[y * 8 + x] = (x + 10 * y) as f64;
                }
            }
        }
        pad_boundary_block(&mut vals, &valid).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                if x < y {
                    assert_eq!(vals[y * 8 + x], (y + 10 * x) as f64);
                }
            }
        }

        // a hole in the middle matches no cut
        let mut valid = [true; 64];
        valid[27] = false;
        let mut vals = [0.0f64; 64];
        assert!(pad_boundary_block(&mut vals, &valid).is_err());
    }

    #[test]
    fn shaped_roundtrip_on_a_rotated_plane() {
        let mask = rotation_mask(32, 32).unwrap();
        let plane = PlaneImage::from_fn(32, 32, |x, y| {
            if mask.get(x, y) {
                (120.0 + 30.0 * ((x + y) as f64 * 0.2).sin()).clamp(0.0, 255.0)
            } else {
                0.0
            }
        });
        let bytes = dct_encode(&plane, &mask, 95, PlaneKind::Luma).unwrap();
        let out = dct_decode(&bytes, &mask, 95, PlaneKind::Luma).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                if mask.get(x, y) {
                    assert!((out.get(x, y) - plane.get(x, y)).abs() < 10.0);
                } else {
                    assert_eq!(out.get(x, y), 0.0, "invalid samples stay zero");
                }
            }
        }
        assert!(plane_mse(&plane, &out, &mask) < 4.0);
    }

    #[test]
    fn high_quality_coding_is_nearly_transparent() {
        let plane = textured(64, 64);
        let mask = full_mask(64, 64);
        let bytes = dct_encode(&plane, &mask, 100, PlaneKind::Luma).unwrap();
        let out = dct_decode(&bytes, &mask, 100, PlaneKind::Luma).unwrap();
        let mse = plane_mse(&plane, &out, &mask);
        let psnr = 10.0 * (255.0f64 * 255.0 / mse).log10();
        assert!(psnr >= 50.0, "q=100 PSNR was {psnr:.2} dB");
    }

    #[test]
    fn rate_grows_with_quality() {
        let plane = textured(64, 64);
        let mask = full_mask(64, 64);
        let sizes: Vec<usize> = [30u8, 50, 70, 90]
            .iter()
            .map(|&q| dct_encode(&plane, &mask, q, PlaneKind::Luma).unwrap().len())
            .collect();
        for pair in sizes.windows(2) {
            assert!(pair[0] <= pair[1], "rate must not drop as quality rises: {sizes:?}");
        }
    }

    #[test]
    fn chroma_tables_roundtrip_and_dense_padding_crops_back() {
        // 20×12 forces replication padding to 24×16
        let plane = PlaneImage::from_fn(20, 12, |x, y| (10.0 + 10.0 * (x % 3) as f64 + 5.0 * (y % 2) as f64).min(255.0));
        let mask = full_mask(20, 12);
        let bytes = dct_encode(&plane, &mask, 90, PlaneKind::Chroma).unwrap();
        let out = dct_decode(&bytes, &mask, 90, PlaneKind::Chroma).unwrap();
        assert_eq!((out.width(), out.height()), (20, 12));
        assert!(plane_mse(&plane, &out, &mask) < 30.0);
    }

    #[test]
    fn determinism_and_truncation_error() {
        let plane = textured(32, 32);
        let mask = full_mask(32, 32);
        let a = dct_encode(&plane, &mask, 60, PlaneKind::Luma).unwrap();
        let b = dct_encode(&plane, &mask, 60, PlaneKind::Luma).unwrap();
        assert_eq!(a, b);
        let err = dct_decode(&a[..a.len() / 2], &mask, 60, PlaneKind::Luma).unwrap_err();
        assert!(matches!(err, Error::Stream { .. }));
    }

    #[test]
    fn resampling_halves_and_replicates() {
        let plane = PlaneImage::from_fn(8, 2, |x, _| (10 * (x + 1)) as f64);
        let down = downsample_h2(&plane).unwrap();
        assert_eq!((down.width(), down.height()), (4, 2));
        assert_eq!(down.get(0, 0), 15.0);
        assert_eq!(down.get(1, 0), 35.0);
        let up = upsample_h2(&down);
        assert_eq!((up.width(), up.height()), (8, 2));
        assert_eq!(up.get(0, 0), 15.0);
        assert_eq!(up.get(1, 0), 15.0);
        assert_eq!(up.get(2, 0), 35.0);

        let odd = PlaneImage::new(7, 2);
        assert!(downsample_h2(&odd).is_err());

        // constant chroma survives the down/up pair exactly
        let flat = PlaneImage::from_fn(16, 4, |_, _| 77.0);
        let cycled = upsample_h2(&downsample_h2(&flat).unwrap());
        for y in 0..4 {
            for x in 0..16 {
                assert_eq!(cycled.get(x, y), 77.0);
            }
        }
    }

    #[test]
    fn rejects_bad_quality_and_misaligned_shapes() {
        let plane = PlaneImage::new(16, 16);
        let mask = full_mask(16, 16);
        assert!(dct_encode(&plane, &mask, 0, PlaneKind::Luma).is_err());
        assert!(dct_encode(&plane, &mask, 101, PlaneKind::Luma).is_err());

        // a shaped mask with non-multiple-of-8 dimensions is rejected
        let shaped = ShapeMask::from_fn(12, 12, |x, y| x >= y);
        let p = PlaneImage::new(12, 12);
        assert!(dct_encode(&p, &shaped, 50, PlaneKind::Luma).is_err());
    }
}
