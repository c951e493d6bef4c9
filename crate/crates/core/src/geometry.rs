//! Rearrangements that turn the quincunx luma lattice into dense planes a
//! rectangular coder can handle.
//!
//! * **Shift** — every luma row is packed left, halving the width. Cheap,
//!   but diagonal structure in the image turns into jagged artifacts in the
//!   packed plane.
//! * **Rotation** — the lattice is rotated 45°, which preserves sample
//!   adjacency. The result is a diamond-shaped region inside a square
//!   bounding box of side `(w+h)/2`, tracked by a validity mask. The mask is
//!   a pure function of the image dimensions, so a decoder can rebuild it
//!   from the header alone.
//!
//! Internally rows grow downward; the coordinate maps are expressed in a
//! bottom-up frame (flip `y ↦ h−1−y`), under which green samples sit at odd
//! `x+y` parity and the classic rotation formulas apply unchanged.

use crate::image::{PlaneImage, QuincunxPlane, ShapeMask};
use crate::{Error, Result};

/// Quincunx luma packed into a dense `w/2 × h` plane.
#[derive(Debug, Clone)]
pub struct ShiftedPlane {
    pub plane: PlaneImage,
    orig_w: usize,
    orig_h: usize,
}

impl ShiftedPlane {
    pub fn from_parts(plane: PlaneImage, orig_w: usize, orig_h: usize) -> Result<Self> {
        if !orig_w.is_multiple_of(2) || !orig_h.is_multiple_of(2) || orig_w == 0 || orig_h == 0 {
            return Err(Error::geometry(format!(
                "shifted plane needs even source dimensions, got {orig_w}×{orig_h}"
            )));
        }
        if plane.width() != orig_w / 2 || plane.height() != orig_h {
            return Err(Error::geometry(format!(
                "shifted plane is {}×{}, expected {}×{} for a {orig_w}×{orig_h} source",
                plane.width(),
                plane.height(),
                orig_w / 2,
                orig_h
            )));
        }
        Ok(ShiftedPlane { plane, orig_w, orig_h })
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.orig_w, self.orig_h)
    }
}

/// Packs every row's luma samples to the left. Even rows hold greens at even
/// columns, odd rows at odd columns; either way sample `k` of a row lands at
/// column `k`.
pub fn shift_forward(y: &QuincunxPlane) -> ShiftedPlane {
    let (w, h) = (y.width(), y.height());
    let mut plane = PlaneImage::new(w / 2, h);
    for row in 0..h {
        for k in 0..w / 2 {
            let col = 2 * k + row % 2;
            plane.set(k, row, y.get(col, row));
        }
    }
    ShiftedPlane {
        plane,
        orig_w: w,
        orig_h: h,
    }
}

/// Exact inverse of [`shift_forward`].
pub fn shift_inverse(sp: &ShiftedPlane) -> Result<QuincunxPlane> {
    let (w, h) = sp.source_dims();
    let mut y = QuincunxPlane::new(w, h)?;
    for row in 0..h {
        for k in 0..w / 2 {
            y.set(2 * k + row % 2, row, sp.plane.get(k, row));
        }
    }
    Ok(y)
}

/// Side of the square bounding box of the rotated lattice.
pub fn rotation_side(w: usize, h: usize) -> usize {
    (w + h) / 2
}

/// Forward rotation map in the bottom-up frame: green `(x, y)` with `x+y`
/// odd goes to `(X, Y)`.
#[inline]
fn rotate_map(x: usize, y: usize, w: usize) -> (usize, usize) {
    debug_assert_eq!((x + y) % 2, 1);
    ((x + y - 1) / 2, (w - 1 + y - x) / 2)
}

/// Inverse map: rotated `(X, Y)` comes from source `(x, y)`, which may fall
/// outside the image (that cell is then invalid).
#[inline]
fn rotate_unmap(xx: isize, yy: isize, w: isize) -> (isize, isize) {
    (xx - yy + w / 2, xx + yy + 1 - w / 2)
}

/// Validity mask of the rotated lattice for a `w × h` source, built from the
/// dimensions alone.
pub fn rotation_mask(w: usize, h: usize) -> Result<ShapeMask> {
    if !w.is_multiple_of(2) || !h.is_multiple_of(2) || w == 0 || h == 0 {
        return Err(Error::geometry(format!(
            "rotation needs even dimensions, got {w}×{h}"
        )));
    }
    let s = rotation_side(w, h);
    let (wi, hi) = (w as isize, h as isize);
    let mut mask = ShapeMask::new_invalid(s, s);
    for row in 0..s {
        let yy = (s - 1 - row) as isize; // back to bottom-up
        for xx in 0..s as isize {
            let (x, y) = rotate_unmap(xx, yy, wi);
            if x >= 0 && x < wi && y >= 0 && y < hi {
                mask.set(xx as usize, row, true);
            }
        }
    }
    Ok(mask)
}

/// Quincunx luma rotated 45° into a diamond inside an `S × S` box.
#[derive(Debug, Clone)]
pub struct RotatedPlane {
    pub plane: PlaneImage,
    pub mask: ShapeMask,
    orig_w: usize,
    orig_h: usize,
}

impl RotatedPlane {
    /// Reassembles a rotated plane on the decoder side, where only the
    /// source dimensions travel in the header.
    pub fn from_parts(plane: PlaneImage, orig_w: usize, orig_h: usize) -> Result<Self> {
        let mask = rotation_mask(orig_w, orig_h)?;
        let s = rotation_side(orig_w, orig_h);
        if plane.width() != s || plane.height() != s {
            return Err(Error::geometry(format!(
                "rotated plane is {}×{}, expected {s}×{s} for a {orig_w}×{orig_h} source",
                plane.width(),
                plane.height()
            )));
        }
        Ok(RotatedPlane {
            plane,
            mask,
            orig_w,
            orig_h,
        })
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.orig_w, self.orig_h)
    }

    pub fn side(&self) -> usize {
        rotation_side(self.orig_w, self.orig_h)
    }
}

/// Rotates the quincunx lattice 45°. Invalid cells of the bounding box are
/// left at zero.
pub fn rotate_forward(y: &QuincunxPlane) -> Result<RotatedPlane> {
    let (w, h) = (y.width(), y.height());
    let s = rotation_side(w, h);
    let mask = rotation_mask(w, h)?;
    let mut plane = PlaneImage::new(s, s);
    for row in 0..h {
        for col in 0..w {
            if (col + row) % 2 != 0 {
                continue;
            }
            // Bottom-up frame: green parity becomes odd.
            let yb = h - 1 - row;
            let (xx, yy) = rotate_map(col, yb, w);
            plane.set(xx, s - 1 - yy, y.get(col, row));
        }
    }
    Ok(RotatedPlane {
        plane,
        mask,
        orig_w: w,
        orig_h: h,
    })
}

/// Exact inverse of [`rotate_forward`]; values at invalid cells are ignored.
pub fn rotate_inverse(rp: &RotatedPlane) -> Result<QuincunxPlane> {
    let (w, h) = rp.source_dims();
    let s = rp.side();
    let (wi, hi) = (w as isize, h as isize);
    let mut y = QuincunxPlane::new(w, h)?;
    for row in 0..s {
        let yy = (s - 1 - row) as isize;
        for xx in 0..s as isize {
            let (x, yb) = rotate_unmap(xx, yy, wi);
            if x >= 0 && x < wi && yb >= 0 && yb < hi {
                y.set(x as usize, h - 1 - yb as usize, rp.plane.get(xx as usize, row));
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_quincunx(w: usize, h: usize, seed: u64) -> QuincunxPlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut y = QuincunxPlane::new(w, h).unwrap();
        for row in 0..h {
            for col in 0..w {
                if (col + row) % 2 == 0 {
                    y.set(col, row, rng.gen_range(0.0..255.0));
                }
            }
        }
        y
    }

    #[test]
    fn shift_round_trips_exhaustively() {
        for (w, h) in [(2, 2), (4, 4), (6, 2), (8, 10), (16, 6)] {
            let y = random_quincunx(w, h, w as u64 * 100 + h as u64);
            let back = shift_inverse(&shift_forward(&y)).unwrap();
            for row in 0..h {
                for col in 0..w {
                    if (col + row) % 2 == 0 {
                        assert_eq!(back.get(col, row), y.get(col, row));
                    }
                }
            }
        }
    }

    #[test]
    fn shift_packs_rows_in_order() {
        let mut y = QuincunxPlane::new(6, 2).unwrap();
        // Row 0 greens at columns 0,2,4; row 1 at columns 1,3,5.
        for (k, col) in [0usize, 2, 4].iter().enumerate() {
            y.set(*col, 0, 10.0 + k as f64);
        }
        for (k, col) in [1usize, 3, 5].iter().enumerate() {
            y.set(*col, 1, 20.0 + k as f64);
        }
        let sp = shift_forward(&y);
        assert_eq!(sp.plane.width(), 3);
        for k in 0..3 {
            assert_eq!(sp.plane.get(k, 0), 10.0 + k as f64);
            assert_eq!(sp.plane.get(k, 1), 20.0 + k as f64);
        }
    }

    #[test]
    fn rotation_is_a_bijection_onto_its_mask() {
        for (w, h) in [(2, 2), (4, 4), (4, 8), (8, 4), (10, 6), (16, 16)] {
            let s = rotation_side(w, h);
            let mask = rotation_mask(w, h).unwrap();
            assert_eq!(mask.count_valid(), w * h / 2);
            let mut hit = vec![false; s * s];
            for row in 0..h {
                for col in 0..w {
                    if (col + row) % 2 != 0 {
                        continue;
                    }
                    let yb = h - 1 - row;
                    let (xx, yy) = rotate_map(col, yb, w);
                    let r = s - 1 - yy;
                    assert!(xx < s && r < s);
                    assert!(mask.get(xx, r), "{w}x{h}: dest ({xx},{r}) not in mask");
                    assert!(!hit[r * s + xx], "{w}x{h}: dest ({xx},{r}) hit twice");
                    hit[r * s + xx] = true;
                }
            }
            assert_eq!(hit.iter().filter(|&&v| v).count(), mask.count_valid());
        }
    }

    #[test]
    fn rotation_round_trips() {
        for (w, h) in [(4, 4), (8, 6), (6, 8), (16, 16)] {
            let y = random_quincunx(w, h, 7 * w as u64 + h as u64);
            let back = rotate_inverse(&rotate_forward(&y).unwrap()).unwrap();
            for row in 0..h {
                for col in 0..w {
                    if (col + row) % 2 == 0 {
                        assert_eq!(back.get(col, row), y.get(col, row));
                    }
                }
            }
        }
    }

    #[test]
    fn rotated_rows_and_columns_are_contiguous() {
        for (w, h) in [(4, 4), (8, 4), (4, 8), (12, 6), (16, 16)] {
            let s = rotation_side(w, h);
            let mask = rotation_mask(w, h).unwrap();
            for row in 0..s {
                let cols: Vec<usize> = (0..s).filter(|&c| mask.get(c, row)).collect();
                if let (Some(&first), Some(&last)) = (cols.first(), cols.last()) {
                    assert_eq!(cols.len(), last - first + 1, "{w}x{h} row {row} has a gap");
                }
            }
            for col in 0..s {
                let rows: Vec<usize> = (0..s).filter(|&r| mask.get(col, r)).collect();
                if let (Some(&first), Some(&last)) = (rows.first(), rows.last()) {
                    assert_eq!(rows.len(), last - first + 1, "{w}x{h} col {col} has a gap");
                }
            }
        }
    }

    #[test]
    fn square_source_rotates_to_centered_diamond() {
        // For a 4×4 source the valid region is the diamond {1}, {0,1,2},
        // {0,1,2}, {1} by rows.
        let mask = rotation_mask(4, 4).unwrap();
        let expected = [
            [false, true, false, false],
            [true, true, true, false],
            [true, true, true, false],
            [false, true, false, false],
        ];
        for (row, want_row) in expected.iter().enumerate() {
            for (col, &want) in want_row.iter().enumerate() {
                assert_eq!(mask.get(col, row), want, "({col},{row})");
            }
        }
    }

    #[test]
    fn big_rotation_has_expected_count_and_empty_corners() {
        let (w, h) = (512, 512);
        let mask = rotation_mask(w, h).unwrap();
        assert_eq!(rotation_side(w, h), 512);
        assert_eq!(mask.count_valid(), 131072);
        for &(x, y) in &[(0, 0), (511, 0), (0, 511), (511, 511)] {
            assert!(!mask.get(x, y));
        }
    }

    #[test]
    fn odd_dimensions_rejected() {
        assert!(rotation_mask(5, 4).is_err());
        assert!(rotation_mask(4, 7).is_err());
    }
}
