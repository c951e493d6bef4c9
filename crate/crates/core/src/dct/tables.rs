//! Fixed coding tables: base quantization matrices, the default Huffman
//! code specifications, quality scaling, and the zigzag scan order.

use std::sync::OnceLock;

/// Base luminance quantization matrix (row-major), balanced for mid quality.
pub const QUANT_LUMA_BASE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Base chrominance quantization matrix (row-major).
pub const QUANT_CHROMA_BASE: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Scales a base matrix by the conventional 50-pivot rule: 50 keeps the
/// base, 100 collapses every step to 1, 1 is the coarsest. Entries stay in
/// `[1, 255]`.
pub fn scaled_quant(base: &[u16; 64], quality: u8) -> [u16; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(base) {
        *o = ((b as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

// Code-length counts (lengths 1..=16) and the symbol values in code order,
// for the default DC/AC tables.

pub const DC_LUMA_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
pub const DC_LUMA_VALS: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub const DC_CHROMA_BITS: [u8; 16] = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
pub const DC_CHROMA_VALS: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub const AC_LUMA_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
pub const AC_LUMA_VALS: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
    0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52,
    0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
    0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3,
    0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
    0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

pub const AC_CHROMA_BITS: [u8; 16] = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77];
pub const AC_CHROMA_VALS: [u8; 162] = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61,
    0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33,
    0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18,
    0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63,
    0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a,
    0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
    0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
    0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
    0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7,
    0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

/// Run/size symbol ending a block's coefficient list.
pub const EOB: u8 = 0x00;
/// Run/size symbol standing for sixteen zeros.
pub const ZRL: u8 = 0xf0;

/// A canonical prefix code: encoding map plus the per-length ranges the
/// decoder walks.
pub struct HuffTable {
    /// Symbol → (code, bit length); length 0 marks an absent symbol.
    pub enc: [(u16, u8); 256],
    pub min_code: [i32; 17],
    pub max_code: [i32; 17],
    pub val_ptr: [usize; 17],
    pub vals: Vec<u8>,
}

impl HuffTable {
    pub fn build(bits: &[u8; 16], vals: &[u8]) -> Self {
        let mut enc = [(0u16, 0u8); 256];
        let mut min_code = [0i32; 17];
        let mut max_code = [-1i32; 17];
        let mut val_ptr = [0usize; 17];
        let mut code: u32 = 0;
        let mut k = 0usize;
        for len in 1..=16usize {
            min_code[len] = code as i32;
            val_ptr[len] = k;
            for _ in 0..bits[len - 1] {
                enc[vals[k] as usize] = (code as u16, len as u8);
                code += 1;
                k += 1;
            }
            max_code[len] = code as i32 - 1;
            if bits[len - 1] == 0 {
                max_code[len] = -1;
            }
            code <<= 1;
        }
        HuffTable {
            enc,
            min_code,
            max_code,
            val_ptr,
            vals: vals.to_vec(),
        }
    }

    pub fn code(&self, symbol: u8) -> (u16, u8) {
        let (c, l) = self.enc[symbol as usize];
        debug_assert!(l > 0, "symbol {symbol:#x} not in table");
        (c, l)
    }
}

pub struct TableSet {
    pub dc: HuffTable,
    pub ac: HuffTable,
}

pub fn luma_tables() -> &'static TableSet {
    static T: OnceLock<TableSet> = OnceLock::new();
    T.get_or_init(|| TableSet {
        dc: HuffTable::build(&DC_LUMA_BITS, &DC_LUMA_VALS),
        ac: HuffTable::build(&AC_LUMA_BITS, &AC_LUMA_VALS),
    })
}

pub fn chroma_tables() -> &'static TableSet {
    static T: OnceLock<TableSet> = OnceLock::new();
    T.get_or_init(|| TableSet {
        dc: HuffTable::build(&DC_CHROMA_BITS, &DC_CHROMA_VALS),
        ac: HuffTable::build(&AC_CHROMA_BITS, &AC_CHROMA_VALS),
    })
}

/// Zigzag scan: position `k` → raster index within the 8×8 block.
pub fn zigzag() -> &'static [usize; 64] {
    static Z: OnceLock<[usize; 64]> = OnceLock::new();
    Z.get_or_init(|| {
        let mut order = [0usize; 64];
        let mut k = 0;
        for s in 0..=14usize {
            let lo = s.saturating_sub(7);
            let hi = s.min(7);
            if s % 2 == 1 {
                // walk down-left: row ascending
                for row in lo..=hi {
                    order[k] = row * 8 + (s - row);
                    k += 1;
                }
            } else {
                for row in (lo..=hi).rev() {
                    order[k] = row * 8 + (s - row);
                    k += 1;
                }
            }
        }
        order
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_is_a_permutation_with_known_landmarks() {
        let z = zigzag();
        let mut seen = [false; 64];
        for &i in z.iter() {
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert_eq!(&z[..6], &[0, 1, 8, 16, 9, 2]);
        assert_eq!(z[63], 63);
    }

    #[test]
    fn quality_scaling_endpoints_and_monotonicity() {
        assert_eq!(scaled_quant(&QUANT_LUMA_BASE, 50), QUANT_LUMA_BASE);
        assert!(scaled_quant(&QUANT_LUMA_BASE, 100).iter().all(|&v| v == 1));
        assert!(scaled_quant(&QUANT_LUMA_BASE, 1).iter().all(|&v| v == 255));
        let coarse = scaled_quant(&QUANT_LUMA_BASE, 30);
        let fine = scaled_quant(&QUANT_LUMA_BASE, 70);
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(c >= f);
        }
    }

    #[test]
    fn key_code_lengths_match_the_default_tables() {
        let l = luma_tables();
        assert_eq!(l.dc.code(0).1, 2, "luma DC zero category");
        let (eob_code, eob_len) = l.ac.code(EOB);
        assert_eq!((eob_code, eob_len), (0b1010, 4), "luma EOB");
        assert_eq!(l.ac.code(ZRL).1, 11, "luma ZRL");
        let c = chroma_tables();
        assert_eq!(c.dc.code(0).1, 2, "chroma DC zero category");
        assert_eq!(c.ac.code(EOB).1, 2, "chroma EOB");
    }

    #[test]
    fn codes_are_prefix_free() {
        for t in [&luma_tables().ac, &chroma_tables().ac] {
            let mut codes: Vec<(u16, u8)> = (0..256)
                .filter(|&s| t.enc[s].1 > 0)
                .map(|s| t.enc[s])
                .collect();
            codes.sort();
            for i in 0..codes.len() {
                for j in i + 1..codes.len() {
                    let (ca, la) = codes[i];
                    let (cb, lb) = codes[j];
                    let (short, slen, long, llen) = if la <= lb {
                        (ca, la, cb, lb)
                    } else {
                        (cb, lb, ca, la)
                    };
                    assert_ne!(
                        long >> (llen - slen),
                        short,
                        "prefix violation between codes"
                    );
                }
            }
        }
    }
}
