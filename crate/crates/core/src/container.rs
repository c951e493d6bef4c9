//! The coded-image container.
//!
//! A minimal binary envelope around the plane payloads. Fixed-size header,
//! little-endian integers, then one length-prefixed record per plane:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "CFAC"
//! 4       1     format version (1)
//! 5       1     method      (0 cai, 1 iad-shift, 2 iad-rot2x2, 3 iad-rot-block)
//! 6       1     coder       (0 dct, 1 spiht)
//! 7       4     width  (u32 LE)
//! 11      4     height (u32 LE)
//! 15      1     demosaicing method for decode (0 bilinear, 1 hue, 2 gradient, 3 median)
//! 16      1     conversion matrix (0 standard, 1 rounded)
//! 17      2     conversion block width  (u16 LE; 0 unless method 3)
//! 19      2     conversion block height (u16 LE; 0 unless method 3)
//! 21      1     plane count
//! 22      …     per plane: role (u8: 0 Y, 1 Cb, 2 Cr), payload length (u32 LE), payload
//! ```
//!
//! DCT payloads begin with two bytes of their own — quality and chroma
//! layout — and wavelet payloads carry a self-describing 8-byte header, so
//! a container plus the shared conversion conventions is all a decoder
//! needs.

use crate::color::MatrixKind;
use crate::demosaic::InterpMethod;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CFAC";
pub const FORMAT_VERSION: u8 = 1;

/// How the mosaic was restructured before coding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Demosaic first, compress the dense image.
    Cai,
    /// Direct conversion; luma rows packed into a half-width plane.
    IadShift,
    /// Direct 2×2 conversion; luma rotated 45°.
    IadRot2x2,
    /// Block conversion of configurable size; luma rotated 45°.
    IadRotBlock,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cai, Method::IadShift, Method::IadRot2x2, Method::IadRotBlock];

    pub fn id(self) -> u8 {
        match self {
            Method::Cai => 0,
            Method::IadShift => 1,
            Method::IadRot2x2 => 2,
            Method::IadRotBlock => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Cai => "cai",
            Method::IadShift => "iad-shift",
            Method::IadRot2x2 => "iad-rot2x2",
            Method::IadRotBlock => "iad-rot-block",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which plane coder produced the payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coder {
    Dct,
    Spiht,
}

impl Coder {
    pub const ALL: [Coder; 2] = [Coder::Dct, Coder::Spiht];

    pub fn id(self) -> u8 {
        match self {
            Coder::Dct => 0,
            Coder::Spiht => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Coder::ALL.into_iter().find(|c| c.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Coder::Dct => "dct",
            Coder::Spiht => "spiht",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Coder::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl std::fmt::Display for Coder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Role of one coded plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneRole {
    Luma,
    Cb,
    Cr,
}

impl PlaneRole {
    pub fn id(self) -> u8 {
        match self {
            PlaneRole::Luma => 0,
            PlaneRole::Cb => 1,
            PlaneRole::Cr => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        [PlaneRole::Luma, PlaneRole::Cb, PlaneRole::Cr]
            .into_iter()
            .find(|r| r.id() == id)
    }
}

fn interp_id(i: InterpMethod) -> u8 {
    match i {
        InterpMethod::Bilinear => 0,
        InterpMethod::Hue => 1,
        InterpMethod::Gradient => 2,
        InterpMethod::Median => 3,
    }
}

fn interp_from_id(id: u8) -> Option<InterpMethod> {
    InterpMethod::ALL.into_iter().find(|&i| interp_id(i) == id)
}

fn matrix_id(m: MatrixKind) -> u8 {
    match m {
        MatrixKind::Jfif => 0,
        MatrixKind::Rounded => 1,
    }
}

fn matrix_from_id(id: u8) -> Option<MatrixKind> {
    [MatrixKind::Jfif, MatrixKind::Rounded].into_iter().find(|&m| matrix_id(m) == id)
}

/// One coded plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneRecord {
    pub role: PlaneRole,
    pub payload: Vec<u8>,
}

/// A complete coded image.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedContainer {
    pub method: Method,
    pub coder: Coder,
    pub width: u32,
    pub height: u32,
    /// Demosaicing method a decoder should apply (advisory for `cai`,
    /// where interpolation already happened at encode time).
    pub interp: InterpMethod,
    pub matrix: MatrixKind,
    /// Conversion block size; only meaningful for [`Method::IadRotBlock`].
    pub block: (u16, u16),
    pub planes: Vec<PlaneRecord>,
}

const FIXED_HEADER: usize = 22;

impl CodedContainer {
    /// Serialized size in bytes.
    pub fn total_bytes(&self) -> usize {
        FIXED_HEADER + self.planes.iter().map(|p| 5 + p.payload.len()).sum::<usize>()
    }

    /// Sum of the plane payload sizes, excluding all framing.
    pub fn payload_bytes(&self) -> usize {
        self.planes.iter().map(|p| p.payload.len()).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_bytes());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.method.id());
        out.push(self.coder.id());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.push(interp_id(self.interp));
        out.push(matrix_id(self.matrix));
        out.extend_from_slice(&self.block.0.to_le_bytes());
        out.extend_from_slice(&self.block.1.to_le_bytes());
        out.push(self.planes.len() as u8);
        for p in &self.planes {
            out.push(p.role.id());
            out.extend_from_slice(&(p.payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&p.payload);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let need = |offset: usize, n: usize| -> Result<()> {
            if offset + n > bytes.len() {
                Err(Error::stream(bytes.len(), "container truncated"))
            } else {
                Ok(())
            }
        };
        need(0, FIXED_HEADER)?;
        if bytes[0..4] != MAGIC {
            return Err(Error::stream(0, "bad magic"));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::stream(4, format!("unsupported format version {}", bytes[4])));
        }
        let method = Method::from_id(bytes[5]).ok_or_else(|| Error::stream(5, format!("unknown method {}", bytes[5])))?;
        let coder = Coder::from_id(bytes[6]).ok_or_else(|| Error::stream(6, format!("unknown coder {}", bytes[6])))?;
        let width = u32::from_le_bytes(bytes[7..11].try_into().unwrap());
        let height = u32::from_le_bytes(bytes[11..15].try_into().unwrap());
        let interp =
            interp_from_id(bytes[15]).ok_or_else(|| Error::stream(15, format!("unknown demosaicing id {}", bytes[15])))?;
        let matrix =
            matrix_from_id(bytes[16]).ok_or_else(|| Error::stream(16, format!("unknown matrix id {}", bytes[16])))?;
        let block = (
            u16::from_le_bytes(bytes[17..19].try_into().unwrap()),
            u16::from_le_bytes(bytes[19..21].try_into().unwrap()),
        );
        let count = bytes[21] as usize;
        if count > 8 {
            return Err(Error::stream(21, format!("implausible plane count {count}")));
        }
        let mut planes = Vec::with_capacity(count);
        let mut at = FIXED_HEADER;
        for _ in 0..count {
            need(at, 5)?;
            let role = PlaneRole::from_id(bytes[at])
                .ok_or_else(|| Error::stream(at, format!("unknown plane role {}", bytes[at])))?;
            let len = u32::from_le_bytes(bytes[at + 1..at + 5].try_into().unwrap()) as usize;
            need(at + 5, len)?;
            planes.push(PlaneRecord {
                role,
                payload: bytes[at + 5..at + 5 + len].to_vec(),
            });
            at += 5 + len;
        }
        if at != bytes.len() {
            return Err(Error::stream(at, "trailing bytes after last plane"));
        }
        Ok(CodedContainer {
            method,
            coder,
            width,
            height,
            interp,
            matrix,
            block,
            planes,
        })
    }

    /// The plane with the given role, or a parse-level error.
    pub fn plane(&self, role: PlaneRole) -> Result<&PlaneRecord> {
        self.planes
            .iter()
            .find(|p| p.role == role)
            .ok_or_else(|| Error::stream(FIXED_HEADER, format!("missing plane with role {}", role.id())))
    }
}
