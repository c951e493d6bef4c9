//! Flag-value parsers shared by the subcommands.

use cfa_codec::color::MatrixKind;
use cfa_codec::container::{Coder, Method};
use cfa_codec::dct::Subsampling;
use cfa_codec::demosaic::InterpMethod;

pub fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        format!("unknown method '{s}' (expected cai, iad-shift, iad-rot2x2, or iad-rot-block)")
    })
}

pub fn parse_coder(s: &str) -> Result<Coder, String> {
    Coder::parse(s).ok_or_else(|| format!("unknown coder '{s}' (expected dct or spiht)"))
}

pub fn parse_interp(s: &str) -> Result<InterpMethod, String> {
    InterpMethod::parse(s).map_err(|e| e.to_string())
}

pub fn parse_matrix(s: &str) -> Result<MatrixKind, String> {
    match s {
        "jfif" => Ok(MatrixKind::Jfif),
        "rounded" => Ok(MatrixKind::Rounded),
        _ => Err(format!("unknown matrix '{s}' (expected jfif or rounded)")),
    }
}

pub fn parse_subsampling(s: &str) -> Result<Subsampling, String> {
    match s {
        "444" => Ok(Subsampling::S444),
        "422" => Ok(Subsampling::S422),
        _ => Err(format!("unknown subsampling '{s}' (expected 444 or 422)")),
    }
}

/// Parses a `WxH` block-size argument, e.g. `64x64`.
pub fn parse_block(s: &str) -> Result<(usize, usize), String> {
    let err = || format!("invalid block size '{s}' (expected WxH, e.g. 64x64)");
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let w: usize = w.parse().map_err(|_| err())?;
    let h: usize = h.parse().map_err(|_| err())?;
    if w == 0 || h == 0 || w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(err());
    }
    Ok((w, h))
}
