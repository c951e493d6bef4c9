//! The `encode` and `decode` subcommands.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use cfa_codec::color::MatrixKind;
use cfa_codec::container::{CodedContainer, Coder, Method};
use cfa_codec::dct::Subsampling;
use cfa_codec::demosaic::InterpMethod;
use cfa_codec::io::{read_cfa, write_ppm};
use cfa_codec::pipeline::{decode, encode, PipelineConfig};
use cfa_codec::spiht::DEFAULT_Y_FRACTION;

use crate::parse::{parse_block, parse_coder, parse_interp, parse_matrix, parse_method, parse_subsampling};

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Input Bayer mosaic (see `cfa mosaic`).
    pub input: PathBuf,

    /// Output container path.
    #[arg(long)]
    pub out: PathBuf,

    /// Pipeline: cai, iad-shift, iad-rot2x2, or iad-rot-block.
    #[arg(long, default_value = "iad-rot2x2", value_parser = parse_method)]
    pub method: Method,

    /// Plane coder: dct or spiht.
    #[arg(long, default_value = "dct", value_parser = parse_coder)]
    pub coder: Coder,

    /// Demosaicing method recorded for the decoder: bilinear, hue, gradient,
    /// or median. (The cai pipeline also interpolates with it at encode time.)
    #[arg(long, default_value = "bilinear", value_parser = parse_interp)]
    pub interp: InterpMethod,

    /// YCbCr conversion matrix: jfif or rounded.
    #[arg(long, default_value = "jfif", value_parser = parse_matrix)]
    pub matrix: MatrixKind,

    /// DCT quality, 1-100.
    #[arg(long, default_value_t = 75)]
    pub quality: u8,

    /// Total byte budget across the coded planes (spiht coder).
    #[arg(long, default_value_t = 61_440)]
    pub bytes: usize,

    /// Fraction of the byte budget spent on luma (spiht coder), in (0, 1).
    #[arg(long, value_name = "Y-FRAC", default_value_t = DEFAULT_Y_FRACTION)]
    pub alloc: f64,

    /// Conversion block size for iad-rot-block.
    #[arg(long, value_name = "WxH", default_value = "64x64", value_parser = parse_block)]
    pub block: (usize, usize),

    /// Wavelet decomposition depth, 1-5 (default: the deepest each plane allows).
    #[arg(long)]
    pub levels: Option<usize>,

    /// Chroma layout on the cai + dct path: 422 or 444.
    #[arg(long, default_value = "422", value_parser = parse_subsampling)]
    pub subsampling: Subsampling,
}

impl EncodeArgs {
    pub fn run(self) -> Result<()> {
        let cfa = read_cfa(&self.input)
            .with_context(|| format!("reading {}", self.input.display()))?;
        let cfg = PipelineConfig {
            method: self.method,
            coder: self.coder,
            interp: self.interp,
            matrix: self.matrix,
            quality: self.quality,
            subsampling: self.subsampling,
            budget_bytes: self.bytes,
            y_fraction: self.alloc,
            block: self.block,
            levels: self.levels,
        };
        let container = encode(&cfa, &cfg)?;
        let bytes = container.to_bytes();
        fs::write(&self.out, &bytes)
            .with_context(|| format!("writing {}", self.out.display()))?;
        let raw = 3 * cfa.width() * cfa.height();
        println!(
            "wrote {}: {} bytes ({:.1}:1 against {} RGB bytes)",
            self.out.display(),
            bytes.len(),
            raw as f64 / bytes.len() as f64,
            raw,
        );
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// Input container file.
    pub input: PathBuf,

    /// Output image path (binary PPM).
    #[arg(long)]
    pub out: PathBuf,

    /// Demosaic with this method instead of the one recorded at encode time
    /// (effective on the iad pipelines, whose streams carry raw CFA samples).
    #[arg(long, value_parser = parse_interp)]
    pub interp: Option<InterpMethod>,
}

impl DecodeArgs {
    pub fn run(self) -> Result<()> {
        let bytes = fs::read(&self.input)
            .with_context(|| format!("reading {}", self.input.display()))?;
        let mut container = CodedContainer::from_bytes(&bytes)?;
        if let Some(interp) = self.interp {
            if container.method == Method::Cai {
                eprintln!(
                    "warning: --interp has no effect on a cai stream (demosaiced at encode time with {}); ignoring",
                    container.interp,
                );
            } else {
                container.interp = interp;
            }
        }
        let img = decode(&container)?;
        write_ppm(&self.out, &img)
            .with_context(|| format!("writing {}", self.out.display()))?;
        println!(
            "wrote {} ({}x{}, {} + {}, demosaic {})",
            self.out.display(),
            img.width(),
            img.height(),
            container.method,
            container.coder,
            container.interp,
        );
        Ok(())
    }
}
