//! Image-file subcommands: mosaic sampling, quality reports, and the
//! synthetic test corpus.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use cfa_codec::color::{ConversionMatrix, MatrixKind};
use cfa_codec::corpus::{synthetic_image, CorpusConfig};
use cfa_codec::image::mosaic;
use cfa_codec::io::{read_ppm, write_cfa, write_ppm};
use cfa_codec::metrics::{db_to_string, mean_delta_e, psnr_components};

use crate::parse::parse_matrix;

#[derive(Args, Debug)]
pub struct MosaicArgs {
    /// Input RGB image (binary PPM).
    pub input: PathBuf,

    /// Output mosaic path.
    #[arg(long)]
    pub out: PathBuf,
}

impl MosaicArgs {
    pub fn run(self) -> Result<()> {
        let img = read_ppm(&self.input)
            .with_context(|| format!("reading {}", self.input.display()))?;
        let cfa = mosaic(&img);
        write_cfa(&self.out, &cfa)
            .with_context(|| format!("writing {}", self.out.display()))?;
        println!("wrote {} ({}x{})", self.out.display(), cfa.width(), cfa.height());
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Image under test (binary PPM).
    pub image: PathBuf,

    /// Reference image to compare against (binary PPM).
    pub reference: PathBuf,

    /// Conversion matrix behind the per-channel PSNR: jfif or rounded.
    #[arg(long, default_value = "jfif", value_parser = parse_matrix)]
    pub matrix: MatrixKind,
}

impl MetricsArgs {
    pub fn run(self) -> Result<()> {
        let img = read_ppm(&self.image)
            .with_context(|| format!("reading {}", self.image.display()))?;
        let reference = read_ppm(&self.reference)
            .with_context(|| format!("reading {}", self.reference.display()))?;
        let cm = ConversionMatrix::from_kind(self.matrix);
        let (y, cb, cr) = psnr_components(&img, &reference, &cm)?;
        let de = mean_delta_e(&img, &reference)?;
        println!("psnr_y: {} dB", db_to_string(y));
        println!("psnr_cb: {} dB", db_to_string(cb));
        println!("psnr_cr: {} dB", db_to_string(cr));
        println!("mean_delta_e: {de:.4}");
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct GenCorpusArgs {
    /// Output image path (binary PPM).
    #[arg(long)]
    pub out: PathBuf,

    /// Image width (must be even).
    #[arg(long, default_value_t = 512)]
    pub width: usize,

    /// Image height (must be even).
    #[arg(long, default_value_t = 512)]
    pub height: usize,

    /// RNG seed; the image is a pure function of the seed and dimensions.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Relative weight of the fine texture octaves, 0 to 1.
    #[arg(long, default_value_t = 0.3)]
    pub detail: f64,

    /// Opacity of the overlaid edge shapes, 0 to 1.
    #[arg(long, default_value_t = 0.8)]
    pub edge_strength: f64,
}

impl GenCorpusArgs {
    pub fn run(self) -> Result<()> {
        let cfg = CorpusConfig {
            width: self.width,
            height: self.height,
            seed: self.seed,
            detail: self.detail,
            edge_strength: self.edge_strength,
        };
        let img = synthetic_image(&cfg)?;
        write_ppm(&self.out, &img)
            .with_context(|| format!("writing {}", self.out.display()))?;
        println!("wrote {} ({}x{}, seed {})", self.out.display(), img.width(), img.height(), self.seed);
        Ok(())
    }
}
