//! The `rd-sweep` subcommand: a grid of encode/decode experiments over one
//! or more images, reported as CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use cfa_codec::color::MatrixKind;
use cfa_codec::container::{Coder, Method};
use cfa_codec::demosaic::InterpMethod;
use cfa_codec::image::mosaic;
use cfa_codec::io::read_ppm;
use cfa_codec::metrics::db_to_string;
use cfa_codec::pipeline::{rd_sweep, PipelineConfig, SweepPoint};
use cfa_codec::spiht::DEFAULT_Y_FRACTION;

use crate::parse::{parse_block, parse_coder, parse_interp, parse_matrix, parse_method};

/// First line of every sweep CSV; bump the version when columns change.
const CSV_SCHEMA: &str = "# cfa-rd-sweep-csv v1";

const CSV_HEADER: [&str; 11] = [
    "image", "method", "coder", "interp", "target", "bytes",
    "psnr_y", "psnr_cb", "psnr_cr", "mean_delta_e", "error",
];

#[derive(Args, Debug)]
pub struct RdSweepArgs {
    /// Input RGB images (binary PPM); each is mosaicked before coding.
    #[arg(required = true)]
    pub images: Vec<PathBuf>,

    /// Pipelines to run (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "cai,iad-rot2x2", value_parser = parse_method)]
    pub method: Vec<Method>,

    /// Plane coders to run (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "dct", value_parser = parse_coder)]
    pub coder: Vec<Coder>,

    /// Demosaicing methods to run (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "bilinear", value_parser = parse_interp)]
    pub interp: Vec<InterpMethod>,

    /// DCT qualities to sweep (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "75")]
    pub quality: Vec<u8>,

    /// Byte budgets to sweep for the spiht coder (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "61440")]
    pub bytes: Vec<usize>,

    /// YCbCr conversion matrix: jfif or rounded.
    #[arg(long, default_value = "jfif", value_parser = parse_matrix)]
    pub matrix: MatrixKind,

    /// Conversion block size for iad-rot-block.
    #[arg(long, value_name = "WxH", default_value = "64x64", value_parser = parse_block)]
    pub block: (usize, usize),

    /// Fraction of the byte budget spent on luma (spiht coder), in (0, 1).
    #[arg(long, value_name = "Y-FRAC", default_value_t = DEFAULT_Y_FRACTION)]
    pub alloc: f64,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Worker threads for the sweep (default: one per core).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl RdSweepArgs {
    pub fn run(self) -> Result<()> {
        if let Some(workers) = self.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global()
                .context("configuring worker threads")?;
        }

        let mut raw: Box<dyn Write> = match &self.csv {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        };
        writeln!(raw, "{CSV_SCHEMA}")?;
        let mut csv = csv::Writer::from_writer(raw);
        csv.write_record(CSV_HEADER)?;

        let points = self.points();
        let (mut rows, mut failures) = (0usize, 0usize);
        for path in &self.images {
            let img = read_ppm(path).with_context(|| format!("reading {}", path.display()))?;
            let cfa = mosaic(&img);
            let image_name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            for row in rd_sweep(&cfa, &points) {
                rows += 1;
                let bytes = row.bytes.to_string();
                match &row.outcome {
                    Ok(r) => {
                        let (y, cb, cr) = (db_to_string(r.psnr_y), db_to_string(r.psnr_cb), db_to_string(r.psnr_cr));
                        let de = format!("{:.4}", r.mean_delta_e);
                        csv.write_record([
                            image_name.as_str(), row.method.name(), row.coder.name(), row.interp.name(),
                            row.label.as_str(), bytes.as_str(), y.as_str(), cb.as_str(), cr.as_str(),
                            de.as_str(), "",
                        ])?;
                    }
                    Err(reason) => {
                        failures += 1;
                        csv.write_record([
                            image_name.as_str(), row.method.name(), row.coder.name(), row.interp.name(),
                            row.label.as_str(), bytes.as_str(), "", "", "", "", reason.as_str(),
                        ])?;
                    }
                }
            }
        }
        csv.flush()?;
        if let Some(path) = &self.csv {
            println!("wrote {}: {} rows, {} failed", path.display(), rows, failures);
        }
        Ok(())
    }

    /// The experiment grid: method × coder × interp, crossed with the
    /// qualities (dct) or byte budgets (spiht). The point label names the
    /// rate target (`q75` or `b61440`) and becomes the CSV `target` column.
    fn points(&self) -> Vec<SweepPoint> {
        let base = PipelineConfig {
            matrix: self.matrix,
            block: self.block,
            y_fraction: self.alloc,
            ..PipelineConfig::default()
        };
        let mut points = Vec::new();
        for &method in &self.method {
            for &coder in &self.coder {
                for &interp in &self.interp {
                    let cfg = PipelineConfig { method, coder, interp, ..base };
                    match coder {
                        Coder::Dct => points.extend(self.quality.iter().map(|&quality| SweepPoint {
                            label: format!("q{quality}"),
                            cfg: PipelineConfig { quality, ..cfg },
                        })),
                        Coder::Spiht => points.extend(self.bytes.iter().map(|&budget_bytes| SweepPoint {
                            label: format!("b{budget_bytes}"),
                            cfg: PipelineConfig { budget_bytes, ..cfg },
                        })),
                    }
                }
            }
        }
        points
    }
}
