//! `cfa` — command-line front end for the CFA compression toolkit.
//!
//! The binary is a thin shell over the `cfa-codec` library: every subcommand
//! reads plain files (binary PPM/PGM images, the toolkit's `.cfa` mosaic
//! format, or coded containers), calls into the library, and writes plain
//! files or CSV back out.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod codec;
mod images;
mod parse;
mod sim;
mod sweep;

/// Bayer CFA compression toolkit.
#[derive(Parser, Debug)]
#[command(name = "cfa", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an RGB image (binary PPM) down to its Bayer mosaic.
    Mosaic(images::MosaicArgs),
    /// Compress a Bayer mosaic into a self-contained container file.
    Encode(codec::EncodeArgs),
    /// Reconstruct an RGB image from a container file.
    Decode(codec::DecodeArgs),
    /// Report PSNR and color-difference metrics between two images.
    Metrics(images::MetricsArgs),
    /// Run a grid of encode/decode experiments and emit CSV rows.
    RdSweep(sweep::RdSweepArgs),
    /// Rate-distortion simulation of 1-D predictive coding on an AR(1) source.
    DpcmSim(sim::DpcmSimArgs),
    /// Render a synthetic RGB test image.
    GenCorpus(images::GenCorpusArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mosaic(a) => a.run(),
        Command::Encode(a) => a.run(),
        Command::Decode(a) => a.run(),
        Command::Metrics(a) => a.run(),
        Command::RdSweep(a) => a.run(),
        Command::DpcmSim(a) => a.run(),
        Command::GenCorpus(a) => a.run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Maps an error chain to the documented exit codes: 2 for configuration
/// mistakes, 3 for inputs that cannot be decoded, 1 for plain I/O trouble.
/// (Usage errors never reach here; clap exits with 2 on its own.)
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<cfa_codec::Error>() {
            return match e {
                cfa_codec::Error::Config(_) | cfa_codec::Error::Geometry(_) => 2,
                cfa_codec::Error::Stream { .. } => 3,
                cfa_codec::Error::Io(_) => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}
