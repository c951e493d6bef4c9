//! The `dpcm-sim` subcommand: operational rate-distortion sweeps of 1-D
//! open-loop predictive coding on a synthetic AR(1) source, comparing direct
//! difference coding (`dpcm`) against coding the differences of a 2× linearly
//! interpolated sequence (`dpcmi`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use cfa_codec::dpcm::{gen_ar1, log_grid, operational_rd, Ar1Config, OperationalPoint};

/// First line of every simulation CSV; bump the version when columns change.
const CSV_SCHEMA: &str = "# cfa-dpcm-sim-csv v1";

#[derive(Args, Debug)]
pub struct DpcmSimArgs {
    /// AR(1) correlation coefficient, in (-1, 1).
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,

    /// Standard deviation of the AR(1) innovation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Number of source samples.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,

    /// RNG seed; the source is a pure function of the parameters and seed.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Number of quantizer step sizes in the sweep.
    #[arg(long, default_value_t = 24)]
    pub sweep: usize,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl DpcmSimArgs {
    pub fn run(self) -> Result<()> {
        if self.sweep == 0 {
            return Err(cfa_codec::Error::Config("--sweep must be at least 1".into()).into());
        }
        let cfg = Ar1Config {
            rho: self.rho,
            sigma_w: self.sigma,
            n: self.n,
            seed: self.seed,
        };
        let x = gen_ar1(&cfg)?;

        // Center the step-size grid on the scale of the first-difference
        // signal: Var(x[n] - x[n-1]) = 2 σ² (1 - ρ) for a stationary AR(1).
        let diff_sd = (2.0 * cfg.stationary_variance() * (1.0 - self.rho)).sqrt();
        let deltas = log_grid(0.05 * diff_sd, 8.0 * diff_sd, self.sweep);
        let (dpcm, dpcmi) = operational_rd(&x, &deltas);

        let mut raw: Box<dyn Write> = match &self.csv {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        };
        writeln!(raw, "{CSV_SCHEMA}")?;
        let mut csv = csv::Writer::from_writer(raw);
        csv.write_record(["label", "delta", "rate_bits_per_sample", "mse"])?;
        write_curve(&mut csv, "dpcm", &dpcm)?;
        write_curve(&mut csv, "dpcmi", &dpcmi)?;
        csv.flush()?;
        if let Some(path) = &self.csv {
            println!("wrote {}: {} rows", path.display(), dpcm.len() + dpcmi.len());
        }
        Ok(())
    }
}

fn write_curve<W: Write>(csv: &mut csv::Writer<W>, label: &str, points: &[OperationalPoint]) -> Result<()> {
    for p in points {
        csv.write_record([
            label,
            &p.delta.to_string(),
            &p.rate.to_string(),
            &p.distortion.to_string(),
        ])?;
    }
    Ok(())
}
