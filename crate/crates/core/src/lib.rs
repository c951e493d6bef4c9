//! Compression toolkit for Bayer color-filter-array (CFA) images.
//!
//! Two families of pipelines are implemented and made comparable:
//!
//! * **Compress after interpolation** — demosaic the CFA to a full RGB image
//!   first, then compress the interpolated image (`cai` in the CLI).
//! * **Interpolate after decoding** — restructure and compress the raw CFA
//!   samples directly, and demosaic only after decoding (`iad-*`).
//!
//! The crate provides the mosaic model ([`image`]), the 2×2 and block-based
//! format conversions that turn a CFA into YCbCr planes ([`color`]), the
//! quincunx shift / rotation rearrangements ([`geometry`]), two plane coders
//! (block DCT in [`dct`], wavelet + set partitioning in [`wavelet`] and
//! [`spiht`]), four demosaicing methods ([`demosaic`]), quality metrics
//! ([`metrics`]), a one-dimensional DPCM rate–distortion testbed ([`dpcm`]),
//! and the container format plus end-to-end pipelines ([`container`],
//! [`pipeline`]).

pub mod color;
pub mod container;
pub mod corpus;
pub mod dct;
pub mod demosaic;
pub mod dpcm;
pub mod geometry;
pub mod image;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod spiht;
pub mod wavelet;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Image or plane dimensions the operation cannot accept.
    #[error("invalid geometry: {0}")]
    Geometry(String),
    /// A configuration value outside its documented domain.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A coded stream that cannot be parsed.
    #[error("malformed stream at byte {offset}: {reason}")]
    Stream { offset: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn stream(offset: usize, reason: impl Into<String>) -> Self {
        Error::Stream {
            offset,
            reason: reason.into(),
        }
    }
}
