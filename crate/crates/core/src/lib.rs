//! Polarization of binary-input channels and alignment certificates for their
//! polarized sets, with region classifiers for the applications on top.

pub mod alignment;
pub mod broadcast;
pub mod channel;
pub mod counterpart;
pub mod cq;
pub mod entropy;
pub mod exec;
pub mod optimize;
pub mod polarize;
pub mod quantum;
pub mod sweep;
pub mod wiretap;

pub use alignment::{check_alignment, check_nonalignment, classify, Outcome, Verdict};
pub use channel::{canonicalize, compose, make_channel, ChannelKind, Dmc, Ordering, Preprocessor, PriorDmc, Scalars};
pub use cq::{CqChannel, CqState, OverlapTable};
pub use exec::Execution;
pub use polarize::{BranchLabel, Method, PolarizedSets, ZInterval};
pub use quantum::PauliChannel;

/// Largest canonical output alphabet a synthesized channel may have.
pub const ALPHABET_CAP: usize = 1 << 20;
/// Largest number of components a cq state may carry.
pub const COMPONENT_CAP: usize = 1 << 16;
/// Deepest polarization-tree level accepted anywhere.
pub const DEPTH_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter {name} = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("output alphabet of {size} symbols exceeds the cap of {cap}")]
    AlphabetOverflow { size: usize, cap: usize },
    #[error("cq state with {size} components exceeds the cap of {cap}")]
    ComponentOverflow { size: usize, cap: usize },
    #[error("overlap table is not positive semidefinite (eigenvalue {0:e})")]
    NonPsdGram(f64),
    #[error("depth {depth} exceeds the cap of {cap}")]
    DepthOverflow { depth: usize, cap: usize },
    #[error("{0}")]
    FamilyMismatch(String),
    #[error("bisection endpoints agree ({0}); no boundary in the bracket")]
    NoBoundary(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value, range })
    }
}

pub(crate) fn check_depth(depth: usize) -> Result<()> {
    if depth > DEPTH_CAP {
        Err(Error::DepthOverflow { depth, cap: DEPTH_CAP })
    } else {
        Ok(())
    }
}
