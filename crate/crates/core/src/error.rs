use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sampled function is not finite at node {index} ({coords:?})")]
    NonFiniteSample { index: usize, coords: Vec<f64> },

    #[error("signals live on different grids")]
    IncompatibleGrids,

    #[error("expected a {expected}-domain signal")]
    WrongDomain { expected: &'static str },

    #[error("operation requires a non-zero signal")]
    ZeroNorm,

    #[error("operation requires a non-zero distribution")]
    ZeroDistribution,

    #[error("kernel has no joint (v, y) form")]
    NoJointForm,

    #[error("kernel has no time-multiplier form")]
    NoTimeForm,

    #[error("kernel is not unit modulus; the identity does not apply")]
    NotUnitModulus,

    #[error("kernel does not satisfy the marginal conditions")]
    NotMarginal,

    #[error("tabulated-kernel quadrature is limited to {limit} nodes per axis, grid has {got}")]
    ResolutionLimit { limit: usize, got: usize },

    #[error("signal does not decay at the grid boundary (edge/peak = {ratio:.3e})")]
    TruncatedSignal { ratio: f64 },

    #[error("signal spectrum at the distribution frequency edge is {ratio:.3e} of peak (limit {limit:.0e})")]
    BandwidthLimit { ratio: f64, limit: f64 },

    #[error("spectral truncation: edge magnitude is {ratio:.3e} of peak (limit {limit:.0e})")]
    SpectralTruncation { ratio: f64, limit: f64 },

    #[error("gradient field is not finite inside the signal support (node {index})")]
    NonFiniteGradient { index: usize },

    #[error("distribution value has unexpected imaginary content ({im:.3e} against scale {scale:.3e})")]
    ImaginaryResidue { im: f64, scale: f64 },

    #[error("chirp partition must cover every axis exactly once: {0}")]
    InvalidPartition(String),

    #[error("{case} precondition failed: {condition}")]
    CasePrecondition { case: &'static str, condition: String },

    #[error("operation not supported in dimension {dim}: {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("cannot parse {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
