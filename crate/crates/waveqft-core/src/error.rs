use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported wavelet order K={0} (supported: 1..=10)")]
    UnsupportedOrder(usize),

    #[error("cascade depth {0} out of range 1..=16")]
    InvalidDepth(u32),

    #[error("invalid scale pair: r={r} must be below n={n}")]
    InvalidScale { n: u32, r: u32 },

    #[error("no valid derivative stencil for K={k}, alpha={alpha}: {reason}")]
    NoValidStencil { k: usize, alpha: u32, reason: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("lattice/stencil mismatch: {0}")]
    Mismatch(String),

    #[error("degenerate ground state: smallest mode frequency {omega:e} is below {floor:e}; use the analytic route or a mass floor")]
    DegenerateGroundState { omega: f64, floor: f64 },

    #[error("K matrix is not safely positive definite (min eigenvalue {min_eig:e}); use a mass floor of at least 1e-4")]
    Conditioning { min_eig: f64 },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dispersion radicand {0:e} is negative beyond tolerance")]
    NegativeRadicand(f64),

    #[error("size {needed} bytes exceeds memory cap of {cap} bytes")]
    MemoryCap { needed: u64, cap: u64 },

    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("subsystems overlap at mode {0}")]
    Overlap(usize),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    /// Module-qualified machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnsupportedOrder(_) => "wavelet.unsupported_order",
            Error::InvalidDepth(_) => "wavelet.invalid_depth",
            Error::InvalidScale { .. } => "wavelet.invalid_scale",
            Error::NoValidStencil { .. } => "stencil.no_valid_stencil",
            Error::Shape(_) => "fwt.shape",
            Error::Mismatch(_) => "lattice.mismatch",
            Error::DegenerateGroundState { .. } => "fermion.degenerate_ground_state",
            Error::Conditioning { .. } => "boson.conditioning",
            Error::InvalidCovariance(_) => "fermion.invalid_covariance",
            Error::InvalidState(_) => "boson.invalid_state",
            Error::NegativeRadicand(_) => "boson.negative_radicand",
            Error::MemoryCap { .. } => "boson.memory_cap",
            Error::IndexOutOfRange { .. } => "analysis.index_out_of_range",
            Error::Overlap(_) => "analysis.overlap",
            Error::Unsupported(_) => "lattice.unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
