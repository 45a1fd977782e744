use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has {found} entries, expected {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::linalg::MAX_DIM)]
    TooLarge(usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    TraceNotUnit(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("heralded outcome has zero probability")]
    ZeroProbability,

    #[error("band {0} has no attenuation entry in fiber {1}")]
    MissingBand(String, String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("chain stalled: no end-to-end pair after {0} rounds")]
    Stalled(u64),

    #[error("fixed losses {fixed_db} dB leave no budget under the {threshold_db} dB threshold")]
    NoLossBudget { fixed_db: f64, threshold_db: f64 },

    #[error("{0}")]
    Config(String),
}

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: range_text(lo, hi),
        })
    }
}

fn range_text(lo: f64, hi: f64) -> &'static str {
    match (lo, hi) {
        (l, h) if l == 0.0 && h == 1.0 => "[0, 1]",
        (l, h) if l == 0.0 && h.is_infinite() => "[0, inf)",
        _ => "the allowed range",
    }
}
