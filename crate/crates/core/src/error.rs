use std::path::PathBuf;

/// Errors produced by the simulator and its diagnostics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension {0} is below 3; the radial theory needs n >= 3")]
    DimensionTooLow(u32),
    #[error("grid size {0} is not a power of two >= 16")]
    NonPowerOfTwo(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("dilation by {scale} pushes significant content past r_max (mass fraction {tail:.3e})")]
    ContentOverflow { scale: f64, tail: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("scaling profile fails its conditions: {0}")]
    FailsConditions(String),
    #[error("no bound state: Rayleigh quotient stayed at {0:.6e}")]
    NoBoundState(f64),
    #[error("no soliton: {0}")]
    NoSoliton(String),
    #[error("linear solve diverged after {iterations} iterations (relative residual {residual:.3e})")]
    SolveDiverged { iterations: usize, residual: f64 },
    #[error("no t0 up to {cap} keeps the probe amplitude above {threshold}")]
    LadderExhausted { cap: f64, threshold: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("snapshot format: {0}")]
    Snapshot(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
