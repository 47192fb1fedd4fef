use thiserror::Error;

pub type Result<T, E = HoloError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HoloError {
    #[error("invalid dimensions {width}x{height}: {reason}")]
    Dimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("pixel ({x}, {y}) out of bounds for {width}x{height} field")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("correlation undefined: zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("improvement undefined: baseline error reduction is {0} (must be > 0)")]
    UndefinedImprovement(f64),

    #[error("traces are not comparable: {0}")]
    IncomparableTraces(String),

    #[error("cannot normalise an all-zero image")]
    ZeroEnergy,

    #[error("PGM parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown modulation scheme `{0}`")]
    UnknownScheme(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
