use thiserror::Error;

/// Every failure mode the toolkit reports.
///
/// Variants carry enough context to tell which precondition or audit failed;
/// callers usually just propagate with `?`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // geometry
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("point outside the collar: distance {distance} >= depth {depth}")]
    OutsideCollar { distance: f64, depth: f64 },
    #[error("gauge window depth {depth} reaches the collar depth {collar}")]
    WindowTooDeep { depth: f64, collar: f64 },

    // band functions
    #[error("band {band} unresolved at gamma={gamma}, xi={xi}: {detail}")]
    UnresolvedBand {
        band: usize,
        gamma: f64,
        xi: f64,
        detail: String,
    },
    #[error("no interior minimum for band {band} at gamma={gamma}")]
    NoInteriorMinimum { band: usize, gamma: f64 },
    #[error("empty sublevel set: level {level} <= band minimum {minimum}")]
    EmptyInterval { level: f64, minimum: f64 },
    #[error("unbounded sublevel set: level {level} >= large-xi limit {limit}")]
    UnboundedSublevel { level: f64, limit: f64 },

    // model operators
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("spectrum ends at {computed} below the requested threshold {required}")]
    ThresholdTooLow { computed: f64, required: f64 },
    #[error("torus side squared {r_sq} is not a multiple of 2*pi")]
    PhaseMismatch { r_sq: f64 },
    #[error("truncation too small: lhs changed by {relative_change} on enlargement")]
    TruncationTooSmall { relative_change: f64 },

    // semiclassical functionals
    #[error("level {lambda} above the field infimum {b}")]
    LevelAboveField { lambda: f64, b: f64 },
    #[error("level {lambda} not strictly below the field infimum {b}")]
    LevelNotBelowField { lambda: f64, b: f64 },
    #[error("alpha = 1/2 requires a bounded Robin coefficient")]
    MissingSupBound,
    #[error("band table too small: p_max {p_max} reached before truncation criterion held")]
    TableTooSmall { p_max: usize },

    // direct solvers
    #[error("angular momentum range too small: {0}")]
    MRangeTooSmall(String),
    #[error("incomplete spectrum: threshold {threshold} <= level {level}")]
    IncompleteSpectrum { threshold: f64, level: f64 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    // harness
    #[error("invalid config: {field}: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
