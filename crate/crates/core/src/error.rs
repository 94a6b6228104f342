use thiserror::Error;

/// Errors shared across the computation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("position has {got} component(s), field model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("m_F = {m_f} is not a valid sublevel of F = {f}")]
    InvalidSublevel { f: f64, m_f: f64 },

    #[error("quantum number F = {0} must be a non-negative half-integer")]
    InvalidSpin(f64),

    #[error("sublevels m_F = {0} and m_F' = {1} are not adjacent")]
    NonAdjacentSublevels(f64, f64),

    #[error("static-field orientation must be a unit vector (|e_B| = {0})")]
    NonUnitOrientation(f64),

    #[error("no conversion from {from} to {to}")]
    UnsupportedConversion { from: String, to: String },

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("comb is empty")]
    EmptyComb,

    #[error("comb frequencies must be strictly increasing and positive (component {0})")]
    UnsortedComb(usize),

    #[error("negative Rabi frequency on comb component {0}")]
    NegativeRabi(usize),

    #[error("grid too coarse: region {region} is sampled by {points} point(s), need at least {min}")]
    GridResolution {
        region: usize,
        points: usize,
        min: usize,
    },

    #[error("eigensolver did not converge at position {position} m")]
    EigenFailure { position: f64 },

    #[error("F = {f} needs an explicit m_F pair for the two-level reduction")]
    MissingSublevelPair { f: f64 },

    #[error("{0}")]
    DomainError(String),

    #[error("sample rate {rate} Hz undersamples component {component} (max instantaneous frequency {max_hz} Hz, need >= {needed} Hz)")]
    Undersampled {
        component: usize,
        rate: f64,
        max_hz: f64,
        needed: f64,
    },

    #[error("analysis window must hold at least 2 samples (got {0})")]
    WindowTooShort(usize),

    #[error("window of {window} samples exceeds record of {samples} samples")]
    WindowTooLong { window: usize, samples: usize },

    #[error("region [{lo}, {hi}] contains no grid points")]
    EmptyRegion { lo: f64, hi: f64 },

    #[error("branch has no interior minimum (untrapped)")]
    Untrapped,

    #[error("hyperfine pair must couple two distinct manifolds")]
    DegeneratePair,

    #[error("no sign change in bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
