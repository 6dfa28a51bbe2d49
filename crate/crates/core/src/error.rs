use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid layer: refractive index {index} and thickness {thickness} must both be positive")]
    InvalidLayer { index: f64, thickness: f64 },

    #[error("invalid exterior index {0}: must be positive")]
    InvalidExterior(f64),

    #[error("frequency {omega} must exceed the Faraday splitting {split}")]
    FrequencyBelowSplit { omega: f64, split: f64 },

    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("invalid Faraday splitting {0}: must be finite and non-negative")]
    InvalidSplit(f64),

    #[error("the clock read-out needs a non-zero Faraday splitting")]
    ZeroSplit,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse near omega = {omega}: phase step {step} rad is not resolvable")]
    GridTooCoarse { omega: f64, step: f64 },

    #[error("omega = {0} is not interior to the scan grid")]
    OutsideGrid(f64),

    #[error("transmission |s| = {modulus:e} at omega = {omega} is below the threshold {threshold:e}")]
    LowTransmission { omega: f64, modulus: f64, threshold: f64 },

    #[error("cannot unwrap the phase continuously between {from} and {to}")]
    UnwrapAmbiguity { from: f64, to: f64 },

    #[error("path enumeration exceeded the budget of {cap} terms")]
    PathBudget { cap: usize },

    #[error("path truncation too coarse: axis disagreement {disagreement:e} exceeds bound {bound:e}")]
    TruncationTooCoarse { disagreement: f64, bound: f64 },

    #[error("polarization state is zero or has no main axis")]
    DegenerateState,

    #[error("fringe visibility {visibility:e} is below the floor {floor:e}")]
    NoFringe { visibility: f64, floor: f64 },

    #[error("fringe order is ambiguous without a phase-time prior")]
    WindingAmbiguity,

    #[error("unknown read-out scheme `{0}`")]
    UnknownReadout(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("output error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
