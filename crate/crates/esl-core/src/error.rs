use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A triple violates the domain invariants.
    #[error("point ({x}, {y}, {z}) is outside the domain: {reason}")]
    InvalidPoint {
        x: f64,
        y: f64,
        z: f64,
        reason: &'static str,
    },

    /// An interior-only operation was invoked on a boundary point.
    #[error("point ({x}, {y}, {z}) is not interior: all coordinates must be strictly positive")]
    NotInterior { x: f64, y: f64, z: f64 },

    /// A two-variable function was evaluated outside the open positive quadrant.
    #[error("pair ({x}, {y}) is outside the open positive quadrant")]
    InvalidPair { x: f64, y: f64 },

    /// The power family degenerates at exponent one: its defining bracket
    /// vanishes identically, so the coefficient would be meaningless.
    #[error("power family with alpha = 1 is excluded: the bracket (x+y+z)^a - x^a - y^a - z^a vanishes identically at a = 1; use the shannon family for the degree-1 regime")]
    PowerAlphaOne,

    /// A scalar parameter is NaN or infinite.
    #[error("parameter {name} must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },

    /// A parameter violates a documented precondition.
    #[error("{0}")]
    InvalidParameter(String),

    /// A sample specification produced no points.
    #[error("sample specification produces an empty sample set")]
    EmptySampleSet,

    /// The declared homogeneity degree contradicts the chosen family.
    #[error("declared degree {declared} does not match the {family} family regime (expected {expected})")]
    RegimeMismatch {
        declared: f64,
        family: &'static str,
        expected: String,
    },

    /// Every basis value on the fitting sample is numerically zero.
    #[error("fit basis is degenerate on the sample set: max |g| = {max_abs:e}")]
    DegenerateBasis { max_abs: f64 },

    /// A tabulated function has no entry at the requested point.
    #[error("tabulated function has no entry at point ({x}, {y}, {z})")]
    MissingTablePoint { x: f64, y: f64, z: f64 },

    /// A scale factor raised to the required power leaves the representable range.
    #[error("scale factor {t} at degree {alpha} leaves the representable floating-point range")]
    ScaleOutOfRange { t: f64, alpha: f64 },

    /// A homogenization schedule violates its invariants.
    #[error("homogenization schedule invalid: {0}")]
    InvalidSchedule(String),

    /// An evaluation produced NaN or infinity.
    #[error("evaluation produced a non-finite value at ({x}, {y}, {z})")]
    NonFiniteEval { x: f64, y: f64, z: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
