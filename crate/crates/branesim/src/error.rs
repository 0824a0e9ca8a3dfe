//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("direction {dir} out of range for a grid with {p} spatial direction(s)")]
    DirectionOutOfRange { dir: usize, p: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("matrix is numerically singular (|det| = {det:.3e}, threshold {threshold:.3e})")]
    SingularMatrix { det: f64, threshold: f64 },

    #[error("metric signature is not Lorentzian at x = {point:?}")]
    SignatureViolation { point: Vec<f64> },

    #[error("ambient dimension {dim} leaves no normal directions for a {p}-brane")]
    AmbientTooSmall { dim: usize, p: usize },

    #[error("spatial tangent vectors are degenerate (det h = {det:.3e})")]
    DegenerateTangents { det: f64 },

    #[error("worldvolume metric is not timelike (det gamma = {det:.3e} >= 0)")]
    NonTimelikeWorldvolume { det: f64 },

    #[error("lapse collapsed: N = {lapse:.3e} at or below threshold {threshold:.3e}")]
    DegenerateLapse { lapse: f64, threshold: f64 },

    #[error("slice volume element collapsed: sqrt(h) = {value:.3e} below {threshold:.3e}")]
    DegenerateSlice { value: f64, threshold: f64 },

    #[error("momentum time component {value:.3e} is not future-directed")]
    NonFutureMomentum { value: f64 },

    #[error("Poincare charges are defined on the Minkowski background only")]
    CurvedBackgroundCharges,

    #[error("operation is defined for strings (p = 1) only, got p = {p}")]
    NotAString { p: usize },

    #[error("constraint norm {value:.3e} exceeded ceiling {ceiling:.3e} at step {step}")]
    ConstraintCeiling { step: usize, value: f64, ceiling: f64 },

    #[error("slice index {index} out of range ({len} slices)")]
    SliceOutOfRange { index: usize, len: usize },

    #[error("need at least {needed} trajectory slices, got {got}")]
    TooFewSlices { needed: usize, got: usize },

    #[error("missing gradient for functional '{name}' and finite-difference fallback disabled")]
    MissingGradient { name: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config validation error for '{field}': {reason}")]
    ConfigValidation { field: String, reason: String },

    #[error("unknown scenario '{name}'; available scenarios: {available}")]
    UnknownScenario { name: String, available: String },

    #[error("unknown background '{name}'; available backgrounds: minkowski, conformal")]
    UnknownBackground { name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
