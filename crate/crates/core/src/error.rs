use thiserror::Error;

/// Errors raised by the cavity model and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unstable resonator: length {length} m with mirror radius {radius} m (need 0 < L < 2R)")]
    UnstableResonator { length: f64, radius: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not reach relative tolerance {tolerance:e} with {nodes} nodes per axis (last change {change:e})")]
    QuadratureNonConvergence { nodes: usize, tolerance: f64, change: f64 },

    #[error("root bracketing failed: {0}")]
    RootBracket(String),

    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("samples span {periods:.3} periods, need at least {required}")]
    InsufficientSpan { periods: f64, required: f64 },

    #[error("point {at} is at or beyond the sweep boundary")]
    SweepBoundary { at: f64 },

    #[error("curvature undefined: the crossing has zero gap")]
    ZeroGap,

    #[error("no stationary point: |omega'| = {slope:e} exceeds threshold {threshold:e}")]
    NonStationary { slope: f64, threshold: f64 },

    #[error("unresolved gap at {at}: {reason}")]
    UnresolvedGap { at: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
