use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance violates the uncertainty bound: det = {det:e} < hbar^2/4 = {bound:e}")]
    Heisenberg { det: f64, bound: f64 },

    #[error("cat branches are not essentially orthogonal: |<g1|g2>| = {overlap:e}")]
    BranchOverlap { overlap: f64 },

    #[error("cat branches have unequal {what}")]
    BranchMismatch { what: &'static str },

    #[error(
        "window [{xmin}, {xmax}] x [{pmin}, {pmax}] too small; suggested \
         [{sxmin}, {sxmax}] x [{spmin}, {spmax}]",
        xmin = have.xmin, xmax = have.xmax, pmin = have.pmin, pmax = have.pmax,
        sxmin = suggested.xmin, sxmax = suggested.xmax,
        spmin = suggested.pmin, spmax = suggested.pmax
    )]
    WindowTooSmall {
        have: crate::grid::Window,
        suggested: crate::grid::Window,
    },

    #[error("incompatible grid: {0}")]
    GridShape(String),

    #[error("integration unstable: {0}")]
    Unstable(String),

    #[error("fringe period not resolved: {samples:.2} samples per fringe (need at least 8)")]
    FringeUnresolved { samples: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("distributions do not share a support grid")]
    SupportMismatch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {value}") })
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be non-negative and finite, got {value}") })
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {value}") })
    }
}
