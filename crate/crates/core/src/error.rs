use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incompatible coset structure: {0}")]
    IncompatibleCosets(String),
    #[error("precision underflow: result precision {prec} does not exceed its valuation {valuation}")]
    PrecisionUnderflow { prec: String, valuation: String },
    #[error("insufficient precision: need {needed}, have {have}")]
    InsufficientPrecision { needed: String, have: String },
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("Gamma pole in Rankin-Cohen coefficient: {0}")]
    GammaPole(String),
    #[error("plus-space support violated at exponent {0}")]
    PlusSpaceViolation(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("point too close to a Heegner geodesic (distance {distance:e}, guard {guard:e})")]
    NearGeodesic { distance: f64, guard: f64 },
    #[error("tail bound {bound:e} exceeds tolerance {tol:e}")]
    TailNotClosed { bound: f64, tol: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
