use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("q1 = {q} lies outside the model domain [{lo}, {hi}]")]
    Domain { q: f64, lo: f64, hi: f64 },

    #[error("invalid model: {0}")]
    Construction(String),

    #[error("equilibrium is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("no homoclinic loop on q2 = 0: radicand {radicand:e} < 0 at q1 = {q}")]
    NoLoop { q: f64, radicand: f64 },

    #[error("V1 is inconsistent with the loop profile (residual {residual:e} at q1 = {q})")]
    InconsistentV1 { q: f64, residual: f64 },

    #[error("Riccati initial value has no real root (discriminant {discriminant:e})")]
    NoRealSlope { discriminant: f64 },

    #[error("solution left graph form near q1 = {q} (|T| = {value:e})")]
    BlowUp { q: f64, value: f64 },

    #[error("integration failed at {at}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("{0}")]
    Unsupported(String),
}
