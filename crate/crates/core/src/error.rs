use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("total charge must be positive (q1 = {q1}, q2 = {q2})")]
    ZeroTotalCharge { q1: f64, q2: f64 },
    #[error("charges must be finite and non-negative (q1 = {q1}, q2 = {q2})")]
    NegativeCharge { q1: f64, q2: f64 },
    #[error("fixed-charge protocol needs q1 > q2 > 0 (q1 = {q1}, q2 = {q2})")]
    ChargeOrdering { q1: f64, q2: f64 },
    #[error("q2 must be positive, got {0}")]
    NonPositiveQ2(f64),
    #[error("interval halfwidth must lie in (0, π], got {0}")]
    InvalidHalfwidth(f64),
    #[error("charge fraction must lie in [0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("angle list is empty")]
    EmptyAngles,
    #[error("separation must lie in [0, π], got {0}")]
    SeparationOutOfRange(f64),
    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("rejection measure must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("trial count must be positive")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
