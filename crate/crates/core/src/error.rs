use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KwError {
    #[error("evaluation at t = {t:e} is within the guard radius of the singular point t = {pole:e}")]
    SingularLocus { t: f64, pole: f64 },

    #[error("invalid twisting parameter lambda = {0}")]
    InvalidLambda(f64),

    #[error("point is not on the unit sphere (|x| = {0})")]
    NonUnitPoint(f64),

    #[error("t~f has limits ({at_zero}, {at_infinity}); both must be equilibrium values 0 or 1")]
    NoLimit { at_zero: f64, at_infinity: f64 },

    #[error("profile has a pole at t = {pole:e} inside the integration domain")]
    PoleInDomain { pole: f64 },

    #[error("finite-difference stencil around x leaves the admissible domain: {0}")]
    DomainGuard(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("order scan needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, KwError>;
