use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rho = {0} is outside [0, {max}]", max = crate::channel::RHO_MAX)]
    InvalidRho(f64),

    #[error("{what} = {value} is not a probability in [0, 1]")]
    ProbabilityOutOfRange { what: &'static str, value: f64 },

    #[error("channel has no outputs")]
    EmptyChannel,

    #[error("output row {row}: W(y|{input}) = {value} is not a probability")]
    InvalidLikelihood { row: usize, input: u8, value: f64 },

    #[error("likelihoods W(.|{input}) sum to {sum}, expected 1 within {tol:e}")]
    RowSum { input: u8, sum: f64, tol: f64 },

    #[error("invalid Z-representation: {0}")]
    InvalidZRep(String),

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("E0 target {target} is outside [0, rho = {rho}]")]
    TargetOutOfRange { target: f64, rho: f64 },

    #[error("rho = {rho} violates the requirement {requirement}")]
    RegimeViolation { rho: f64, requirement: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
