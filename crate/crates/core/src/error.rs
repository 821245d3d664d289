use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A one-step scheme whose implicit denominator vanishes.
    #[error("singular step: {scheme} denominator vanishes at mu*dt = {mu_dt}")]
    SingularStep { scheme: &'static str, mu_dt: f64 },

    /// The QPI block system has no unique solution.
    #[error("singular block: QPI block system is singular at mu*dt = {mu_dt}")]
    SingularBlock { mu_dt: f64 },

    /// A stability condition cannot be evaluated.
    #[error("singular condition: {condition} denominator vanishes at mu*dt = {mu_dt}")]
    SingularCondition { condition: &'static str, mu_dt: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
