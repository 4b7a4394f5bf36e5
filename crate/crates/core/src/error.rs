use thiserror::Error;

/// Errors produced by the model, metrology and dynamics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix has a non-finite entry")]
    NonFiniteMatrix,

    #[error("transfer function is singular at omega = {omega:e} (|det| = {det:e})")]
    SingularAtFrequency { omega: f64, det: f64 },

    #[error("output covariance is not invertible at omega = {omega:e}")]
    SingularCovariance { omega: f64 },

    #[error("parameters do not lie on any critical locus: {0}")]
    NotOnCriticalLocus(String),

    #[error("residue does not converge for pole order {order}: deviations {deviations:?}")]
    WrongPoleOrder { order: u32, deviations: Vec<f64> },

    #[error("insufficient data for fit: {usable} usable rows, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("Lindblad form requires non-negative cavity rates, got gamma0 = {gamma0}")]
    GainNotLindblad { gamma0: f64 },

    #[error("Fock cutoff leak: population {population:e} at level n_max (t = {time})")]
    CutoffLeak { population: f64, time: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
