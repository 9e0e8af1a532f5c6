use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("{what} is outside its domain (value {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("target radius {target} m is below the feasible radius {feasible} m")]
    InfeasibleTarget { target: f64, feasible: f64 },

    #[error("the intensity closed form only covers radial index p = 0, got p = {0}")]
    UnsupportedRadialIndex(u32),

    #[error("multiplexing rows are not orthonormal (|<q1, q2>| = {0})")]
    NonOrthonormal(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
