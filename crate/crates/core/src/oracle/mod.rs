//! Independent, slow verification paths.
//!
//! Hull membership here is a linear feasibility problem solved by an
//! in-crate simplex, so none of these checks share code or failure modes
//! with the halfspace machinery in [`crate::geometry`].

pub mod audit;
mod membership;
pub mod simplex;

use thiserror::Error;

pub use audit::{audit_trajectory, contraction_ratios, AuditReport, Status};
pub use membership::{
    hull_membership, kernel_membership_bruteforce, sorted_trim_interval, MembershipCertificate,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("solver failure: {0}")]
    Solver(String),
}

impl From<simplex::LpError> for OracleError {
    fn from(e: simplex::LpError) -> Self {
        OracleError::Solver(e.to_string())
    }
}
