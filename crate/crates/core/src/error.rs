// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exact division failed: {0}")]
    DivisionFailure(String),

    #[error("polynomial degree {degree} exceeds basis degree {max}")]
    DegreeTooHigh { degree: i32, max: u32 },

    #[error(
        "generator image of basis monomial {monomial} has degree {degree} > {max} after reduction"
    )]
    NotPolynomialOnE {
        monomial: String,
        degree: i32,
        max: u32,
    },

    #[error("point {point:?} lies outside the state space (constraint violation {violation:e})")]
    PointOutsideStateSpace { point: Vec<f64>, violation: f64 },

    #[error("matrix exponential overflow (non-finite entries)")]
    Overflow,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigendecomposition produced non-finite values")]
    Eigendecomposition,

    #[error("moment ODE step size underflow at s = {0}")]
    StepSizeUnderflow(f64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("non-finite state at path {path}, step {step}")]
    NonFiniteState { path: usize, step: usize },

    #[error("path set is empty")]
    EmptyPathSet,

    #[error("state-price density is not positive: p = {value:e} at {point:?}")]
    NonPositiveDensity { value: f64, point: Vec<f64> },

    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
