// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Polynomial diffusions: closed-form conditional moments through the
//! generator matrix, state-space admissibility checks, boundary
//! classification, simulation, and pricing applications.

// Index loops mirror the matrix formulas; negated comparisons treat NaN as failure.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod poly;
pub mod pricing;
pub mod simulate;
pub mod statespace;

pub use basis::{Basis, CoordVector};
pub use error::{Error, Result};
pub use generator::{
    generator_matrix, matrix_exp, GeneratorMatrix, ModelCoefficients, PolyDiffusion,
};
pub use poly::{MultiIndex, Polynomial};
pub use statespace::StateSpace;
