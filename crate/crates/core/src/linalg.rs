// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Small symmetric-matrix helpers: spectra, the metric projection onto the
//! PSD cone, and PSD square roots.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest `|A_ij - A_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigendecomposition);
    }
    let e = SymmetricEigen::new(a.clone());
    if e.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigendecomposition);
    }
    Ok(e)
}

/// Smallest eigenvalue of the symmetric part; `+inf` for an empty matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return f64::INFINITY;
    }
    let sym = (a + a.transpose()) * 0.5;
    match eigen(&sym) {
        Ok(e) => e.eigenvalues.min(),
        Err(_) => f64::NAN,
    }
}

/// Largest eigenvalue of the symmetric part; `-inf` for an empty matrix.
pub fn max_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return f64::NEG_INFINITY;
    }
    let sym = (a + a.transpose()) * 0.5;
    match eigen(&sym) {
        Ok(e) => e.eigenvalues.max(),
        Err(_) => f64::NAN,
    }
}

fn symmetrized(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let asym = asymmetry(a);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    Ok((a + a.transpose()) * 0.5)
}

/// Nearest PSD matrix in Frobenius norm: `π(A) = S Λ⁺ S^T`.
pub fn psd_project(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrized(a)?;
    let e = eigen(&sym)?;
    let lambda = e.eigenvalues.map(|v| v.max(0.0));
    let s = &e.eigenvectors;
    Ok(s * DMatrix::from_diagonal(&lambda) * s.transpose())
}

/// Symmetric PSD square root of `π(A)`.
pub fn psd_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrized(a)?;
    let e = eigen(&sym)?;
    let lambda = e.eigenvalues.map(|v| v.max(0.0).sqrt());
    let s = &e.eigenvectors;
    Ok(s * DMatrix::from_diagonal(&lambda) * s.transpose())
}
