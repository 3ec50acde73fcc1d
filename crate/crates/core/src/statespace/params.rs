// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Parametrizations of the admissible coefficients on each built-in family.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Family, StateSpace};
use crate::error::{Error, Result};
use crate::generator::ModelCoefficients;
use crate::poly::Polynomial;

/// `a(x) = (1 - x^T Q x) α + c(x)`, `b(x) = β + B x`, with
/// `c(x) = Σ_{kl} Γ_kl Q S_k x x^T S_l^T Q` and `S_k = E_ij - E_ji` for
/// `i < j` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadricParams {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    /// Empty means zero.
    #[serde(rename = "Gamma", default)]
    pub gamma: Vec<Vec<f64>>,
}

/// Coefficients on `[0,1]^m × R^n_+`; `Psi` is `m × n` with columns `ψ_(j)`,
/// `Pi` is `n × n` with columns `π_(j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxOrthantParams {
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<Vec<f64>>,
    #[serde(default)]
    pub phi: Vec<f64>,
    /// Empty means zero.
    #[serde(rename = "Psi", default)]
    pub psi: Vec<Vec<f64>>,
    /// Empty means zero.
    #[serde(rename = "Pi", default)]
    pub pi: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

/// `a_ij = -α_ij x_i x_j` (`i != j`), `a_ii = Σ_{j≠i} α_ij x_i x_j`, `b = β + B x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexParams {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Quadric(QuadricParams),
    BoxOrthant(BoxOrthantParams),
    Simplex(SimplexParams),
}

impl From<QuadricParams> for ModelParams {
    fn from(p: QuadricParams) -> Self {
        ModelParams::Quadric(p)
    }
}

impl From<BoxOrthantParams> for ModelParams {
    fn from(p: BoxOrthantParams) -> Self {
        ModelParams::BoxOrthant(p)
    }
}

impl From<SimplexParams> for ModelParams {
    fn from(p: SimplexParams) -> Self {
        ModelParams::Simplex(p)
    }
}

pub(crate) fn matrix(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    name: &str,
) -> Result<DMatrix<f64>> {
    if rows.is_empty() && (nrows == 0 || ncols == 0) {
        return Ok(DMatrix::zeros(nrows, ncols));
    }
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidParameters(format!(
            "{name} must be {nrows}x{ncols}"
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "{name} has non-finite entries"
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Like [`matrix`], but an empty input stands for the zero matrix.
pub(crate) fn matrix_or_zero(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    name: &str,
) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        Ok(DMatrix::zeros(nrows, ncols))
    } else {
        matrix(rows, nrows, ncols, name)
    }
}

pub(crate) fn vector(v: &[f64], n: usize, name: &str) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(Error::InvalidParameters(format!(
            "{name} must have length {n}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "{name} has non-finite entries"
        )));
    }
    Ok(DVector::from_column_slice(v))
}

pub(crate) fn require_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..i {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::InvalidParameters(format!(
                    "{name} must be symmetric"
                )));
            }
        }
    }
    Ok(())
}

/// Index pairs `(i, j)`, `i < j`, of the skew-symmetric basis `S_k`.
pub(crate) fn skew_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            out.push((i, j));
        }
    }
    out
}

/// `S_k` as a dense matrix.
pub(crate) fn skew_matrix(d: usize, (i, j): (usize, usize)) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(d, d);
    s[(i, j)] = 1.0;
    s[(j, i)] = -1.0;
    s
}

pub(crate) struct QuadricMatrices {
    pub q: Vec<f64>,
    pub alpha: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub b: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
}

pub(crate) fn quadric_matrices(q_diag: &[f64], p: &QuadricParams) -> Result<QuadricMatrices> {
    let d = q_diag.len();
    let k = d * (d - 1) / 2;
    let alpha = matrix(&p.alpha, d, d, "alpha")?;
    require_symmetric(&alpha, "alpha")?;
    let gamma = matrix_or_zero(&p.gamma, k, k, "Gamma")?;
    require_symmetric(&gamma, "Gamma")?;
    Ok(QuadricMatrices {
        q: q_diag.to_vec(),
        alpha,
        beta: vector(&p.beta, d, "beta")?,
        b: matrix(&p.b, d, d, "B")?,
        gamma,
    })
}

pub(crate) struct BoxMatrices {
    pub m: usize,
    pub n: usize,
    pub gamma: DVector<f64>,
    pub alpha: DMatrix<f64>,
    pub phi: DVector<f64>,
    pub psi: DMatrix<f64>,
    pub pi: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub b: DMatrix<f64>,
}

pub(crate) fn box_matrices(m: usize, n: usize, p: &BoxOrthantParams) -> Result<BoxMatrices> {
    let d = m + n;
    let alpha = matrix_or_zero(&p.alpha, n, n, "alpha")?;
    require_symmetric(&alpha, "alpha")?;
    Ok(BoxMatrices {
        m,
        n,
        gamma: vector(&p.gamma, m, "gamma")?,
        alpha,
        phi: vector(&p.phi, n, "phi")?,
        psi: matrix_or_zero(&p.psi, m, n, "Psi")?,
        pi: matrix_or_zero(&p.pi, n, n, "Pi")?,
        beta: vector(&p.beta, d, "beta")?,
        b: matrix(&p.b, d, d, "B")?,
    })
}

pub(crate) struct SimplexMatrices {
    pub alpha: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub b: DMatrix<f64>,
}

pub(crate) fn simplex_matrices(d: usize, p: &SimplexParams) -> Result<SimplexMatrices> {
    Ok(SimplexMatrices {
        alpha: matrix(&p.alpha, d, d, "alpha")?,
        beta: vector(&p.beta, d, "beta")?,
        b: matrix(&p.b, d, d, "B")?,
    })
}

fn affine_drift(beta: &DVector<f64>, b: &DMatrix<f64>) -> Vec<Polynomial> {
    (0..beta.len())
        .map(|i| {
            let row: Vec<f64> = b.row(i).iter().copied().collect();
            Polynomial::affine(beta[i], &row)
        })
        .collect()
}

fn family_mismatch(ss: &StateSpace) -> Error {
    Error::InvalidParameters(format!(
        "parameters do not match the {} state space",
        family_name(ss.family())
    ))
}

pub(crate) fn family_name(f: &Family) -> &'static str {
    match f {
        Family::Euclidean { .. } => "euclidean",
        Family::Quadric { .. } => "quadric",
        Family::BoxOrthant { .. } => "box_orthant",
        Family::Simplex { .. } => "simplex",
    }
}

/// Explicit `a(x)` and `b(x)` for the parametrized family.
pub fn assemble_model(ss: &StateSpace, params: &ModelParams) -> Result<ModelCoefficients> {
    let d = ss.dim();
    let x = |i: usize| Polynomial::variable(d, i);
    match (ss.family(), params) {
        (Family::Quadric { q_diag, .. }, ModelParams::Quadric(p)) => {
            let mats = quadric_matrices(q_diag, p)?;
            let p_poly = &ss.inequalities()[0];
            // 1 - x^T Q x irrespective of orientation.
            let one_minus = match &ss.family() {
                Family::Quadric {
                    orientation: super::Orientation::Outside,
                    ..
                } => -p_poly,
                _ => p_poly.clone(),
            };
            // v_k = Q S_k x as a vector of linear polynomials.
            let pairs = skew_pairs(d);
            let v: Vec<Vec<Polynomial>> = pairs
                .iter()
                .map(|&(i, j)| {
                    let mut comp = vec![Polynomial::zero(d); d];
                    comp[i] = x(j).scale(mats.q[i]);
                    comp[j] = x(i).scale(-mats.q[j]);
                    comp
                })
                .collect();
            let mut a = vec![vec![Polynomial::zero(d); d]; d];
            for r in 0..d {
                for c in 0..d {
                    let mut entry = one_minus.scale(mats.alpha[(r, c)]);
                    for (k, vk) in v.iter().enumerate() {
                        for (l, vl) in v.iter().enumerate() {
                            let g = mats.gamma[(k, l)];
                            if g != 0.0 {
                                entry = &entry + &(&vk[r] * &vl[c]).scale(g);
                            }
                        }
                    }
                    a[r][c] = entry;
                }
            }
            symmetrize(&mut a);
            ModelCoefficients::new(a, affine_drift(&mats.beta, &mats.b))
        }
        (Family::BoxOrthant { m, n }, ModelParams::BoxOrthant(p)) => {
            let mats = box_matrices(*m, *n, p)?;
            if let Some(i) = mats.gamma.iter().position(|&g| g < 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "gamma[{i}] = {} must be nonnegative",
                    mats.gamma[i]
                )));
            }
            let mut a = vec![vec![Polynomial::zero(d); d]; d];
            for i in 0..*m {
                a[i][i] = (&x(i) - &x(i).pow(2)).scale(mats.gamma[i]);
            }
            for jj in 0..*n {
                let j = m + jj;
                let mut lin = Polynomial::constant(d, mats.phi[jj]);
                for i in 0..*m {
                    lin = &lin + &x(i).scale(mats.psi[(i, jj)]);
                }
                for kk in 0..*n {
                    lin = &lin + &x(m + kk).scale(mats.pi[(kk, jj)]);
                }
                a[j][j] = &x(j).pow(2).scale(mats.alpha[(jj, jj)]) + &(&x(j) * &lin);
                for kk in 0..*n {
                    if kk != jj {
                        a[j][m + kk] = (&x(j) * &x(m + kk)).scale(mats.alpha[(jj, kk)]);
                    }
                }
            }
            ModelCoefficients::new(a, affine_drift(&mats.beta, &mats.b))
        }
        (Family::Simplex { .. }, ModelParams::Simplex(p)) => {
            let mats = simplex_matrices(d, p)?;
            require_symmetric(&mats.alpha, "alpha")?;
            let mut a = vec![vec![Polynomial::zero(d); d]; d];
            for i in 0..d {
                for j in 0..d {
                    if i == j {
                        continue;
                    }
                    let term = (&x(i) * &x(j)).scale(mats.alpha[(i, j)]);
                    a[i][i] = &a[i][i] + &term;
                    a[i][j] = -&term;
                }
            }
            symmetrize(&mut a);
            ModelCoefficients::new(a, affine_drift(&mats.beta, &mats.b))
        }
        _ => Err(family_mismatch(ss)),
    }
}

/// Copies the upper triangle to the lower one so symmetry is exact.
fn symmetrize(a: &mut [Vec<Polynomial>]) {
    for i in 0..a.len() {
        for j in 0..i {
            a[i][j] = a[j][i].clone();
        }
    }
}
