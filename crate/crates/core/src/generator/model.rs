// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::poly::{MultiIndex, Polynomial};

/// Diffusion matrix `a` (symmetric, entries of degree <= 2) and drift `b`
/// (entries of degree <= 1) of `dX = b(X) dt + σ(X) dW` with `σσ^T = a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients", into = "RawCoefficients")]
pub struct ModelCoefficients {
    dim: usize,
    a: Vec<Vec<Polynomial>>,
    b: Vec<Polynomial>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficients {
    a: Vec<Vec<Polynomial>>,
    b: Vec<Polynomial>,
}

impl TryFrom<RawCoefficients> for ModelCoefficients {
    type Error = Error;
    fn try_from(raw: RawCoefficients) -> Result<Self> {
        ModelCoefficients::new(raw.a, raw.b)
    }
}

impl From<ModelCoefficients> for RawCoefficients {
    fn from(m: ModelCoefficients) -> Self {
        RawCoefficients { a: m.a, b: m.b }
    }
}

impl ModelCoefficients {
    pub fn new(a: Vec<Vec<Polynomial>>, b: Vec<Polynomial>) -> Result<Self> {
        let dim = b.len();
        if dim == 0 {
            return Err(Error::InvalidInput(
                "model dimension must be positive".into(),
            ));
        }
        check_dim(dim, a.len())?;
        for (i, row) in a.iter().enumerate() {
            check_dim(dim, row.len())?;
            for (j, aij) in row.iter().enumerate() {
                check_dim(dim, aij.dim())?;
                if aij.degree() > 2 {
                    return Err(Error::InvalidInput(format!(
                        "a[{i}][{j}] has degree {} > 2",
                        aij.degree()
                    )));
                }
                if j < i && *aij != a[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "a is not symmetric: a[{i}][{j}] != a[{j}][{i}]"
                    )));
                }
            }
        }
        for (i, bi) in b.iter().enumerate() {
            check_dim(dim, bi.dim())?;
            if bi.degree() > 1 {
                return Err(Error::InvalidInput(format!(
                    "b[{i}] has degree {} > 1",
                    bi.degree()
                )));
            }
        }
        Ok(ModelCoefficients { dim, a, b })
    }

    /// One-dimensional model from scalar `a(x)` and `b(x)`.
    pub fn scalar(a: Polynomial, b: Polynomial) -> Result<Self> {
        Self::new(vec![vec![a]], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &[Vec<Polynomial>] {
        &self.a
    }

    pub fn b(&self) -> &[Polynomial] {
        &self.b
    }

    pub fn diffusion_at(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.a[i][j].eval(x))
    }

    pub fn drift_at(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim, self.b.iter().map(|bi| bi.eval(x)))
    }

    /// `Gp = ½ tr(a ∇²p) + b^T ∇p`, computed symbolically.
    pub fn generator_apply(&self, p: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim, p.dim())?;
        let mut out = Polynomial::zero(self.dim);
        let grad = p.grad();
        for i in 0..self.dim {
            if grad[i].is_zero() {
                continue;
            }
            out = &out + &(&self.b[i] * &grad[i]);
            for j in 0..self.dim {
                let second = grad[i].derivative(j);
                if second.is_zero() || self.a[i][j].is_zero() {
                    continue;
                }
                out = &out + &(&self.a[i][j] * &second).scale(0.5);
            }
        }
        Ok(out)
    }

    /// `a(x) ∇p(x)` as a vector of polynomials.
    pub fn diffusion_times_gradient(&self, p: &Polynomial) -> Result<Vec<Polynomial>> {
        check_dim(self.dim, p.dim())?;
        let grad = p.grad();
        Ok((0..self.dim)
            .map(|i| {
                let mut acc = Polynomial::zero(self.dim);
                for (j, gj) in grad.iter().enumerate() {
                    acc = &acc + &(&self.a[i][j] * gj);
                }
                acc
            })
            .collect())
    }

    /// Fast evaluator for simulation loops.
    pub fn compile(&self) -> CompiledModel {
        CompiledModel::new(self)
    }
}

/// Coefficients of `a` and `b` against the fixed monomial vector
/// `z(x) = (1, x_1, ..., x_d, x_i x_j for i <= j)`.
#[derive(Clone, Debug)]
pub struct CompiledModel {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    a_coef: Vec<f64>,
    b_coef: Vec<f64>,
}

impl CompiledModel {
    fn new(model: &ModelCoefficients) -> Self {
        let d = model.dim;
        let mut pairs = Vec::new();
        for i in 0..d {
            for j in i..d {
                pairs.push((i, j));
            }
        }
        let width = 1 + d + pairs.len();
        let slot = |m: &MultiIndex| -> usize {
            let e = m.exponents();
            match m.degree() {
                0 => 0,
                1 => 1 + e.iter().position(|&k| k == 1).unwrap(),
                _ => {
                    let idx: Vec<usize> = e
                        .iter()
                        .enumerate()
                        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
                        .collect();
                    1 + d + pairs.iter().position(|&p| p == (idx[0], idx[1])).unwrap()
                }
            }
        };
        let mut a_coef = vec![0.0; d * d * width];
        for i in 0..d {
            for j in 0..d {
                for (m, c) in model.a[i][j].terms() {
                    a_coef[(i * d + j) * width + slot(m)] += c;
                }
            }
        }
        let mut b_coef = vec![0.0; d * width];
        for i in 0..d {
            for (m, c) in model.b[i].terms() {
                b_coef[i * width + slot(m)] += c;
            }
        }
        CompiledModel {
            dim: d,
            pairs,
            a_coef,
            b_coef,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn features(&self, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.push(1.0);
        z.extend_from_slice(x);
        z.extend(self.pairs.iter().map(|&(i, j)| x[i] * x[j]));
    }

    /// Writes `a(x)` (row-major, `d*d`) and `b(x)` into the output slices.
    pub fn eval_into(&self, x: &[f64], z: &mut Vec<f64>, a_out: &mut [f64], b_out: &mut [f64]) {
        self.features(x, z);
        let w = z.len();
        for (k, out) in a_out.iter_mut().enumerate() {
            *out = dot(&self.a_coef[k * w..(k + 1) * w], z);
        }
        for (k, out) in b_out.iter_mut().enumerate() {
            *out = dot(&self.b_coef[k * w..(k + 1) * w], z);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
