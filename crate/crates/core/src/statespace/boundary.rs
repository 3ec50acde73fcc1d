// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Boundary attainment for a stratum `{p = 0}` through the sign of
//! `e = 2 Gp - h^T ∇p`, where `a∇p = h p` on `M`.

use serde::{Deserialize, Serialize};

use super::sampling::{boundary_samples, SampleConfig};
use super::validate::SAMPLE_MARGIN;
use super::{Family, StateSpace};
use crate::error::{check_dim, Error, Result};
use crate::generator::ModelCoefficients;
use crate::poly::{divide_exact, reduce, reduces_to_zero, Polynomial};

/// Interior offsets of the collar around a boundary stratum.
pub const COLLAR_OFFSETS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// `h` with `a∇p = h p` modulo the equality generators, by exact division.
pub fn compute_h(
    model: &ModelCoefficients,
    ss: &StateSpace,
    p: &Polynomial,
) -> Result<Vec<Polynomial>> {
    check_dim(ss.dim(), model.dim())?;
    check_dim(ss.dim(), p.dim())?;
    let modulus = ss.equalities();
    let agp = model.diffusion_times_gradient(p)?;
    let mut h = Vec::with_capacity(agp.len());
    for f in &agp {
        let scale = f.max_abs_coeff().max(1.0);
        let f = f.chop(1e-13 * scale);
        h.push(divide_exact(&f, p, modulus)?);
    }
    // Re-multiplication check: a∇p - h p must vanish modulo Q.
    for (f, hi) in agp.iter().zip(&h) {
        let diff = f - &(hi * p);
        let tol = 1e-12 * f.max_abs_coeff().max(1.0);
        if !reduces_to_zero(&diff, modulus, tol)? {
            return Err(Error::DivisionFailure(format!(
                "a grad p - h p does not reduce to zero for p = {p}"
            )));
        }
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BoundaryVerdict {
    /// `e >= margin` near the stratum: `p(X_t) > 0` for all `t > 0`.
    NonAttainStrict,
    /// `e ≡ 0` on `M ∩ {p = 0}`: the boundary is not attained.
    NonAttainCritical,
    /// `Gp(x̄) >= 0` and `e(x̄) < 0` at a boundary point: attained with positive probability.
    Attain {
        witness: Vec<f64>,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryClassification {
    pub constraint: String,
    #[serde(flatten)]
    pub verdict: BoundaryVerdict,
    /// `h` as strings, when the division succeeded.
    pub h: Option<Vec<String>>,
    /// `e = 2Gp - h^T ∇p`.
    pub e: Option<String>,
    pub min_e_boundary: Option<f64>,
    pub min_e_collar: Option<f64>,
    pub boundary_samples: usize,
    pub collar_samples: usize,
}

impl BoundaryClassification {
    fn inconclusive(p: &Polynomial, reason: String) -> Self {
        BoundaryClassification {
            constraint: p.to_string(),
            verdict: BoundaryVerdict::Inconclusive { reason },
            h: None,
            e: None,
            min_e_boundary: None,
            min_e_collar: None,
            boundary_samples: 0,
            collar_samples: 0,
        }
    }
}

/// Unit inward direction `∇p(x)`, projected onto the tangent space of `M`.
fn inward_direction(ss: &StateSpace, p: &Polynomial, x: &[f64]) -> Option<Vec<f64>> {
    let mut g: Vec<f64> = p.grad().iter().map(|gi| gi.eval(x)).collect();
    if let Family::Simplex { .. } = ss.family() {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter_mut().for_each(|v| *v -= mean);
    }
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(g.into_iter().map(|v| v / norm).collect())
}

pub fn boundary_classify(
    model: &ModelCoefficients,
    ss: &StateSpace,
    p: &Polynomial,
    cfg: &SampleConfig,
) -> BoundaryClassification {
    let Some(k) = ss.inequalities().iter().position(|q| q == p) else {
        return BoundaryClassification::inconclusive(
            p,
            "p is not an inequality generator of E".into(),
        );
    };
    let h = match compute_h(model, ss, p) {
        Ok(h) => h,
        Err(e) => return BoundaryClassification::inconclusive(p, format!("compute_h failed: {e}")),
    };
    let gp = match model.generator_apply(p) {
        Ok(g) => g,
        Err(e) => return BoundaryClassification::inconclusive(p, e.to_string()),
    };
    let grad = p.grad();
    let mut e_poly = gp.scale(2.0);
    for (hi, gi) in h.iter().zip(&grad) {
        e_poly = &e_poly - &(hi * gi);
    }
    let e_poly = e_poly.chop(1e-13 * e_poly.max_abs_coeff().max(1.0));

    let boundary = boundary_samples(ss, k, cfg);
    let mut collar = Vec::new();
    for x in &boundary {
        let Some(n) = inward_direction(ss, p, x) else {
            continue;
        };
        for &delta in &COLLAR_OFFSETS {
            let mut y: Vec<f64> = x.iter().zip(&n).map(|(xi, ni)| xi + delta * ni).collect();
            ss.project(&mut y);
            if p.eval(&y) > 0.0 && ss.contains(&y, 0.0) {
                collar.push(y);
            }
        }
    }
    let min_over = |pts: &[Vec<f64>]| {
        pts.iter()
            .map(|x| e_poly.eval(x))
            .fold(f64::INFINITY, f64::min)
    };
    let min_b = min_over(&boundary);
    let min_c = min_over(&collar);

    let mut modulus = vec![p.clone()];
    modulus.extend(ss.equalities().iter().cloned());
    let critical = reduce(&e_poly, &modulus)
        .map(|r| {
            r.remainder
                .chop(1e-12 * e_poly.max_abs_coeff().max(1.0))
                .is_zero()
        })
        .unwrap_or(false);

    let verdict = if min_b >= SAMPLE_MARGIN && min_c >= SAMPLE_MARGIN {
        BoundaryVerdict::NonAttainStrict
    } else if critical {
        BoundaryVerdict::NonAttainCritical
    } else if let Some(x) = boundary
        .iter()
        .find(|x| gp.eval(x) >= 0.0 && e_poly.eval(x) < -SAMPLE_MARGIN)
    {
        BoundaryVerdict::Attain { witness: x.clone() }
    } else {
        BoundaryVerdict::Inconclusive {
            reason: format!("min e on boundary {min_b:e}, on collar {min_c:e}"),
        }
    };

    BoundaryClassification {
        constraint: p.to_string(),
        verdict,
        h: Some(h.iter().map(|hi| hi.to_string()).collect()),
        e: Some(e_poly.to_string()),
        min_e_boundary: min_b.is_finite().then_some(min_b),
        min_e_collar: min_c.is_finite().then_some(min_c),
        boundary_samples: boundary.len(),
        collar_samples: collar.len(),
    }
}
