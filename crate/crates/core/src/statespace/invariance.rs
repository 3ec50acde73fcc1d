// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Sampled and symbolic checks of the necessary and sufficient invariance
//! conditions for `E`.

use super::boundary::compute_h;
use super::report::{ValidationReport, Witness};
use super::sampling::{boundary_samples, interior_samples, SampleConfig};
use super::validate::SAMPLE_MARGIN;
use super::StateSpace;
use crate::error::{check_dim, Result};
use crate::generator::ModelCoefficients;
use crate::linalg::min_eigenvalue;
use crate::poly::{reduces_to_zero, Polynomial};

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Absolute margin scaled with the size of `x`, so quadratic quantities on
/// unbounded strata are compared on a relative footing.
fn margin_at(x: &[f64]) -> f64 {
    SAMPLE_MARGIN * (1.0 + norm_sq(x))
}

struct Worst {
    value: f64,
    point: Vec<f64>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: f64::NEG_INFINITY,
            point: Vec::new(),
        }
    }

    /// Tracks the largest `value - margin`.
    fn offer(&mut self, excess: f64, x: &[f64]) {
        if excess > self.value {
            self.value = excess;
            self.point = x.to_vec();
        }
    }
}

fn eval_vec(v: &[Polynomial], x: &[f64]) -> f64 {
    v.iter().map(|p| p.eval(x).powi(2)).sum::<f64>().sqrt()
}

/// `a∇p = 0` and `Gp >= 0` on `E ∩ {p = 0}` for `p ∈ P`; `a∇q = 0` and
/// `Gq = 0` on `E` for `q ∈ Q`.
pub fn check_necessary(
    model: &ModelCoefficients,
    ss: &StateSpace,
    cfg: &SampleConfig,
) -> Result<ValidationReport> {
    check_dim(ss.dim(), model.dim())?;
    let mut r = ValidationReport::new();
    for (k, p) in ss.inequalities().iter().enumerate() {
        let agp = model.diffusion_times_gradient(p)?;
        let gp = model.generator_apply(p)?;
        let mut tangency = Worst::new();
        let mut drift = Worst::new();
        for x in boundary_samples(ss, k, cfg) {
            tangency.offer(eval_vec(&agp, &x) - margin_at(&x), &x);
            drift.offer(-gp.eval(&x) - margin_at(&x), &x);
        }
        let name = format!("p = {p}");
        if tangency.value > 0.0 {
            r.fail(
                "necessary.tangency",
                Witness::Point { x: tangency.point },
                format!("{name}: |a grad p| exceeds tolerance on the boundary"),
            );
        } else {
            r.pass("necessary.tangency", format!("{name}: sampled"));
        }
        if drift.value > 0.0 {
            r.fail(
                "necessary.inward_drift",
                Witness::Point { x: drift.point },
                format!("{name}: Gp < 0 on the boundary"),
            );
        } else {
            r.pass("necessary.inward_drift", format!("{name}: sampled"));
        }
    }
    if !ss.equalities().is_empty() {
        let pts = interior_samples(ss, cfg);
        for q in ss.equalities() {
            let agq = model.diffusion_times_gradient(q)?;
            let gq = model.generator_apply(q)?;
            let mut tangency = Worst::new();
            let mut drift = Worst::new();
            for x in &pts {
                tangency.offer(eval_vec(&agq, x) - margin_at(x), x);
                drift.offer(gq.eval(x).abs() - margin_at(x), x);
            }
            let name = format!("q = {q}");
            if tangency.value > 0.0 {
                r.fail(
                    "necessary.manifold_tangency",
                    Witness::Point { x: tangency.point },
                    format!("{name}: a grad q != 0 on E"),
                );
            } else {
                r.pass("necessary.manifold_tangency", format!("{name}: sampled"));
            }
            if drift.value > 0.0 {
                r.fail(
                    "necessary.manifold_drift",
                    Witness::Point { x: drift.point },
                    format!("{name}: Gq != 0 on E"),
                );
            } else {
                r.pass("necessary.manifold_drift", format!("{name}: sampled"));
            }
        }
    }
    Ok(r)
}

/// `a ∈ S^+` on `E`; `a∇p = h p` on `M` with `Gp > 0` on `E ∩ {p = 0}`;
/// `a∇q = 0` and `Gq = 0` on `M`.
pub fn check_sufficient(
    model: &ModelCoefficients,
    ss: &StateSpace,
    cfg: &SampleConfig,
) -> Result<ValidationReport> {
    check_dim(ss.dim(), model.dim())?;
    let mut r = ValidationReport::new();

    let mut pts = interior_samples(ss, cfg);
    for k in 0..ss.inequalities().len() {
        pts.extend(boundary_samples(ss, k, cfg));
    }
    let mut psd = Worst::new();
    for x in &pts {
        let e = min_eigenvalue(&model.diffusion_at(x));
        psd.offer(-e - margin_at(x), x);
    }
    if psd.value > 0.0 {
        r.fail(
            "sufficient.psd",
            Witness::Point { x: psd.point },
            "a(x) has a negative eigenvalue",
        );
    } else {
        r.pass("sufficient.psd", format!("sampled at {} points", pts.len()));
    }

    for (k, p) in ss.inequalities().iter().enumerate() {
        let name = format!("p = {p}");
        let samples = boundary_samples(ss, k, cfg);
        match compute_h(model, ss, p) {
            Ok(_) => r.pass(
                "sufficient.tangency_exact",
                format!("{name}: a grad p = h p on M"),
            ),
            Err(_) => {
                let agp = model.diffusion_times_gradient(p)?;
                let mut worst = Worst::new();
                for x in &samples {
                    worst.offer(eval_vec(&agp, x) - margin_at(x), x);
                }
                if worst.value > 0.0 {
                    r.fail(
                        "sufficient.tangency_exact",
                        Witness::Point { x: worst.point },
                        format!("{name}: a grad p does not vanish on the boundary"),
                    );
                } else {
                    r.inconclusive(
                        "sufficient.tangency_exact",
                        format!("{name}: exact division by p failed"),
                    );
                }
            }
        }
        let gp = model.generator_apply(p)?;
        let mut strict = Worst::new();
        for x in &samples {
            strict.offer(margin_at(x) - gp.eval(x), x);
        }
        if strict.value >= 0.0 {
            r.fail(
                "sufficient.strict_drift",
                Witness::Point { x: strict.point },
                format!("{name}: Gp is not strictly positive on the boundary"),
            );
        } else {
            r.pass("sufficient.strict_drift", format!("{name}: sampled"));
        }
    }

    let modulus = ss.equalities();
    for q in modulus {
        let name = format!("q = {q}");
        let mut ok = true;
        for f in model
            .diffusion_times_gradient(q)?
            .iter()
            .chain([&model.generator_apply(q)?])
        {
            if !reduces_to_zero(f, modulus, 1e-12 * f.max_abs_coeff().max(1.0))? {
                ok = false;
            }
        }
        if ok {
            r.pass(
                "sufficient.manifold",
                format!("{name}: exact reduction modulo Q"),
            );
        } else {
            let pts = interior_samples(ss, cfg);
            let agq = model.diffusion_times_gradient(q)?;
            let gq = model.generator_apply(q)?;
            let mut worst = Worst::new();
            for x in &pts {
                worst.offer(eval_vec(&agq, x).max(gq.eval(x).abs()) - margin_at(x), x);
            }
            let witness = if worst.value > 0.0 {
                worst.point
            } else {
                pts.first().cloned().unwrap_or_default()
            };
            r.fail(
                "sufficient.manifold",
                Witness::Point { x: witness },
                format!("{name}: a grad q or Gq does not vanish on M"),
            );
        }
    }
    Ok(r)
}
