// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Admissibility of family parameters. Finite conditions are checked exactly;
//! semi-infinite ones by a certificate where one is available, otherwise by
//! deterministic sampling that can only fail or stay inconclusive.

use nalgebra::{DMatrix, DVector};

use super::params::{
    box_matrices, family_name, quadric_matrices, simplex_matrices, skew_matrix, skew_pairs,
    BoxMatrices, QuadricMatrices, SimplexMatrices,
};
use super::report::{ValidationReport, Witness};
use super::sampling::{boundary_samples, halton, SampleConfig};
use super::{Family, ModelParams, Orientation, StateSpace};
use crate::error::{Error, Result};
use crate::linalg::{max_eigenvalue, min_eigenvalue};

/// Margin for sampled semi-infinite conditions.
pub const SAMPLE_MARGIN: f64 = 1e-9;

fn psd_tol(m: &DMatrix<f64>) -> f64 {
    1e-12 * m.amax().max(1.0)
}

pub fn validate(
    ss: &StateSpace,
    params: &ModelParams,
    cfg: &SampleConfig,
) -> Result<ValidationReport> {
    match (ss.family(), params) {
        (
            Family::Quadric {
                q_diag,
                orientation,
            },
            ModelParams::Quadric(p),
        ) => {
            let mats = quadric_matrices(q_diag, p)?;
            Ok(validate_quadric(ss, &mats, *orientation, cfg))
        }
        (Family::BoxOrthant { m, n }, ModelParams::BoxOrthant(p)) => {
            Ok(validate_box(&box_matrices(*m, *n, p)?, cfg))
        }
        (Family::Simplex { d }, ModelParams::Simplex(p)) => {
            Ok(validate_simplex(&simplex_matrices(*d, p)?))
        }
        _ => Err(Error::InvalidParameters(format!(
            "parameters do not match the {} state space",
            family_name(ss.family())
        ))),
    }
}

fn param(name: String, value: f64) -> Witness {
    Witness::Parameter { name, value }
}

fn validate_simplex(s: &SimplexMatrices) -> ValidationReport {
    let d = s.beta.len();
    let mut r = ValidationReport::new();

    let mut ok = true;
    'sym: for i in 0..d {
        for j in 0..i {
            if s.alpha[(i, j)] != s.alpha[(j, i)] {
                r.fail(
                    "simplex.alpha_symmetric",
                    param(
                        format!("alpha[{i}][{j}] - alpha[{j}][{i}]"),
                        s.alpha[(i, j)] - s.alpha[(j, i)],
                    ),
                    "alpha must be symmetric",
                );
                ok = false;
                break 'sym;
            }
        }
    }
    if ok {
        r.pass("simplex.alpha_symmetric", "exact");
    }

    let neg = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && s.alpha[(i, j)] < 0.0);
    match neg {
        Some((i, j)) => r.fail(
            "simplex.alpha_nonnegative",
            param(format!("alpha[{i}][{j}]"), s.alpha[(i, j)]),
            "off-diagonal alpha must be >= 0",
        ),
        None => r.pass("simplex.alpha_nonnegative", "exact"),
    }

    let beta_sum = s.beta.sum();
    let scale = 1.0 + s.b.amax() * d as f64 + s.beta.amax() * d as f64;
    let bad_col = (0..d)
        .map(|j| (j, s.b.column(j).sum() + beta_sum))
        .find(|&(_, v)| v.abs() > 1e-12 * scale);
    match bad_col {
        Some((j, v)) => r.fail(
            "simplex.drift_column_sums",
            param(format!("sum_i B[i][{j}] + sum(beta)"), v),
            "B^T 1 + (beta^T 1) 1 must vanish",
        ),
        None => r.pass("simplex.drift_column_sums", "exact up to roundoff"),
    }

    // On the face {x_i = 0}, b_i = sum_{j != i} x_j (beta_i + B_ij).
    let inward = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| (i, j, s.beta[i] + s.b[(i, j)]))
        .find(|&(_, _, v)| !(v > 0.0));
    match inward {
        Some((i, j, v)) => r.fail(
            "simplex.drift_inward",
            param(format!("beta[{i}] + B[{i}][{j}]"), v),
            "beta_i + B_ij must be > 0 for j != i",
        ),
        None => r.pass("simplex.drift_inward", "exact"),
    }
    r
}

fn validate_box(bx: &BoxMatrices, cfg: &SampleConfig) -> ValidationReport {
    let (m, n) = (bx.m, bx.n);
    let mut r = ValidationReport::new();

    match (0..m).find(|&i| bx.gamma[i] < 0.0) {
        Some(i) => r.fail(
            "box.gamma_nonnegative",
            param(format!("gamma[{i}]"), bx.gamma[i]),
            "gamma must be >= 0",
        ),
        None => r.pass("box.gamma_nonnegative", "exact"),
    }

    let pi_bad = (0..n)
        .flat_map(|k| (0..n).map(move |j| (k, j)))
        .find(|&(k, j)| {
            if k == j {
                bx.pi[(k, j)] != 0.0
            } else {
                bx.pi[(k, j)] < 0.0
            }
        });
    match pi_bad {
        Some((k, j)) => r.fail(
            "box.pi_nonnegative",
            param(format!("Pi[{k}][{j}]"), bx.pi[(k, j)]),
            "Pi must be >= 0 with zero diagonal",
        ),
        None => r.pass("box.pi_nonnegative", "exact"),
    }

    let phi_bad = (0..n)
        .map(|j| {
            let bound: f64 = (0..m).map(|i| (-bx.psi[(i, j)]).max(0.0)).sum();
            (j, bx.phi[j] - bound)
        })
        .find(|&(_, slack)| slack < 0.0);
    match phi_bad {
        Some((j, slack)) => r.fail(
            "box.phi_lower_bound",
            param(format!("phi[{j}] - (psi_({j})^-)^T 1"), slack),
            "phi_j must be >= (psi_(j)^-)^T 1",
        ),
        None => r.pass("box.phi_lower_bound", "exact"),
    }

    check_box_alpha(bx, cfg, &mut r);

    let structure = (0..m)
        .flat_map(|i| (m..m + n).map(move |j| (i, j)))
        .find(|&(i, j)| bx.b[(i, j)] != 0.0);
    match structure {
        Some((i, j)) => r.fail(
            "box.drift_structure",
            param(format!("B[{i}][{j}]"), bx.b[(i, j)]),
            "B_IJ must vanish",
        ),
        None => r.pass("box.drift_structure", "exact"),
    }

    let mut lower = None;
    let mut upper = None;
    for i in 0..m {
        let (mut neg, mut pos) = (0.0, 0.0);
        for k in (0..m).filter(|&k| k != i) {
            neg += (-bx.b[(i, k)]).max(0.0);
            pos += bx.b[(i, k)].max(0.0);
        }
        if lower.is_none() && !(bx.beta[i] > neg) {
            lower = Some((i, bx.beta[i] - neg));
        }
        let cap = -bx.b[(i, i)] - pos;
        if upper.is_none() && !(bx.beta[i] < cap) {
            upper = Some((i, cap - bx.beta[i]));
        }
    }
    match lower {
        Some((i, v)) => r.fail(
            "box.drift_I_lower",
            param(format!("beta[{i}] - (B^-_(i,I\\i)) 1"), v),
            "beta_i must exceed (B^-_{i,I\\{i}}) 1",
        ),
        None => r.pass("box.drift_I_lower", "exact"),
    }
    match upper {
        Some((i, v)) => r.fail(
            "box.drift_I_upper",
            param(format!("-B[{i}][{i}] - (B^+_(i,I\\i)) 1 - beta[{i}]"), v),
            "beta_i must be below -B_ii - (B^+_{i,I\\{i}}) 1",
        ),
        None => r.pass("box.drift_I_upper", "exact"),
    }

    let drift_j = (m..m + n)
        .map(|j| {
            let neg: f64 = (0..m).map(|i| (-bx.b[(j, i)]).max(0.0)).sum();
            (j, bx.beta[j] - neg)
        })
        .find(|&(_, v)| !(v > 0.0));
    match drift_j {
        Some((j, v)) => r.fail(
            "box.drift_J",
            param(format!("beta[{j}] - (B^-_(j,I)) 1"), v),
            "beta_j must exceed (B^-_{jI}) 1",
        ),
        None => r.pass("box.drift_J", "exact"),
    }

    let offdiag = (m..m + n)
        .flat_map(|j| (m..m + n).map(move |k| (j, k)))
        .find(|&(j, k)| j != k && bx.b[(j, k)] < 0.0);
    match offdiag {
        Some((j, k)) => r.fail(
            "box.drift_JJ_offdiag",
            param(format!("B[{j}][{k}]"), bx.b[(j, k)]),
            "off-diagonal B_JJ must be >= 0",
        ),
        None => r.pass("box.drift_JJ_offdiag", "exact"),
    }
    r
}

/// `α + Diag(Π^T x_J) Diag(x_J)^{-1} ∈ S^n_+` for all `x_J > 0`.
fn check_box_alpha(bx: &BoxMatrices, cfg: &SampleConfig, r: &mut ValidationReport) {
    const ID: &str = "box.alpha_psd_condition";
    let n = bx.n;
    if n == 0 {
        r.pass(ID, "vacuous (n = 0)");
        return;
    }
    let pi_ok = (0..n).all(|k| (0..n).all(|j| bx.pi[(k, j)] >= 0.0));
    let alpha_min = min_eigenvalue(&bx.alpha);
    if pi_ok && alpha_min >= -psd_tol(&bx.alpha) {
        r.pass(ID, "alpha is PSD and Pi >= 0");
        return;
    }
    let mut worst = (f64::INFINITY, Vec::new());
    for s in 0..cfg.per_stratum {
        let xj: Vec<f64> = halton(s, n)
            .iter()
            .map(|h| 10f64.powf(-3.0 + 6.0 * h))
            .collect();
        let mut mat = bx.alpha.clone();
        for j in 0..n {
            let pt: f64 = (0..n).map(|k| bx.pi[(k, j)] * xj[k]).sum();
            mat[(j, j)] += pt / xj[j];
        }
        let e = min_eigenvalue(&mat);
        if e < worst.0 {
            worst = (e, xj);
        }
    }
    if worst.0 < -SAMPLE_MARGIN {
        r.fail(
            ID,
            Witness::Point { x: worst.1 },
            format!("minimum eigenvalue {:e} at the witness x_J", worst.0),
        );
    } else {
        r.inconclusive(
            ID,
            format!(
                "no violation on sampled x_J (min eigenvalue {:e}); no certificate",
                worst.0
            ),
        );
    }
}

fn validate_quadric(
    ss: &StateSpace,
    q: &QuadricMatrices,
    orientation: Orientation,
    cfg: &SampleConfig,
) -> ValidationReport {
    let d = q.beta.len();
    let mut r = ValidationReport::new();
    let sign = match orientation {
        Orientation::Inside => 1.0,
        Orientation::Outside => -1.0,
    };

    let signed_alpha = &q.alpha * sign;
    let e = min_eigenvalue(&signed_alpha);
    if d == 0 || e >= -psd_tol(&q.alpha) {
        r.pass("quadric.alpha_psd", "exact eigenvalue check");
    } else {
        r.fail(
            "quadric.alpha_psd",
            param("min eigenvalue of alpha".into(), sign * e),
            if sign > 0.0 {
                "alpha must be PSD"
            } else {
                "-alpha must be PSD"
            },
        );
    }

    let g = min_eigenvalue(&q.gamma);
    if q.gamma.is_empty() || g >= -psd_tol(&q.gamma) {
        r.pass("quadric.gamma_psd", "exact eigenvalue check");
    } else {
        r.fail(
            "quadric.gamma_psd",
            param("min eigenvalue of Gamma".into(), g),
            "Gamma must be PSD",
        );
    }

    check_quadric_boundary(ss, q, sign, cfg, &mut r);
    r
}

/// `sign * (β^T Q x + x^T M x) < 0` on `{x^T Q x = 1}`, with
/// `M = B^T Q + ½ Σ_kl Γ_kl S_k^T Q S_l`.
fn check_quadric_boundary(
    ss: &StateSpace,
    q: &QuadricMatrices,
    sign: f64,
    cfg: &SampleConfig,
    r: &mut ValidationReport,
) {
    const ID: &str = "quadric.boundary_drift";
    let d = q.beta.len();
    let qm = DMatrix::from_diagonal(&DVector::from_column_slice(&q.q));
    let mut m = q.b.transpose() * &qm;
    let pairs = skew_pairs(d);
    for (k, &pk) in pairs.iter().enumerate() {
        for (l, &pl) in pairs.iter().enumerate() {
            let g = q.gamma[(k, l)];
            if g != 0.0 {
                m += skew_matrix(d, pk).transpose() * &qm * skew_matrix(d, pl) * (0.5 * g);
            }
        }
    }
    let ms = (&m + m.transpose()) * (0.5 * sign);
    let lin = &qm * &q.beta * sign;
    let lin_norm = lin.norm();
    let f = |x: &[f64]| -> f64 {
        let xv = DVector::from_column_slice(x);
        lin.dot(&xv) + (xv.transpose() * &ms * &xv)[(0, 0)]
    };

    // Certificate: M_s + μQ ≺ 0 with top eigenvalue -κ and |lin|^2 / (4κ) < μ.
    let scale = ms.norm() + lin_norm + 1.0;
    let certified = (1..=400).any(|s| {
        let mu = 4.0 * scale * s as f64 / 400.0;
        let kappa = -max_eigenvalue(&(&ms + &qm * mu));
        kappa > 0.0 && lin_norm * lin_norm / (4.0 * kappa) < mu
    });
    let ball = q.q.iter().all(|&v| v == 1.0);
    if certified || (ball && max_eigenvalue(&ms) + lin_norm < 0.0) {
        r.pass(ID, "certified by an eigenvalue bound");
        return;
    }

    let mut worst = (f64::NEG_INFINITY, Vec::new());
    for x in boundary_samples(ss, 0, cfg) {
        let v = f(&x);
        if v > worst.0 {
            worst = (v, x);
        }
    }
    if worst.0 >= 0.0 {
        r.fail(
            ID,
            Witness::Point { x: worst.1 },
            format!("boundary inequality violated: value {:e} >= 0", worst.0),
        );
    } else if worst.0 > -SAMPLE_MARGIN || !ball {
        r.inconclusive(ID, format!("sampled maximum {:e}; no certificate", worst.0));
    } else {
        r.pass(ID, format!("sampled on the sphere, maximum {:e}", worst.0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::{BoxOrthantParams, QuadricParams, SimplexParams, Verdict};

    fn simplex_valid() -> SimplexParams {
        SimplexParams {
            alpha: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            beta: vec![0.5, 0.5],
            b: vec![vec![-1.5, 0.5], vec![0.5, -1.5]],
        }
    }

    #[test]
    fn simplex_examples() {
        let ss = StateSpace::simplex(2).unwrap();
        let cfg = SampleConfig::new(50);
        let r = validate(&ss, &simplex_valid().into(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Valid, "{r:?}");
        let mut p = simplex_valid();
        p.beta = vec![0.5, -0.6];
        p.b = vec![vec![-1.5, 0.5], vec![0.5, 0.6]];
        let r = validate(&ss, &p.into(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Invalid);
        assert!(r.failed_ids().contains(&"simplex.drift_inward"));
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn unit_ball_example() {
        let ss = StateSpace::unit_ball(2).unwrap();
        let p = QuadricParams {
            alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            beta: vec![0.0, 0.0],
            b: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
            gamma: vec![vec![0.0]],
        };
        let r = validate(&ss, &p.into(), &SampleConfig::new(100)).unwrap();
        assert_eq!(r.verdict, Verdict::Valid, "{r:?}");
    }

    #[test]
    fn gamma_term_uses_half_trace() {
        // B = -0.4 I, Γ = 1: boundary value -0.4 + 0.5 = 0.1 > 0.
        let ss = StateSpace::unit_ball(2).unwrap();
        let p = QuadricParams {
            alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            beta: vec![0.0, 0.0],
            b: vec![vec![-0.4, 0.0], vec![0.0, -0.4]],
            gamma: vec![vec![1.0]],
        };
        let r = validate(&ss, &p.clone().into(), &SampleConfig::new(100)).unwrap();
        assert!(r.failed_ids().contains(&"quadric.boundary_drift"));
        let mut ok = p;
        ok.b = vec![vec![-0.6, 0.0], vec![0.0, -0.6]];
        let r = validate(&ss, &ok.into(), &SampleConfig::new(100)).unwrap();
        assert_eq!(r.verdict, Verdict::Valid, "{r:?}");
    }

    #[test]
    fn box_alpha_condition_sampled() {
        let ss = StateSpace::box_orthant(0, 2).unwrap();
        let p = BoxOrthantParams {
            gamma: vec![],
            alpha: vec![vec![-0.5, 0.0], vec![0.0, 1.0]],
            phi: vec![1.0, 1.0],
            psi: vec![],
            pi: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            beta: vec![1.0, 1.0],
            b: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
        };
        let r = validate(&ss, &p.into(), &SampleConfig::new(200)).unwrap();
        assert!(r.failed_ids().contains(&"box.alpha_psd_condition"), "{r:?}");
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let ss = StateSpace::unit_ball(2).unwrap();
        assert!(validate(&ss, &simplex_valid().into(), &SampleConfig::default()).is_err());
    }
}
