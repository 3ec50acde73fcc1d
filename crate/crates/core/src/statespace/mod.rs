// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Built-in semialgebraic state spaces `E = {x ∈ M : p(x) >= 0, p ∈ P}` with
//! `M = {q = 0, q ∈ Q}`, plus their admissibility checks.
//!
//! Four families are supported: the whole space, quadric sets
//! `{x^T Q x <= 1}` (or their complements), the product `[0,1]^m × R^n_+`, and
//! the unit simplex.

mod boundary;
mod invariance;
mod params;
mod report;
pub mod sampling;
mod uniqueness;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Polynomial};

pub use boundary::{boundary_classify, compute_h, BoundaryClassification, BoundaryVerdict};
pub use invariance::{check_necessary, check_sufficient};
pub use params::{assemble_model, BoxOrthantParams, ModelParams, QuadricParams, SimplexParams};
pub use report::{ConditionStatus, Status, ValidationReport, Verdict, Violation, Witness};
pub use sampling::SampleConfig;
pub use uniqueness::{uniqueness_report, UniquenessReason, UniquenessReport, UniquenessVerdict};
pub use validate::{validate, SAMPLE_MARGIN};

/// Tolerance for state-space membership of evaluation points.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `{x^T Q x <= 1}`
    Inside,
    /// `{x^T Q x >= 1}`
    Outside,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// All of `R^d`; no constraints.
    Euclidean { d: usize },
    /// `Q = diag(q_diag)` with entries in `{+1, -1}`.
    Quadric {
        q_diag: Vec<f64>,
        orientation: Orientation,
    },
    /// `[0,1]^m × R^n_+`
    BoxOrthant { m: usize, n: usize },
    /// `{x ∈ R^d_+ : 1^T x = 1}`
    Simplex { d: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    family: Family,
    inequalities: Vec<Polynomial>,
    equalities: Vec<Polynomial>,
}

impl StateSpace {
    pub fn new(family: Family) -> Result<StateSpace> {
        let (inequalities, equalities) = match &family {
            Family::Euclidean { d } => {
                if *d == 0 {
                    return Err(Error::InvalidInput("dimension must be positive".into()));
                }
                (Vec::new(), Vec::new())
            }
            Family::Quadric {
                q_diag,
                orientation,
            } => {
                let d = q_diag.len();
                if d == 0 {
                    return Err(Error::InvalidInput("dimension must be positive".into()));
                }
                if q_diag.iter().any(|&q| q != 1.0 && q != -1.0) {
                    return Err(Error::InvalidInput(
                        "quadric Q must be diagonal with entries +1 or -1".into(),
                    ));
                }
                if !q_diag.contains(&1.0) {
                    return Err(Error::InvalidInput(
                        "quadric Q needs at least one +1 entry".into(),
                    ));
                }
                let mut form = Polynomial::zero(d);
                for (i, &q) in q_diag.iter().enumerate() {
                    let mut e = vec![0; d];
                    e[i] = 2;
                    form.add_term(MultiIndex::new(e), q);
                }
                let p = match orientation {
                    Orientation::Inside => &Polynomial::constant(d, 1.0) - &form,
                    Orientation::Outside => &form - &Polynomial::constant(d, 1.0),
                };
                (vec![p], Vec::new())
            }
            Family::BoxOrthant { m, n } => {
                let d = m + n;
                if d == 0 {
                    return Err(Error::InvalidInput("dimension must be positive".into()));
                }
                let mut ps: Vec<Polynomial> = (0..d).map(|i| Polynomial::variable(d, i)).collect();
                for i in 0..*m {
                    ps.push(&Polynomial::constant(d, 1.0) - &Polynomial::variable(d, i));
                }
                (ps, Vec::new())
            }
            Family::Simplex { d } => {
                if *d < 2 {
                    return Err(Error::InvalidInput("simplex needs d >= 2".into()));
                }
                let ps = (0..*d).map(|i| Polynomial::variable(*d, i)).collect();
                let q = Polynomial::affine(1.0, &vec![-1.0; *d]);
                (ps, vec![q])
            }
        };
        Ok(StateSpace {
            family,
            inequalities,
            equalities,
        })
    }

    pub fn euclidean(d: usize) -> Result<StateSpace> {
        Self::new(Family::Euclidean { d })
    }

    pub fn quadric(q_diag: Vec<f64>, orientation: Orientation) -> Result<StateSpace> {
        Self::new(Family::Quadric {
            q_diag,
            orientation,
        })
    }

    pub fn unit_ball(d: usize) -> Result<StateSpace> {
        Self::quadric(vec![1.0; d], Orientation::Inside)
    }

    pub fn box_orthant(m: usize, n: usize) -> Result<StateSpace> {
        Self::new(Family::BoxOrthant { m, n })
    }

    pub fn simplex(d: usize) -> Result<StateSpace> {
        Self::new(Family::Simplex { d })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            Family::Euclidean { d } | Family::Simplex { d } => *d,
            Family::Quadric { q_diag, .. } => q_diag.len(),
            Family::BoxOrthant { m, n } => m + n,
        }
    }

    /// The inequality family `P`.
    pub fn inequalities(&self) -> &[Polynomial] {
        &self.inequalities
    }

    /// The equality family `Q`.
    pub fn equalities(&self) -> &[Polynomial] {
        &self.equalities
    }

    pub fn is_compact(&self) -> bool {
        match &self.family {
            Family::Euclidean { .. } => false,
            Family::Quadric {
                q_diag,
                orientation,
            } => *orientation == Orientation::Inside && q_diag.iter().all(|&q| q == 1.0),
            Family::BoxOrthant { n, .. } => *n == 0,
            Family::Simplex { .. } => true,
        }
    }

    /// Largest constraint violation at `x` (zero inside `E`).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let ineq = self
            .inequalities
            .iter()
            .map(|p| -p.eval(x))
            .fold(0.0, f64::max);
        let eq = self
            .equalities
            .iter()
            .map(|q| q.eval(x).abs())
            .fold(0.0, f64::max);
        ineq.max(eq)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && x.iter().all(|v| v.is_finite()) && self.violation(x) <= tol
    }

    /// Errors unless `x ∈ E` up to [`MEMBERSHIP_TOL`].
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        crate::error::check_dim(self.dim(), x.len())?;
        let violation = if x.iter().all(|v| v.is_finite()) {
            self.violation(x)
        } else {
            f64::INFINITY
        };
        if violation <= MEMBERSHIP_TOL {
            Ok(())
        } else {
            Err(Error::PointOutsideStateSpace {
                point: x.to_vec(),
                violation,
            })
        }
    }

    /// Maps `x` back onto `E`: clamping on the box-orthant, radial scaling on
    /// quadrics, Euclidean projection on the simplex.
    pub fn project(&self, x: &mut [f64]) {
        match &self.family {
            Family::Euclidean { .. } => {}
            Family::BoxOrthant { m, .. } => {
                for (i, v) in x.iter_mut().enumerate() {
                    *v = if i < *m {
                        v.clamp(0.0, 1.0)
                    } else {
                        v.max(0.0)
                    };
                }
            }
            Family::Simplex { .. } => project_simplex(x),
            Family::Quadric {
                q_diag,
                orientation,
            } => project_quadric(x, q_diag, *orientation),
        }
    }
}

/// Euclidean projection onto `{x >= 0, 1^T x = 1}` by the sorted-threshold rule.
pub fn project_simplex(x: &mut [f64]) {
    let mut u: Vec<f64> = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

fn project_quadric(x: &mut [f64], q_diag: &[f64], orientation: Orientation) {
    let form: f64 = x.iter().zip(q_diag).map(|(v, q)| q * v * v).sum();
    match orientation {
        Orientation::Inside => {
            if form > 1.0 {
                let s = form.sqrt().recip();
                x.iter_mut().for_each(|v| *v *= s);
            }
        }
        Orientation::Outside => {
            if form >= 1.0 {
                return;
            }
            if form > 0.0 {
                let s = form.sqrt().recip();
                x.iter_mut().for_each(|v| *v *= s);
                return;
            }
            // Rescale the positive block so that u^T u = 1 + v^T v.
            let neg: f64 = x
                .iter()
                .zip(q_diag)
                .filter(|(_, &q)| q < 0.0)
                .map(|(v, _)| v * v)
                .sum();
            let pos: f64 = x
                .iter()
                .zip(q_diag)
                .filter(|(_, &q)| q > 0.0)
                .map(|(v, _)| v * v)
                .sum();
            let target = (1.0 + neg).sqrt();
            if pos > 0.0 {
                let s = target / pos.sqrt();
                for (v, &q) in x.iter_mut().zip(q_diag) {
                    if q > 0.0 {
                        *v *= s;
                    }
                }
            } else {
                let first = q_diag.iter().position(|&q| q > 0.0).expect("one +1 entry");
                x[first] = target;
            }
        }
    }
}
