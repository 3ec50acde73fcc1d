// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Uniqueness in law: linear growth of `a`, dimension one, or a hierarchical
//! `(Y, Z)` split with an autonomous `Y` and a `Z`-dispersion that is locally
//! Lipschitz in `z` (the latter only supported by sampling).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sampling::{boundary_samples, interior_samples, SampleConfig};
use super::{Family, StateSpace};
use crate::generator::ModelCoefficients;
use crate::linalg::psd_sqrt;

/// Largest dimension for which coordinate splits are enumerated.
const MAX_SPLIT_DIM: usize = 12;
/// Samples beyond this norm are outside the compact region probed for the
/// Lipschitz check.
const LIPSCHITZ_RADIUS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UniquenessReason {
    LinearGrowth,
    Dimension1,
    Hierarchical {
        /// Coordinates of the autonomous block `Y`.
        y: Vec<usize>,
        y_reason: Box<UniquenessReason>,
        supported_by_sampling: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum UniquenessVerdict {
    UniqueInLaw(UniquenessReason),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub verdict: UniquenessVerdict,
    pub notes: Vec<String>,
}

fn quadratic_part_vanishes(model: &ModelCoefficients, coords: &[usize]) -> bool {
    coords.iter().all(|&i| {
        coords
            .iter()
            .all(|&j| model.a()[i][j].homogeneous_part(2).is_zero())
    })
}

/// Whether the projection of `E` onto `coords` is compact.
fn projection_compact(ss: &StateSpace, coords: &[usize]) -> bool {
    match ss.family() {
        Family::BoxOrthant { m, .. } => coords.iter().all(|&i| i < *m),
        Family::Simplex { .. } => true,
        Family::Quadric { .. } => ss.is_compact(),
        Family::Euclidean { .. } => false,
    }
}

fn non_hierarchical(
    model: &ModelCoefficients,
    ss: &StateSpace,
    coords: &[usize],
) -> Option<UniquenessReason> {
    if coords.len() == 1 {
        Some(UniquenessReason::Dimension1)
    } else if quadratic_part_vanishes(model, coords) || projection_compact(ss, coords) {
        Some(UniquenessReason::LinearGrowth)
    } else {
        None
    }
}

/// `a_YY` and `b_Y` depend on `Y` only.
fn is_autonomous(model: &ModelCoefficients, y: &[usize]) -> bool {
    let d = model.dim();
    let z: Vec<usize> = (0..d).filter(|i| !y.contains(i)).collect();
    let free = |p: &crate::poly::Polynomial| z.iter().all(|&k| !p.depends_on(k));
    y.iter()
        .all(|&i| free(&model.b()[i]) && y.iter().all(|&j| free(&model.a()[i][j])))
}

/// Rows `z` of the symmetric square root of `π(a(x))`.
fn sigma_z(model: &ModelCoefficients, x: &[f64], z: &[usize]) -> Option<DMatrix<f64>> {
    let root = psd_sqrt(&model.diffusion_at(x)).ok()?;
    Some(root.select_rows(z))
}

/// Detects a blow-up of `|σ_Z(y, z + h e_k) - σ_Z(y, z)| / h` as `h` shrinks.
fn lipschitz_in_z_sampled(
    model: &ModelCoefficients,
    ss: &StateSpace,
    z: &[usize],
    cfg: &SampleConfig,
) -> bool {
    let mut pts = interior_samples(ss, cfg);
    for k in 0..ss.inequalities().len() {
        pts.extend(boundary_samples(ss, k, cfg));
    }
    pts.retain(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() <= LIPSCHITZ_RADIUS);
    for x in &pts {
        let Some(s0) = sigma_z(model, x, z) else {
            return false;
        };
        for &k in z {
            let mut ratios = Vec::new();
            for &h in &[1e-2, 1e-4, 1e-6] {
                let mut step = None;
                for sgn in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[k] += sgn * h;
                    if ss.contains(&y, 0.0) {
                        step = Some(y);
                        break;
                    }
                }
                let Some(y) = step else { continue };
                let Some(s1) = sigma_z(model, &y, z) else {
                    return false;
                };
                ratios.push((&s1 - &s0).norm() / h);
            }
            if ratios.len() == 3 && ratios[2] > 10.0 * ratios[0].max(1.0) {
                return false;
            }
        }
    }
    true
}

pub fn uniqueness_report(
    model: &ModelCoefficients,
    ss: &StateSpace,
    cfg: &SampleConfig,
) -> UniquenessReport {
    let d = model.dim();
    let all: Vec<usize> = (0..d).collect();
    let mut notes = Vec::new();
    if d == 1 {
        return UniquenessReport {
            verdict: UniquenessVerdict::UniqueInLaw(UniquenessReason::Dimension1),
            notes,
        };
    }
    if quadratic_part_vanishes(model, &all) {
        notes.push("a has no quadratic terms".into());
        return UniquenessReport {
            verdict: UniquenessVerdict::UniqueInLaw(UniquenessReason::LinearGrowth),
            notes,
        };
    }
    if ss.is_compact() {
        notes.push("state space is compact".into());
        return UniquenessReport {
            verdict: UniquenessVerdict::UniqueInLaw(UniquenessReason::LinearGrowth),
            notes,
        };
    }
    if d <= MAX_SPLIT_DIM {
        for mask in 1..(1u32 << d) - 1 {
            let y: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
            if !is_autonomous(model, &y) {
                continue;
            }
            let Some(y_reason) = non_hierarchical(model, ss, &y) else {
                continue;
            };
            let z: Vec<usize> = (0..d).filter(|i| !y.contains(i)).collect();
            if lipschitz_in_z_sampled(model, ss, &z, cfg) {
                notes.push(format!(
                    "Y = {y:?} is autonomous; sigma_Z looked locally Lipschitz in z on samples"
                ));
                return UniquenessReport {
                    verdict: UniquenessVerdict::UniqueInLaw(UniquenessReason::Hierarchical {
                        y,
                        y_reason: Box::new(y_reason),
                        supported_by_sampling: true,
                    }),
                    notes,
                };
            }
            notes.push(format!(
                "Y = {y:?} is autonomous but sigma_Z is not Lipschitz in z on samples"
            ));
        }
    }
    UniquenessReport {
        verdict: UniquenessVerdict::Unknown,
        notes,
    }
}
