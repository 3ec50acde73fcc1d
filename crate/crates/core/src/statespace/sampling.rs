// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic low-discrepancy samples of a state space and of its
//! boundary strata `E ∩ {p = 0}`.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{Family, Orientation, StateSpace};

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

/// Radius of the sampled region along unbounded quadric directions.
const QUADRIC_RADIUS: f64 = 10.0;
/// Half-width of the sampled cube for the whole space.
const EUCLIDEAN_RADIUS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    /// Number of samples per boundary stratum and for the interior.
    pub per_stratum: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { per_stratum: 1000 }
    }
}

impl SampleConfig {
    pub fn new(per_stratum: usize) -> Self {
        SampleConfig {
            per_stratum: per_stratum.max(1),
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

/// Point `index` (starting at 1) of the Halton sequence in `(0,1)^dim`.
pub fn halton(index: usize, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|k| {
            let base = PRIMES[k % PRIMES.len()] as u64;
            // Beyond the prime table, decorrelate by shifting the index.
            let shift = (k / PRIMES.len()) as u64 * 7919;
            radical_inverse(index as u64 + 1 + shift, base)
        })
        .collect()
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Maps a point of `(0,1)^k` to the unit sphere in `R^k`.
pub fn sphere_point(u: &[f64]) -> Vec<f64> {
    let normal = standard_normal();
    let mut z: Vec<f64> = u
        .iter()
        .map(|&v| normal.inverse_cdf(v.clamp(1e-12, 1.0 - 1e-12)))
        .collect();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        z.iter_mut().for_each(|v| *v = 0.0);
        if let Some(first) = z.first_mut() {
            *first = 1.0;
        }
    } else {
        z.iter_mut().for_each(|v| *v /= norm);
    }
    z
}

fn orthant_coordinate(h: f64, allow_zero: bool) -> f64 {
    if allow_zero {
        if h < 0.1 {
            0.0
        } else {
            10f64.powf(-3.0 + 6.0 * (h - 0.1) / 0.9)
        }
    } else {
        10f64.powf(-3.0 + 6.0 * h)
    }
}

/// Point on the standard simplex in `R^k` from `k - 1` uniforms, via sorted spacings.
fn simplex_point(u: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = u.to_vec();
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(u.len() + 1);
    let mut prev = 0.0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(1.0 - prev);
    out
}

fn quadric_split(q_diag: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let pos = (0..q_diag.len()).filter(|&i| q_diag[i] > 0.0).collect();
    let neg = (0..q_diag.len()).filter(|&i| q_diag[i] < 0.0).collect();
    (pos, neg)
}

/// Quadric point with `u^T u = scale^2 (1 + v^T v)` on the positive block `u`.
fn quadric_point(q_diag: &[f64], h: &[f64], scale: f64) -> Vec<f64> {
    let (pos, neg) = quadric_split(q_diag);
    let s = sphere_point(&h[..pos.len()]);
    let r = if neg.is_empty() {
        0.0
    } else {
        QUADRIC_RADIUS * h[pos.len() + neg.len()]
    };
    let w = if neg.is_empty() {
        Vec::new()
    } else {
        sphere_point(&h[pos.len()..pos.len() + neg.len()])
    };
    let mut x = vec![0.0; q_diag.len()];
    let radial = scale * (1.0 + r * r).sqrt();
    for (k, &i) in pos.iter().enumerate() {
        x[i] = radial * s[k];
    }
    for (k, &i) in neg.iter().enumerate() {
        x[i] = r * w[k];
    }
    x
}

/// Samples of `E`; interior points where the family has an interior.
pub fn interior_samples(ss: &StateSpace, cfg: &SampleConfig) -> Vec<Vec<f64>> {
    let n = cfg.per_stratum;
    let d = ss.dim();
    match ss.family() {
        Family::Euclidean { .. } => (0..n)
            .map(|i| {
                halton(i, d)
                    .into_iter()
                    .map(|h| EUCLIDEAN_RADIUS * (2.0 * h - 1.0))
                    .collect()
            })
            .collect(),
        Family::Quadric {
            q_diag,
            orientation,
        } => (0..n)
            .map(|i| {
                let h = halton(i, d + 2);
                let rho = h[d + 1];
                let scale = match orientation {
                    Orientation::Inside => rho,
                    Orientation::Outside => 1.0 + 2.0 * rho,
                };
                quadric_point(q_diag, &h, scale)
            })
            .collect(),
        Family::BoxOrthant { m, .. } => (0..n)
            .map(|i| {
                halton(i, d)
                    .into_iter()
                    .enumerate()
                    .map(|(k, h)| {
                        if k < *m {
                            h
                        } else {
                            orthant_coordinate(h, false)
                        }
                    })
                    .collect()
            })
            .collect(),
        Family::Simplex { .. } => (0..n).map(|i| simplex_point(&halton(i, d - 1))).collect(),
    }
}

/// Samples of the boundary stratum `E ∩ {p_k = 0}` for the `k`-th inequality
/// generator. Vertices and corners of the stratum come first.
pub fn boundary_samples(ss: &StateSpace, k: usize, cfg: &SampleConfig) -> Vec<Vec<f64>> {
    let n = cfg.per_stratum;
    let d = ss.dim();
    if k >= ss.inequalities().len() {
        return Vec::new();
    }
    match ss.family() {
        Family::Euclidean { .. } => Vec::new(),
        Family::Quadric { q_diag, .. } => (0..n)
            .map(|i| quadric_point(q_diag, &halton(i, d + 1), 1.0))
            .collect(),
        Family::BoxOrthant { m, .. } => {
            let m = *m;
            let (fixed, value) = if k < d { (k, 0.0) } else { (k - d, 1.0) };
            let mut out = Vec::with_capacity(n);
            // Corners: I coordinates in {0,1}, J coordinates at 0.
            let free_i: Vec<usize> = (0..m).filter(|&i| i != fixed).collect();
            let n_corners = 1usize << free_i.len().min(10);
            for mask in 0..n_corners.min(n) {
                let mut x = vec![0.0; d];
                for (bit, &i) in free_i.iter().enumerate().take(10) {
                    x[i] = ((mask >> bit) & 1) as f64;
                }
                x[fixed] = value;
                out.push(x);
            }
            if d == 1 {
                return out;
            }
            let mut i = 0;
            while out.len() < n {
                let h = halton(i, d);
                let mut x: Vec<f64> = h
                    .into_iter()
                    .enumerate()
                    .map(|(c, h)| {
                        if c < m {
                            h
                        } else {
                            orthant_coordinate(h, true)
                        }
                    })
                    .collect();
                x[fixed] = value;
                out.push(x);
                i += 1;
            }
            out
        }
        Family::Simplex { .. } => {
            let free: Vec<usize> = (0..d).filter(|&i| i != k).collect();
            let mut out = Vec::with_capacity(n);
            for &j in &free {
                let mut x = vec![0.0; d];
                x[j] = 1.0;
                out.push(x);
            }
            if free.len() == 1 {
                return out;
            }
            let mut i = 0;
            while out.len() < n {
                let y = simplex_point(&halton(i, free.len() - 1));
                let mut x = vec![0.0; d];
                for (c, &j) in free.iter().enumerate() {
                    x[j] = y[c];
                }
                out.push(x);
                i += 1;
            }
            out
        }
    }
}
