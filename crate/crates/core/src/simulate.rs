// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Euler–Maruyama paths with metric projection back onto `E`, Monte Carlo
//! moments and boundary-hit statistics.
//!
//! Every path draws from its own ChaCha8 stream `(seed, path index)`, so the
//! output is bit-identical across runs and thread counts, and adding paths
//! never changes existing ones. Normals come from the inverse CDF.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use flate2::write::GzEncoder;
use flate2::Compression;
use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_dim, Error, Result};
use crate::generator::{CompiledModel, ModelCoefficients};
use crate::poly::Polynomial;
use crate::statespace::{Family, StateSpace};

pub use crate::linalg::psd_project;

/// Symmetric PSD square root of `π(a(x))`.
pub fn dispersion(model: &ModelCoefficients, x: &[f64]) -> Result<DMatrix<f64>> {
    check_dim(model.dim(), x.len())?;
    crate::linalg::psd_sqrt(&model.diffusion_at(x))
}

/// Time horizon, step and sample size of a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Store every `record_every`-th state; the final state is always stored.
    pub record_every: usize,
}

impl SimulationSpec {
    pub fn new(t_end: f64, dt: f64, n_paths: usize, seed: u64) -> Self {
        SimulationSpec {
            t_end,
            dt,
            n_paths,
            seed,
            record_every: 1,
        }
    }

    pub fn record_every(mut self, k: usize) -> Self {
        self.record_every = k.max(1);
        self
    }

    /// Keep only the initial and final states.
    pub fn endpoints_only(mut self) -> Self {
        self.record_every = usize::MAX;
        self
    }
}

#[derive(Clone, Debug)]
pub struct PathSet {
    dim: usize,
    dt: f64,
    n_steps: usize,
    seed: u64,
    /// Step index of each stored state.
    steps: Vec<usize>,
    /// `n_paths × steps.len() × dim`, row-major.
    states: Vec<f64>,
    /// Inequality generators whose running minima are tracked.
    constraints: Vec<Polynomial>,
    /// `n_paths × constraints.len()` running minima over every step.
    minima: Vec<f64>,
}

impl PathSet {
    pub fn n_paths(&self) -> usize {
        if self.steps.is_empty() || self.dim == 0 {
            0
        } else {
            self.states.len() / (self.steps.len() * self.dim)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Scheme metadata: metric projection after bridge refinement.
    pub fn projection(&self) -> &'static str {
        "metric"
    }

    pub fn max_refinement(&self) -> u32 {
        MAX_REFINEMENT
    }

    /// Times of the stored states.
    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|&s| s as f64 * self.dt).collect()
    }

    pub fn n_records(&self) -> usize {
        self.steps.len()
    }

    /// Stored state of `path` at record `r`.
    pub fn state(&self, path: usize, r: usize) -> &[f64] {
        let off = (path * self.steps.len() + r) * self.dim;
        &self.states[off..off + self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim.max(1))
    }

    /// Record index nearest to `t`.
    pub fn record_index(&self, t: f64) -> Result<usize> {
        if self.steps.is_empty() {
            return Err(Error::EmptyPathSet);
        }
        let times = self.times();
        let (idx, dist) = times
            .iter()
            .enumerate()
            .map(|(i, &s)| (i, (s - t).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if dist > 1e-9 * (1.0 + t.abs()) {
            log::warn!("t = {t} is off the stored grid; using t = {}", times[idx]);
        }
        Ok(idx)
    }

    /// One line per stored state: `path_id,step,t,x_1,...,x_d`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("path_id,step,t");
        for i in 1..=self.dim {
            header.push_str(&format!(",x_{i}"));
        }
        writeln!(w, "{header}")?;
        for path in 0..self.n_paths() {
            for (r, &step) in self.steps.iter().enumerate() {
                write!(w, "{path},{step},{:.16e}", step as f64 * self.dt)?;
                for v in self.state(path, r) {
                    write!(w, ",{v:.16e}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path, gzip: bool) -> Result<()> {
        let file = BufWriter::new(File::create(path)?);
        if gzip {
            let mut enc = GzEncoder::new(file, Compression::default());
            self.write_csv(&mut enc)?;
            enc.finish()?.flush()?;
            Ok(())
        } else {
            self.write_csv(file)
        }
    }

    fn tracked_minima(&self, p: &Polynomial) -> Option<Vec<f64>> {
        let k = self.constraints.iter().position(|q| q == p)?;
        let nc = self.constraints.len();
        Some(
            (0..self.n_paths())
                .map(|i| self.minima[i * nc + k])
                .collect(),
        )
    }
}

/// Maximum number of Brownian-bridge halvings of a step that would leave `E`.
pub const MAX_REFINEMENT: u32 = 10;

/// Per-path Euler–Maruyama state.
struct Stepper<'a> {
    compiled: &'a CompiledModel,
    ss: &'a StateSpace,
    constraints: &'a [Polynomial],
    normal: &'a Normal,
    rng: ChaCha8Rng,
    d: usize,
    z: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    sigma: Vec<f64>,
    minima: Vec<f64>,
}

/// Marker for a non-finite state; the caller attaches path and step.
struct NonFinite;

impl Stepper<'_> {
    fn draw(&mut self, out: &mut [f64], scale: f64) {
        for w in out.iter_mut() {
            *w = self.normal.inverse_cdf(uniform_open(&mut self.rng)) * scale;
        }
    }

    fn interior(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|p| p.eval(x) > 0.0)
    }

    /// One Euler–Maruyama step of length `h` driven by the increment `dw`.
    /// A step from an interior point that would leave `E` is split in two
    /// with the Brownian bridge, down to `MAX_REFINEMENT` levels; the metric
    /// projection handles whatever overshoot remains.
    fn advance(
        &mut self,
        x: &mut [f64],
        h: f64,
        dw: &[f64],
        depth: u32,
    ) -> std::result::Result<(), NonFinite> {
        let d = self.d;
        self.compiled
            .eval_into(x, &mut self.z, &mut self.a, &mut self.b);
        step_dispersion(&self.a, d, &mut self.sigma).map_err(|_| NonFinite)?;
        let mut y = x.to_vec();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut inc = self.b[i] * h;
            for j in 0..d {
                inc += self.sigma[i * d + j] * dw[j];
            }
            *yi += inc;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NonFinite);
        }
        let leaves = self.constraints.iter().any(|p| p.eval(&y) < 0.0);
        if leaves && depth < MAX_REFINEMENT && self.interior(x) {
            // W_{h/2} given W_h = dw is N(dw/2, h/4).
            let mut first = vec![0.0; d];
            self.draw(&mut first, (0.25 * h).sqrt());
            for (f, w) in first.iter_mut().zip(dw) {
                *f += 0.5 * w;
            }
            let second: Vec<f64> = dw.iter().zip(&first).map(|(w, f)| w - f).collect();
            self.advance(x, 0.5 * h, &first, depth + 1)?;
            return self.advance(x, 0.5 * h, &second, depth + 1);
        }
        self.ss.project(&mut y);
        for (m, p) in self.minima.iter_mut().zip(self.constraints) {
            *m = m.min(p.eval(&y));
        }
        x.copy_from_slice(&y);
        Ok(())
    }
}

struct PathOutput {
    states: Vec<f64>,
    minima: Vec<f64>,
}

/// Uniform in `(0, 1)` from the top 53 bits.
fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `π(A)^{1/2}` for a symmetric 2×2 matrix `[[a, b], [b, c]]` in closed form.
fn sqrt_psd_2x2(a: f64, b: f64, c: f64) -> [f64; 4] {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (m + r, m - r);
    if l1 <= 0.0 {
        return [0.0; 4];
    }
    if l2 >= 0.0 {
        // (A + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
        let s = (l1 * l2).sqrt();
        let t = (a + c + 2.0 * s).sqrt();
        return [(a + s) / t, b / t, b / t, (c + s) / t];
    }
    // Rank one: sqrt(λ1) v v^T with (λ1 - λ2) v v^T = A - λ2 I.
    let k = l1.sqrt() / (l1 - l2);
    [(a - l2) * k, b * k, b * k, (c - l2) * k]
}

fn step_dispersion(a: &[f64], d: usize, out: &mut [f64]) -> Result<()> {
    if d == 1 {
        out[0] = a[0].max(0.0).sqrt();
        return Ok(());
    }
    if d == 2 {
        out.copy_from_slice(&sqrt_psd_2x2(a[0], 0.5 * (a[1] + a[2]), a[3]));
        return Ok(());
    }
    let m = DMatrix::from_row_slice(d, d, a);
    // Round-off asymmetry from the compiled evaluation is far below the
    // projection tolerance, but symmetrize anyway.
    let m = (&m + m.transpose()) * 0.5;
    let root = crate::linalg::psd_sqrt(&m)?;
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = root[(i, j)];
        }
    }
    Ok(())
}

fn record_steps(n_steps: usize, every: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = (0..=n_steps).step_by(every.min(n_steps.max(1))).collect();
    if *steps.last().expect("step 0") != n_steps {
        steps.push(n_steps);
    }
    steps
}

/// Simulates `n_paths` Euler–Maruyama paths of `dX = b dt + σ dW` started at
/// `x0`, projecting each step onto `E`.
pub fn simulate_paths(
    model: &ModelCoefficients,
    ss: &StateSpace,
    x0: &[f64],
    spec: &SimulationSpec,
) -> Result<PathSet> {
    let d = model.dim();
    check_dim(ss.dim(), d)?;
    ss.check_point(x0)?;
    if !(spec.dt > 0.0) || !(spec.t_end >= 0.0) || !spec.t_end.is_finite() {
        return Err(Error::InvalidInput(format!(
            "need dt > 0 and T >= 0, got dt = {}, T = {}",
            spec.dt, spec.t_end
        )));
    }
    let n_steps = (spec.t_end / spec.dt).round() as usize;
    let dt = if n_steps == 0 {
        spec.dt
    } else {
        spec.t_end / n_steps as f64
    };
    if n_steps > 0 && ((dt - spec.dt) / spec.dt).abs() > 1e-9 {
        log::warn!("T / dt is not an integer; using dt = {dt}");
    }
    let steps = record_steps(n_steps, spec.record_every.max(1));
    let compiled = model.compile();
    let constraints: Vec<Polynomial> = ss.inequalities().to_vec();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let sqrt_dt = dt.sqrt();
    let mut start = x0.to_vec();
    ss.project(&mut start);

    let run_path = |path: usize| -> Result<PathOutput> {
        let mut st = Stepper {
            compiled: &compiled,
            ss,
            constraints: &constraints,
            normal: &normal,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            d,
            z: Vec::with_capacity(1 + d + d * (d + 1) / 2),
            a: vec![0.0; d * d],
            b: vec![0.0; d],
            sigma: vec![0.0; d * d],
            minima: constraints.iter().map(|p| p.eval(&start)).collect(),
        };
        st.rng.set_stream(path as u64);
        let mut x = start.clone();
        let mut dw = vec![0.0; d];
        let mut states = Vec::with_capacity(steps.len() * d);
        let mut next_record = 0;
        for step in 0..=n_steps {
            if step > 0 {
                st.draw(&mut dw, sqrt_dt);
                st.advance(&mut x, dt, &dw, 0)
                    .map_err(|_| Error::NonFiniteState { path, step })?;
            }
            if next_record < steps.len() && steps[next_record] == step {
                states.extend_from_slice(&x);
                next_record += 1;
            }
        }
        Ok(PathOutput {
            states,
            minima: st.minima,
        })
    };

    let outputs: Vec<Result<PathOutput>> =
        (0..spec.n_paths).into_par_iter().map(run_path).collect();
    let mut states = Vec::with_capacity(spec.n_paths * steps.len() * d);
    let mut minima = Vec::with_capacity(spec.n_paths * constraints.len());
    for out in outputs {
        let out = out?;
        states.extend(out.states);
        minima.extend(out.minima);
    }
    Ok(PathSet {
        dim: d,
        dt,
        n_steps,
        seed: spec.seed,
        steps,
        states,
        constraints,
        minima,
    })
}

/// Sample mean and standard error of `p(X_t)`.
pub fn mc_moment(paths: &PathSet, p: &Polynomial, t: f64) -> Result<(f64, f64)> {
    check_dim(paths.dim, p.dim())?;
    let n = paths.n_paths();
    if n == 0 {
        return Err(Error::EmptyPathSet);
    }
    let r = paths.record_index(t)?;
    let values: Vec<f64> = (0..n).map(|i| p.eval(paths.state(i, r))).collect();
    Ok(mean_and_se(&values))
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimumSummary {
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    pub constraint: String,
    pub threshold: f64,
    pub hit_fraction: f64,
    /// Quantiles of the per-path running minimum of `p(X)`.
    pub minima: MinimumSummary,
    /// Whether minima cover every step or only stored states.
    pub full_resolution: bool,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Fraction of paths whose running minimum of `p(X)` falls below `threshold`.
pub fn boundary_stats(paths: &PathSet, p: &Polynomial, threshold: f64) -> Result<BoundaryStats> {
    check_dim(paths.dim, p.dim())?;
    let n = paths.n_paths();
    if n == 0 {
        return Err(Error::EmptyPathSet);
    }
    let (mut minima, full) = match paths.tracked_minima(p) {
        Some(m) => (m, true),
        None => {
            let m = (0..n)
                .map(|i| {
                    (0..paths.n_records())
                        .map(|r| p.eval(paths.state(i, r)))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            (m, false)
        }
    };
    let hits = minima.iter().filter(|&&m| m < threshold).count();
    minima.sort_by(f64::total_cmp);
    Ok(BoundaryStats {
        constraint: p.to_string(),
        threshold,
        hit_fraction: hits as f64 / n as f64,
        minima: MinimumSummary {
            min: minima[0],
            q05: quantile(&minima, 0.05),
            q25: quantile(&minima, 0.25),
            median: quantile(&minima, 0.5),
            q75: quantile(&minima, 0.75),
            q95: quantile(&minima, 0.95),
            max: minima[n - 1],
        },
        full_resolution: full,
    })
}

/// `1e-6` times the diameter of `E`, or `1e-6` when `E` is unbounded.
pub fn default_threshold(ss: &StateSpace) -> f64 {
    let diameter = match ss.family() {
        Family::Simplex { .. } => 2f64.sqrt(),
        Family::BoxOrthant { m, n } if *n == 0 => (*m as f64).sqrt(),
        Family::Quadric { .. } if ss.is_compact() => 2.0,
        _ => 1.0,
    };
    1e-6 * diameter
}
