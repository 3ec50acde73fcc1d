// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Pricing with a polynomial state price density `ζ_t = e^{-αt} p(X_t)`:
//! zero-coupon bonds, general polynomial cash flows, short rates, swaptions,
//! variance swaps and options on the constituents of a simplex stock index.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::basis::CoordVector;
use crate::error::{check_dim, Error, Result};
use crate::generator::{matrix_exp, PolyDiffusion};
use crate::poly::Polynomial;
use crate::simulate::{mean_and_se, simulate_paths, SimulationSpec};
use crate::statespace::sampling::{boundary_samples, interior_samples};
use crate::statespace::{
    assemble_model, validate, ModelParams, SampleConfig, SimplexParams, StateSpace, Status,
};

/// Lower end of the Chebyshev fit domain for `ξ ↦ ξ C(T, K/ξ)`.
pub const CHEB_EPSILON: f64 = 1e-6;
/// Fit residuals above this are logged as warnings.
pub const CHEB_RESIDUAL_WARN: f64 = 1e-6;

/// `∫_0^τ e^{sA} ds` and `e^{τA}` from the exponential of `[[A, I], [0, 0]]`.
pub fn integrated_exponential(a: &DMatrix<f64>, tau: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * tau));
    block
        .view_mut((0, n), (n, n))
        .copy_from(&(DMatrix::identity(n, n) * tau));
    let e = matrix_exp(&block)?;
    Ok((
        e.view((0, n), (n, n)).into_owned(),
        e.view((0, 0), (n, n)).into_owned(),
    ))
}

/// Monte Carlo settings shared by the simulation-based pricers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 10_000,
            dt: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCheck {
    pub status: Status,
    pub min_sampled: f64,
    pub samples: usize,
    pub argmin: Vec<f64>,
}

fn positivity_check(p: &Polynomial, ss: &StateSpace, cfg: &SampleConfig) -> PositivityCheck {
    let mut pts = interior_samples(ss, cfg);
    for k in 0..ss.inequalities().len() {
        pts.extend(boundary_samples(ss, k, cfg));
    }
    let (mut min, mut argmin) = (f64::INFINITY, Vec::new());
    for x in &pts {
        let v = p.eval(x);
        if v < min {
            min = v;
            argmin = x.clone();
        }
    }
    let status = if min > 0.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    PositivityCheck {
        status,
        min_sampled: min,
        samples: pts.len(),
        argmin,
    }
}

/// A polynomial diffusion together with the state price density
/// `ζ_t = e^{-αt} p(X_t)`.
#[derive(Clone, Debug)]
pub struct PricingModel {
    diffusion: PolyDiffusion,
    p: Polynomial,
    p_coords: DVector<f64>,
    alpha: f64,
    positivity: PositivityCheck,
}

impl PricingModel {
    /// Positivity of `p` on `E` is only sampled; a failure is logged and
    /// recorded, and pricing then rejects points where `p(x) <= 0`.
    pub fn new(
        diffusion: PolyDiffusion,
        p: Polynomial,
        alpha: f64,
        cfg: &SampleConfig,
    ) -> Result<Self> {
        check_dim(diffusion.model().dim(), p.dim())?;
        let p_coords = diffusion.coordinates(&p)?;
        let positivity = positivity_check(&p, diffusion.state_space(), cfg);
        if positivity.status != Status::Pass {
            log::warn!(
                "state price density p = {p} is not positive on E: p({:?}) = {}",
                positivity.argmin,
                positivity.min_sampled
            );
        }
        Ok(PricingModel {
            diffusion,
            p,
            p_coords,
            alpha,
            positivity,
        })
    }

    pub fn diffusion(&self) -> &PolyDiffusion {
        &self.diffusion
    }

    pub fn density(&self) -> &Polynomial {
        &self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn positivity(&self) -> &PositivityCheck {
        &self.positivity
    }

    fn denominator(&self, h: &DVector<f64>, x: &[f64]) -> Result<f64> {
        let den = h.dot(&self.p_coords);
        if !(den > 0.0) {
            return Err(Error::NonPositiveDensity {
                value: den,
                point: x.to_vec(),
            });
        }
        Ok(den)
    }

    fn horizon(t: f64, maturity: f64) -> Result<f64> {
        if !(maturity >= t) {
            return Err(Error::InvalidInput(format!(
                "maturity {maturity} precedes t = {t}"
            )));
        }
        Ok(maturity - t)
    }

    /// `Π(t,T) = ζ_t^{-1} E[ζ_T q(X_T) | X_t = x]`.
    pub fn price_cashflow(&self, q: &Polynomial, x: &[f64], t: f64, maturity: f64) -> Result<f64> {
        let tau = Self::horizon(t, maturity)?;
        check_dim(self.p.dim(), q.dim())?;
        let pq = self.diffusion.coordinates(&(&self.p * q))?;
        self.diffusion.state_space().check_point(x)?;
        let h = self.diffusion.basis().eval(x);
        let den = self.denominator(&h, x)?;
        let num = h.dot(&self.diffusion.propagate(&pq, tau)?);
        Ok((-self.alpha * tau).exp() * num / den)
    }

    /// Zero-coupon bond price `P(t,T)`.
    pub fn bond_price(&self, x: &[f64], t: f64, maturity: f64) -> Result<f64> {
        self.price_cashflow(&Polynomial::constant(self.p.dim(), 1.0), x, t, maturity)
    }

    /// `r = α - H(x)^T G p⃗ / H(x)^T p⃗`.
    pub fn short_rate(&self, x: &[f64]) -> Result<f64> {
        self.diffusion.state_space().check_point(x)?;
        let h = self.diffusion.basis().eval(x);
        let den = self.denominator(&h, x)?;
        let gp = self.diffusion.generator().matrix() * &self.p_coords;
        Ok(self.alpha - h.dot(&gp) / den)
    }

    /// `w = Σ c_i e^{-α T_i} e^{(T_i - T)G} p⃗`, so that the discounted swaption
    /// payoff at expiry `T` is `(H(X_T)^T w)^+`.
    pub fn swaption_payoff_vector(
        &self,
        coupons: &[(f64, f64)],
        expiry: f64,
    ) -> Result<CoordVector> {
        let mut w = DVector::zeros(self.p_coords.len());
        for &(c, ti) in coupons {
            let tau = Self::horizon(expiry, ti)?;
            w += self.diffusion.propagate(&self.p_coords, tau)? * (c * (-self.alpha * ti).exp());
        }
        CoordVector::new(self.diffusion.basis().clone(), w)
    }

    /// Swaption price at time 0 and state `x`: `E[(H(X_T)^T w)^+] / p(x)` by
    /// Monte Carlo over simulated `X_T`.
    pub fn swaption_price_mc(
        &self,
        coupons: &[(f64, f64)],
        expiry: f64,
        x: &[f64],
        mc: &McConfig,
    ) -> Result<(f64, f64)> {
        let w = self.swaption_payoff_vector(coupons, expiry)?;
        let ss = self.diffusion.state_space();
        ss.check_point(x)?;
        let den = self.denominator(&self.diffusion.basis().eval(x), x)?;
        if w.entries().iter().all(|&v| v == 0.0) {
            return Ok((0.0, 0.0));
        }
        let spec = SimulationSpec::new(expiry, mc.dt, mc.n_paths, mc.seed).endpoints_only();
        let paths = simulate_paths(self.diffusion.model(), ss, x, &spec)?;
        if paths.n_paths() == 0 {
            return Err(Error::EmptyPathSet);
        }
        let last = paths.n_records() - 1;
        let payoffs: Vec<f64> = (0..paths.n_paths())
            .map(|i| w.eval(paths.state(i, last)).max(0.0) / den)
            .collect();
        Ok(mean_and_se(&payoffs))
    }
}

/// `VS(t,T) = (T-t)^{-1} H(x)^T (∫_0^{T-t} e^{sG} ds) v⃗` for spot variance `v(X)`.
pub fn variance_swap_rate(
    diffusion: &PolyDiffusion,
    v: &Polynomial,
    x: &[f64],
    t: f64,
    maturity: f64,
) -> Result<f64> {
    if !(maturity > t) {
        return Err(Error::InvalidInput(format!(
            "variance swap needs T > t, got t = {t}, T = {maturity}"
        )));
    }
    let tau = maturity - t;
    let coords = diffusion.coordinates(v)?;
    diffusion.state_space().check_point(x)?;
    let (integral, _) = integrated_exponential(diffusion.generator().matrix(), tau)?;
    Ok(diffusion.basis().eval(x).dot(&(integral * coords)) / tau)
}

/// Price `C(T, K)` of a European call on the index.
pub trait IndexCallPricer: Sync {
    fn call(&self, maturity: f64, strike: f64) -> f64;
}

/// Flat-volatility lognormal index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackScholesPricer {
    pub spot: f64,
    pub vol: f64,
    #[serde(default)]
    pub rate: f64,
}

impl IndexCallPricer for BlackScholesPricer {
    fn call(&self, maturity: f64, strike: f64) -> f64 {
        let df = (-self.rate * maturity).exp();
        let intrinsic = (self.spot - strike * df).max(0.0);
        if !(strike > 0.0) {
            return self.spot - strike * df;
        }
        let sd = self.vol * maturity.max(0.0).sqrt();
        if sd == 0.0 || !strike.is_finite() {
            return if strike.is_finite() { intrinsic } else { 0.0 };
        }
        let n = Normal::new(0.0, 1.0).expect("unit normal");
        let d1 = ((self.spot / strike).ln() + self.rate * maturity) / sd + 0.5 * sd;
        let d2 = d1 - sd;
        self.spot * n.cdf(d1) - strike * df * n.cdf(d2)
    }
}

/// Call prices on a strike grid, interpolated with monotone cubic Hermite
/// splines. Beyond the grid the end slopes are continued, floored at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedPricer {
    maturity: f64,
    strikes: Vec<f64>,
    prices: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedPricer {
    pub fn new(maturity: f64, strikes: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if strikes.len() < 2 || strikes.len() != prices.len() {
            return Err(Error::InvalidInput(
                "need at least two (strike, price) pairs".into(),
            ));
        }
        if strikes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "strikes must be strictly increasing".into(),
            ));
        }
        let slopes = pchip_slopes(&strikes, &prices);
        Ok(TabulatedPricer {
            maturity,
            strikes,
            prices,
            slopes,
        })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }
}

/// Fritsch–Carlson derivative estimates.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        return vec![delta[0]; 2];
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

impl IndexCallPricer for TabulatedPricer {
    fn call(&self, _maturity: f64, strike: f64) -> f64 {
        let (x, y, m) = (&self.strikes, &self.prices, &self.slopes);
        let n = x.len();
        if strike <= x[0] {
            return y[0] + m[0] * (strike - x[0]);
        }
        if strike >= x[n - 1] {
            return (y[n - 1] + m[n - 1] * (strike - x[n - 1])).max(0.0);
        }
        let i = x.partition_point(|&k| k <= strike) - 1;
        let h = x[i + 1] - x[i];
        let s = (strike - x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * y[i]
            + (s3 - 2.0 * s2 + s) * h * m[i]
            + (-2.0 * s3 + 3.0 * s2) * y[i + 1]
            + (s3 - s2) * h * m[i + 1]
    }
}

/// Multivariate Jacobi model on the simplex for the index weights `X`, with
/// `Y_t = E[X_{T*} | X_t]` the constituent weights at time `t`.
#[derive(Clone, Debug)]
pub struct SimplexIndexModel {
    diffusion: PolyDiffusion,
    beta: DVector<f64>,
    drift: DMatrix<f64>,
    horizon: f64,
}

impl SimplexIndexModel {
    /// Rejects parameters that do not pass [`validate`].
    pub fn new(params: &SimplexParams, degree: u32, horizon: f64) -> Result<Self> {
        let d = params.beta.len();
        let ss = StateSpace::simplex(d)?;
        let mp = ModelParams::Simplex(params.clone());
        let report = validate(&ss, &mp, &SampleConfig::default())?;
        if !report.is_valid() {
            return Err(Error::InvalidParameters(format!(
                "simplex parameters fail: {}",
                report.failed_ids().join(", ")
            )));
        }
        let model = assemble_model(&ss, &mp)?;
        let beta = DVector::from_column_slice(&params.beta);
        let drift = DMatrix::from_fn(d, d, |i, j| params.b[i][j]);
        Ok(SimplexIndexModel {
            diffusion: PolyDiffusion::new(model, ss, degree)?,
            beta,
            drift,
            horizon,
        })
    }

    pub fn diffusion(&self) -> &PolyDiffusion {
        &self.diffusion
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `(Φ(τ), Ψ(τ))` with `Φ(τ) = ∫_0^τ e^{sB} β ds` and `Ψ(τ) = e^{τB}`.
    pub fn phi_psi(&self, tau: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let d = self.beta.len();
        let mut block = DMatrix::zeros(d + 1, d + 1);
        block
            .view_mut((0, 0), (d, d))
            .copy_from(&(&self.drift * tau));
        block
            .view_mut((0, d), (d, 1))
            .copy_from(&(&self.beta * tau));
        let e = matrix_exp(&block)?;
        Ok((
            e.view((0, d), (d, 1)).column(0).into_owned(),
            e.view((0, 0), (d, d)).into_owned(),
        ))
    }

    fn tau_to_horizon(&self, t: f64) -> Result<f64> {
        if !(t <= self.horizon) {
            return Err(Error::InvalidInput(format!(
                "t = {t} is after the horizon {}",
                self.horizon
            )));
        }
        Ok(self.horizon - t)
    }
}

/// `Y_t = Φ(T* - t) + Ψ(T* - t) x`.
pub fn index_weights(sim: &SimplexIndexModel, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let tau = sim.tau_to_horizon(t)?;
    sim.diffusion.state_space().check_point(x)?;
    let (phi, psi) = sim.phi_psi(tau)?;
    Ok((phi + psi * DVector::from_column_slice(x))
        .iter()
        .copied()
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstituentOptionPrice {
    pub price: f64,
    pub cheb_degree: usize,
    pub grid_size: usize,
    /// Max abs error of the Chebyshev fit on a dense grid of `[ε, 1]`.
    pub fit_residual: f64,
}

/// Chebyshev coefficients of `g` on `[lo, hi]` by discrete least squares at
/// `grid_size` Chebyshev nodes.
fn chebyshev_fit(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    degree: usize,
    grid_size: usize,
) -> Vec<f64> {
    let n = grid_size;
    let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let thetas: Vec<f64> = (0..n)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / n as f64)
        .collect();
    let values: Vec<f64> = thetas.iter().map(|th| g(mid + half * th.cos())).collect();
    (0..=degree)
        .map(|k| {
            let s: f64 = thetas
                .iter()
                .zip(&values)
                .map(|(th, v)| v * (k as f64 * th).cos())
                .sum();
            if k == 0 {
                s / n as f64
            } else {
                2.0 * s / n as f64
            }
        })
        .collect()
}

fn chebyshev_eval(coeffs: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + coeffs[0]
}

/// `Σ c_k T_k(u)` with `u` a polynomial.
fn chebyshev_compose(coeffs: &[f64], u: &Polynomial) -> Polynomial {
    let one = Polynomial::constant(u.dim(), 1.0);
    let mut out = one.scale(coeffs[0]);
    let (mut prev, mut cur) = (one, u.clone());
    for &c in &coeffs[1..] {
        out = &out + &cur.scale(c);
        let next = &(u * &cur).scale(2.0) - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

/// `g(ξ) = ξ C(T, K/ξ)`, with `g(0) = 0`.
fn constituent_payoff(pricer: &dyn IndexCallPricer, maturity: f64, strike: f64, xi: f64) -> f64 {
    if xi <= 0.0 {
        0.0
    } else {
        xi * pricer.call(maturity, strike / xi)
    }
}

fn check_constituent(sim: &SimplexIndexModel, i: usize, maturity: f64, strike: f64) -> Result<f64> {
    let d = sim.beta.len();
    if i >= d {
        return Err(Error::InvalidInput(format!(
            "constituent {i} out of range for d = {d}"
        )));
    }
    if !(strike > 0.0) || !(maturity >= 0.0) {
        return Err(Error::InvalidInput("need K > 0 and T >= 0".into()));
    }
    sim.tau_to_horizon(maturity)
}

/// `C_i(T,K) = E[Y^i_T C(T, K / Y^i_T)]` by a Chebyshev fit of
/// `ξ ↦ ξ C(T, K/ξ)` on `[ε, 1]` composed with the affine map `x ↦ Y^i_T`,
/// then the moment formula.
#[allow(clippy::too_many_arguments)]
pub fn constituent_option_price(
    sim: &SimplexIndexModel,
    pricer: &dyn IndexCallPricer,
    i: usize,
    maturity: f64,
    strike: f64,
    x0: &[f64],
    grid_size: usize,
    cheb_degree: usize,
) -> Result<ConstituentOptionPrice> {
    let tau_star = check_constituent(sim, i, maturity, strike)?;
    let n = sim.diffusion.degree() as usize;
    if cheb_degree > n {
        return Err(Error::DegreeTooHigh {
            degree: cheb_degree as i32,
            max: n as u32,
        });
    }
    let grid_size = grid_size.max(cheb_degree + 1);
    let g = |xi: f64| constituent_payoff(pricer, maturity, strike, xi);
    let (lo, hi) = (CHEB_EPSILON, 1.0);
    let coeffs = chebyshev_fit(&g, lo, hi, cheb_degree, grid_size);
    let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let residual = (0..=2000)
        .map(|k| {
            let xi = lo + (hi - lo) * k as f64 / 2000.0;
            (chebyshev_eval(&coeffs, (xi - mid) / half) - g(xi)).abs()
        })
        .fold(0.0, f64::max);
    if residual > CHEB_RESIDUAL_WARN {
        log::warn!("Chebyshev fit of degree {cheb_degree} has max residual {residual:e}");
    }

    let (phi, psi) = sim.phi_psi(tau_star)?;
    let d = phi.len();
    let linear: Vec<f64> = (0..d).map(|j| psi[(i, j)] / half).collect();
    let u = Polynomial::affine((phi[i] - mid) / half, &linear);
    let payoff = chebyshev_compose(&coeffs, &u);
    let price = sim.diffusion.conditional_moment(&payoff, x0, maturity)?;
    Ok(ConstituentOptionPrice {
        price,
        cheb_degree,
        grid_size,
        fit_residual: residual,
    })
}

/// Direct Monte Carlo estimate of `E[Y^i_T C(T, K / Y^i_T)]`.
pub fn constituent_option_price_mc(
    sim: &SimplexIndexModel,
    pricer: &dyn IndexCallPricer,
    i: usize,
    maturity: f64,
    strike: f64,
    x0: &[f64],
    mc: &McConfig,
) -> Result<(f64, f64)> {
    let tau_star = check_constituent(sim, i, maturity, strike)?;
    let (phi, psi) = sim.phi_psi(tau_star)?;
    let ss = sim.diffusion.state_space();
    let spec = SimulationSpec::new(maturity, mc.dt, mc.n_paths, mc.seed).endpoints_only();
    let paths = simulate_paths(sim.diffusion.model(), ss, x0, &spec)?;
    if paths.n_paths() == 0 {
        return Err(Error::EmptyPathSet);
    }
    let last = paths.n_records() - 1;
    let values: Vec<f64> = (0..paths.n_paths())
        .map(|k| {
            let x = paths.state(k, last);
            let yi = phi[i] + (0..x.len()).map(|j| psi[(i, j)] * x[j]).sum::<f64>();
            constituent_payoff(pricer, maturity, strike, yi)
        })
        .collect();
    Ok(mean_and_se(&values))
}
