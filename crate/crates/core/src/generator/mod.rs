// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! The generator `G f = ½ tr(a ∇²f) + b^T ∇f`, its matrix on `Pol_n(E)`, and
//! the closed-form conditional moments `E[p(X_T) | X_t = x] = H(x)^T e^{(T-t)G} p⃗`.

mod expm;
mod model;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::Basis;
use crate::error::{check_dim, Error, Result};
use crate::poly::{MultiIndex, Polynomial};
use crate::statespace::StateSpace;

pub use expm::matrix_exp;
pub(crate) use expm::norm1;
pub use model::{CompiledModel, ModelCoefficients};

/// Matrix representation `G` of the generator on a basis: `Gp = H^T G p⃗`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    basis: Arc<Basis>,
    matrix: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Row-major CSV with a header of monomial exponent keys.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = self.basis.monomials().iter().map(|m| m.key()).collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn generator_apply(model: &ModelCoefficients, p: &Polynomial) -> Result<Polynomial> {
    model.generator_apply(p)
}

/// Column `j` holds the coordinates of `G h_j`, reduced to the state space.
pub fn generator_matrix(model: &ModelCoefficients, basis: Arc<Basis>) -> Result<GeneratorMatrix> {
    check_dim(basis.dim(), model.dim())?;
    let n = basis.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (j, m) in basis.monomials().iter().enumerate() {
        let image = model.generator_apply(&Polynomial::monomial(m.clone(), 1.0))?;
        let col = basis.coordinates(&image).map_err(|e| match e {
            Error::DegreeTooHigh { degree, max } => Error::NotPolynomialOnE {
                monomial: m.to_string(),
                degree,
                max,
            },
            other => other,
        })?;
        matrix.set_column(j, &col);
    }
    Ok(GeneratorMatrix { basis, matrix })
}

/// A polynomial diffusion on a state space together with its generator
/// matrix on `Pol_n(E)`.
#[derive(Clone, Debug)]
pub struct PolyDiffusion {
    model: ModelCoefficients,
    state_space: StateSpace,
    generator: GeneratorMatrix,
}

impl PolyDiffusion {
    pub fn new(model: ModelCoefficients, state_space: StateSpace, degree: u32) -> Result<Self> {
        let basis = Basis::new(&state_space, degree);
        Self::with_basis(model, state_space, basis)
    }

    pub fn with_basis(
        model: ModelCoefficients,
        state_space: StateSpace,
        basis: Basis,
    ) -> Result<Self> {
        check_dim(state_space.dim(), model.dim())?;
        let generator = generator_matrix(&model, Arc::new(basis))?;
        Ok(PolyDiffusion {
            model,
            state_space,
            generator,
        })
    }

    pub fn model(&self) -> &ModelCoefficients {
        &self.model
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn basis(&self) -> &Arc<Basis> {
        self.generator.basis()
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn degree(&self) -> u32 {
        self.basis().degree()
    }

    pub fn coordinates(&self, p: &Polynomial) -> Result<DVector<f64>> {
        self.basis().coordinates(p)
    }

    /// `e^{τG}`.
    pub fn semigroup(&self, tau: f64) -> Result<DMatrix<f64>> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "time increment {tau} must be >= 0"
            )));
        }
        matrix_exp(&(self.generator.matrix() * tau))
    }

    /// `e^{τG} p⃗`.
    pub fn propagate(&self, p: &DVector<f64>, tau: f64) -> Result<DVector<f64>> {
        if tau == 0.0 {
            return Ok(p.clone());
        }
        Ok(self.semigroup(tau)? * p)
    }

    /// `E[p(X_{t+τ}) | X_t = x]`.
    pub fn conditional_moment(&self, p: &Polynomial, x: &[f64], tau: f64) -> Result<f64> {
        let coords = self.coordinates(p)?;
        self.state_space.check_point(x)?;
        let w = self.propagate(&coords, tau)?;
        Ok(self.basis().eval(x).dot(&w))
    }

    /// The polynomial `x ↦ E[p(X_{t+τ}) | X_t = x]`.
    pub fn conditional_expectation(&self, p: &Polynomial, tau: f64) -> Result<Polynomial> {
        let coords = self.coordinates(p)?;
        Ok(self.basis().polynomial(&self.propagate(&coords, tau)?))
    }

    /// `E[X_{t_1}^{k(1)} ... X_{t_m}^{k(m)} | X_0 = x0]` by backward iteration of
    /// conditional expectations. The basis degree must cover the running
    /// product at every stage.
    pub fn joint_moment(&self, x0: &[f64], times: &[f64], exponents: &[MultiIndex]) -> Result<f64> {
        if times.is_empty() || times.len() != exponents.len() {
            return Err(Error::InvalidInput(
                "times and multi-indices must be nonempty and of equal length".into(),
            ));
        }
        if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "times must be increasing and >= 0".into(),
            ));
        }
        let dim = self.model.dim();
        for k in exponents {
            check_dim(dim, k.dim())?;
        }
        let m = times.len();
        let mut f = Polynomial::monomial(exponents[m - 1].clone(), 1.0);
        for i in (0..m - 1).rev() {
            let inner = self.conditional_expectation(&f, times[i + 1] - times[i])?;
            f = &Polynomial::monomial(exponents[i].clone(), 1.0) * &inner;
        }
        self.conditional_moment(&f, x0, times[0])
    }

    /// Independent check of [`Self::conditional_moment`]: integrates
    /// `dF/ds = G^T F`, `F(0) = H(x)` with adaptive RK4 and returns `F(τ)^T p⃗`.
    pub fn moment_ode_oracle(&self, p: &Polynomial, x: &[f64], tau: f64) -> Result<f64> {
        let coords = self.coordinates(p)?;
        self.state_space.check_point(x)?;
        let gt = self.generator.matrix().transpose();
        let f = integrate_linear(&gt, self.basis().eval(x), tau)?;
        Ok(f.dot(&coords))
    }
}

/// Adaptive classical RK4 with step doubling for `y' = A y` on `[0, tau]`.
fn integrate_linear(a: &DMatrix<f64>, y0: DVector<f64>, tau: f64) -> Result<DVector<f64>> {
    const TOL: f64 = 1e-13;
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "time increment {tau} must be >= 0"
        )));
    }
    let mut y = y0;
    if tau == 0.0 {
        return Ok(y);
    }
    let rk4 = |y: &DVector<f64>, h: f64| -> DVector<f64> {
        let k1 = a * y;
        let k2 = a * (y + &k1 * (h / 2.0));
        let k3 = a * (y + &k2 * (h / 2.0));
        let k4 = a * (y + &k3 * h);
        y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    };
    let mut s = 0.0;
    let mut h = (tau / 16.0).min(0.05 / (1.0 + norm1(a)));
    let h_min = tau * 1e-14;
    while s < tau {
        if s + h > tau {
            h = tau - s;
        }
        let full = rk4(&y, h);
        let half = rk4(&rk4(&y, h / 2.0), h / 2.0);
        let err = (&half - &full).amax() / 15.0;
        let scale = 1.0 + half.amax();
        if err <= TOL * scale {
            // Richardson extrapolation of the two estimates.
            y = &half + (&half - &full) / 15.0;
            s += h;
        } else if h < h_min {
            return Err(Error::StepSizeUnderflow(s));
        }
        let ratio = if err == 0.0 {
            2.0
        } else {
            (0.9 * (TOL * scale / err).powf(0.2)).clamp(0.2, 2.0)
        };
        h *= ratio;
        if h < h_min && s < tau {
            return Err(Error::StepSizeUnderflow(s));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, i: usize) -> Polynomial {
        Polynomial::variable(dim, i)
    }

    fn brownian() -> PolyDiffusion {
        let m =
            ModelCoefficients::scalar(Polynomial::constant(1, 1.0), Polynomial::zero(1)).unwrap();
        PolyDiffusion::new(m, StateSpace::euclidean(1).unwrap(), 2).unwrap()
    }

    fn jacobi(n: u32) -> PolyDiffusion {
        // a = x(1-x), b = 1/2 - x
        let a = &x(1, 0) - &x(1, 0).pow(2);
        let b = Polynomial::affine(0.5, &[-1.0]);
        let m = ModelCoefficients::scalar(a, b).unwrap();
        PolyDiffusion::new(m, StateSpace::box_orthant(1, 0).unwrap(), n).unwrap()
    }

    #[test]
    fn generator_on_brownian_and_jacobi() {
        let bm = brownian();
        assert_eq!(
            bm.model().generator_apply(&x(1, 0).pow(2)).unwrap(),
            Polynomial::constant(1, 1.0)
        );
        assert!(bm
            .model()
            .generator_apply(&Polynomial::constant(1, 4.0))
            .unwrap()
            .is_zero());
        let j = jacobi(2);
        let g = j.model().generator_apply(&x(1, 0).pow(2)).unwrap();
        let expected = Polynomial::from_terms(1, [(vec![1], 2.0), (vec![2], -3.0)]).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn generator_matrices() {
        let g = brownian().generator().matrix().clone();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(0, 2)] = 1.0;
        assert_eq!(g, expected);

        let j = jacobi(1);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, -1.0]);
        assert_eq!(j.generator().matrix(), &expected);
    }

    #[test]
    fn degree_violations_are_rejected_up_front() {
        // Admissible coefficients map the basis into itself; a quadratic drift
        // never reaches the generator.
        let m =
            ModelCoefficients::scalar(Polynomial::constant(1, 1.0), Polynomial::zero(1)).unwrap();
        let basis = Arc::new(Basis::full(1, 2));
        assert!(generator_matrix(&m, basis).is_ok());
        assert!(ModelCoefficients::scalar(Polynomial::zero(1), x(1, 0).pow(2)).is_err());
    }

    #[test]
    fn moments_brownian() {
        let bm = brownian();
        let p = x(1, 0).pow(2);
        assert!((bm.conditional_moment(&p, &[1.0], 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(bm.conditional_moment(&p, &[1.5], 0.0).unwrap(), 2.25);
        let ode = bm.moment_ode_oracle(&p, &[1.0], 1.0).unwrap();
        assert!((ode - 2.0).abs() < 1e-10);
        assert_eq!(bm.moment_ode_oracle(&p, &[0.3], 0.0).unwrap(), 0.09);
    }

    #[test]
    fn jacobi_mean_matches_closed_form_and_ode() {
        let j = jacobi(4);
        let m = j.conditional_moment(&x(1, 0), &[0.2], 1.0).unwrap();
        let exact = 0.5 + (0.2 - 0.5) * (-1f64).exp();
        assert!((m - exact).abs() < 1e-13);
        assert!((exact - 0.389_636).abs() < 1e-6);
        let ode = j.moment_ode_oracle(&x(1, 0), &[0.2], 1.0).unwrap();
        assert!((ode - m).abs() < 1e-8);
        let p4 = x(1, 0).pow(4);
        let c4 = j.conditional_moment(&p4, &[0.2], 2.0).unwrap();
        let o4 = j.moment_ode_oracle(&p4, &[0.2], 2.0).unwrap();
        assert!((c4 - o4).abs() < 1e-8);
    }

    #[test]
    fn moment_errors() {
        let j = jacobi(2);
        assert!(matches!(
            j.conditional_moment(&x(1, 0), &[1.5], 1.0),
            Err(Error::PointOutsideStateSpace { .. })
        ));
        assert!(matches!(
            j.conditional_moment(&x(1, 0).pow(3), &[0.5], 1.0),
            Err(Error::DegreeTooHigh { .. })
        ));
    }

    #[test]
    fn joint_moments_brownian() {
        let bm = brownian();
        let one = MultiIndex::new(vec![1]);
        let (t1, t2, x0) = (0.4, 1.3, 0.7);
        let v = bm
            .joint_moment(&[x0], &[t1, t2], &[one.clone(), one.clone()])
            .unwrap();
        assert!((v - (x0 * x0 + t1)).abs() < 1e-13);
        let single = bm
            .joint_moment(&[x0], &[t2], &[MultiIndex::new(vec![2])])
            .unwrap();
        let direct = bm.conditional_moment(&x(1, 0).pow(2), &[x0], t2).unwrap();
        assert_eq!(single, direct);
        let too_high = bm.joint_moment(&[x0], &[t1, t2], &[one.clone(), MultiIndex::new(vec![2])]);
        assert!(matches!(too_high, Err(Error::DegreeTooHigh { .. })));
        assert!(bm
            .joint_moment(&[x0], &[t2, t1], &[one.clone(), one])
            .is_err());
    }

    #[test]
    fn csv_export() {
        let csv = brownian().generator().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("0,1,2"));
        assert_eq!(lines.count(), 3);
    }
}
