// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared model test matrix and numerical oracles for the integration tests.

#![allow(dead_code)]

use polydiff::statespace::{
    assemble_model, BoxOrthantParams, ModelParams, QuadricParams, SimplexParams,
};
use polydiff::{ModelCoefficients, PolyDiffusion, Polynomial, StateSpace};

pub struct TestModel {
    pub name: &'static str,
    pub model: ModelCoefficients,
    pub state_space: StateSpace,
    pub x0: Vec<f64>,
}

impl TestModel {
    pub fn diffusion(&self, degree: u32) -> PolyDiffusion {
        PolyDiffusion::new(self.model.clone(), self.state_space.clone(), degree).unwrap()
    }
}

fn scalar(a: &str, b: &str) -> ModelCoefficients {
    ModelCoefficients::scalar(
        Polynomial::parse(a, 1).unwrap(),
        Polynomial::parse(b, 1).unwrap(),
    )
    .unwrap()
}

pub fn brownian() -> TestModel {
    TestModel {
        name: "brownian",
        model: scalar("1", "0"),
        state_space: StateSpace::euclidean(1).unwrap(),
        x0: vec![0.3],
    }
}

pub fn ou() -> TestModel {
    TestModel {
        name: "ou",
        model: scalar("0.5", "0.2 - 1.5*x1"),
        state_space: StateSpace::euclidean(1).unwrap(),
        x0: vec![0.3],
    }
}

pub fn cir(b0: f64) -> TestModel {
    TestModel {
        name: "cir",
        model: ModelCoefficients::scalar(
            Polynomial::variable(1, 0),
            Polynomial::affine(b0, &[-1.0]),
        )
        .unwrap(),
        state_space: StateSpace::box_orthant(0, 1).unwrap(),
        x0: vec![0.4],
    }
}

/// `a = x(1-x)`, `b = 1/2 - x` on `[0, 1]`.
pub fn jacobi() -> TestModel {
    TestModel {
        name: "jacobi",
        model: scalar("x1 - x1^2", "0.5 - x1"),
        state_space: StateSpace::box_orthant(1, 0).unwrap(),
        x0: vec![0.2],
    }
}

pub fn simplex2_params() -> SimplexParams {
    SimplexParams {
        alpha: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        beta: vec![0.5, 0.5],
        b: vec![vec![-1.5, 0.5], vec![0.5, -1.5]],
    }
}

pub fn simplex3_params() -> SimplexParams {
    SimplexParams {
        alpha: vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 0.5],
            vec![2.0, 0.5, 0.0],
        ],
        beta: vec![0.3, 0.4, 0.5],
        b: vec![
            vec![-1.8, 0.1, 0.2],
            vec![0.3, -1.6, 0.2],
            vec![0.3, 0.3, -1.6],
        ],
    }
}

pub fn simplex_jacobi() -> TestModel {
    let ss = StateSpace::simplex(2).unwrap();
    TestModel {
        name: "simplex_jacobi",
        model: assemble_model(&ss, &simplex2_params().into()).unwrap(),
        state_space: ss,
        x0: vec![0.4, 0.6],
    }
}

pub fn unit_ball_params() -> QuadricParams {
    QuadricParams {
        alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        beta: vec![0.1, 0.0],
        b: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
        gamma: vec![vec![0.5]],
    }
}

pub fn unit_ball() -> TestModel {
    let ss = StateSpace::unit_ball(2).unwrap();
    TestModel {
        name: "unit_ball",
        model: assemble_model(&ss, &unit_ball_params().into()).unwrap(),
        state_space: ss,
        x0: vec![0.3, -0.2],
    }
}

/// Brownian, OU, CIR, Jacobi, simplex Jacobi and unit-ball quadric.
pub fn model_matrix() -> Vec<TestModel> {
    vec![
        brownian(),
        ou(),
        cir(0.6),
        jacobi(),
        simplex_jacobi(),
        unit_ball(),
    ]
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Composite Simpson rule on `n` (even) intervals.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// A validator case: the state space, a curated valid parameter set and
/// one-parameter perturbations, each paired with the condition it breaks.
pub struct ValidatorCase {
    pub family: &'static str,
    pub state_space: StateSpace,
    pub valid: ModelParams,
    pub rejections: Vec<(&'static str, ModelParams)>,
}

pub fn box_params() -> BoxOrthantParams {
    BoxOrthantParams {
        gamma: vec![1.0],
        alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        phi: vec![1.0, 1.0],
        psi: vec![vec![0.0, 0.0]],
        pi: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        beta: vec![0.5, 0.5, 0.5],
        b: vec![
            vec![-1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ],
    }
}

pub fn validator_cases() -> Vec<ValidatorCase> {
    let q = unit_ball_params;
    let quadric = ValidatorCase {
        family: "quadric",
        state_space: StateSpace::unit_ball(2).unwrap(),
        valid: q().into(),
        rejections: vec![
            (
                "quadric.alpha_psd",
                QuadricParams {
                    alpha: vec![vec![1.0, 0.0], vec![0.0, -0.1]],
                    ..q()
                }
                .into(),
            ),
            (
                "quadric.gamma_psd",
                QuadricParams {
                    gamma: vec![vec![-0.5]],
                    ..q()
                }
                .into(),
            ),
            (
                "quadric.boundary_drift",
                QuadricParams {
                    beta: vec![0.8, 0.0],
                    ..q()
                }
                .into(),
            ),
        ],
    };

    let bx = box_params;
    let with_b = |i: usize, j: usize, v: f64| {
        let mut p = bx();
        p.b[i][j] = v;
        ModelParams::from(p)
    };
    let with_beta = |i: usize, v: f64| {
        let mut p = bx();
        p.beta[i] = v;
        ModelParams::from(p)
    };
    let box_case = ValidatorCase {
        family: "box_orthant",
        state_space: StateSpace::box_orthant(1, 2).unwrap(),
        valid: bx().into(),
        rejections: vec![
            (
                "box.gamma_nonnegative",
                BoxOrthantParams {
                    gamma: vec![-0.1],
                    ..bx()
                }
                .into(),
            ),
            (
                "box.pi_nonnegative",
                BoxOrthantParams {
                    pi: vec![vec![0.0, -0.1], vec![0.0, 0.0]],
                    ..bx()
                }
                .into(),
            ),
            (
                "box.phi_lower_bound",
                BoxOrthantParams {
                    phi: vec![-0.1, 1.0],
                    ..bx()
                }
                .into(),
            ),
            (
                "box.alpha_psd_condition",
                BoxOrthantParams {
                    alpha: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
                    ..bx()
                }
                .into(),
            ),
            ("box.drift_structure", with_b(0, 1, 0.1)),
            ("box.drift_I_lower", with_beta(0, 0.0)),
            ("box.drift_I_upper", with_beta(0, 1.0)),
            ("box.drift_J", with_beta(1, 0.0)),
            ("box.drift_JJ_offdiag", with_b(1, 2, -0.1)),
        ],
    };

    let s = simplex2_params;
    let simplex = ValidatorCase {
        family: "simplex",
        state_space: StateSpace::simplex(2).unwrap(),
        valid: s().into(),
        rejections: vec![
            (
                "simplex.alpha_symmetric",
                SimplexParams {
                    alpha: vec![vec![0.0, 1.0], vec![1.2, 0.0]],
                    ..s()
                }
                .into(),
            ),
            (
                "simplex.alpha_nonnegative",
                SimplexParams {
                    alpha: vec![vec![0.0, -1.0], vec![-1.0, 0.0]],
                    ..s()
                }
                .into(),
            ),
            (
                "simplex.drift_column_sums",
                SimplexParams {
                    b: vec![vec![-1.4, 0.5], vec![0.5, -1.5]],
                    ..s()
                }
                .into(),
            ),
            (
                "simplex.drift_inward",
                SimplexParams {
                    beta: vec![0.5, -0.6],
                    ..s()
                }
                .into(),
            ),
        ],
    };
    vec![quadric, box_case, simplex]
}
