// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Admissibility validators, invariance checks, boundary classification,
//! uniqueness and the PSD projection.

mod common;

use nalgebra::DMatrix;
use polydiff::linalg::{min_eigenvalue, psd_project};
use polydiff::simulate::dispersion;
use polydiff::statespace::sampling::interior_samples;
use polydiff::statespace::{
    assemble_model, boundary_classify, check_necessary, check_sufficient, uniqueness_report,
    validate, BoundaryVerdict, BoxOrthantParams, Orientation, QuadricParams, SampleConfig, Status,
    UniquenessVerdict, Verdict,
};
use polydiff::{Polynomial, StateSpace};
use proptest::prelude::*;

#[test]
fn curated_parameters_are_valid() {
    let cfg = SampleConfig::default();
    for case in common::validator_cases() {
        let r = validate(&case.state_space, &case.valid, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Valid, "{}: {r:?}", case.family);
    }
}

#[test]
fn each_perturbation_is_rejected_with_its_condition() {
    let cfg = SampleConfig::default();
    let mut n = 0;
    for case in common::validator_cases() {
        for (id, params) in &case.rejections {
            let r = validate(&case.state_space, params, &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Invalid, "{id}: {r:?}");
            assert_eq!(r.status_of(id), Some(Status::Fail), "{id}: {r:?}");
            assert!(r.violations.iter().any(|v| v.condition == *id));
            n += 1;
        }
    }
    assert!(n >= 8);
}

#[test]
fn valid_parameters_pass_invariance_checks() {
    let cfg = SampleConfig::new(1000);
    for case in common::validator_cases() {
        let model = assemble_model(&case.state_space, &case.valid).unwrap();
        let nec = check_necessary(&model, &case.state_space, &cfg).unwrap();
        assert_eq!(nec.verdict, Verdict::Valid, "{}: {nec:?}", case.family);
        let suf = check_sufficient(&model, &case.state_space, &cfg).unwrap();
        assert_eq!(suf.verdict, Verdict::Valid, "{}: {suf:?}", case.family);
    }
    let ss = StateSpace::simplex(3).unwrap();
    let model = assemble_model(&ss, &common::simplex3_params().into()).unwrap();
    assert!(check_sufficient(&model, &ss, &cfg).unwrap().is_valid());
}

#[test]
fn simplex_diffusion_is_tangent_to_the_simplex() {
    let m = common::simplex_jacobi();
    let r = check_necessary(&m.model, &m.state_space, &SampleConfig::default()).unwrap();
    assert_eq!(
        r.status_of("necessary.manifold_tangency"),
        Some(Status::Pass)
    );
    for x in interior_samples(&m.state_space, &SampleConfig::new(200)) {
        let a = m.model.diffusion_at(&x);
        for i in 0..2 {
            assert!((a[(i, 0)] + a[(i, 1)]).abs() < 1e-15);
        }
    }
}

#[test]
fn box_orthant_diffusion_entries() {
    let ss = StateSpace::box_orthant(1, 1).unwrap();
    let params = BoxOrthantParams {
        gamma: vec![1.0],
        alpha: vec![vec![0.0]],
        phi: vec![1.0],
        psi: vec![],
        pi: vec![],
        beta: vec![0.5, 0.5],
        b: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
    };
    let model = assemble_model(&ss, &params.into()).unwrap();
    let a = model.a();
    assert_eq!(a[0][0], Polynomial::parse("x1 - x1^2", 2).unwrap());
    assert_eq!(a[1][1], Polynomial::variable(2, 1));
    assert!(a[0][1].is_zero() && a[1][0].is_zero());
}

#[test]
fn unit_ball_inward_drift_on_sphere() {
    let ss = StateSpace::unit_ball(2).unwrap();
    let params = QuadricParams {
        alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        beta: vec![0.0, 0.0],
        b: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
        gamma: vec![],
    };
    let r = validate(&ss, &params.into(), &SampleConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Valid, "{r:?}");
}

#[test]
fn box_corner_equality_breaks_strict_drift() {
    let ss = StateSpace::box_orthant(1, 1).unwrap();
    let params = BoxOrthantParams {
        gamma: vec![1.0],
        alpha: vec![vec![0.0]],
        phi: vec![1.0],
        psi: vec![],
        pi: vec![],
        beta: vec![0.5, 0.3],
        b: vec![vec![-1.0, 0.0], vec![-0.3, -1.0]],
    };
    let model = assemble_model(&ss, &params.into()).unwrap();
    let r = check_sufficient(&model, &ss, &SampleConfig::new(50)).unwrap();
    assert_eq!(r.status_of("sufficient.strict_drift"), Some(Status::Fail));
}

#[test]
fn cir_classification_is_monotone_in_drift() {
    let cfg = SampleConfig::new(100);
    let x = Polynomial::variable(1, 0);
    for sigma2 in [1.0, 2.0] {
        let mut rank = 0;
        for k in 1..=20 {
            let b0 = 0.05 * sigma2 * k as f64;
            let model = polydiff::ModelCoefficients::scalar(
                Polynomial::affine(0.0, &[sigma2]),
                Polynomial::affine(b0, &[-1.0]),
            )
            .unwrap();
            let ss = StateSpace::box_orthant(0, 1).unwrap();
            let c = boundary_classify(&model, &ss, &x, &cfg);
            let r = match c.verdict {
                BoundaryVerdict::Attain { .. } => 0,
                BoundaryVerdict::NonAttainCritical => 1,
                BoundaryVerdict::NonAttainStrict => 2,
                BoundaryVerdict::Inconclusive { reason } => panic!("{reason}"),
            };
            assert!(r >= rank, "sigma2 = {sigma2}, b0 = {b0}");
            let expected = match (2.0 * b0 - sigma2).partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Greater => 2,
            };
            assert_eq!(r, expected, "sigma2 = {sigma2}, b0 = {b0}");
            rank = r;
        }
    }
}

#[test]
fn hyperbolic_quadric_with_quadratic_diffusion_is_unknown() {
    let ss = StateSpace::quadric(vec![1.0, -1.0], Orientation::Inside).unwrap();
    let params = QuadricParams {
        alpha: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        beta: vec![0.0, 0.0],
        b: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
        gamma: vec![vec![1.0]],
    };
    let model = assemble_model(&ss, &params.into()).unwrap();
    let r = uniqueness_report(&model, &ss, &SampleConfig::default());
    assert_eq!(r.verdict, UniquenessVerdict::Unknown, "{r:?}");
}

#[test]
fn dispersion_reconstructs_projected_diffusion() {
    let cfg = SampleConfig::new(1000);
    for m in [
        common::jacobi(),
        common::simplex_jacobi(),
        common::unit_ball(),
    ] {
        for x in interior_samples(&m.state_space, &cfg) {
            let s = dispersion(&m.model, &x).unwrap();
            let target = psd_project(&m.model.diffusion_at(&x)).unwrap();
            assert!((&s * &s - target).norm() <= 1e-9, "{} at {x:?}", m.name);
        }
    }
    let ss = StateSpace::simplex(3).unwrap();
    let model = assemble_model(&ss, &common::simplex3_params().into()).unwrap();
    for x in interior_samples(&ss, &cfg) {
        let s = dispersion(&model, &x).unwrap();
        assert!((&s * &s - model.diffusion_at(&x)).norm() <= 1e-9);
    }
}

fn symmetric(entries: &[f64], n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_column_slice(n, n, entries);
    (&a + a.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn psd_projection_is_nearest(
        a in prop::collection::vec(-2.0..2.0f64, 9),
        others in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 9), 100),
    ) {
        let a = symmetric(&a, 3);
        let p = psd_project(&a).unwrap();
        prop_assert!(min_eigenvalue(&p) >= -1e-12);
        prop_assert!((psd_project(&p).unwrap() - &p).norm() <= 1e-12);
        let dist = (&a - &p).norm();
        for c in &others {
            let c = DMatrix::from_column_slice(3, 3, c);
            let b = &c * c.transpose();
            prop_assert!(dist <= (&a - &b).norm() + 1e-12);
        }
    }

    #[test]
    fn psd_projection_fixes_psd_input(c in prop::collection::vec(-2.0..2.0f64, 9)) {
        let c = DMatrix::from_column_slice(3, 3, &c);
        let b = &c * c.transpose();
        prop_assert!((psd_project(&b).unwrap() - &b).norm() <= 1e-12 * (1.0 + b.norm()));
    }
}
