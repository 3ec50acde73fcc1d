// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use polydiff::poly::reduce;
use polydiff::pricing::{
    constituent_option_price, constituent_option_price_mc, index_weights, variance_swap_rate,
    BlackScholesPricer, McConfig, PricingModel, SimplexIndexModel,
};
use polydiff::simulate::{boundary_stats, mc_moment, simulate_paths, SimulationSpec};
use polydiff::statespace::sampling::interior_samples;
use polydiff::statespace::{
    boundary_classify, compute_h, validate, BoundaryVerdict, SampleConfig, Status, Verdict,
};
use polydiff::{matrix_exp, Polynomial};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Closed-form moments against the moment ODE for every basis monomial up
/// to degree 6 on the six-model matrix.
fn moment_formula_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: (f64, String) = (0.0, String::new());
    let mut n = 0;
    for m in common::model_matrix() {
        let d = m.diffusion(6);
        for mono in d.basis().monomials() {
            let p = Polynomial::monomial(mono.clone(), 1.0);
            for tau in [0.1, 1.0, 2.0] {
                let closed = d
                    .conditional_moment(&p, &m.x0, tau)
                    .map_err(|e| e.to_string())?;
                let ode = d
                    .moment_ode_oracle(&p, &m.x0, tau)
                    .map_err(|e| e.to_string())?;
                let diff = (closed - ode).abs();
                if diff.is_nan() || diff > worst.0 {
                    worst = (diff, format!("{} {p} tau={tau}", m.name));
                }
                n += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst.0 <= 1e-7 && secs < 30.0,
        format!(
            "{n} comparisons, max |closed - ode| = {:.2e} ({}), {secs:.1} s",
            worst.0, worst.1
        ),
    )
}

/// First four Jacobi moments against 10^5 simulated paths.
fn monte_carlo_consistency() -> Outcome {
    let start = Instant::now();
    let m = common::jacobi();
    let d = m.diffusion(4);
    let spec = SimulationSpec::new(1.0, 1e-3, 100_000, 2024).endpoints_only();
    let paths =
        simulate_paths(&m.model, &m.state_space, &m.x0, &spec).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=4 {
        let p = Polynomial::variable(1, 0).pow(k);
        let exact = d
            .conditional_moment(&p, &m.x0, 1.0)
            .map_err(|e| e.to_string())?;
        let (est, se) = mc_moment(&paths, &p, 1.0).map_err(|e| e.to_string())?;
        let z = (est - exact) / se;
        ok &= z.abs() <= 3.0;
        parts.push(format!("m{k} z={z:+.2}"));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        ok && secs < 60.0,
        format!("{}, {secs:.1} s", parts.join(", ")),
    )
}

/// Feller trichotomy from the tangency quotient plus the empirical companion.
fn feller_trichotomy() -> Outcome {
    let x = Polynomial::variable(1, 0);
    let cfg = SampleConfig::default();
    let mut verdicts = Vec::new();
    let mut ok = true;
    for (b0, want) in [
        (0.3, "attain"),
        (0.5, "non_attain_critical"),
        (0.6, "non_attain_strict"),
    ] {
        let m = common::cir(b0);
        let got = match boundary_classify(&m.model, &m.state_space, &x, &cfg).verdict {
            BoundaryVerdict::Attain { .. } => "attain",
            BoundaryVerdict::NonAttainCritical => "non_attain_critical",
            BoundaryVerdict::NonAttainStrict => "non_attain_strict",
            BoundaryVerdict::Inconclusive { .. } => "inconclusive",
        };
        ok &= got == want;
        verdicts.push(format!("b0={b0}: {got}"));
    }
    let hit = |b0: f64, threshold: f64| -> Result<f64, String> {
        let m = common::cir(b0);
        let spec = SimulationSpec::new(2.0, 1e-4, 10_000, 1).endpoints_only();
        let paths =
            simulate_paths(&m.model, &m.state_space, &[0.1], &spec).map_err(|e| e.to_string())?;
        Ok(boundary_stats(&paths, &x, threshold)
            .map_err(|e| e.to_string())?
            .hit_fraction)
    };
    let low = hit(0.25, 1e-6)?;
    let high = hit(1.0, 1e-9)?;
    ok &= low > 0.01 && high == 0.0;
    check(
        ok,
        format!(
            "{}; hit(b0=0.25, 1e-6) = {low:.4}, hit(b0=1.0, 1e-9) = {high}",
            verdicts.join(", ")
        ),
    )
}

/// Curated valid parameters pass; each one-parameter perturbation fails
/// with its own condition id.
fn validator_fixtures() -> Outcome {
    let cfg = SampleConfig::default();
    let mut rejected = 0;
    let mut errors = Vec::new();
    for case in common::validator_cases() {
        let r = validate(&case.state_space, &case.valid, &cfg).map_err(|e| e.to_string())?;
        if r.verdict != Verdict::Valid {
            errors.push(format!(
                "{} valid set rejected: {:?}",
                case.family,
                r.failed_ids()
            ));
        }
        for (id, params) in &case.rejections {
            let r = validate(&case.state_space, params, &cfg).map_err(|e| e.to_string())?;
            if r.verdict == Verdict::Invalid && r.status_of(id) == Some(Status::Fail) {
                rejected += 1;
            } else {
                errors.push(format!("{id} not rejected ({:?})", r.failed_ids()));
            }
        }
    }
    check(
        errors.is_empty() && rejected >= 8,
        format!(
            "3 valid sets accepted, {rejected} perturbations rejected by id{}",
            if errors.is_empty() {
                String::new()
            } else {
                format!("; {}", errors.join("; "))
            }
        ),
    )
}

/// `a∇p = h p` with zero symbolic remainder.
fn exact_division_certificate() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [
        common::cir(0.5),
        common::unit_ball(),
        common::simplex_jacobi(),
    ] {
        let modulus = m.state_space.equalities().to_vec();
        for p in m.state_space.inequalities() {
            let h =
                compute_h(&m.model, &m.state_space, p).map_err(|e| format!("{}: {e}", m.name))?;
            let agp = m
                .model
                .diffusion_times_gradient(p)
                .map_err(|e| e.to_string())?;
            for (f, hi) in agp.iter().zip(&h) {
                let diff = f - &(hi * p);
                let rem = reduce(&diff, &modulus)
                    .map_err(|e| e.to_string())?
                    .remainder;
                ok &= rem.is_zero();
            }
            parts.push(format!(
                "{} [{p}]: h = ({})",
                m.name,
                h.iter()
                    .map(|q| q.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
    }
    check(ok, parts.join("; "))
}

/// Semigroup property and the martingale property of constants.
fn semigroup_invariants() -> Outcome {
    let mut worst_semi: f64 = 0.0;
    let mut worst_one: f64 = 0.0;
    for m in common::model_matrix() {
        let d = m.diffusion(6);
        let one = Polynomial::constant(m.model.dim(), 1.0);
        for s in [0.1, 0.5, 1.0] {
            for t in [0.1, 0.5, 1.0] {
                let st = d.semigroup(s + t).map_err(|e| e.to_string())?;
                let prod = d.semigroup(s).map_err(|e| e.to_string())?
                    * d.semigroup(t).map_err(|e| e.to_string())?;
                worst_semi = worst_semi.max((st - prod).norm());
            }
            let c = d
                .conditional_moment(&one, &m.x0, s)
                .map_err(|e| e.to_string())?;
            worst_one = worst_one.max((c - 1.0).abs());
        }
    }
    check(
        worst_semi <= 1e-8 && worst_one <= 1e-12,
        format!("max semigroup defect {worst_semi:.2e}, max |E[1] - 1| {worst_one:.2e}"),
    )
}

fn pricing_identities() -> Outcome {
    let alpha = 0.03;
    let mut parts = Vec::new();
    let mut ok = true;

    let m = common::jacobi();
    let p = Polynomial::parse("1.5 - x1", 1).map_err(|e| e.to_string())?;
    let d = m.diffusion(4);
    let pm = PricingModel::new(d.clone(), p.clone(), alpha, &SampleConfig::default())
        .map_err(|e| e.to_string())?;
    let ptt = pm.bond_price(&m.x0, 0.7, 0.7).map_err(|e| e.to_string())?;
    ok &= (ptt - 1.0).abs() <= 1e-12;
    parts.push(format!("|P(t,t) - 1| = {:.1e}", (ptt - 1.0).abs()));

    let h = 1e-5;
    let hx = d.basis().eval(&m.x0);
    let pv = d.coordinates(&p).map_err(|e| e.to_string())?;
    let forward = pm.bond_price(&m.x0, 0.0, h).map_err(|e| e.to_string())?;
    let back = matrix_exp(&(d.generator().matrix() * -h)).map_err(|e| e.to_string())?;
    let backward = (alpha * h).exp() * hx.dot(&(back * &pv)) / hx.dot(&pv);
    let fd = -(forward.ln() - backward.ln()) / (2.0 * h);
    let r = pm.short_rate(&m.x0).map_err(|e| e.to_string())?;
    ok &= (r - fd).abs() <= 1e-6;
    parts.push(format!("|r - fd| = {:.1e}", (r - fd).abs()));

    let mut vs_err: f64 = 0.0;
    for tau in [0.5, 2.0, 5.0] {
        let rate = variance_swap_rate(&d, &p, &m.x0, 0.0, tau).map_err(|e| e.to_string())?;
        let f = |s: f64| d.conditional_moment(&p, &m.x0, s).unwrap();
        let quad = common::adaptive_simpson(&f, 0.0, tau, 1e-13) / tau;
        vs_err = vs_err.max((rate - quad).abs());
    }
    ok &= vs_err <= 1e-8;
    parts.push(format!("|VS - quad| = {vs_err:.1e}"));

    let horizon = 5.0;
    let sim = SimplexIndexModel::new(&common::simplex3_params(), 2, horizon)
        .map_err(|e| e.to_string())?;
    let mut sum_err: f64 = 0.0;
    for x in interior_samples(sim.diffusion().state_space(), &SampleConfig::new(100)) {
        for k in 0..10 {
            let y = index_weights(&sim, &x, horizon * k as f64 / 9.0).map_err(|e| e.to_string())?;
            sum_err = sum_err.max((y.iter().sum::<f64>() - 1.0).abs());
        }
    }
    ok &= sum_err <= 1e-10;
    parts.push(format!("max |1'Y - 1| = {sum_err:.1e} on 1000 points"));

    let sim =
        SimplexIndexModel::new(&common::simplex2_params(), 8, 2.0).map_err(|e| e.to_string())?;
    let pricer = BlackScholesPricer {
        spot: 1.0,
        vol: 0.3,
        rate: 0.0,
    };
    let x0 = [0.4, 0.6];
    let opt = constituent_option_price(&sim, &pricer, 0, 1.0, 0.3, &x0, 64, 8)
        .map_err(|e| e.to_string())?;
    let mc = McConfig {
        n_paths: 20_000,
        dt: 1e-3,
        seed: 11,
    };
    let (est, se) = constituent_option_price_mc(&sim, &pricer, 0, 1.0, 0.3, &x0, &mc)
        .map_err(|e| e.to_string())?;
    let tol = (3.0 * se).max(opt.fit_residual);
    ok &= (opt.price - est).abs() <= tol;
    parts.push(format!(
        "|option - mc| = {:.1e} <= {tol:.1e}",
        (opt.price - est).abs()
    ));

    check(ok, parts.join(", "))
}

/// Two runs of `simulate` with the same seed produce identical bytes.
fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/simplex_valid.json");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_polydiff"))
            .arg("--quiet")
            .arg("simulate")
            .arg(&spec)
            .args([
                "--paths", "200", "--dt", "1e-2", "--T", "1", "--seed", "42", "--out",
            ])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("simulate exited with {status}"));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(
        !outputs[0].is_empty() && outputs[0] == outputs[1],
        format!(
            "{} bytes, identical = {}",
            outputs[0].len(),
            outputs[0] == outputs[1]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 moment formula equivalence", moment_formula_equivalence),
        ("2 Monte Carlo consistency", monte_carlo_consistency),
        ("3 Feller boundary trichotomy", feller_trichotomy),
        ("4 validator fixtures", validator_fixtures),
        ("5 exact-division certificate", exact_division_certificate),
        (
            "6 semigroup and martingale invariants",
            semigroup_invariants,
        ),
        ("7 pricing identities", pricing_identities),
        ("8 reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
