// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005). Orders 3, 5, 7, 9 are used when the 1-norm is small enough,
//! otherwise order 13 with `s` squarings chosen so `‖A/2^s‖₁ <= θ₁₃`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

pub(crate) fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^A` for a square matrix with finite entries.
pub fn matrix_exp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidInput(
            "matrix_exp needs a square matrix".into(),
        ));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;

    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = match m {
                3 => pade_low(a, &a2, &ident, &B3),
                5 => pade_low(a, &a2, &ident, &B5),
                7 => pade_low(a, &a2, &ident, &B7),
                _ => pade_low(a, &a2, &ident, &B9),
            };
            return solve_pade(u, v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 2f64.powi(-s);
    let a1 = a * scale;
    let a2 = &a2 * (scale * scale);
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &ident;
    let u = &a1 * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &ident;
    let mut r = solve_pade(u, v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

fn pade_low(
    a: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    ident: &DMatrix<f64>,
    b: &[f64],
) -> (DMatrix<f64>, DMatrix<f64>) {
    // U = A * sum_k b[2k+1] A^{2k}, V = sum_k b[2k] A^{2k}
    let mut power = ident.clone();
    let mut u_inner = DMatrix::zeros(a.nrows(), a.ncols());
    let mut v = DMatrix::zeros(a.nrows(), a.ncols());
    for k in 0..b.len() / 2 {
        v += b[2 * k] * &power;
        u_inner += b[2 * k + 1] * &power;
        power = &power * a2;
    }
    (a * u_inner, v)
}

fn solve_pade(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = &v + &u;
    let q = v - u;
    let r = q.lu().solve(&p).ok_or(Error::Overflow)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = a.nrows();
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / k as f64;
            out += &term;
        }
        out
    }

    #[test]
    fn zero_and_nilpotent() {
        assert_eq!(
            matrix_exp(&DMatrix::zeros(3, 3)).unwrap(),
            DMatrix::identity(3, 3)
        );
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = matrix_exp(&n).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((e - expected).amax() < 1e-15);
    }

    #[test]
    fn scalar_exponentials_across_orders() {
        for &x in &[1e-3, 0.2, 0.9, 2.0, 5.0, 40.0, -30.0] {
            let e = matrix_exp(&DMatrix::from_element(1, 1, x)).unwrap()[(0, 0)];
            assert!((e / x.exp() - 1.0).abs() < 1e-13, "x = {x}: {e}");
        }
    }

    #[test]
    fn matches_series_on_small_norm() {
        // Deterministic pseudo-random entries, then scaled to 1-norm 0.5.
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut a = DMatrix::from_fn(5, 5, |_, _| next());
        a *= 0.5 / norm1(&a);
        let e = matrix_exp(&a).unwrap();
        let t = taylor(&a, 30);
        assert!((&e - &t).amax() < 1e-12, "{}", (&e - &t).amax());
    }

    #[test]
    fn rejects_nonfinite() {
        let a = DMatrix::from_element(2, 2, f64::NAN);
        assert!(matches!(matrix_exp(&a), Err(Error::Overflow)));
        let big = DMatrix::from_element(1, 1, 1e6);
        assert!(matches!(matrix_exp(&big), Err(Error::Overflow)));
    }
}
