#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Rows `l` of the `len`-point DFT restricted to the first `n` columns.
pub fn dft_rows(n: usize, len: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(len, n, |l, m| Complex64::from_polar(1.0, -2.0 * PI * ((l * m) % len) as f64 / len as f64))
}

/// `A_l = Re(F_l)^T Re(F_l) + Im(F_l)^T Im(F_l)` built entry by entry.
pub fn dft_matrices(n: usize, len: usize) -> Vec<DMatrix<f64>> {
    let f = dft_rows(n, len);
    (0..len).map(|l| DMatrix::from_fn(n, n, |j, k| f[(l, j)].re * f[(l, k)].re + f[(l, j)].im * f[(l, k)].im)).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
