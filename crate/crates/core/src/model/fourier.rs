use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::LinearSensing;
use crate::error::{Error, Result};

fn roots_of_unity(len: usize) -> Arc<Vec<Complex64>> {
    Arc::new((0..len).map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / len as f64)).collect())
}

/// Unnormalized `N`-point DFT of a zero-padded length-`n` signal:
/// `(Lx)_l = sum_m x_m exp(-2 pi j m l / N)`.
#[derive(Clone)]
pub struct Fourier1d {
    n: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    roots: Arc<Vec<Complex64>>,
}

impl fmt::Debug for Fourier1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier1d").field("n", &self.n).field("N", &self.len).finish()
    }
}

impl Fourier1d {
    pub fn new(n: usize, len: usize) -> Result<Self> {
        if n == 0 || len < n {
            return Err(Error::InvalidParameter(format!("fourier1d needs 1 <= n <= N, got n={n}, N={len}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            roots: roots_of_unity(len),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized inverse transform, `sum_l v_l exp(+2 pi j m l / N)`.
    pub(crate) fn inverse_unnormalized(&self, mut v: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse.process(&mut v);
        v
    }
}

impl LinearSensing for Fourier1d {
    fn input_len(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.len
    }

    fn apply(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, v) in buf.iter_mut().zip(x) {
            b.re = *v;
        }
        self.forward.process(&mut buf);
        buf
    }

    fn adjoint_re(&self, mut v: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut v);
        v[..self.n].iter().map(|c| c.re).collect()
    }

    fn columns(&self, support: &[usize]) -> Vec<Complex64> {
        let s = support.len();
        let mut out = Vec::with_capacity(self.len * s);
        for l in 0..self.len {
            out.extend(support.iter().map(|&k| self.roots[(k * l) % self.len]));
        }
        out
    }
}

/// Unnormalized 2D DFT of a `rows x cols` image (row-major) zero-padded into
/// a `frame_rows x frame_cols` frame.
#[derive(Clone)]
pub struct Fourier2d {
    rows: usize,
    cols: usize,
    frame_rows: usize,
    frame_cols: usize,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
    row_roots: Arc<Vec<Complex64>>,
    col_roots: Arc<Vec<Complex64>>,
}

impl fmt::Debug for Fourier2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier2d")
            .field("shape", &(self.rows, self.cols))
            .field("frame", &(self.frame_rows, self.frame_cols))
            .finish()
    }
}

impl Fourier2d {
    pub fn new(rows: usize, cols: usize, frame_rows: usize, frame_cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || frame_rows < rows || frame_cols < cols {
            return Err(Error::InvalidParameter(format!(
                "fourier2d needs a nonempty {rows}x{cols} image inside a {frame_rows}x{frame_cols} frame"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            rows,
            cols,
            frame_rows,
            frame_cols,
            row_forward: planner.plan_fft_forward(frame_cols),
            row_inverse: planner.plan_fft_inverse(frame_cols),
            col_forward: planner.plan_fft_forward(frame_rows),
            col_inverse: planner.plan_fft_inverse(frame_rows),
            row_roots: roots_of_unity(frame_rows),
            col_roots: roots_of_unity(frame_cols),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn frame_rows(&self) -> usize {
        self.frame_rows
    }

    pub fn frame_cols(&self) -> usize {
        self.frame_cols
    }

    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.frame_rows * self.frame_cols];
        for r in 0..self.rows {
            out[r * self.frame_cols..r * self.frame_cols + self.cols]
                .copy_from_slice(&x[r * self.cols..(r + 1) * self.cols]);
        }
        out
    }

    fn transform(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        rows.process(buf);
        let mut column = vec![Complex64::new(0.0, 0.0); self.frame_rows];
        for c in 0..self.frame_cols {
            for (r, v) in column.iter_mut().enumerate() {
                *v = buf[r * self.frame_cols + c];
            }
            cols.process(&mut column);
            for (r, v) in column.iter().enumerate() {
                buf[r * self.frame_cols + c] = *v;
            }
        }
    }

    pub(crate) fn inverse_unnormalized(&self, mut v: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut v, &self.row_inverse, &self.col_inverse);
        v
    }

    pub(crate) fn crop(&self, frame: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            out.extend(frame[r * self.frame_cols..r * self.frame_cols + self.cols].iter().map(|c| c.re));
        }
        out
    }
}

impl LinearSensing for Fourier2d {
    fn input_len(&self) -> usize {
        self.rows * self.cols
    }

    fn output_len(&self) -> usize {
        self.frame_rows * self.frame_cols
    }

    fn apply(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.embed(x).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.row_forward, &self.col_forward);
        buf
    }

    fn adjoint_re(&self, mut v: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut v, &self.row_inverse, &self.col_inverse);
        self.crop(&v)
    }

    fn columns(&self, support: &[usize]) -> Vec<Complex64> {
        let coords: Vec<(usize, usize)> = support.iter().map(|&k| (k / self.cols, k % self.cols)).collect();
        let mut out = Vec::with_capacity(self.output_len() * support.len());
        for p in 0..self.frame_rows {
            for q in 0..self.frame_cols {
                out.extend(coords.iter().map(|&(r, c)| {
                    self.row_roots[(r * p) % self.frame_rows] * self.col_roots[(c * q) % self.frame_cols]
                }));
            }
        }
        out
    }
}
