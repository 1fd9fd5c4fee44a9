//! Sparse error-reduction baseline.
//!
//! Each restart alternates between imposing the measured Fourier magnitudes
//! and projecting onto real `s`-sparse signals supported on the native
//! indices. The restart with the smallest unweighted objective wins.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Ensemble, SparseSignal, Weights};

/// Iteration stops early once `|x_{k+1} - x_k| < FIXED_POINT_TOL`.
pub const FIXED_POINT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FienupConfig {
    pub max_iters: usize,
    pub restarts: usize,
    pub sparsity: usize,
}

impl FienupConfig {
    pub fn new(sparsity: usize) -> Self {
        Self { max_iters: 1000, restarts: 100, sparsity }
    }
}

#[derive(Clone, Debug)]
pub struct FienupOutcome {
    pub x: SparseSignal,
    pub objective_unweighted: f64,
    /// Iterations summed over all restarts.
    pub iterations: usize,
}

/// Replaces the magnitudes of `spectrum` by `sqrt(max(y, 0))`, keeping the
/// phases. `phase(0)` is taken as 1.
pub fn magnitude_projection(spectrum: &mut [Complex64], y: &[f64]) {
    for (c, yi) in spectrum.iter_mut().zip(y) {
        let target = yi.max(0.0).sqrt();
        let norm = c.norm();
        *c = if norm > 0.0 { *c * (target / norm) } else { Complex64::new(target, 0.0) };
    }
}

/// Keeps the `s` largest-magnitude entries (ties to the lower index).
pub fn sparsity_projection(x: &mut [f64], s: usize) {
    if s >= x.len() {
        return;
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    for &k in &order[s..] {
        x[k] = 0.0;
    }
}

/// Inverse DFT and crop back to the native indices (real part).
fn back_project(ensemble: &Ensemble, spectrum: Vec<Complex64>) -> Vec<f64> {
    match ensemble {
        Ensemble::Fourier1d(f) => {
            let scale = f.len() as f64;
            f.inverse_unnormalized(spectrum)[..f.n()].iter().map(|c| c.re / scale).collect()
        }
        Ensemble::Fourier2d(f) => {
            let scale = (f.frame_rows() * f.frame_cols()) as f64;
            f.crop(&f.inverse_unnormalized(spectrum)).into_iter().map(|v| v / scale).collect()
        }
        _ => unreachable!("checked by sparse_fienup"),
    }
}

fn spectrum(ensemble: &Ensemble, x: &[f64]) -> Vec<Complex64> {
    use crate::model::LinearSensing;
    match ensemble {
        Ensemble::Fourier1d(f) => f.apply(x),
        Ensemble::Fourier2d(f) => f.apply(x),
        _ => unreachable!("checked by sparse_fienup"),
    }
}

/// Sparse error reduction from Fourier magnitudes `y`.
pub fn sparse_fienup<R: Rng + ?Sized>(
    ensemble: &Ensemble,
    y: &[f64],
    config: &FienupConfig,
    rng: &mut R,
) -> Result<FienupOutcome> {
    if !matches!(ensemble, Ensemble::Fourier1d(_) | Ensemble::Fourier2d(_)) {
        return Err(Error::Unsupported("sparse Fienup"));
    }
    if y.len() != ensemble.num_measurements() {
        return Err(Error::DimensionMismatch { expected: ensemble.num_measurements(), found: y.len() });
    }
    let n = ensemble.signal_len();
    if config.sparsity == 0 || config.sparsity > n || config.restarts == 0 || config.max_iters == 0 {
        return Err(Error::InvalidParameter(format!(
            "fienup needs 1 <= s <= n and positive iteration counts, got {config:?}"
        )));
    }
    let ones = Weights::uniform(y.len());
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;

    for _ in 0..config.restarts {
        let mut x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        sparsity_projection(&mut x, config.sparsity);
        for _ in 0..config.max_iters {
            iterations += 1;
            let mut spec = spectrum(ensemble, &x);
            magnitude_projection(&mut spec, y);
            let mut next = back_project(ensemble, spec);
            sparsity_projection(&mut next, config.sparsity);
            let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            x = next;
            if change.sqrt() < FIXED_POINT_TOL {
                break;
            }
        }
        let objective = ensemble.objective_unchecked(&x, y, &ones);
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, x));
        }
    }

    let (objective_unweighted, x) = best.expect("restarts >= 1");
    Ok(FienupOutcome { x: SparseSignal::new(x, ensemble.frame().len())?, objective_unweighted, iterations })
}
