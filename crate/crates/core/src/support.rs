//! Support information from the autocorrelation of the signal.
//!
//! With `N >= 2n - 1` the inverse DFT of the Fourier magnitudes is the
//! (aliasing-free) autocorrelation `g_m = sum_i x_i x_{i+m}`. Assuming no
//! cancellations, `g_m != 0` exactly when some pair of support indices is `m`
//! apart. Fixing index 0 in the support (which removes the shift degeneracy)
//! then yields:
//!
//! - forced indices `J1 = {0, m_max}` where `m_max` is the last nonzero lag;
//! - candidate indices `J2 = {k : g_k != 0}`.
//!
//! All indices in this module are zero-based.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Fourier1d;

/// Relative threshold under which an autocorrelation lag counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// One-sided autocorrelation `g_0..g_{n-1}` (`g_{-m} = g_m`).
#[derive(Clone, Debug, PartialEq)]
pub struct Autocorrelation {
    lags: Vec<f64>,
    zero_tol: f64,
}

impl Autocorrelation {
    pub fn from_lags(lags: Vec<f64>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::InvalidParameter("autocorrelation needs at least one lag".into()));
        }
        Ok(Self { lags, zero_tol: DEFAULT_ZERO_TOL })
    }

    pub fn with_zero_tol(mut self, zero_tol: f64) -> Self {
        self.zero_tol = zero_tol;
        self
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    /// The full `2n - 1` sequence `g_{-(n-1)}, ..., g_0, ..., g_{n-1}`.
    pub fn symmetric(&self) -> Vec<f64> {
        self.lags.iter().rev().chain(self.lags.iter().skip(1)).copied().collect()
    }

    /// Lag-wise zero pattern: `true` where `|g_m| > zero_tol * max |g|`.
    pub fn nonzero_mask(&self) -> Vec<bool> {
        let scale = self.lags.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.lags.iter().map(|v| v.abs() > self.zero_tol * scale).collect()
    }
}

/// Autocorrelation lags `0..n` from Fourier magnitudes `y` of length `N`.
pub fn autocorrelation(y: &[f64], n: usize) -> Result<Autocorrelation> {
    let len = y.len();
    if n == 0 {
        return Err(Error::InvalidParameter("signal length must be positive".into()));
    }
    if len < 2 * n - 1 {
        return Err(Error::InsufficientOversampling { measurements: len, n });
    }
    let op = Fourier1d::new(1, len)?;
    let spectrum = y.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let g = op.inverse_unnormalized(spectrum);
    Autocorrelation::from_lags(g[..n].iter().map(|c| c.re / len as f64).collect())
}

/// Forced and candidate support indices together with a sparsity budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportConstraints {
    n: usize,
    forced: Vec<usize>,
    candidates: Vec<usize>,
    sparsity: usize,
}

impl SupportConstraints {
    /// Validates `J1 ⊆ J2 ⊆ {0..n}`. The sparsity budget is checked separately
    /// by [`SupportConstraints::check_feasible`].
    pub fn new(n: usize, mut forced: Vec<usize>, mut candidates: Vec<usize>, sparsity: usize) -> Result<Self> {
        forced.sort_unstable();
        forced.dedup();
        candidates.sort_unstable();
        candidates.dedup();
        if let Some(&index) = candidates.iter().find(|&&k| k >= n) {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        if let Some(k) = forced.iter().find(|k| candidates.binary_search(k).is_err()) {
            return Err(Error::Infeasible(format!("forced index {k} is not a candidate")));
        }
        Ok(Self { n, forced, candidates, sparsity })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `J1`, sorted.
    pub fn forced(&self) -> &[usize] {
        &self.forced
    }

    /// `J2`, sorted.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn with_sparsity(mut self, sparsity: usize) -> Self {
        self.sparsity = sparsity;
        self
    }

    /// `|J1| <= s <= |J2|` and `s >= 1`.
    pub fn check_feasible(&self) -> Result<()> {
        let s = self.sparsity;
        if s == 0 {
            return Err(Error::Infeasible("sparsity must be at least 1".into()));
        }
        if s < self.forced.len() {
            return Err(Error::Infeasible(format!("s = {s} is below |J1| = {}", self.forced.len())));
        }
        if s > self.candidates.len() {
            return Err(Error::Infeasible(format!("s = {s} exceeds |J2| = {}", self.candidates.len())));
        }
        Ok(())
    }

    /// Whether `support` satisfies `J1 ⊆ S ⊆ J2` and `|S| = s`.
    pub fn admits(&self, support: &[usize]) -> bool {
        support.len() == self.sparsity
            && self.forced.iter().all(|k| support.contains(k))
            && support.iter().all(|k| self.candidates.binary_search(k).is_ok())
    }
}

/// Derives `J1` and `J2` from noiseless autocorrelation lags.
pub fn derive_supports(g: &Autocorrelation, sparsity: usize) -> Result<SupportConstraints> {
    let mask = g.nonzero_mask();
    if !mask.iter().any(|&nz| nz) {
        return Err(Error::ZeroSignal);
    }
    let candidates: Vec<usize> = mask.iter().enumerate().filter(|(_, nz)| **nz).map(|(k, _)| k).collect();
    let last = *candidates.last().expect("mask has a nonzero lag");
    let forced = if last == 0 { vec![0] } else { vec![0, last] };
    // g_0 = |x|^2 dominates every lag, so index 0 is always a candidate.
    SupportConstraints::new(g.lags().len(), forced, candidates, sparsity)
}

/// Constraints that ignore the autocorrelation: `J1 = {0}`, `J2 = {0..n}`.
pub fn noisy_mode(n: usize, sparsity: usize) -> Result<SupportConstraints> {
    if n == 0 {
        return Err(Error::InvalidParameter("signal length must be positive".into()));
    }
    SupportConstraints::new(n, vec![0], (0..n).collect(), sparsity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fourier_magnitudes, SparseSignal};

    fn worked_example() -> SparseSignal {
        SparseSignal::new(vec![2.0, 0.0, 0.0, -1.0, 0.0, -1.5], 11).unwrap()
    }

    #[test]
    fn worked_example_lags() {
        let g = autocorrelation(&fourier_magnitudes(&worked_example()), 6).unwrap();
        let expected = [7.25, 0.0, 1.5, -2.0, 0.0, -3.0];
        for (a, b) in g.lags().iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let full = [-3.0, 0.0, -2.0, 1.5, 0.0, 7.25, 0.0, 1.5, -2.0, 0.0, -3.0];
        for (a, b) in g.symmetric().iter().zip(full) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn worked_example_supports() {
        let g = autocorrelation(&fourier_magnitudes(&worked_example()), 6).unwrap();
        let c = derive_supports(&g, 3).unwrap();
        assert_eq!(c.forced(), &[0, 5]);
        assert_eq!(c.candidates(), &[0, 2, 3, 5]);
        assert_eq!(c.sparsity(), 3);
    }

    #[test]
    fn impulse() {
        let x = SparseSignal::new(vec![1.7, 0.0, 0.0, 0.0], 8).unwrap();
        let g = autocorrelation(&fourier_magnitudes(&x), 4).unwrap();
        assert!((g.lags()[0] - 1.7 * 1.7).abs() < 1e-12);
        assert!(g.lags()[1..].iter().all(|v| v.abs() < 1e-12));
        let c = derive_supports(&g, 1).unwrap();
        assert_eq!(c.forced(), &[0]);
        assert_eq!(c.candidates(), &[0]);
    }

    #[test]
    fn zero_autocorrelation_is_an_error() {
        let g = Autocorrelation::from_lags(vec![0.0; 4]).unwrap();
        assert_eq!(derive_supports(&g, 1), Err(Error::ZeroSignal));
    }

    #[test]
    fn undersampled() {
        assert_eq!(autocorrelation(&[1.0; 10], 6), Err(Error::InsufficientOversampling { measurements: 10, n: 6 }));
    }

    #[test]
    fn noisy_mode_sets() {
        let c = noisy_mode(4, 2).unwrap();
        assert_eq!(c.forced(), &[0]);
        assert_eq!(c.candidates(), &[0, 1, 2, 3]);
        assert_eq!(c.sparsity(), 2);
        let c = noisy_mode(1, 1).unwrap();
        assert_eq!(c.forced(), c.candidates());
        for s in 1..=4 {
            assert_eq!(noisy_mode(4, s).unwrap().sparsity(), s);
        }
    }

    #[test]
    fn feasibility() {
        let c = SupportConstraints::new(6, vec![0, 5], vec![0, 2, 3, 5], 3).unwrap();
        assert!(c.check_feasible().is_ok());
        assert!(matches!(c.clone().with_sparsity(5).check_feasible(), Err(Error::Infeasible(_))));
        assert!(matches!(c.clone().with_sparsity(1).check_feasible(), Err(Error::Infeasible(_))));
        assert!(SupportConstraints::new(6, vec![1], vec![0, 2], 1).is_err());
        assert!(c.admits(&[0, 3, 5]));
        assert!(!c.admits(&[0, 1, 5]));
    }
}
