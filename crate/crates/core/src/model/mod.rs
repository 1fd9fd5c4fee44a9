//! Signals, quadratic measurement ensembles and the weighted least-squares
//! objective `f(x) = sum_i w_i (x^T A_i x - y_i)^2`.
//!
//! Every ensemble except [`MatrixEnsemble`] is of the form `A_i = Re(l_i^H l_i)`
//! for a row `l_i` of some complex linear operator `L`, so that
//! `x^T A_i x = |(L x)_i|^2`. Those ensembles never materialize `A_i`: the
//! objective needs one application of `L` and the gradient one application of
//! its adjoint. For Fourier ensembles both are FFTs.

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod dictionary;
mod explicit;
mod fourier;
mod restricted;

pub use dictionary::{DenseSensing, DictionaryEnsemble, Sensing};
pub use explicit::MatrixEnsemble;
pub use fourier::{Fourier1d, Fourier2d};
pub use restricted::RestrictedEnsemble;

/// A real signal of native length `n`, embedded by zero padding into a
/// measurement frame of length `padded_len >= n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct SparseSignal {
    values: Vec<f64>,
    padded_len: usize,
}

#[derive(Serialize, Deserialize)]
struct SignalRepr {
    n: usize,
    #[serde(rename = "N")]
    padded_len: usize,
    values: Vec<f64>,
}

impl TryFrom<SignalRepr> for SparseSignal {
    type Error = Error;

    fn try_from(repr: SignalRepr) -> Result<Self> {
        if repr.values.len() != repr.n {
            return Err(Error::DimensionMismatch { expected: repr.n, found: repr.values.len() });
        }
        SparseSignal::new(repr.values, repr.padded_len)
    }
}

impl From<SparseSignal> for SignalRepr {
    fn from(signal: SparseSignal) -> Self {
        SignalRepr { n: signal.values.len(), padded_len: signal.padded_len, values: signal.values }
    }
}

impl SparseSignal {
    pub fn new(values: Vec<f64>, padded_len: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("signal must have at least one entry".into()));
        }
        if padded_len < values.len() {
            return Err(Error::InvalidParameter(format!(
                "padded length {padded_len} is shorter than the signal ({})",
                values.len()
            )));
        }
        Ok(Self { values, padded_len })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The zero-padded length-`N` vector.
    pub fn padded(&self) -> Vec<f64> {
        let mut out = self.values.clone();
        out.resize(self.padded_len, 0.0);
        out
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Zero-based indices of the nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
    }
}

/// Measured squared magnitudes `y`. Noisy measurements may be negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementsRepr", into = "MeasurementsRepr")]
pub struct Measurements(Vec<f64>);

#[derive(Serialize, Deserialize)]
struct MeasurementsRepr {
    #[serde(rename = "N")]
    len: usize,
    y: Vec<f64>,
}

impl TryFrom<MeasurementsRepr> for Measurements {
    type Error = Error;

    fn try_from(repr: MeasurementsRepr) -> Result<Self> {
        if repr.y.len() != repr.len {
            return Err(Error::DimensionMismatch { expected: repr.len, found: repr.y.len() });
        }
        Ok(Measurements(repr.y))
    }
}

impl From<Measurements> for MeasurementsRepr {
    fn from(m: Measurements) -> Self {
        MeasurementsRepr { len: m.0.len(), y: m.0 }
    }
}

impl Measurements {
    pub fn new(y: Vec<f64>) -> Self {
        Self(y)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Measurements {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Per-measurement weights of the objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive and finite".into()));
        }
        Ok(Self(w))
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0; len])
    }
}

impl Deref for Weights {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Fourier1d,
    Fourier2d,
    Matrices,
    Dictionary,
}

/// Geometry of the measurement frame the signal is embedded in. Used to
/// enumerate the trivial shift and mirror degeneracies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Line(usize),
    Grid { rows: usize, cols: usize },
}

impl Frame {
    pub fn len(&self) -> usize {
        match *self {
            Frame::Line(len) => len,
            Frame::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A linear operator `L: R^n -> C^N` whose squared row magnitudes are the
/// measurements.
pub(crate) trait LinearSensing {
    fn input_len(&self) -> usize;

    fn output_len(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Vec<Complex64>;

    /// `Re(L^H v)`.
    fn adjoint_re(&self, v: Vec<Complex64>) -> Vec<f64>;

    /// The columns of `L` selected by `support`, row-major `N x |support|`.
    fn columns(&self, support: &[usize]) -> Vec<Complex64>;
}

/// The set of quadratic forms `x -> x^T A_i x`, `i = 1..N`.
#[derive(Clone, Debug)]
pub enum Ensemble {
    Fourier1d(Fourier1d),
    Fourier2d(Fourier2d),
    Matrices(MatrixEnsemble),
    Dictionary(DictionaryEnsemble),
}

impl Ensemble {
    /// Magnitude-squared `N`-point DFT of a zero-padded length-`n` signal.
    pub fn fourier_1d(n: usize, measurements: usize) -> Result<Self> {
        Fourier1d::new(n, measurements).map(Ensemble::Fourier1d)
    }

    /// Magnitude-squared 2D DFT of a `rows x cols` image, no oversampling.
    pub fn fourier_2d(rows: usize, cols: usize) -> Result<Self> {
        Fourier2d::new(rows, cols, rows, cols).map(Ensemble::Fourier2d)
    }

    pub fn fourier_2d_oversampled(rows: usize, cols: usize, frame_rows: usize, frame_cols: usize) -> Result<Self> {
        Fourier2d::new(rows, cols, frame_rows, frame_cols).map(Ensemble::Fourier2d)
    }

    pub fn matrices(n: usize, matrices: Vec<nalgebra::DMatrix<f64>>) -> Result<Self> {
        MatrixEnsemble::new(n, matrices).map(Ensemble::Matrices)
    }

    /// Signal sparse in `basis` (`None` for the identity) observed through `sensing`.
    pub fn dictionary(basis: Option<nalgebra::DMatrix<f64>>, sensing: Sensing) -> Result<Self> {
        DictionaryEnsemble::new(basis, sensing).map(Ensemble::Dictionary)
    }

    /// General rank-one measurements `A_i = phi_i phi_i^T`, one real sensing
    /// vector per row.
    pub fn sensing_vectors(rows: nalgebra::DMatrix<f64>) -> Result<Self> {
        Self::dictionary(None, Sensing::Dense(DenseSensing::real(rows)?))
    }

    pub fn kind(&self) -> EnsembleKind {
        match self {
            Ensemble::Fourier1d(_) => EnsembleKind::Fourier1d,
            Ensemble::Fourier2d(_) => EnsembleKind::Fourier2d,
            Ensemble::Matrices(_) => EnsembleKind::Matrices,
            Ensemble::Dictionary(_) => EnsembleKind::Dictionary,
        }
    }

    /// Number of unknowns: the native signal length, or the number of
    /// dictionary atoms.
    pub fn signal_len(&self) -> usize {
        match self {
            Ensemble::Fourier1d(f) => f.input_len(),
            Ensemble::Fourier2d(f) => f.input_len(),
            Ensemble::Matrices(m) => m.n(),
            Ensemble::Dictionary(d) => d.input_len(),
        }
    }

    pub fn num_measurements(&self) -> usize {
        match self {
            Ensemble::Fourier1d(f) => f.output_len(),
            Ensemble::Fourier2d(f) => f.output_len(),
            Ensemble::Matrices(m) => m.len(),
            Ensemble::Dictionary(d) => d.output_len(),
        }
    }

    /// The frame the unknowns are embedded in for degeneracy alignment.
    pub fn frame(&self) -> Frame {
        match self {
            Ensemble::Fourier1d(f) => Frame::Line(f.output_len()),
            Ensemble::Fourier2d(f) => Frame::Grid { rows: f.frame_rows(), cols: f.frame_cols() },
            _ => Frame::Line(self.signal_len()),
        }
    }

    /// Embeds native unknowns into the measurement frame.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Ensemble::Fourier2d(f) => f.embed(x),
            _ => {
                let mut out = x.to_vec();
                out.resize(self.frame().len(), 0.0);
                out
            }
        }
    }

    fn linear(&self) -> Option<&dyn LinearSensing> {
        match self {
            Ensemble::Fourier1d(f) => Some(f),
            Ensemble::Fourier2d(f) => Some(f),
            Ensemble::Dictionary(d) => Some(d),
            Ensemble::Matrices(_) => None,
        }
    }

    fn check_signal(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.signal_len() {
            return Err(Error::DimensionMismatch { expected: self.signal_len(), found: x.len() });
        }
        Ok(())
    }

    fn check_measurements(&self, len: usize) -> Result<()> {
        if len != self.num_measurements() {
            return Err(Error::DimensionMismatch { expected: self.num_measurements(), found: len });
        }
        Ok(())
    }

    /// `y_i = x^T A_i x`.
    pub fn forward(&self, x: &[f64]) -> Result<Measurements> {
        self.check_signal(x)?;
        Ok(Measurements(self.quadratic_values(x)))
    }

    pub(crate) fn quadratic_values(&self, x: &[f64]) -> Vec<f64> {
        match self.linear() {
            Some(op) => op.apply(x).iter().map(|c| c.norm_sqr()).collect(),
            None => match self {
                Ensemble::Matrices(m) => m.quadratic_values(x),
                _ => unreachable!(),
            },
        }
    }

    /// `f(x) = sum_i w_i (x^T A_i x - y_i)^2`.
    pub fn objective(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<f64> {
        self.check_signal(x)?;
        self.check_measurements(y.len())?;
        self.check_measurements(w.len())?;
        Ok(self.objective_unchecked(x, y, w))
    }

    pub(crate) fn objective_unchecked(&self, x: &[f64], y: &[f64], w: &[f64]) -> f64 {
        weighted_residual_norm(&self.quadratic_values(x), y, w)
    }

    /// `grad f(x) = 4 sum_i w_i (x^T A_i x - y_i) A_i x`.
    pub fn gradient(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.check_signal(x)?;
        self.check_measurements(y.len())?;
        self.check_measurements(w.len())?;
        Ok(self.gradient_unchecked(x, y, w))
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64], y: &[f64], w: &[f64]) -> Vec<f64> {
        match self.linear() {
            Some(op) => {
                let mut v = op.apply(x);
                for ((vi, yi), wi) in v.iter_mut().zip(y).zip(w) {
                    let residual = vi.norm_sqr() - yi;
                    *vi *= 4.0 * wi * residual;
                }
                op.adjoint_re(v)
            }
            None => match self {
                Ensemble::Matrices(m) => m.gradient(x, y, w),
                _ => unreachable!(),
            },
        }
    }

    /// Restricts the ensemble to the variables in `support` (zero-based),
    /// giving `B_i = U_S^T A_i U_S`.
    pub fn restrict(&self, support: &[usize]) -> Result<RestrictedEnsemble> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let n = self.signal_len();
        if let Some(&index) = support.iter().find(|&&k| k >= n) {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        Ok(match self.linear() {
            Some(op) => RestrictedEnsemble::linear(support.to_vec(), op.output_len(), op.columns(support)),
            None => match self {
                Ensemble::Matrices(m) => RestrictedEnsemble::blocks(support.to_vec(), m.blocks(support)),
                _ => unreachable!(),
            },
        })
    }
}

pub(crate) fn weighted_residual_norm(values: &[f64], y: &[f64], w: &[f64]) -> f64 {
    values
        .iter()
        .zip(y)
        .zip(w)
        .map(|((v, yi), wi)| {
            let r = v - yi;
            wi * r * r
        })
        .sum()
}

/// `|DFT(x)|^2` of the zero-padded signal.
pub fn fourier_magnitudes(x: &SparseSignal) -> Measurements {
    let op = Fourier1d::new(x.n(), x.padded_len()).expect("SparseSignal guarantees N >= n >= 1");
    Measurements(op.apply(x.values()).iter().map(|c| c.norm_sqr()).collect())
}
