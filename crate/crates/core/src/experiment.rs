//! Monte-Carlo recovery experiments.
//!
//! An [`ExperimentSpec`] describes a grid over `(n, N, s, snr, method)`. Every
//! `(cell, trial)` pair gets its own seed derived from the base seed and the
//! cell coordinates, so any slice of a grid reproduces the same trials. The
//! method is not part of the truth seed: GESPAR and Fienup see identical
//! signals and noise within a cell.

use std::io::Write;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fienup::{sparse_fienup, FienupConfig};
use crate::model::{Ensemble, Frame, Measurements, SparseSignal};
use crate::search::{gespar, GesparConfig};
use crate::support::{autocorrelation, derive_supports, noisy_mode};

/// Random `s`-sparse signal with index 0 always in the support and entries
/// uniform on `[-4, -3] ∪ [3, 4]`.
pub fn generate_truth<R: Rng + ?Sized>(n: usize, padded_len: usize, s: usize, rng: &mut R) -> Result<SparseSignal> {
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    let mut values = vec![0.0; n];
    let mut support = vec![0];
    support.extend(index::sample(rng, n - 1, s - 1).into_iter().map(|k| k + 1));
    support.sort_unstable();
    for k in support {
        let magnitude = rng.random_range(3.0..=4.0);
        values[k] = if rng.random::<bool>() { magnitude } else { -magnitude };
    }
    SparseSignal::new(values, padded_len)
}

/// Adds white Gaussian noise `v` scaled so that `20 log10(|y| / |v|)` is
/// exactly `snr_db`. An infinite SNR returns `y` unchanged.
pub fn add_noise<R: Rng + ?Sized>(y: &[f64], snr_db: f64, rng: &mut R) -> Result<Measurements> {
    if snr_db == f64::INFINITY {
        return Ok(Measurements::new(y.to_vec()));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidParameter("SNR must be a number".into()));
    }
    let signal_norm = norm(y);
    if signal_norm == 0.0 {
        return Err(Error::InvalidParameter("cannot set an SNR for zero measurements".into()));
    }
    let noise: Vec<f64> = (0..y.len()).map(|_| rng.sample(StandardNormal)).collect();
    let scale = signal_norm / 10f64.powf(snr_db / 20.0) / norm(&noise);
    Ok(Measurements::new(y.iter().zip(&noise).map(|(a, v)| a + scale * v).collect()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Smallest `|x - T(x_hat)| / |x|` over the trivial degeneracies `T` of the
/// frame (global sign, circular shift, mirroring) and whether it is within
/// `tol`. Both vectors are given in the padded frame.
pub fn equivalent_up_to_degeneracies(x_true: &[f64], x_hat: &[f64], frame: Frame, tol: f64) -> Result<(bool, f64)> {
    let len = frame.len();
    if x_true.len() != len || x_hat.len() != len {
        return Err(Error::DimensionMismatch { expected: len, found: x_true.len().min(x_hat.len()) });
    }
    let reference = norm(x_true);
    if reference == 0.0 {
        return Err(Error::InvalidParameter("reference signal is zero".into()));
    }
    let (rows, cols) = match frame {
        Frame::Line(len) => (1, len),
        Frame::Grid { rows, cols } => (rows, cols),
    };
    let mirrored: Vec<f64> = (0..len)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            x_hat[((rows - r) % rows) * cols + (cols - c) % cols]
        })
        .collect();

    let mut best = f64::INFINITY;
    for candidate in [x_hat, mirrored.as_slice()] {
        for dr in 0..rows {
            for dc in 0..cols {
                // |x - sigma * shift(c)|^2 = |x|^2 + |c|^2 - 2 sigma <x, shift(c)>
                let mut plus = 0.0;
                let mut minus = 0.0;
                for r in 0..rows {
                    let src_r = (r + rows - dr) % rows;
                    for c in 0..cols {
                        let xv = x_true[r * cols + c];
                        let hv = candidate[src_r * cols + (c + cols - dc) % cols];
                        plus += (xv - hv) * (xv - hv);
                        minus += (xv + hv) * (xv + hv);
                    }
                }
                best = best.min(plus.min(minus));
            }
        }
    }
    let nmse = best.sqrt() / reference;
    Ok((nmse <= tol, nmse))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gespar,
    Fienup,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gespar => "gespar",
            Method::Fienup => "fienup",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gespar" => Ok(Method::Gespar),
            "fienup" => Ok(Method::Fienup),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}` (expected gespar or fienup)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportMode {
    /// `J1`, `J2` from the autocorrelation (needs `N >= 2n - 1`).
    Autocorr,
    /// `J1 = {0}`, `J2 = {0..n}`.
    None,
}

fn default_trials() -> usize {
    50
}
fn default_iter() -> usize {
    6400
}
fn default_tau() -> f64 {
    1e-4
}
fn default_true() -> bool {
    true
}
fn default_snr() -> Vec<Option<f64>> {
    vec![None]
}
fn default_methods() -> Vec<String> {
    vec!["gespar".into()]
}
fn default_dims() -> usize {
    1
}
fn default_fienup_restarts() -> usize {
    100
}
fn default_fienup_iters() -> usize {
    1000
}
fn default_success_tol() -> f64 {
    1e-3
}

/// A grid of recovery experiments. Loaded from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Native signal lengths. For `dims = 2` each must be a perfect square.
    pub n: Vec<usize>,
    /// Measurement counts `N`. For `dims = 2`, perfect squares (frame side).
    #[serde(rename = "N")]
    pub measurements: Vec<usize>,
    /// True sparsity levels.
    pub s: Vec<usize>,
    /// `null` is noiseless.
    #[serde(default = "default_snr")]
    pub snr_db: Vec<Option<f64>>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_iter")]
    pub iter: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_true")]
    pub weighting: bool,
    pub support_mode: SupportMode,
    #[serde(default = "default_dims")]
    pub dims: usize,
    /// Upper bound on the sparsity given to the solvers in place of the true `s`.
    #[serde(default)]
    pub solve_sparsity: Option<usize>,
    #[serde(default = "default_fienup_restarts")]
    pub fienup_restarts: usize,
    #[serde(default = "default_fienup_iters")]
    pub fienup_max_iters: usize,
    #[serde(default = "default_success_tol")]
    pub success_tol: f64,
}

impl ExperimentSpec {
    /// Every problem with the spec, for reporting all at once.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.trials == 0 {
            out.push("trials: must be at least 1".to_string());
        }
        for (field, empty) in [("n", self.n.is_empty()), ("N", self.measurements.is_empty()), ("s", self.s.is_empty())]
        {
            if empty {
                out.push(format!("{field}: grid must not be empty"));
            }
        }
        if self.snr_db.is_empty() {
            out.push("snr_db: grid must not be empty (use [null] for noiseless)".into());
        }
        if self.methods.is_empty() {
            out.push("methods: must list at least one method".into());
        }
        for m in &self.methods {
            if m.parse::<Method>().is_err() {
                out.push(format!("methods: unknown method `{m}` (expected gespar or fienup)"));
            }
        }
        if self.iter == 0 {
            out.push("iter: must be at least 1".into());
        }
        if !(self.tau > 0.0) {
            out.push("tau: must be positive".into());
        }
        if self.dims != 1 && self.dims != 2 {
            out.push(format!("dims: must be 1 or 2, got {}", self.dims));
        }
        if self.solve_sparsity == Some(0) {
            out.push("solve_sparsity: must be at least 1".into());
        }
        if self.fienup_restarts == 0 || self.fienup_max_iters == 0 {
            out.push("fienup_restarts, fienup_max_iters: must be at least 1".into());
        }
        if !(self.success_tol > 0.0) {
            out.push("success_tol: must be positive".into());
        }
        if self.s.contains(&0) {
            out.push("s: sparsity levels must be at least 1".into());
        }
        if self.snr_db.iter().flatten().any(|v| v.is_nan()) {
            out.push("snr_db: NaN is not a valid SNR".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(problems))
        }
    }

    fn methods(&self) -> Vec<Method> {
        self.methods.iter().filter_map(|m| m.parse().ok()).collect()
    }

    /// Grid cells in `(n, N, s, snr, method)` order.
    pub fn cells(&self) -> Vec<Cell> {
        let methods = self.methods();
        let mut out = Vec::new();
        for &n in &self.n {
            for &measurements in &self.measurements {
                for &s in &self.s {
                    for &snr_db in &self.snr_db {
                        for &method in &methods {
                            out.push(Cell { n, measurements, s, snr_db, method });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub measurements: usize,
    pub s: usize,
    pub snr_db: Option<f64>,
    pub method: Method,
}

/// A cell that could not be run, with the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct SkippedCell {
    pub cell: Cell,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub measurements: usize,
    pub s: usize,
    pub snr_db: Option<f64>,
    pub method: Method,
    /// `None` for noisy trials, which only report NMSE.
    pub success: Option<bool>,
    pub nmse: f64,
    pub swaps: usize,
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub skipped: Vec<SkippedCell>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0u64, |acc, &w| splitmix64(acc ^ w))
}

/// Seed of one trial: `base_seed ^ hash(cell, trial)`, independent of method.
pub fn trial_seed(base_seed: u64, cell: &Cell, trial: usize) -> u64 {
    let snr = cell.snr_db.map_or(u64::MAX, f64::to_bits);
    base_seed ^ mix(&[cell.n as u64, cell.measurements as u64, cell.s as u64, snr, trial as u64])
}

fn square_side(v: usize) -> Option<usize> {
    let side = (v as f64).sqrt().round() as usize;
    (side * side == v).then_some(side)
}

impl ExperimentSpec {
    fn ensemble(&self, cell: &Cell) -> std::result::Result<Ensemble, String> {
        let (n, big_n) = (cell.n, cell.measurements);
        if big_n < n {
            return Err(format!("N = {big_n} < n = {n}"));
        }
        if cell.s > n {
            return Err(format!("s = {} > n = {n}", cell.s));
        }
        if self.support_mode == SupportMode::Autocorr {
            if self.dims == 2 {
                return Err("autocorrelation supports are only derived for 1D signals".into());
            }
            if big_n < 2 * n - 1 {
                return Err(format!("autocorr support mode needs N >= 2n-1, got N = {big_n}, n = {n}"));
            }
        }
        if self.dims == 2 {
            let side = square_side(n).ok_or(format!("n = {n} is not a perfect square"))?;
            let frame = square_side(big_n).ok_or(format!("N = {big_n} is not a perfect square"))?;
            Ensemble::fourier_2d_oversampled(side, side, frame, frame).map_err(|e| e.to_string())
        } else {
            Ensemble::fourier_1d(n, big_n).map_err(|e| e.to_string())
        }
    }

    fn run_trial(&self, cell: &Cell, ensemble: &Ensemble, trial: usize) -> Result<TrialRecord> {
        let seed = trial_seed(self.base_seed, cell, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = generate_truth(cell.n, ensemble.frame().len(), cell.s, &mut rng)?;
        let clean = ensemble.forward(truth.values())?;
        let y = match cell.snr_db {
            Some(snr) => add_noise(&clean, snr, &mut rng)?,
            None => clean,
        };

        let requested = self.solve_sparsity.unwrap_or(cell.s).min(cell.n);
        let constraints = match self.support_mode {
            SupportMode::Autocorr => {
                let c = derive_supports(&autocorrelation(&y, cell.n)?, requested)?;
                // An upper bound larger than |J2| is clamped to the candidates.
                let s = requested.clamp(c.forced().len(), c.candidates().len());
                c.with_sparsity(s)
            }
            SupportMode::None => noisy_mode(cell.n, requested)?,
        };

        let mut solver_rng = ChaCha8Rng::seed_from_u64(mix(&[seed, cell.method as u64 + 1]));
        let start = Instant::now();
        let (estimate, swaps) = match cell.method {
            Method::Gespar => {
                let config = GesparConfig {
                    tau: self.tau,
                    max_swaps: self.iter,
                    weighting: self.weighting,
                    ..GesparConfig::default()
                };
                let r = gespar(ensemble, &y, &constraints, &config, &mut solver_rng)?;
                (r.x.into_values(), r.swaps_used)
            }
            Method::Fienup => {
                let config = FienupConfig {
                    max_iters: self.fienup_max_iters,
                    restarts: self.fienup_restarts,
                    sparsity: constraints.sparsity(),
                };
                (sparse_fienup(ensemble, &y, &config, &mut solver_rng)?.x.into_values(), 0)
            }
        };
        let wall_time = start.elapsed().as_secs_f64();

        let (_, nmse) = equivalent_up_to_degeneracies(
            &ensemble.embed(truth.values()),
            &ensemble.embed(&estimate),
            ensemble.frame(),
            self.success_tol,
        )?;
        Ok(TrialRecord {
            seed,
            n: cell.n,
            measurements: cell.measurements,
            s: cell.s,
            snr_db: cell.snr_db,
            method: cell.method,
            success: cell.snr_db.is_none().then_some(nmse <= self.success_tol),
            nmse,
            swaps,
            wall_time,
        })
    }
}

/// Runs every trial of every feasible cell. Trials are spread over the
/// current rayon pool; records come back in `(cell, trial)` order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for cell in spec.cells() {
        match spec.ensemble(&cell) {
            Ok(ensemble) => jobs.extend((0..spec.trials).map(|t| (cell, ensemble.clone(), t))),
            Err(reason) => skipped.push(SkippedCell { cell, reason }),
        }
    }
    let records = jobs
        .par_iter()
        .map(|(cell, ensemble, trial)| spec.run_trial(cell, ensemble, *trial))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput { records, skipped })
}

/// Whether the `wall_time` column is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timing {
    Measured,
    /// Leaves the column empty so repeated runs are byte-identical.
    Omitted,
}

/// CSV with columns `seed,n,N,s,snr_db,method,success,nmse,swaps,wall_time`.
pub fn write_csv<W: Write>(records: &[TrialRecord], timing: Timing, out: W) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        n: usize,
        #[serde(rename = "N")]
        measurements: usize,
        s: usize,
        snr_db: Option<f64>,
        method: Method,
        success: Option<bool>,
        nmse: f64,
        swaps: usize,
        wall_time: Option<f64>,
    }
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(Row {
            seed: r.seed,
            n: r.n,
            measurements: r.measurements,
            s: r.s,
            snr_db: r.snr_db,
            method: r.method,
            success: r.success,
            nmse: r.nmse,
            swaps: r.swaps,
            wall_time: (timing == Timing::Measured).then_some(r.wall_time),
        })?;
    }
    writer.flush()
}

/// Aggregates over the trials of one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    #[serde(rename = "N")]
    pub measurements: usize,
    pub s: usize,
    pub snr_db: Option<f64>,
    pub method: Method,
    pub trials: usize,
    /// `None` for noisy cells.
    pub success_rate: Option<f64>,
    pub mean_nmse: f64,
    pub mean_swaps: f64,
    pub mean_time: f64,
}

/// Per-cell aggregates in first-appearance order.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut out: Vec<(CellSummary, usize)> = Vec::new();
    for r in records {
        let same = |c: &CellSummary| {
            c.n == r.n
                && c.measurements == r.measurements
                && c.s == r.s
                && c.snr_db.map(f64::to_bits) == r.snr_db.map(f64::to_bits)
                && c.method == r.method
        };
        let idx = match out.iter().position(|(c, _)| same(c)) {
            Some(i) => i,
            None => {
                out.push((
                    CellSummary {
                        n: r.n,
                        measurements: r.measurements,
                        s: r.s,
                        snr_db: r.snr_db,
                        method: r.method,
                        trials: 0,
                        success_rate: r.success.map(|_| 0.0),
                        mean_nmse: 0.0,
                        mean_swaps: 0.0,
                        mean_time: 0.0,
                    },
                    0,
                ));
                out.len() - 1
            }
        };
        let (c, successes) = &mut out[idx];
        c.trials += 1;
        *successes += usize::from(r.success == Some(true));
        c.mean_nmse += r.nmse;
        c.mean_swaps += r.swaps as f64;
        c.mean_time += r.wall_time;
    }
    out.into_iter()
        .map(|(mut c, successes)| {
            let t = c.trials as f64;
            c.success_rate = c.success_rate.map(|_| successes as f64 / t);
            c.mean_nmse /= t;
            c.mean_swaps /= t;
            c.mean_time /= t;
            c
        })
        .collect()
}
