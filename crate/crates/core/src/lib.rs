//! Sparse phase retrieval by greedy support search.
//!
//! A real `s`-sparse signal `x` is recovered from quadratic measurements
//! `y_i = x^T A_i x`, most commonly the squared magnitudes of its oversampled
//! Fourier transform. The solver alternates a 2-opt swap search over supports
//! with a damped Gauss-Newton fit on each candidate support, and restarts from
//! random supports until the objective falls below a threshold.
//!
//! ```
//! use gespar::{derive_supports, autocorrelation, gespar, Ensemble, GesparConfig};
//! use rand::SeedableRng;
//!
//! let ensemble = Ensemble::fourier_1d(6, 11).unwrap();
//! let y = ensemble.forward(&[2.0, 0.0, 0.0, -1.0, 0.0, -1.5]).unwrap();
//! let constraints = derive_supports(&autocorrelation(&y, 6).unwrap(), 3).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let result = gespar(&ensemble, &y, &constraints, &GesparConfig::default(), &mut rng).unwrap();
//! assert!(result.success);
//! ```

pub mod dgn;
pub mod error;
pub mod experiment;
pub mod fienup;
pub mod model;
pub mod search;
pub mod support;

pub use dgn::{dgn_solve, dgn_solve_from, DgnConfig, DgnOutcome, DgnTrace, Termination};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentSpec, Method, SupportMode, TrialRecord};
pub use fienup::{sparse_fienup, FienupConfig, FienupOutcome};
pub use model::{
    fourier_magnitudes, Ensemble, EnsembleKind, Frame, Measurements, RestrictedEnsemble, SparseSignal, Weights,
};
pub use search::{gespar, two_opt, GesparConfig, SolveResult, TwoOptOutcome};
pub use support::{autocorrelation, derive_supports, noisy_mode, Autocorrelation, SupportConstraints};
