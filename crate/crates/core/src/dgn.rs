//! Damped Gauss-Newton minimization of
//! `g(z) = sum_i w_i (z^T B_i z - y_i)^2` over a fixed support.
//!
//! Each step linearizes the residuals `h_i(z) = z^T B_i z - y_i` around the
//! current iterate, solves the resulting linear least-squares problem for
//! `z~`, and moves along `-d = z~ - z` with a backtracking stepsize that
//! enforces
//!
//! ```text
//! g(z - t d) < g(z) - (t / 2) grad g(z)^T d,   t = u / 2^m,   u = min(2 t_prev, 1).
//! ```

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::model::RestrictedEnsemble;

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Halvings tried before the line search gives up.
pub const MAX_BACKTRACKS: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DgnConfig {
    /// Stop once `|z_k - z_{k-1}| < epsilon`.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stepsize memory before the first iteration.
    pub initial_step: f64,
}

impl Default for DgnConfig {
    fn default() -> Self {
        Self { epsilon: 1e-4, max_iters: 100, initial_step: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepBelowTolerance,
    IterationLimit,
    /// `grad g^T d <= 0`: the direction is not a descent direction, which
    /// only happens at a stationary point (up to rounding).
    Stationary,
    LineSearchStall,
}

/// One accepted iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DgnIteration {
    pub iteration: usize,
    /// `g(z_{k-1})`.
    pub objective: f64,
    pub grad_norm: f64,
    /// `grad g(z_{k-1})^T d_k`.
    pub grad_dot_direction: f64,
    /// `u = min(2 t_{k-1}, 1)`.
    pub trial_step: f64,
    pub backtracks: u32,
    /// `t_k = u / 2^m`.
    pub step: f64,
    /// `g(z_k)`.
    pub next_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DgnTrace {
    pub iterations: Vec<DgnIteration>,
    pub termination: Termination,
}

impl DgnTrace {
    /// One JSON object per iteration: `{"iteration", "g", "grad_norm", "t"}`.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Line {
            iteration: usize,
            g: f64,
            grad_norm: f64,
            t: f64,
        }
        for it in &self.iterations {
            let line = Line { iteration: it.iteration, g: it.objective, grad_norm: it.grad_norm, t: it.step };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DgnOutcome {
    pub z: Vec<f64>,
    /// `g(z)` at the returned point.
    pub objective: f64,
    pub trace: DgnTrace,
}

/// Gauss-Newton direction at `z` with the gradient it was derived from.
#[derive(Clone, Debug)]
pub struct Direction {
    pub d: Vec<f64>,
    pub gradient: Vec<f64>,
    pub objective: f64,
}

/// The weighted Gauss-Newton system at `z`: `J_w` has rows
/// `sqrt(w_i) 2 (B_i z)^T`, `h_w` entries `sqrt(w_i) h_i(z)`.
struct Linearization {
    jac: DMatrix<f64>,
    residual: DVector<f64>,
    objective: f64,
}

fn linearize(ens: &RestrictedEnsemble, z: &[f64], y: &[f64], w: &[f64]) -> Linearization {
    let (values, mut jac) = ens.jacobian(z);
    let mut residual = DVector::zeros(values.len());
    for (i, ((v, yi), wi)) in values.iter().zip(y).zip(w).enumerate() {
        let sw = wi.sqrt();
        residual[i] = sw * (v - yi);
        jac.row_mut(i).scale_mut(sw);
    }
    // Same summation as RestrictedEnsemble::objective so values compare exactly.
    let objective = crate::model::weighted_residual_norm(&values, y, w);
    Linearization { jac, residual, objective }
}

/// Minimum-norm least-squares solution of `a x = b`, rank decisions at
/// `RANK_TOL` relative to the largest singular value.
fn min_norm_lstsq(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = a.shape();
    let svd_solve = |m: DMatrix<f64>, rhs: &DVector<f64>| {
        let svd = m.svd(true, true);
        let sigma_max = svd.singular_values.max();
        if sigma_max == 0.0 {
            return DVector::zeros(cols);
        }
        svd.solve(rhs, RANK_TOL * sigma_max).expect("U and V were computed")
    };
    if rows > cols {
        // Reduce to the square triangular factor first; J is tall and thin.
        let qr = a.qr();
        let mut qtb = b.clone();
        qr.q_tr_mul(&mut qtb);
        let r = qr.r();
        svd_solve(r, &qtb.rows(0, cols).into_owned())
    } else {
        svd_solve(a, b)
    }
}

/// Gauss-Newton direction `d = z - z~` where `z~` minimizes
/// `|J_w z~ - b_w|^2` with `b_w,i = sqrt(w_i) (y_i + z^T B_i z)`.
pub fn gn_direction(ens: &RestrictedEnsemble, z: &[f64], y: &[f64], w: &[f64]) -> Direction {
    let lin = linearize(ens, z, y, w);
    direction_from(&lin, z)
}

fn direction_from(lin: &Linearization, z: &[f64]) -> Direction {
    let zv = DVector::from_column_slice(z);
    // b_w = J_w z - h_w
    let b = &lin.jac * &zv - &lin.residual;
    let z_tilde = min_norm_lstsq(lin.jac.clone(), &b);
    let gradient = lin.jac.tr_mul(&lin.residual) * 2.0;
    Direction {
        d: (zv - z_tilde).as_slice().to_vec(),
        gradient: gradient.as_slice().to_vec(),
        objective: lin.objective,
    }
}

/// An accepted backtracking step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub trial_step: f64,
    pub backtracks: u32,
    pub step: f64,
    pub objective: f64,
}

/// Backtracking along `-d` from `z`.
///
/// Starts from `u = min(2 t_prev, 1)` and halves until
/// `g(z - t d) < g(z) - (t / 2) grad_dot_d`. Returns `None` when
/// `MAX_BACKTRACKS` halvings do not produce sufficient decrease.
pub fn backtrack<G>(z: &[f64], d: &[f64], objective: f64, grad_dot_d: f64, prev_step: f64, g: G) -> Option<Step>
where
    G: Fn(&[f64]) -> f64,
{
    let trial_step = (2.0 * prev_step).min(1.0);
    let mut candidate = vec![0.0; z.len()];
    let mut step = trial_step;
    for m in 0..=MAX_BACKTRACKS {
        for ((c, zk), dk) in candidate.iter_mut().zip(z).zip(d) {
            *c = zk - step * dk;
        }
        let value = g(&candidate);
        if value < objective - 0.5 * step * grad_dot_d {
            return Some(Step { trial_step, backtracks: m, step, objective: value });
        }
        step *= 0.5;
    }
    None
}

/// Runs DGN from a standard Gaussian starting point drawn from `rng`.
pub fn dgn_solve<R: Rng + ?Sized>(
    ens: &RestrictedEnsemble,
    y: &[f64],
    w: &[f64],
    config: &DgnConfig,
    rng: &mut R,
) -> DgnOutcome {
    let z0: Vec<f64> = (0..ens.dim()).map(|_| rng.sample(StandardNormal)).collect();
    dgn_solve_from(ens, y, w, config, z0)
}

pub fn dgn_solve_from(ens: &RestrictedEnsemble, y: &[f64], w: &[f64], config: &DgnConfig, z0: Vec<f64>) -> DgnOutcome {
    debug_assert_eq!(z0.len(), ens.dim());
    let mut z = z0;
    let mut prev_step = config.initial_step;
    let mut iterations = Vec::new();
    let mut current = None;
    let mut termination = Termination::IterationLimit;

    for k in 1..=config.max_iters {
        let lin = linearize(ens, &z, y, w);
        let dir = direction_from(&lin, &z);
        current = Some(dir.objective);
        let grad_dot_d: f64 = dir.gradient.iter().zip(&dir.d).map(|(a, b)| a * b).sum();
        if !(grad_dot_d > 0.0) {
            termination = Termination::Stationary;
            break;
        }
        let Some(step) = backtrack(&z, &dir.d, dir.objective, grad_dot_d, prev_step, |c| ens.objective(c, y, w)) else {
            termination = Termination::LineSearchStall;
            break;
        };
        let mut moved = 0.0;
        for (zk, dk) in z.iter_mut().zip(&dir.d) {
            let delta = step.step * dk;
            *zk -= delta;
            moved += delta * delta;
        }
        prev_step = step.step;
        current = Some(step.objective);
        iterations.push(DgnIteration {
            iteration: k,
            objective: dir.objective,
            grad_norm: dir.gradient.iter().map(|v| v * v).sum::<f64>().sqrt(),
            grad_dot_direction: grad_dot_d,
            trial_step: step.trial_step,
            backtracks: step.backtracks,
            step: step.step,
            next_objective: step.objective,
        });
        if moved.sqrt() < config.epsilon {
            termination = Termination::StepBelowTolerance;
            break;
        }
    }

    let objective = current.unwrap_or_else(|| ens.objective(&z, y, w));
    DgnOutcome { z, objective, trace: DgnTrace { iterations, termination } }
}
