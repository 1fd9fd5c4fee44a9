//! Support search: 2-opt local search and its randomly restarted driver.
//!
//! A 2-opt run starts from a random feasible support, fits it with DGN, and
//! then repeatedly swaps the smallest-magnitude free support entry for the
//! off-support candidate with the largest gradient magnitude. The swap is kept
//! only if the refit lowers the objective; the first rejected swap ends the
//! run. [`gespar`] restarts 2-opt until the unweighted objective drops below a
//! threshold or the total swap budget is spent.

use rand::seq::index;
use rand::Rng;

use crate::dgn::{dgn_solve, DgnConfig, DgnTrace};
use crate::error::{Error, Result};
use crate::model::{Ensemble, SparseSignal, Weights};
use crate::support::SupportConstraints;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GesparConfig {
    /// Success threshold on the unweighted objective.
    pub tau: f64,
    /// Total swap budget across restarts (`ITER`).
    pub max_swaps: usize,
    /// Draw fresh weights in `{1, 2}` for every DGN invocation.
    pub weighting: bool,
    pub dgn: DgnConfig,
    /// Keep every DGN trace in the result.
    pub keep_traces: bool,
}

impl Default for GesparConfig {
    fn default() -> Self {
        Self { tau: 1e-4, max_swaps: 6400, weighting: true, dgn: DgnConfig::default(), keep_traces: false }
    }
}

impl GesparConfig {
    /// Settings used for noisy measurements: a larger swap budget.
    pub fn noisy() -> Self {
        Self { max_swaps: 10_000, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub x: SparseSignal,
    /// Sorted zero-based support the solution was fitted on.
    pub support: Vec<usize>,
    pub objective_unweighted: f64,
    pub swaps_used: usize,
    pub restarts: usize,
    pub success: bool,
    pub traces: Vec<DgnTrace>,
}

/// One attempted swap of a 2-opt run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapRecord {
    pub removed: usize,
    pub added: usize,
    /// Current iterate's objective under the weights drawn for this swap.
    pub objective_before: f64,
    pub objective_after: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct TwoOptOutcome {
    /// Native-length solution, zero off the support.
    pub x: Vec<f64>,
    pub support: Vec<usize>,
    pub initial_support: Vec<usize>,
    /// Number of DGN invocations after the initial fit (`T`).
    pub swaps: usize,
    pub swap_history: Vec<SwapRecord>,
    pub traces: Vec<DgnTrace>,
}

/// `J1` plus `s - |J1|` indices drawn uniformly without replacement from
/// `J2 \ J1`; sorted.
pub fn random_support<R: Rng + ?Sized>(constraints: &SupportConstraints, rng: &mut R) -> Result<Vec<usize>> {
    constraints.check_feasible()?;
    let free: Vec<usize> =
        constraints.candidates().iter().copied().filter(|k| constraints.forced().binary_search(k).is_err()).collect();
    let extra = constraints.sparsity() - constraints.forced().len();
    let mut support = constraints.forced().to_vec();
    support.extend(index::sample(rng, free.len(), extra).into_iter().map(|i| free[i]));
    support.sort_unstable();
    Ok(support)
}

/// Each weight is 1 or 2 with equal probability; all ones when disabled.
pub fn draw_weights<R: Rng + ?Sized>(len: usize, weighting: bool, rng: &mut R) -> Weights {
    if !weighting {
        return Weights::uniform(len);
    }
    Weights::new((0..len).map(|_| if rng.random::<bool>() { 2.0 } else { 1.0 }).collect())
        .expect("weights are positive")
}

fn check_problem(ensemble: &Ensemble, y: &[f64], constraints: &SupportConstraints) -> Result<()> {
    if y.len() != ensemble.num_measurements() {
        return Err(Error::DimensionMismatch { expected: ensemble.num_measurements(), found: y.len() });
    }
    if constraints.n() != ensemble.signal_len() {
        return Err(Error::DimensionMismatch { expected: ensemble.signal_len(), found: constraints.n() });
    }
    constraints.check_feasible()
}

struct Fit {
    x: Vec<f64>,
    trace: DgnTrace,
}

fn fit<R: Rng + ?Sized>(
    ensemble: &Ensemble,
    y: &[f64],
    w: &Weights,
    support: &[usize],
    config: &DgnConfig,
    rng: &mut R,
) -> Result<Fit> {
    let restricted = ensemble.restrict(support)?;
    let out = dgn_solve(&restricted, y, w, config, rng);
    Ok(Fit { x: restricted.embed(&out.z, ensemble.signal_len()), trace: out.trace })
}

/// Smallest `|x_k|` over the free support indices; ties go to the lower index.
fn swap_out(x: &[f64], support: &[usize], forced: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &k in support.iter().filter(|k| forced.binary_search(k).is_err()) {
        if best.is_none_or(|b| x[k].abs() < x[b].abs()) {
            best = Some(k);
        }
    }
    best
}

/// Largest `|grad_k|` over off-support candidates; ties go to the lower index.
fn swap_in(gradient: &[f64], support: &[usize], candidates: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &k in candidates.iter().filter(|k| support.binary_search(k).is_err()) {
        if best.is_none_or(|b| gradient[k].abs() > gradient[b].abs()) {
            best = Some(k);
        }
    }
    best
}

/// A single 2-opt run. Stops at the first swap that does not improve the
/// objective, when no swap is possible, or after `swap_budget` swaps.
pub fn two_opt<R: Rng + ?Sized>(
    ensemble: &Ensemble,
    y: &[f64],
    constraints: &SupportConstraints,
    config: &GesparConfig,
    swap_budget: usize,
    rng: &mut R,
) -> Result<TwoOptOutcome> {
    check_problem(ensemble, y, constraints)?;
    let n_meas = ensemble.num_measurements();

    let mut support = random_support(constraints, rng)?;
    let initial_support = support.clone();
    let mut weights = draw_weights(n_meas, config.weighting, rng);
    let first = fit(ensemble, y, &weights, &support, &config.dgn, rng)?;
    let mut x = first.x;
    let mut traces = Vec::new();
    if config.keep_traces {
        traces.push(first.trace);
    }
    let mut swaps = 0;
    let mut swap_history = Vec::new();

    while swaps < swap_budget {
        let Some(removed) = swap_out(&x, &support, constraints.forced()) else { break };
        let gradient = ensemble.gradient_unchecked(&x, y, &weights);
        let Some(added) = swap_in(&gradient, &support, constraints.candidates()) else { break };

        let mut trial_support: Vec<usize> = support.iter().copied().filter(|&k| k != removed).collect();
        let pos = trial_support.binary_search(&added).unwrap_err();
        trial_support.insert(pos, added);

        let trial_weights = draw_weights(n_meas, config.weighting, rng);
        let trial = fit(ensemble, y, &trial_weights, &trial_support, &config.dgn, rng)?;
        swaps += 1;
        if config.keep_traces {
            traces.push(trial.trace);
        }

        let objective_after = ensemble.objective_unchecked(&trial.x, y, &trial_weights);
        let objective_before = ensemble.objective_unchecked(&x, y, &trial_weights);
        let accepted = objective_after < objective_before;
        swap_history.push(SwapRecord { removed, added, objective_before, objective_after, accepted });
        if !accepted {
            break;
        }
        support = trial_support;
        x = trial.x;
        weights = trial_weights;
    }

    Ok(TwoOptOutcome { x, support, initial_support, swaps, swap_history, traces })
}

/// Restarted 2-opt. Returns the restart output with the smallest unweighted
/// objective.
pub fn gespar<R: Rng + ?Sized>(
    ensemble: &Ensemble,
    y: &[f64],
    constraints: &SupportConstraints,
    config: &GesparConfig,
    rng: &mut R,
) -> Result<SolveResult> {
    if !(config.tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    if config.max_swaps == 0 {
        return Err(Error::InvalidParameter("the swap budget must be at least 1".into()));
    }
    check_problem(ensemble, y, constraints)?;
    let ones = Weights::uniform(ensemble.num_measurements());

    let mut swaps_used = 0;
    let mut restarts = 0;
    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    let mut traces = Vec::new();
    loop {
        // Enough budget to push the total just past max_swaps.
        let budget = config.max_swaps + 1 - swaps_used;
        let run = two_opt(ensemble, y, constraints, config, budget, rng)?;
        restarts += 1;
        swaps_used += run.swaps;
        traces.extend(run.traces);
        let objective = ensemble.objective_unchecked(&run.x, y, &ones);
        if best.as_ref().is_none_or(|(b, _, _)| objective < *b) {
            best = Some((objective, run.x, run.support));
        }
        // The restart cap only matters when no swap is ever possible
        // (s = |J1| or s = |J2|) and runs never consume budget.
        if objective < config.tau || swaps_used > config.max_swaps || restarts > config.max_swaps {
            break;
        }
    }

    let (objective_unweighted, x, support) = best.expect("at least one restart ran");
    Ok(SolveResult {
        x: SparseSignal::new(x, ensemble.frame().len())?,
        support,
        objective_unweighted,
        swaps_used,
        restarts,
        success: objective_unweighted < config.tau,
        traces,
    })
}
