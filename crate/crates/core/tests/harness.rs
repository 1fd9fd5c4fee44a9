use gespar::experiment::{
    equivalent_up_to_degeneracies, generate_truth, run_experiment, summarize, CellSummary, ExperimentSpec, Method,
};
use gespar::{Ensemble, Frame};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(value: serde_json::Value) -> ExperimentSpec {
    serde_json::from_value(value).expect("valid spec")
}

fn rate(summary: &[CellSummary], pick: impl Fn(&CellSummary) -> bool) -> f64 {
    summary.iter().find(|c| pick(c)).and_then(|c| c.success_rate).expect("cell present")
}

/// Asymptotic Kolmogorov tail `P(K > lambda)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    let tail: f64 = (1..100).map(|k| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lambda * lambda).exp()).sum();
    (2.0 * tail).clamp(0.0, 1.0)
}

#[test]
fn truth_magnitudes_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut magnitudes = Vec::new();
    let mut positive = 0;
    while magnitudes.len() < 10_000 {
        let x = generate_truth(16, 32, 4, &mut rng).unwrap();
        for v in x.values().iter().filter(|v| **v != 0.0) {
            magnitudes.push(v.abs());
            positive += usize::from(*v > 0.0);
        }
    }
    magnitudes.sort_by(f64::total_cmp);
    let m = magnitudes.len() as f64;
    let d = magnitudes
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let cdf = v - 3.0;
            (cdf - i as f64 / m).abs().max(((i + 1) as f64 / m - cdf).abs())
        })
        .fold(0.0, f64::max);
    let p = kolmogorov_tail(d * m.sqrt());
    assert!(p > 0.01, "KS D = {d}, p = {p}");
    let frac = positive as f64 / m;
    assert!((frac - 0.5).abs() < 0.02, "positive fraction {frac}");
}

#[test]
fn truth_support_includes_first_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut hits = [0usize; 8];
    for _ in 0..4000 {
        let x = generate_truth(8, 16, 3, &mut rng).unwrap();
        let support = x.support();
        assert_eq!(support.len(), 3);
        assert_eq!(support[0], 0);
        for k in support {
            hits[k] += 1;
        }
    }
    // The other two indices are uniform over 1..8: 4000 * 2 / 7 each.
    for h in &hits[1..] {
        assert!((*h as f64 - 8000.0 / 7.0).abs() < 120.0, "{hits:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aligned_error_is_invariant_under_degeneracies(
        x in prop::collection::vec(-4.0f64..4.0, 12),
        y in prop::collection::vec(-4.0f64..4.0, 12),
        shift in 0usize..12,
        mirror in any::<bool>(),
        flip in any::<bool>(),
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 0.1));
        let frame = Frame::Line(12);
        let moved: Vec<f64> = (0..12)
            .map(|k| {
                let src = if mirror { (12 - k) % 12 } else { k };
                let v = y[(src + 12 - shift) % 12];
                if flip { -v } else { v }
            })
            .collect();
        let (_, a) = equivalent_up_to_degeneracies(&x, &y, frame, 1e-3).unwrap();
        let (_, b) = equivalent_up_to_degeneracies(&x, &moved, frame, 1e-3).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }
}

#[test]
fn records_do_not_depend_on_worker_count() {
    let s = spec(serde_json::json!({
        "base_seed": 42, "trials": 6, "n": [32], "N": [64], "s": [3, 4],
        "snr_db": [null, 25.0], "methods": ["gespar", "fienup"], "support_mode": "none",
        "iter": 200, "fienup_restarts": 5, "fienup_max_iters": 100
    }));
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let mut records = pool.install(|| run_experiment(&s)).unwrap().records;
        for r in &mut records {
            r.wall_time = 0.0;
        }
        records
    };
    let single = run(1);
    assert_eq!(single.len(), 2 * 2 * 2 * 6);
    assert_eq!(single, run(3));
    for r in &single {
        assert_eq!(r.success.is_none(), r.snr_db.is_some());
        assert!(r.nmse >= 0.0);
        if r.method == Method::Fienup {
            assert_eq!(r.swaps, 0);
        }
    }
    // Same truth and noise for both methods within a cell and trial.
    let seeds = |m| single.iter().filter(|r| r.method == m).map(|r| r.seed).collect::<Vec<_>>();
    assert_eq!(seeds(Method::Gespar), seeds(Method::Fienup));
}

#[test]
fn sparsity_upper_bound_still_recovers() {
    let summary = summarize(
        &run_experiment(&spec(serde_json::json!({
            "base_seed": 3, "trials": 20, "n": [64], "N": [128], "s": [3, 5],
            "support_mode": "autocorr", "solve_sparsity": 25
        })))
        .unwrap()
        .records,
    );
    for cell in &summary {
        assert!(cell.success_rate.unwrap() >= 0.9, "{cell:?}");
    }
}

#[test]
fn oversampling_and_support_information_help() {
    let grid = |mode: &str, sizes: &[usize]| {
        summarize(
            &run_experiment(&spec(serde_json::json!({
                "base_seed": 4, "trials": 30, "n": [32], "N": sizes, "s": [6],
                "support_mode": mode
            })))
            .unwrap()
            .records,
        )
    };
    let blind = grid("none", &[32, 64, 128]);
    let informed = grid("autocorr", &[64]);
    let at = |n| rate(&blind, |c| c.measurements == n);
    assert!(at(32) <= at(64) && at(64) <= at(128), "{blind:?}");
    assert!(at(32) < at(128));
    assert!(rate(&informed, |_| true) >= at(64), "{informed:?} vs {blind:?}");
}

#[test]
fn fienup_desk_scale_baseline() {
    let summary = summarize(
        &run_experiment(&spec(serde_json::json!({
            "base_seed": 5, "trials": 100, "n": [64], "N": [128], "s": [3],
            "methods": ["fienup"], "support_mode": "autocorr"
        })))
        .unwrap()
        .records,
    );
    let r = rate(&summary, |_| true);
    assert!((r - 0.98).abs() <= 0.05, "fienup s=3 success {r}");
}

#[test]
fn fienup_falls_behind_at_higher_sparsity() {
    let summary = summarize(
        &run_experiment(&spec(serde_json::json!({
            "base_seed": 6, "trials": 50, "n": [64], "N": [128], "s": [8],
            "methods": ["gespar", "fienup"], "support_mode": "autocorr"
        })))
        .unwrap()
        .records,
    );
    let gespar = rate(&summary, |c| c.method == Method::Gespar);
    let fienup = rate(&summary, |c| c.method == Method::Fienup);
    assert!(fienup < gespar, "fienup {fienup} vs gespar {gespar}");
}

#[test]
fn two_dimensional_alignment_uses_the_grid() {
    let ens = Ensemble::fourier_2d(4, 4).unwrap();
    let x = generate_truth(16, 16, 3, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    // Row shift by one: a 2D degeneracy but not a 1D shift of the flattened vector
    // combined with a column wrap.
    let moved: Vec<f64> = (0..16).map(|k| x.values()[((k / 4 + 3) % 4) * 4 + (k % 4 + 3) % 4]).collect();
    let (ok, nmse) = equivalent_up_to_degeneracies(x.values(), &moved, ens.frame(), 1e-9).unwrap();
    assert!(ok && nmse < 1e-12);
}
