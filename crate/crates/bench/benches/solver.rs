use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gespar::dgn::{dgn_solve, DgnConfig};
use gespar::experiment::generate_truth;
use gespar::{autocorrelation, derive_supports, gespar, sparse_fienup, Ensemble, FienupConfig, GesparConfig, Weights};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The same measurements as `fourier_1d`, stored as dense `A_i`.
fn explicit_fourier(n: usize, len: usize) -> Ensemble {
    let matrices = (0..len)
        .map(|i| {
            let angle = |k: usize| TAU * (i * k % len) as f64 / len as f64;
            let re = DVector::from_fn(n, |k, _| angle(k).cos());
            let im = DVector::from_fn(n, |k, _| angle(k).sin());
            &re * re.transpose() + &im * im.transpose()
        })
        .collect::<Vec<DMatrix<f64>>>();
    Ensemble::matrices(n, matrices).unwrap()
}

fn objective_and_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("objective_gradient");
    for n in [32, 64, 128] {
        let len = 2 * n;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = generate_truth(n, len, 5, &mut rng).unwrap();
        let fft = Ensemble::fourier_1d(n, len).unwrap();
        let dense = explicit_fourier(n, len);
        let y = fft.forward(x.values()).unwrap();
        let w = Weights::uniform(len);
        let probe: Vec<f64> = x.values().iter().map(|v| v + 0.1).collect();
        group.bench_with_input(BenchmarkId::new("fft", n), &n, |b, _| {
            b.iter(|| fft.gradient(black_box(&probe), &y, &w).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("explicit", n), &n, |b, _| {
            b.iter(|| dense.gradient(black_box(&probe), &y, &w).unwrap())
        });
    }
    group.finish();
}

fn inner_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("dgn_true_support");
    for s in [3, 8, 15] {
        let (n, len) = (64, 128);
        let ens = Ensemble::fourier_1d(n, len).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = generate_truth(n, len, s, &mut rng).unwrap();
        let y = ens.forward(x.values()).unwrap();
        let restricted = ens.restrict(&x.support()).unwrap();
        let w = Weights::uniform(len);
        group.bench_with_input(BenchmarkId::from_parameter(s), &s, |b, _| {
            b.iter(|| dgn_solve(&restricted, &y, &w, &DgnConfig::default(), &mut rng))
        });
    }
    group.finish();
}

fn full_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("recovery");
    group.sample_size(10);
    let (n, len) = (64, 128);
    let ens = Ensemble::fourier_1d(n, len).unwrap();
    for s in [3, 8] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = generate_truth(n, len, s, &mut rng).unwrap();
        let y = ens.forward(x.values()).unwrap();
        let constraints = derive_supports(&autocorrelation(&y, n).unwrap(), s).unwrap();
        group.bench_with_input(BenchmarkId::new("gespar", s), &s, |b, _| {
            b.iter(|| gespar(&ens, &y, &constraints, &GesparConfig::default(), &mut rng).unwrap())
        });
        let config = FienupConfig { max_iters: 1000, restarts: 10, sparsity: s };
        group.bench_with_input(BenchmarkId::new("fienup", s), &s, |b, _| {
            b.iter(|| sparse_fienup(&ens, &y, &config, &mut rng).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, objective_and_gradient, inner_solver, full_solvers);
criterion_main!(benches);
