use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use gespar::experiment::{run_experiment, summarize, write_csv, CellSummary, ExperimentSpec, Timing};
use gespar::{
    autocorrelation, derive_supports, noisy_mode, sparse_fienup, Ensemble, FienupConfig, GesparConfig, Measurements,
    SupportConstraints,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{AutocorrArgs, BenchArgs, Failure, MethodArg, Outcome, SolveArgs, Status, SupportModeArg};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::new(Status::Io, e))?;
    serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", path.display()))
        .map_err(|e| Failure::new(Status::Io, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let write = || -> anyhow::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, value)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    };
    write().with_context(|| format!("cannot write {}", path.display())).map_err(|e| Failure::new(Status::Io, e))
}

fn usage(message: String) -> Failure {
    Failure::new(Status::Usage, anyhow::anyhow!(message))
}

fn one_based(indices: &[usize]) -> String {
    let items: Vec<String> = indices.iter().map(|k| (k + 1).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

/// Seed from the flag or environment, or a fresh one that gets printed.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

fn constraints(y: &[f64], n: usize, s: usize, mode: SupportModeArg) -> Result<SupportConstraints, Failure> {
    let c = match mode {
        SupportModeArg::Autocorr => derive_supports(&autocorrelation(y, n)?, s)?,
        SupportModeArg::None => noisy_mode(n, s)?,
    };
    c.check_feasible()?;
    Ok(c)
}

pub fn solve(args: SolveArgs) -> Outcome {
    let y: Measurements = read_json(&args.input)?;
    let s = args.s as usize;
    if args.n == 0 || args.n > y.len() {
        return Err(usage(format!("--n must be between 1 and N = {}, got {}", y.len(), args.n)));
    }
    if s > args.n {
        return Err(Failure::new(Status::Infeasible, anyhow::anyhow!("s = {s} exceeds n = {}", args.n)));
    }
    if !(args.tau > 0.0) || args.iter == 0 {
        return Err(usage("--tau must be positive and --iter at least 1".into()));
    }
    let ensemble = Ensemble::fourier_1d(args.n, y.len())?;
    let constraints = constraints(&y, args.n, s, args.support_mode)?;
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (x, objective, swaps, restarts, traces) = match args.method {
        MethodArg::Gespar => {
            let config = GesparConfig {
                tau: args.tau,
                max_swaps: args.iter,
                weighting: !args.no_weighting,
                keep_traces: args.trace.is_some(),
                ..GesparConfig::default()
            };
            let r = gespar::gespar(&ensemble, &y, &constraints, &config, &mut rng)?;
            (r.x, r.objective_unweighted, r.swaps_used, r.restarts, r.traces)
        }
        MethodArg::Fienup => {
            let config = FienupConfig {
                max_iters: args.fienup_max_iters,
                restarts: args.fienup_restarts,
                sparsity: constraints.sparsity(),
            };
            let r = sparse_fienup(&ensemble, &y, &config, &mut rng)?;
            (r.x, r.objective_unweighted, 0, config.restarts, Vec::new())
        }
    };

    write_json(&args.output, &x)?;
    if let Some(path) = &args.trace {
        write_json(path, &traces)?;
    }
    let method = match args.method {
        MethodArg::Gespar => "gespar",
        MethodArg::Fienup => "fienup",
    };
    println!("method: {method}");
    println!("seed: {seed}");
    println!("objective: {objective:.6e}");
    println!("swaps: {swaps}");
    println!("restarts: {restarts}");
    println!("success: {}", objective < args.tau);
    println!("support: {}", one_based(&x.support()));
    Ok(())
}

fn format_snr(snr: Option<f64>) -> String {
    snr.map_or_else(|| "inf".to_string(), |v| format!("{v}"))
}

fn print_table(cells: &[CellSummary]) {
    println!(
        "{:>6} {:>6} {:>4} {:>6} {:>7} {:>6} {:>8} {:>10} {:>9} {:>9}",
        "n", "N", "s", "snr", "method", "trials", "success", "mean_nmse", "swaps", "time_s"
    );
    for c in cells {
        let success = c.success_rate.map_or_else(|| "-".to_string(), |r| format!("{r:.3}"));
        println!(
            "{:>6} {:>6} {:>4} {:>6} {:>7} {:>6} {:>8} {:>10.3e} {:>9.1} {:>9.4}",
            c.n,
            c.measurements,
            c.s,
            format_snr(c.snr_db),
            c.method.as_str(),
            c.trials,
            success,
            c.mean_nmse,
            c.mean_swaps,
            c.mean_time
        );
    }
}

pub fn bench(args: BenchArgs) -> Outcome {
    let spec: ExperimentSpec = read_json(&args.spec)?;
    let problems = spec.problems();
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(|p| format!("  - {p}")).collect();
        return Err(usage(format!("invalid spec {}:\n{}", args.spec.display(), list.join("\n"))));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = args.workers {
        pool = pool.num_threads(workers as usize);
    }
    let pool = pool.build().map_err(|e| Failure::new(Status::Usage, e))?;
    let output = pool.install(|| run_experiment(&spec))?;

    for skipped in &output.skipped {
        eprintln!(
            "skipped cell n={} N={} s={} snr={} method={}: {}",
            skipped.cell.n,
            skipped.cell.measurements,
            skipped.cell.s,
            format_snr(skipped.cell.snr_db),
            skipped.cell.method.as_str(),
            skipped.reason
        );
    }

    let io = |e: std::io::Error, path: &Path| {
        Failure::new(Status::Io, anyhow::anyhow!("cannot write {}: {e}", path.display()))
    };
    fs::create_dir_all(&args.out_dir).map_err(|e| io(e, &args.out_dir))?;
    let stem = if spec.name.is_empty() { "results" } else { spec.name.as_str() };
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    let timing = if args.no_timing { Timing::Omitted } else { Timing::Measured };
    let file = File::create(&csv_path).map_err(|e| io(e, &csv_path))?;
    write_csv(&output.records, timing, BufWriter::new(file)).map_err(|e| io(e, &csv_path))?;

    let cells = summarize(&output.records);
    #[derive(Serialize)]
    struct Skipped {
        n: usize,
        #[serde(rename = "N")]
        measurements: usize,
        s: usize,
        snr_db: Option<f64>,
        method: &'static str,
        reason: String,
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        name: &'a str,
        base_seed: u64,
        trials: usize,
        cells: &'a [CellSummary],
        skipped: Vec<Skipped>,
    }
    let summary = Summary {
        name: &spec.name,
        base_seed: spec.base_seed,
        trials: spec.trials,
        cells: &cells,
        skipped: output
            .skipped
            .iter()
            .map(|k| Skipped {
                n: k.cell.n,
                measurements: k.cell.measurements,
                s: k.cell.s,
                snr_db: k.cell.snr_db,
                method: k.cell.method.as_str(),
                reason: k.reason.clone(),
            })
            .collect(),
    };
    let summary_path = args.out_dir.join(format!("{stem}.summary.json"));
    write_json(&summary_path, &summary)?;

    print_table(&cells);
    println!("wrote {} and {}", csv_path.display(), summary_path.display());
    Ok(())
}

/// Rounds away FFT noise so exact lags print exactly.
fn tidy(v: f64) -> f64 {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn autocorr(args: AutocorrArgs) -> Outcome {
    let y: Measurements = read_json(&args.input)?;
    let g = autocorrelation(&y, args.n)?;
    let c = derive_supports(&g, 1)?;
    let lags: Vec<String> = g.symmetric().into_iter().map(|v| tidy(v).to_string()).collect();
    println!("g: {}", lags.join(" "));
    println!("J1: {}", one_based(c.forced()));
    println!("J2: {}", one_based(c.candidates()));
    Ok(())
}
