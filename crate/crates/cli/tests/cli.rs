use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gespar::experiment::{equivalent_up_to_degeneracies, ExperimentSpec};
use gespar::{Ensemble, SparseSignal};
use tempfile::TempDir;

const WORKED: [f64; 6] = [2.0, 0.0, 0.0, -1.0, 0.0, -1.5];

fn gespar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gespar")).args(args).env_remove("GESPAR_SEED").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn measurements(dir: &TempDir, x: &[f64], len: usize) -> PathBuf {
    let y = Ensemble::fourier_1d(x.len(), len).unwrap().forward(x).unwrap();
    let path = dir.path().join("y.json");
    fs::write(&path, serde_json::to_string(&y).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(key)).unwrap_or_else(|| panic!("no {key} in {text}")).trim()
}

#[test]
fn solve_recovers_the_worked_example() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 11);
    let output = dir.path().join("x.json");
    let out = gespar(&["solve", "-i", s(&input), "--n", "6", "--s", "3", "--seed", "1", "-o", s(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "method:"), "gespar");
    assert_eq!(field(&text, "seed:"), "1");
    assert_eq!(field(&text, "success:"), "true");

    let x: SparseSignal = serde_json::from_str(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!((x.n(), x.padded_len()), (6, 11));
    let ens = Ensemble::fourier_1d(6, 11).unwrap();
    let (ok, _) = equivalent_up_to_degeneracies(&ens.embed(&WORKED), &x.padded(), ens.frame(), 1e-3).unwrap();
    assert!(ok, "{:?}", x.values());
}

#[test]
fn solve_dispatches_to_fienup() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 11);
    let output = dir.path().join("x.json");
    let out = gespar(&[
        "solve",
        "-i",
        s(&input),
        "--n",
        "6",
        "--s",
        "3",
        "--seed",
        "2",
        "--method",
        "fienup",
        "--fienup-restarts",
        "5",
        "-o",
        s(&output),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "method:"), "fienup");
    assert_eq!(field(&stdout(&out), "swaps:"), "0");
    let x: SparseSignal = serde_json::from_str(&fs::read_to_string(&output).unwrap()).unwrap();
    assert!(x.nnz() <= 3);
}

#[test]
fn omitted_seed_is_printed_and_replayable() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 11);
    let (first, second) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let out = gespar(&["solve", "-i", s(&input), "--n", "6", "--s", "3", "-o", s(&first)]);
    assert!(out.status.success());
    let seed = field(&stdout(&out), "seed:").to_string();
    let replay = Command::new(env!("CARGO_BIN_EXE_gespar"))
        .args(["solve", "-i", s(&input), "--n", "6", "--s", "3", "-o", s(&second)])
        .env("GESPAR_SEED", &seed)
        .output()
        .unwrap();
    assert!(replay.status.success());
    assert_eq!(field(&stdout(&replay), "seed:"), seed);
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn solve_writes_traces() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 11);
    let trace = dir.path().join("trace.json");
    let out = gespar(&[
        "solve",
        "-i",
        s(&input),
        "--n",
        "6",
        "--s",
        "3",
        "--seed",
        "3",
        "-o",
        s(&dir.path().join("x.json")),
        "--trace",
        s(&trace),
    ]);
    assert!(out.status.success());
    let traces: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(!traces.as_array().unwrap().is_empty());
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 11);
    let output = dir.path().join("x.json");
    let run = |extra: &[&str]| {
        let mut args = vec!["solve", "-i", s(&input), "--n", "6", "--seed", "0", "-o", s(&output)];
        args.extend_from_slice(extra);
        gespar(&args)
    };
    assert_eq!(run(&["--s", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--s", "3", "--method", "annealing"]).status.code(), Some(1));
    assert_eq!(run(&["--s", "3", "--tau", "-1"]).status.code(), Some(1));
    // Only four candidate indices survive the autocorrelation test.
    let infeasible = run(&["--s", "5"]);
    assert_eq!(infeasible.status.code(), Some(3), "{}", stderr(&infeasible));
    assert_eq!(run(&["--s", "7"]).status.code(), Some(3));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"N\": 11, \"y\": [1, 2").unwrap();
    let out = gespar(&["solve", "-i", s(&broken), "--n", "6", "--s", "3", "-o", s(&output)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("malformed"));
    let missing = dir.path().join("missing.json");
    assert_eq!(gespar(&["solve", "-i", s(&missing), "--n", "6", "--s", "3", "-o", s(&output)]).status.code(), Some(2));
    let mismatched = dir.path().join("mismatched.json");
    fs::write(&mismatched, "{\"N\": 11, \"y\": [1, 2]}").unwrap();
    assert_eq!(
        gespar(&["solve", "-i", s(&mismatched), "--n", "6", "--s", "3", "-o", s(&output)]).status.code(),
        Some(2)
    );
}

#[test]
fn help_and_version_succeed() {
    assert!(gespar(&["--help"]).status.success());
    assert!(gespar(&["--version"]).status.success());
    assert_eq!(gespar(&[]).status.code(), Some(1));
}

#[test]
fn autocorr_prints_worked_example_supports() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 11);
    let out = gespar(&["autocorr", "-i", s(&input), "--n", "6"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lags: Vec<f64> = (0..6).map(|k| (0..6 - k).map(|i| WORKED[i] * WORKED[i + k]).sum()).collect();
    let expected: Vec<String> = lags.iter().rev().chain(&lags[1..]).map(|v| v.to_string()).collect();
    assert_eq!(field(&text, "g:"), expected.join(" "));
    assert_eq!(field(&text, "J1:"), "{1, 6}");
    assert_eq!(field(&text, "J2:"), "{1, 3, 4, 6}");
}

#[test]
fn autocorr_of_an_impulse() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &[1.0, 0.0, 0.0, 0.0], 8);
    let text = stdout(&gespar(&["autocorr", "-i", s(&input), "--n", "4"]));
    assert_eq!(field(&text, "J1:"), "{1}");
    assert_eq!(field(&text, "J2:"), "{1}");
}

#[test]
fn autocorr_rejects_undersampling() {
    let dir = TempDir::new().unwrap();
    let input = measurements(&dir, &WORKED, 10);
    let out = gespar(&["autocorr", "-i", s(&input), "--n", "6"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("N < 2n-1"), "{}", stderr(&out));
}

fn write_spec(dir: &TempDir, body: serde_json::Value) -> PathBuf {
    let path = dir.path().join("spec.json");
    fs::write(&path, body.to_string()).unwrap();
    path
}

#[test]
fn bench_lists_every_spec_problem() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        serde_json::json!({
            "trials": 0, "n": [16], "N": [32], "s": [2], "methods": ["gespar", "simplex"],
            "support_mode": "autocorr"
        }),
    );
    let out = gespar(&["bench", "--spec", s(&spec), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("trials"), "{err}");
    assert!(err.contains("simplex"), "{err}");

    fs::write(&spec, "{\"trials\": 3,").unwrap();
    assert_eq!(gespar(&["bench", "--spec", s(&spec)]).status.code(), Some(2));
    fs::write(
        &spec,
        "{\"trials\": 3, \"n\": [8], \"N\": [16], \"s\": [2], \"support_mode\": \"autocorr\", \"colour\": 1}",
    )
    .unwrap();
    assert_eq!(gespar(&["bench", "--spec", s(&spec)]).status.code(), Some(2));
}

#[test]
fn bench_output_is_independent_of_workers() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        serde_json::json!({
            "name": "tiny", "base_seed": 9, "trials": 4, "n": [16], "N": [24, 32], "s": [2, 3],
            "snr_db": [null, 30.0], "methods": ["gespar", "fienup"], "support_mode": "autocorr",
            "iter": 200, "fienup_restarts": 3, "fienup_max_iters": 100
        }),
    );
    let run = |workers: &str| {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = gespar(&["bench", "--spec", s(&spec), "--out-dir", s(&out_dir), "--workers", workers, "--no-timing"]);
        assert!(out.status.success(), "{}", stderr(&out));
        (out_dir, stdout(&out), stderr(&out))
    };
    let (one, table, skipped) = run("1");
    let (two, _, _) = run("2");
    let csv = fs::read_to_string(one.join("tiny.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(two.join("tiny.csv")).unwrap());
    assert!(csv.starts_with("seed,n,N,s,snr_db,method,success,nmse,swaps,wall_time\n"));
    // N = 24 < 2n - 1 cannot use autocorrelation supports.
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2 * 4);
    assert!(skipped.contains("skipped cell n=16 N=24"), "{skipped}");
    assert!(table.contains("mean_nmse"));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(one.join("tiny.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"].as_array().unwrap().len(), 8);
    assert_eq!(summary["skipped"].as_array().unwrap().len(), 8);
}

fn bundled(name: &str) -> ExperimentSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bundled_specs_are_valid() {
    for name in ["fig2_desk.json", "noise_desk.json", "oversampling.json", "grid_desk.json"] {
        let spec = bundled(name);
        assert!(spec.problems().is_empty(), "{name}: {:?}", spec.problems());
    }
    let desk = bundled("fig2_desk.json");
    assert_eq!((desk.trials, desk.n.as_slice(), desk.measurements.as_slice()), (50, &[64][..], &[128][..]));
    assert_eq!(desk.s, [3, 5, 8, 15]);
    assert_eq!((desk.iter, desk.tau), (6400, 1e-4));
}
