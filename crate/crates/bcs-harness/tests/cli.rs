//! End-to-end checks of the `bcs` binary: every subcommand runs against
//! small inputs and its outputs parse back.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EXAMPLE: &str = "# vars: 5\nx1*x2 + x3 + 1\nx2*x4 + x5\nx1 + x4 + x5\n";

fn bcs<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_bcs"))
        .args(args)
        .output()
        .expect("spawning bcs")
}

fn run(args: &[&str]) -> String {
    let out = bcs(args);
    assert!(
        out.status.success(),
        "bcs {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_reports_the_known_solution_set() {
    let dir = tempfile::tempdir().unwrap();
    let system = dir.path().join("example.txt");
    fs::write(&system, EXAMPLE).unwrap();

    let stdout = run(&[
        "solve",
        "--system",
        path_str(&system),
        "--ordering",
        "identity",
        "--emit-sets",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["solution_count"], 4);
    assert_eq!(doc["truncated"], false);
    let solutions = doc["solutions"].as_array().unwrap();
    assert_eq!(solutions.len(), 4);
    for s in solutions {
        let bits = s.as_str().unwrap();
        assert_eq!(bits.len(), 5);
        assert_eq!(&bits[2..3], "1", "x3 must hold in {bits}");
    }
    assert!(doc["cost"]["node_count"].as_u64().unwrap() >= 1);
    assert!(doc["triangular_sets"].as_array().unwrap().len() >= 1);

    // explicit permutations and random orderings give the same set
    let permuted = run(&[
        "solve",
        "--system",
        path_str(&system),
        "--ordering",
        "[5,4,3,2,1]",
    ]);
    let doc2: serde_json::Value = serde_json::from_str(&permuted).unwrap();
    assert_eq!(doc["solutions"], doc2["solutions"]);
    let random = run(&["solve", "--system", path_str(&system), "--ordering", "random:7"]);
    let doc3: serde_json::Value = serde_json::from_str(&random).unwrap();
    assert_eq!(doc["solutions"], doc3["solutions"]);
}

#[test]
fn gen_writes_parseable_systems_with_planted_comments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sys.txt");
    run(&["--seed", "9", "--out", path_str(&out), "gen", "--n", "8"]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# planted: "));

    // the planted assignment satisfies the system: solve and look it up
    let planted: String = text
        .lines()
        .find_map(|l| l.strip_prefix("# planted: "))
        .unwrap()
        .to_string();
    let stdout = run(&["solve", "--system", path_str(&out)]);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let solutions: Vec<&str> =
        doc["solutions"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(solutions.contains(&planted.as_str()), "{planted} not in {solutions:?}");

    // multi-system generation writes one file per instance
    let corpus = dir.path().join("corpus");
    run(&["--seed", "3", "--out", path_str(&corpus), "gen", "--n", "6", "--count", "3"]);
    for i in 0..3 {
        assert!(corpus.join(format!("sys-{i:03}.txt")).exists());
    }
}

#[test]
fn full_pipeline_collect_train_optimize_analyze_bench() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    let stdout = run(&[
        "--seed",
        "5",
        "--out",
        path_str(&data),
        "collect",
        "--n",
        "8",
        "--systems",
        "6",
        "--orderings",
        "6",
    ]);
    assert!(stdout.contains("wrote 36 new records"), "{stdout}");
    assert!(stdout.contains("dataset holds 36"), "{stdout}");

    // resume appends nothing
    let again = run(&[
        "--seed",
        "5",
        "--out",
        path_str(&data),
        "collect",
        "--n",
        "8",
        "--systems",
        "6",
        "--orderings",
        "6",
    ]);
    assert!(again.contains("wrote 0 new records"), "{again}");

    let model = dir.path().join("model.json");
    let stdout = run(&[
        "--out",
        path_str(&model),
        "train",
        "--data",
        path_str(&data),
        "--trees",
        "80",
    ]);
    assert!(model.exists());
    assert!(dir.path().join("model.residuals.json").exists());
    assert!(stdout.contains("validation rmse"), "{stdout}");

    let system = dir.path().join("sys.txt");
    run(&["--seed", "41", "--out", path_str(&system), "gen", "--n", "8"]);
    let trace = dir.path().join("trace.jsonl");
    let stdout = run(&[
        "--seed",
        "2",
        "optimize",
        "--system",
        path_str(&system),
        "--model",
        path_str(&model),
        "--iters",
        "40",
        "--pool",
        "6",
        "--trace-out",
        path_str(&trace),
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let ordering: Vec<u64> = doc["best_ordering"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    let mut sorted = ordering.clone();
    sorted.sort();
    assert_eq!(sorted, (1..=8).collect::<Vec<u64>>());
    let trace_lines = fs::read_to_string(&trace).unwrap().lines().count();
    assert_eq!(trace_lines as u64, doc["trace_len"].as_u64().unwrap());

    let report = dir.path().join("analysis.json");
    run(&[
        "--out",
        path_str(&report),
        "analyze",
        "--data",
        path_str(&data),
        "--k",
        "3",
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["records"], 36);
    assert!(dir.path().join("analysis.csv").exists());

    let bench = dir.path().join("bench.json");
    run(&[
        "--seed",
        "8",
        "--out",
        path_str(&bench),
        "bench",
        "--system",
        path_str(&system),
        "--methods",
        "identity,random_best,annealed",
        "--model",
        path_str(&model),
        "--r",
        "3",
        "--reps",
        "2",
        "--iters",
        "30",
        "--pool",
        "4",
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&bench).unwrap()).unwrap();
    assert_eq!(doc["cells"].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert!(csv.starts_with("problem,method,median_nodes\n"), "{csv}");
}

#[test]
fn verify_subcommands_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let lemma = dir.path().join("lemma1.json");
    let stdout = run(&[
        "--seed",
        "1",
        "--out",
        path_str(&lemma),
        "verify",
        "lemma1",
        "--samples",
        "20000",
    ]);
    assert!(stdout.contains("rho_empirical"), "{stdout}");
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&lemma).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let emp = row["rho_empirical"].as_f64().unwrap();
        let pred = row["rho_predicted"].as_f64().unwrap();
        assert!((emp - pred).abs() < 0.05, "emp {emp} pred {pred}");
    }
    assert!(dir.path().join("lemma1.csv").exists());

    let improvement = dir.path().join("improvement.json");
    run(&[
        "--seed",
        "4",
        "--out",
        path_str(&improvement),
        "verify",
        "improvement",
        "--planted",
        "--n",
        "8",
        "--systems",
        "20",
        "--baselines",
        "3",
        "--levels",
        "1.0",
        "--iters",
        "10",
        "--pool",
        "3",
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&improvement).unwrap()).unwrap();
    assert_eq!(doc["trend"].as_array().unwrap().len(), 2);
    assert_eq!(doc["e_hat"], 0.0);
    let csv = fs::read_to_string(dir.path().join("improvement.csv")).unwrap();
    // zero arm + one level + the pure-noise row
    assert_eq!(csv.lines().count(), 4);

    // exactly one predictor source must be chosen
    let out = bcs(["verify", "improvement", "--n", "8"]);
    assert!(!out.status.success());
}
