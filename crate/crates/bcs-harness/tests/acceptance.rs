//! Acceptance gate: nine numbered end-to-end checks against frozen seeds.
//! Each check prints one `[criterion N] PASS/FAIL - ...` line with its
//! runtime, so a full run doubles as a status report. The two expensive
//! pipelines (the n = 14 training corpus and the n = 18 gain study) are
//! built once behind `Lazy` and shared; the determinism check rebuilds
//! them from the same seeds and compares serialized bytes.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use bcs_core::{
    decompose_step, solve_all, solve_with_ordering, Assignment, BoolSystem, Poly, VarId,
    VarOrder, DEFAULT_CAP,
};
use bcs_harness::{
    audit_dataset, brute_force_solve, collect_dataset, end_to_end_gain, gen_random_system,
    read_dataset, training_pairs, verify_improvement, verify_lemma1, CollectPlan, DatasetRecord,
    GainReport, ImprovementPlan, InstanceSpec, PredictorSource,
};
use bcs_ml::{train, SaConfig, TrainConfig, Trained};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Five-variable worked example with the known four-solution zero set.
const EXAMPLE: &str = "# vars: 5\nx1*x2 + x3 + 1\nx2*x4 + x5\nx1 + x4 + x5\n";

/// Prints the per-criterion verdict line and enforces both the substantive
/// gate and the runtime budget. `secs` is passed in rather than measured
/// here because some criteria attribute time spent inside a shared fixture.
/// Writes straight to the process stdout so the lines survive the harness's
/// per-test output capture in a plain `cargo test` run.
fn verdict(number: usize, substantive: bool, detail: &str, secs: f64, budget_secs: f64) {
    let within = secs <= budget_secs;
    let ok = substantive && within;
    let status = if ok { "PASS" } else { "FAIL" };
    let line = if budget_secs.is_finite() {
        format!("[criterion {number}] {status} - {detail} ({secs:.1}s of {budget_secs:.0}s budget)")
    } else {
        format!("[criterion {number}] {status} - {detail} ({secs:.1}s)")
    };
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
    assert!(substantive, "criterion {number}: {detail}");
    assert!(
        within,
        "criterion {number}: runtime {secs:.1}s exceeded the {budget_secs:.0}s budget"
    );
}

fn sample_std(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64)
        .sqrt()
}

// ---------------------------------------------------------------------------
// criterion 1: solver vs exhaustive oracle, plus the dump reused by criterion 9

#[derive(Serialize)]
struct OracleRow {
    i: usize,
    n: usize,
    seed: u64,
    planted: bool,
    solutions: Vec<u64>,
    node_count: u64,
    leaf_count: u64,
    op_count: u64,
}

/// Solves 200 seeded systems two ways and returns (agreement count, JSON
/// dump). The dump excludes wall time, so equal runs must serialize
/// identically.
fn oracle_run() -> (usize, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1701);
    let mut agree = 0usize;
    let mut dump = String::new();
    for i in 0..200 {
        let n = 6 + (i % 9);
        let density = if n <= 10 { 0.10 } else { 0.08 };
        let spec = InstanceSpec {
            n,
            m: n,
            degree: 2,
            density,
            planted: i % 2 == 0,
            seed: rng.random(),
        };
        let (system, witness) = gen_random_system(&spec).unwrap();
        let result = solve_all(&system, DEFAULT_CAP);
        assert!(!result.truncated, "cap hit on system {i} (n = {n})");
        let mut got: Vec<u64> = result.solutions.iter().map(|a| a.bits() as u64).collect();
        got.sort_unstable();
        let want: Vec<u64> = brute_force_solve(&system)
            .unwrap()
            .iter()
            .map(|a| a.bits() as u64)
            .collect();
        if let Some(w) = witness {
            assert!(
                got.binary_search(&(w.bits() as u64)).is_ok(),
                "planted solution missing on system {i}"
            );
        }
        if got == want {
            agree += 1;
        }
        let row = OracleRow {
            i,
            n,
            seed: spec.seed,
            planted: spec.planted,
            solutions: got,
            node_count: result.cost.node_count,
            leaf_count: result.cost.leaf_count,
            op_count: result.cost.op_count,
        };
        writeln!(dump, "{}", serde_json::to_string(&row).unwrap()).unwrap();
    }
    (agree, dump)
}

struct OracleFixture {
    agree: usize,
    dump: String,
    secs: f64,
}

static ORACLE: Lazy<OracleFixture> = Lazy::new(|| {
    let start = Instant::now();
    let (agree, dump) = oracle_run();
    OracleFixture { agree, dump, secs: start.elapsed().as_secs_f64() }
});

#[test]
fn criterion_1_oracle_agreement() {
    let f = &*ORACLE;
    verdict(
        1,
        f.agree == 200,
        &format!("{}/200 solution sets match the exhaustive oracle", f.agree),
        f.secs,
        120.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 2: the worked example

#[test]
fn criterion_2_worked_example() {
    let start = Instant::now();
    let system = BoolSystem::parse(EXAMPLE).unwrap();
    let result = solve_all(&system, DEFAULT_CAP);
    let mut got: Vec<u128> = result.solutions.iter().map(Assignment::bits).collect();
    got.sort_unstable();
    let mut want: Vec<u128> = brute_force_solve(&system)
        .unwrap()
        .iter()
        .map(Assignment::bits)
        .collect();
    want.sort_unstable();
    let x3 = VarId::new(3);
    let all_x3 = result.solutions.iter().all(|a| a.get(x3));
    verdict(
        2,
        result.solutions.len() == 4 && got == want && all_x3,
        &format!(
            "{} solutions, oracle match {}, every solution sets x3",
            result.solutions.len(),
            got == want
        ),
        start.elapsed().as_secs_f64(),
        1.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 3: one decomposition step partitions the zero set

#[test]
fn criterion_3_branch_partition() {
    let start = Instant::now();
    let n = 10usize;
    let order = VarOrder::identity(n);
    let mut rng = ChaCha8Rng::seed_from_u64(1703);
    let mut checked = 0usize;
    let mut partitions = 0usize;
    while checked < 100 {
        let spec = InstanceSpec {
            n,
            m: 1,
            degree: 2,
            density: 0.3,
            planted: false,
            seed: rng.random(),
        };
        let (system, _) = gen_random_system(&spec).unwrap();
        let p = system.polys()[0].clone();
        if p.is_zero() || p.is_one() {
            continue;
        }
        checked += 1;

        let step = decompose_step(&p, &order).unwrap();
        let zero_of = |polys: &[Poly], bits: u128| {
            let sys = BoolSystem::new(n, polys.to_vec()).unwrap();
            sys.satisfied_by(&Assignment::new(bits, n))
        };
        let mut is_partition = true;
        for bits in 0..(1u128 << n) {
            let in_p = zero_of(std::slice::from_ref(&p), bits);
            let in_a = zero_of(&step.branch_a, bits);
            let in_b = match &step.branch_b {
                Some(b) => zero_of(b, bits),
                None => false,
            };
            if in_p != (in_a || in_b) || (in_a && in_b) {
                is_partition = false;
                break;
            }
        }
        partitions += is_partition as usize;
    }
    verdict(
        3,
        partitions == 100,
        &format!("{partitions}/100 polynomials split into disjoint covering branches"),
        start.elapsed().as_secs_f64(),
        30.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 4: ordering sensitivity at n = 16

#[test]
fn criterion_4_ordering_sensitivity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1604);
    let mut spread = Vec::new();
    for _ in 0..10 {
        let spec = InstanceSpec {
            n: 16,
            m: 16,
            degree: 2,
            density: 0.045,
            planted: true,
            seed: rng.random(),
        };
        let (system, _) = gen_random_system(&spec).unwrap();
        let mut lo = u64::MAX;
        let mut hi = 0u64;
        for _ in 0..50 {
            let ordering = VarOrder::random(16, rng.random());
            let nodes = solve_with_ordering(&system, &ordering, DEFAULT_CAP)
                .unwrap()
                .cost
                .node_count;
            lo = lo.min(nodes);
            hi = hi.max(nodes);
        }
        spread.push(hi as f64 / lo as f64);
    }
    let over_2 = spread.iter().filter(|&&r| r > 2.0).count();
    let shown: Vec<String> = spread.iter().map(|r| format!("{r:.1}")).collect();
    verdict(
        4,
        over_2 >= 7,
        &format!(
            "{over_2}/10 systems exceed a 2x max/min node-count ratio over 50 orderings [{}]",
            shown.join(", ")
        ),
        start.elapsed().as_secs_f64(),
        600.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 5: predictor power on the n = 14 corpus (shared with 7 and 9)

/// Corpus: four density slices at n = m = 14, 10 systems x 50 orderings
/// each. Varying density gives the spectrum a cost scale to learn on top of
/// the per-ordering arrangement signal; every slice stays solvable in
/// milliseconds-to-seconds per record.
fn corpus_plans() -> Vec<CollectPlan> {
    let slices = [(200u64, 0.03f64), (201, 0.04), (202, 0.06), (203, 0.08)];
    slices
        .iter()
        .map(|&(seed, density)| {
            CollectPlan::new(
                InstanceSpec { n: 14, m: 14, degree: 2, density, planted: true, seed },
                10,
                50,
            )
        })
        .collect()
}

/// Collects every slice into `dir` and returns the records in slice order
/// together with their wall-less canonical JSON lines.
fn collect_corpus(dir: &Path) -> (Vec<DatasetRecord>, Vec<String>) {
    let mut records = Vec::new();
    for (k, plan) in corpus_plans().iter().enumerate() {
        let path = dir.join(format!("slice-{k}.jsonl"));
        collect_dataset(plan, &path).unwrap();
        let slice = read_dataset(&path).unwrap();
        audit_dataset(&slice, &plan.template).unwrap();
        records.extend(slice);
    }
    let canonical = records
        .iter()
        .map(|r| {
            let mut c = r.clone();
            c.wall_ms = 0.0;
            serde_json::to_string(&c).unwrap()
        })
        .collect();
    (records, canonical)
}

struct PredictorFixture {
    records: usize,
    canonical: Vec<String>,
    trained: Trained,
    sigma: f64,
    r2: f64,
    collect_secs: f64,
    train_secs: f64,
}

static PREDICTOR: Lazy<PredictorFixture> = Lazy::new(|| {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (records, canonical) = collect_corpus(dir.path());
    let collect_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let trained = train(&training_pairs(&records), &TrainConfig::default()).unwrap();
    let train_secs = start.elapsed().as_secs_f64();

    let targets: Vec<f64> = records.iter().map(|r| r.target).collect();
    let sigma = sample_std(&targets);
    let r2 = 1.0 - (trained.stats.rmse / sigma).powi(2);
    PredictorFixture {
        records: records.len(),
        canonical,
        trained,
        sigma,
        r2,
        collect_secs,
        train_secs,
    }
});

#[test]
fn criterion_5_predictor_power() {
    let f = &*PREDICTOR;
    let e_hat = f.trained.stats.rmse;
    verdict(
        5,
        f.records >= 2000 && e_hat < f.sigma && f.r2 > 0.3,
        &format!(
            "{} records; validation rmse {:.4} vs sigma {:.4}; R^2 {:.3}",
            f.records, e_hat, f.sigma, f.r2
        ),
        f.collect_secs + f.train_secs,
        1800.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 6: correlation law Monte Carlo

#[test]
fn criterion_6_correlation_law() {
    let start = Instant::now();
    let report = verify_lemma1(1.0, &[0.2, 0.6, 0.9], 100_000, 4206).unwrap();
    let worst = report
        .rows
        .iter()
        .map(|r| (r.rho_empirical - r.rho_predicted).abs())
        .fold(0.0f64, f64::max);
    verdict(
        6,
        worst <= 0.02,
        &format!("max |empirical - predicted| correlation gap {worst:.4} at 100000 samples"),
        start.elapsed().as_secs_f64(),
        10.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 7: noise-injection trend

/// The oracle predictor (predictions := true transformed costs) starts the
/// trend at e_hat = 0, so the injected noise alone moves e_hat toward and
/// past Sigma. Every prediction is a real solve, hence the small n.
#[test]
fn criterion_7_noise_trend() {
    let start = Instant::now();
    let plan = ImprovementPlan {
        template: InstanceSpec {
            n: 8,
            m: 8,
            degree: 2,
            density: 0.15,
            planted: true,
            seed: 1407,
        },
        systems: 20,
        baseline_orderings: 20,
        noise_levels: vec![0.75, 1.5, 3.0],
        sa: SaConfig { iterations: 150, pool: Some(12), ..SaConfig::default() },
        cap: DEFAULT_CAP,
        seed: 4207,
    };
    let report = verify_improvement(&plan, PredictorSource::Planted).unwrap();
    let spearman = report.spearman_e_hat_vs_improvement.unwrap();
    let zero_mean = report.trend[0].mean_improvement;
    let noise_mean = report.pure_noise.mean_improvement;
    verdict(
        7,
        spearman <= 0.0 && zero_mean > noise_mean,
        &format!(
            "spearman(e_hat, improvement) {spearman:.3} over {} arms; \
             zero-noise improvement {zero_mean:.0} nodes vs pure-noise {noise_mean:.0}",
            report.trend.len()
        ),
        start.elapsed().as_secs_f64(),
        1800.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 8: end-to-end gain at n = 18 (shared with 9)

struct GainFixture {
    trained: Trained,
    held_out: InstanceSpec,
    sa: SaConfig,
    gain: GainReport,
    gain_json: String,
    build_secs: f64,
    gain_secs: f64,
}

static GAIN: Lazy<GainFixture> = Lazy::new(|| {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let plan = CollectPlan::new(
        InstanceSpec { n: 18, m: 18, degree: 2, density: 0.03, planted: true, seed: 1801 },
        30,
        40,
    );
    let path = dir.path().join("train.jsonl");
    collect_dataset(&plan, &path).unwrap();
    let records = read_dataset(&path).unwrap();
    let trained = train(&training_pairs(&records), &TrainConfig::default()).unwrap();
    let build_secs = start.elapsed().as_secs_f64();

    let held_out = InstanceSpec { seed: 1808, ..plan.template };
    let sa = SaConfig { iterations: 300, pool: Some(24), ..SaConfig::default() };
    let start = Instant::now();
    let gain = end_to_end_gain(
        &held_out,
        30,
        20,
        &trained.model,
        &trained.stats,
        &sa,
        DEFAULT_CAP,
        4808,
    )
    .unwrap();
    let gain_secs = start.elapsed().as_secs_f64();
    let gain_json = serde_json::to_string(&gain).unwrap();
    GainFixture { trained, held_out, sa, gain, gain_json, build_secs, gain_secs }
});

#[test]
fn criterion_8_end_to_end_gain() {
    let f = &*GAIN;
    verdict(
        8,
        f.gain.median_ratio <= 0.9,
        &format!(
            "median SA/baseline node ratio {:.3} over 30 held-out systems (mean {:.3})",
            f.gain.median_ratio, f.gain.mean_ratio
        ),
        f.build_secs + f.gain_secs,
        2700.0,
    );
}

// ---------------------------------------------------------------------------
// criterion 9: determinism of criteria 1, 5, and 8

#[test]
fn criterion_9_determinism() {
    let start = Instant::now();

    let oracle = &*ORACLE;
    let (_, dump_again) = oracle_run();
    let oracle_same = dump_again == oracle.dump;

    let predictor = &*PREDICTOR;
    let dir = tempfile::tempdir().unwrap();
    let (records_again, canonical_again) = collect_corpus(dir.path());
    let corpus_same = canonical_again == predictor.canonical;
    let retrained = train(&training_pairs(&records_again), &TrainConfig::default()).unwrap();
    let model_same = retrained.model.to_json() == predictor.trained.model.to_json();

    let gain = &*GAIN;
    let gain_again = end_to_end_gain(
        &gain.held_out,
        30,
        20,
        &gain.trained.model,
        &gain.trained.stats,
        &gain.sa,
        DEFAULT_CAP,
        4808,
    )
    .unwrap();
    let gain_same = serde_json::to_string(&gain_again).unwrap() == gain.gain_json;

    verdict(
        9,
        oracle_same && corpus_same && model_same && gain_same,
        &format!(
            "re-runs byte-identical: oracle dump {oracle_same}, corpus {corpus_same}, \
             model {model_same}, gain report {gain_same} (wall_ms excluded)"
        ),
        start.elapsed().as_secs_f64(),
        f64::INFINITY,
    );
}
