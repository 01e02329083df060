//! `bcs`: solve Boolean polynomial systems by zero-decomposition, generate
//! random instances, collect solving-cost datasets, train the spectrum cost
//! predictor, anneal variable orderings, and run the statistical
//! verification experiments.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bcs_core::{
    solve_with_ordering, Assignment, BoolSystem, VarId, VarOrder, DEFAULT_CAP,
};
use bcs_harness::bench::{run_bench, BenchPlan, BenchReport, Method};
use bcs_harness::dataset::{collect_dataset, read_dataset, training_pairs, CollectPlan};
use bcs_harness::gen::{gen_random_system, InstanceSpec};
use bcs_harness::report::{write_csv, write_json, Table};
use bcs_harness::verify::{
    verify_improvement, verify_lemma1, ImprovementPlan, PredictorSource, TheoremReport,
    TrendRow,
};
use bcs_harness::{analyze, stats};
use bcs_ml::{optimize, train, GbtModel, ResidualStats, SaConfig, TrainConfig};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "bcs", version, about = "Boolean characteristic-set solving experiments")]
struct Cli {
    /// Master seed for every randomized step of the subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 keeps one per core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output path. Report subcommands write JSON here and a CSV twin next
    /// to it; omitted means stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances in the system text format.
    Gen(GenArgs),
    /// Solve a system file; prints solutions and cost meters as JSON.
    Solve(SolveArgs),
    /// Collect (spectrum, cost) records over random systems and orderings.
    Collect(CollectArgs),
    /// Train the gradient-boosted cost predictor on a dataset.
    Train(TrainArgs),
    /// Anneal a variable ordering for one system under a trained model.
    Optimize(OptimizeArgs),
    /// Cluster spectra and correlate features against solving cost.
    Analyze(AnalyzeArgs),
    /// Verification experiments.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Compare solving strategies on a problem set.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Monte-Carlo check of the correlation law ρ = √(1 − ê²/Σ²).
    Lemma1(Lemma1Args),
    /// Noise-injection trend for the expected-improvement law.
    Improvement(ImprovementArgs),
}

/// Instance-shape flags shared by the corpus-generating subcommands.
#[derive(Args, Clone)]
struct ShapeArgs {
    /// Variable count n.
    #[arg(long)]
    n: usize,
    /// Polynomial count m; 0 means m = n.
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Monomial inclusion probability.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Drop the planted solution (systems may be inconsistent).
    #[arg(long)]
    non_planted: bool,
}

impl ShapeArgs {
    fn template(&self, seed: u64) -> InstanceSpec {
        InstanceSpec {
            n: self.n,
            m: if self.m == 0 { self.n } else { self.m },
            degree: self.degree,
            density: self.density,
            planted: !self.non_planted,
            seed,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// How many systems to generate; more than one needs --out DIRECTORY.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// System file in the text format.
    #[arg(long)]
    system: PathBuf,
    /// `identity`, `random:SEED`, or a one-based JSON permutation like
    /// [2,1,3].
    #[arg(long, default_value = "identity")]
    ordering: String,
    /// Solution enumeration cap.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Include the triangular sets in the output.
    #[arg(long)]
    emit_sets: bool,
}

#[derive(Args)]
struct CollectArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 40)]
    systems: usize,
    /// Random orderings solved per system.
    #[arg(long, default_value_t = 50)]
    orderings: usize,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset path (JSON-Lines of records from `collect`).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trees: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long, default_value_t = 20)]
    max_depth: usize,
    #[arg(long, default_value_t = 12)]
    min_leaf: usize,
    #[arg(long, default_value_t = 0.8)]
    subsample: f64,
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    /// Stop after this many stages without validation improvement.
    #[arg(long, default_value_t = 50)]
    early_stop: usize,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    system: PathBuf,
    /// Model file; its `.residuals.json` sidecar must sit next to it.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Residual window length h.
    #[arg(long, default_value_t = 20)]
    window: usize,
    /// Candidate pool size q; default min(32, n(n-1)/2).
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Initial temperature; default calibrates from 30 probe orderings.
    #[arg(long)]
    t0: Option<f64>,
    /// Solve the incumbent for real every S iterations.
    #[arg(long)]
    spot_check: Option<usize>,
    /// Write the acceptance trace as JSON-Lines.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 7)]
    k: usize,
}

#[derive(Args)]
struct Lemma1Args {
    /// Σ_τ, the cost spread.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// ê/Σ ratios to test, comma separated.
    #[arg(long, default_value = "0.2,0.6,0.9")]
    ratios: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Args)]
struct ImprovementArgs {
    /// Trained model path; omit together with --planted for the oracle
    /// predictor.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Predictions := true solving costs (ê = 0); every prediction solves.
    #[arg(long)]
    planted: bool,
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 20)]
    systems: usize,
    /// Random orderings per system for the baseline statistics.
    #[arg(long, default_value_t = 20)]
    baselines: usize,
    /// Injected noise amplitudes in multiples of the measured transformed
    /// spread, comma separated; the zero arm always runs.
    #[arg(long, default_value = "0.75,1.5,3.0")]
    levels: String,
    /// Corpus seed; keep disjoint from the training collection seed.
    #[arg(long, default_value_t = 1)]
    corpus_seed: u64,
    #[arg(long, default_value_t = 150)]
    iters: usize,
    #[arg(long, default_value_t = 12)]
    pool: usize,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 20)]
    window: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// System files to benchmark; repeatable. Omit to generate a corpus
    /// from the shape flags instead.
    #[arg(long = "system")]
    systems: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Generated corpus size when no system files are given.
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// Comma-separated subset of identity, random_best, annealed.
    #[arg(long, default_value = "identity,random_best")]
    methods: String,
    /// r for the best-of-r random method.
    #[arg(long, default_value_t = 10)]
    r: usize,
    /// Repetitions per (problem, method).
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Needed for the annealed method.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 150)]
    iters: usize,
    #[arg(long, default_value_t = 12)]
    pool: usize,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Gen(args) => run_gen(&cli, args),
        Command::Solve(args) => run_solve(&cli, args),
        Command::Collect(args) => run_collect(&cli, args),
        Command::Train(args) => run_train(&cli, args),
        Command::Optimize(args) => run_optimize(&cli, args),
        Command::Analyze(args) => run_analyze(&cli, args),
        Command::Verify(VerifyCommand::Lemma1(args)) => run_lemma1(&cli, args),
        Command::Verify(VerifyCommand::Improvement(args)) => run_improvement(&cli, args),
        Command::Bench(args) => run_bench_cmd(&cli, args),
    }
}

fn run_gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    if args.count == 0 {
        bail!("--count must be positive");
    }
    let template = args.shape.template(cli.seed);
    let mut sched = ChaCha8Rng::seed_from_u64(cli.seed);
    let seeds: Vec<u64> = (0..args.count).map(|_| sched.random()).collect();

    let mut rendered = Vec::with_capacity(args.count);
    for &seed in &seeds {
        let spec = InstanceSpec { seed, ..template };
        let (system, planted) = gen_random_system(&spec)?;
        let mut text = system.to_text();
        let body = text.split_off(text.find('\n').map(|i| i + 1).unwrap_or(0));
        text.push_str(&format!("# gen_seed: {seed}\n"));
        if let Some(assignment) = &planted {
            text.push_str(&format!("# planted: {}\n", bitstring(assignment, spec.n)));
        }
        text.push_str(&body);
        rendered.push(text);
    }

    if args.count == 1 {
        emit(cli.out.as_deref(), &rendered[0])?;
    } else {
        let dir = cli
            .out
            .as_deref()
            .context("generating several systems needs --out DIRECTORY")?;
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        for (i, text) in rendered.iter().enumerate() {
            let path = dir.join(format!("sys-{i:03}.txt"));
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn run_solve(cli: &Cli, args: &SolveArgs) -> Result<()> {
    let system = load_system(&args.system)?;
    let n = system.n();
    let ordering = parse_ordering(&args.ordering, n)?;
    let result = solve_with_ordering(&system, &ordering, args.cap)?;

    let mut solutions: Vec<&Assignment> = result.solutions.iter().collect();
    solutions.sort_by_key(|a| a.bits());
    let mut doc = serde_json::json!({
        "n": n,
        "ordering": ordering.to_one_based(),
        "solution_count": solutions.len(),
        "solutions": solutions.iter().map(|a| bitstring(a, n)).collect::<Vec<_>>(),
        "truncated": result.truncated,
        "cost": result.cost,
    });
    if args.emit_sets {
        doc["triangular_sets"] = serde_json::json!(result
            .triangular_sets
            .iter()
            .map(|set| {
                serde_json::json!({
                    "relations": set
                        .relations
                        .iter()
                        .map(|(head, tail)| {
                            serde_json::json!({
                                "head": head.to_string(),
                                "tail": tail.to_string(),
                            })
                        })
                        .collect::<Vec<_>>(),
                    "free_vars": set
                        .free_vars
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>());
    }
    emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn run_collect(cli: &Cli, args: &CollectArgs) -> Result<()> {
    let out = cli
        .out
        .clone()
        .context("collect needs --out DATASET.jsonl")?;
    let mut plan = CollectPlan::new(args.shape.template(cli.seed), args.systems, args.orderings);
    plan.cap = args.cap;
    let written = collect_dataset(&plan, &out)?;
    let total = read_dataset(&out)?.len();
    println!(
        "wrote {written} new records to {}; dataset holds {total}",
        out.display()
    );
    Ok(())
}

fn run_train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("model.json"));
    let records = read_dataset(&args.data)?;
    let pairs = training_pairs(&records);
    let cfg = TrainConfig {
        n_estimators: args.trees,
        learning_rate: args.learning_rate,
        max_depth: args.max_depth,
        min_samples_leaf: args.min_leaf,
        subsample: args.subsample,
        validation_fraction: args.val_fraction,
        n_iter_no_change: args.early_stop,
        seed: cli.seed,
        ..TrainConfig::default()
    };
    let trained = train(&pairs, &cfg)?;
    trained.model.save(&out)?;
    let sidecar = residuals_path(&out);
    trained.stats.save(&sidecar)?;

    let targets: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let sigma = stats::sample_std(&targets);
    let e_hat = trained.stats.rmse;
    println!(
        "trained on {} records: kept {} of {} stages, validation rmse {:.4}",
        pairs.len(),
        trained.history.best_stage,
        trained.history.stages_trained,
        e_hat
    );
    println!(
        "target sigma {:.4}, e_hat/sigma {:.4}, R^2 vs constant {:.4}",
        sigma,
        e_hat / sigma,
        1.0 - (e_hat / sigma).powi(2)
    );
    println!("model -> {}", out.display());
    println!("residuals -> {}", sidecar.display());
    Ok(())
}

fn run_optimize(cli: &Cli, args: &OptimizeArgs) -> Result<()> {
    let system = load_system(&args.system)?;
    let (model, stats) = load_model(&args.model)?;
    let cfg = SaConfig {
        t0: args.t0,
        alpha: args.alpha,
        beta: args.beta,
        h: args.window,
        iterations: args.iters,
        pool: args.pool,
        epsilon_explore: args.epsilon,
        spot_check_every: args.spot_check,
        seed: cli.seed,
    };
    let result = optimize(&system, &model, &stats, &cfg)?;

    if let Some(trace_path) = &args.trace_out {
        let mut text = String::new();
        for record in &result.trace.records {
            text.push_str(&serde_json::to_string(record)?);
            text.push('\n');
        }
        fs::write(trace_path, text)
            .with_context(|| format!("writing {}", trace_path.display()))?;
    }
    let doc = serde_json::json!({
        "best_ordering": result.best_ordering.to_one_based(),
        "predicted_cost": result.predicted_cost,
        "evaluations": result.evaluations,
        "trace_len": result.trace.records.len(),
    });
    emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn run_analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<()> {
    let records = read_dataset(&args.data)?;
    let report = analyze(&records, args.k, cli.seed)?;

    println!(
        "{} records, k = {}: mean silhouette {:.4}",
        report.records, report.k, report.silhouette_mean
    );
    if let Some(corr) = report.cost_cluster_spectrum_correlation {
        println!("mean intra-cost-cluster spectrum correlation {corr:.4}");
    }
    let mut table = Table::new(&["feature", "r", "p"]);
    for fc in &report.feature_correlations {
        table.row(&[
            format!("f{}", fc.feature),
            fc.r.map(|v| format!("{v:.4}")).unwrap_or_default(),
            fc.p.map(|v| format!("{v:.4}")).unwrap_or_default(),
        ]);
    }
    print!("{}", table.render());

    if let Some(out) = &cli.out {
        write_json(out, &report)?;
        let mut rows: Vec<Vec<String>> = Vec::new();
        for c in &report.clusters {
            rows.push(vec![
                "cluster".into(),
                c.cluster.to_string(),
                c.size.to_string(),
                format!("{}", c.cost_mean),
                format!("{}", c.cost_std),
                String::new(),
                String::new(),
            ]);
        }
        for fc in &report.feature_correlations {
            rows.push(vec![
                "feature".into(),
                fc.feature.to_string(),
                String::new(),
                String::new(),
                String::new(),
                fc.r.map(|v| format!("{v}")).unwrap_or_default(),
                fc.p.map(|v| format!("{v}")).unwrap_or_default(),
            ]);
        }
        write_csv(
            &csv_sibling(out),
            &["kind", "index", "size", "cost_mean", "cost_std", "r", "p"],
            &rows,
        )?;
        println!("report -> {} and {}", out.display(), csv_sibling(out).display());
    }
    Ok(())
}

fn run_lemma1(cli: &Cli, args: &Lemma1Args) -> Result<()> {
    let ratios = parse_f64_list(&args.ratios)?;
    let e_hats: Vec<f64> = ratios.iter().map(|r| r * args.sigma).collect();
    let report = verify_lemma1(args.sigma, &e_hats, args.samples, cli.seed)?;

    let mut table = Table::new(&["e_hat", "ratio", "rho_empirical", "rho_predicted", "abs_err"]);
    for row in &report.rows {
        table.row(&[
            format!("{:.4}", row.e_hat),
            format!("{:.4}", row.ratio),
            format!("{:.6}", row.rho_empirical),
            format!("{:.6}", row.rho_predicted),
            format!("{:.6}", (row.rho_empirical - row.rho_predicted).abs()),
        ]);
    }
    print!("{}", table.render());

    if let Some(out) = &cli.out {
        write_json(out, &report)?;
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}", r.e_hat),
                    format!("{}", r.ratio),
                    format!("{}", r.rho_empirical),
                    format!("{}", r.rho_predicted),
                ]
            })
            .collect();
        write_csv(
            &csv_sibling(out),
            &["e_hat", "ratio", "rho_empirical", "rho_predicted"],
            &rows,
        )?;
        println!("report -> {} and {}", out.display(), csv_sibling(out).display());
    }
    Ok(())
}

fn run_improvement(cli: &Cli, args: &ImprovementArgs) -> Result<()> {
    if args.planted == args.model.is_some() {
        bail!("pass exactly one of --model and --planted");
    }
    let plan = ImprovementPlan {
        template: args.shape.template(args.corpus_seed),
        systems: args.systems,
        baseline_orderings: args.baselines,
        noise_levels: parse_f64_list(&args.levels)?,
        sa: SaConfig {
            t0: None,
            alpha: args.alpha,
            beta: args.beta,
            h: args.window,
            iterations: args.iters,
            pool: Some(args.pool),
            epsilon_explore: args.epsilon,
            spot_check_every: None,
            seed: 0,
        },
        cap: args.cap,
        seed: cli.seed,
    };
    let loaded = args.model.as_ref().map(load_model).transpose()?;
    let report = match &loaded {
        Some((model, stats)) => {
            verify_improvement(&plan, PredictorSource::Model { model, stats })?
        }
        None => verify_improvement(&plan, PredictorSource::Planted)?,
    };

    println!(
        "{} systems x {} baselines: sigma_tau {:.2}, mu_B {:.2}, e_hat {:.4}",
        report.systems, report.baseline_orderings, report.sigma_tau, report.mu_b, report.e_hat
    );
    println!(
        "rho empirical {:.4} vs predicted {:.4}; c_empirical {:.4}",
        report.rho_empirical, report.rho_predicted, report.c_empirical
    );
    if let Some(s) = report.spearman_e_hat_vs_improvement {
        println!("spearman(e_hat, improvement) = {s:.4}");
    }
    let mut table = Table::new(&["arm", "injected_e_hat", "mean_improvement", "t_stat"]);
    for row in &report.trend {
        table.row(&[
            format!("level {}", row.noise_level.unwrap_or(f64::NAN)),
            format!("{:.4}", row.injected_e_hat),
            format!("{:.2}", row.mean_improvement),
            format!("{:.2}", row.t_stat),
        ]);
    }
    table.row(&[
        "pure_noise".into(),
        format!("{:.4}", report.pure_noise.injected_e_hat),
        format!("{:.2}", report.pure_noise.mean_improvement),
        format!("{:.2}", report.pure_noise.t_stat),
    ]);
    print!("{}", table.render());

    if let Some(out) = &cli.out {
        write_json(out, &report)?;
        write_csv(&csv_sibling(out), &TREND_HEADERS, &trend_csv_rows(&report))?;
        println!("report -> {} and {}", out.display(), csv_sibling(out).display());
    }
    Ok(())
}

const TREND_HEADERS: [&str; 8] = [
    "arm",
    "noise_level",
    "injected_e_hat",
    "mean_improvement",
    "std_improvement",
    "t_stat",
    "ci_lo",
    "ci_hi",
];

fn trend_csv_rows(report: &TheoremReport) -> Vec<Vec<String>> {
    let row_of = |arm: &str, row: &TrendRow| {
        vec![
            arm.to_string(),
            row.noise_level.map(|l| format!("{l}")).unwrap_or_default(),
            format!("{}", row.injected_e_hat),
            format!("{}", row.mean_improvement),
            format!("{}", row.std_improvement),
            format!("{}", row.t_stat),
            format!("{}", row.ci95.0),
            format!("{}", row.ci95.1),
        ]
    };
    let mut rows: Vec<Vec<String>> =
        report.trend.iter().map(|r| row_of("level", r)).collect();
    rows.push(row_of("pure_noise", &report.pure_noise));
    rows
}

fn run_bench_cmd(cli: &Cli, args: &BenchArgs) -> Result<()> {
    let systems: Vec<(String, BoolSystem)> = if args.systems.is_empty() {
        let template = InstanceSpec {
            n: args.n,
            m: if args.m == 0 { args.n } else { args.m },
            degree: args.degree,
            density: args.density,
            planted: true,
            seed: cli.seed,
        };
        let mut sched = ChaCha8Rng::seed_from_u64(cli.seed);
        (0..args.count)
            .map(|i| {
                let spec = InstanceSpec { seed: sched.random(), ..template };
                Ok((format!("sys-{i:03}"), gen_random_system(&spec)?.0))
            })
            .collect::<Result<_>>()?
    } else {
        args.systems
            .iter()
            .map(|path| Ok((path.display().to_string(), load_system(path)?)))
            .collect::<Result<_>>()?
    };

    let methods = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Method::parse)
        .collect::<Result<Vec<_>, _>>()?;
    let loaded = args.model.as_ref().map(load_model).transpose()?;

    let plan = BenchPlan {
        methods,
        random_orderings: args.r,
        reps: args.reps,
        sa: SaConfig {
            iterations: args.iters,
            pool: Some(args.pool),
            seed: 0,
            ..SaConfig::default()
        },
        cap: args.cap,
        seed: cli.seed,
    };
    let report = run_bench(&systems, &plan, loaded.as_ref().map(|(m, s)| (m, s)))?;
    print!("{}", report.summary_table());

    if let Some(out) = &cli.out {
        write_json(out, &report)?;
        write_csv(&csv_sibling(out), &BenchReport::CSV_HEADERS, &report.csv_rows())?;
        println!("report -> {} and {}", out.display(), csv_sibling(out).display());
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_system(path: &Path) -> Result<BoolSystem> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    BoolSystem::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_model(path: &PathBuf) -> Result<(GbtModel, ResidualStats)> {
    let model = GbtModel::load(path).with_context(|| format!("loading {}", path.display()))?;
    let sidecar = residuals_path(path);
    let stats = ResidualStats::load(&sidecar).with_context(|| {
        format!(
            "loading {} (written by `bcs train` next to the model)",
            sidecar.display()
        )
    })?;
    Ok((model, stats))
}

fn residuals_path(model: &Path) -> PathBuf {
    model.with_extension("residuals.json")
}

fn csv_sibling(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

fn parse_ordering(text: &str, n: usize) -> Result<VarOrder> {
    let text = text.trim();
    if text == "identity" {
        return Ok(VarOrder::identity(n));
    }
    if let Some(seed) = text.strip_prefix("random:") {
        let seed: u64 = seed.parse().context("random:SEED needs an integer seed")?;
        return Ok(VarOrder::random(n, seed));
    }
    if text.starts_with('[') {
        let perm: Vec<usize> =
            serde_json::from_str(text).context("ordering permutation must be a JSON array")?;
        return Ok(VarOrder::from_one_based(&perm)?);
    }
    bail!("--ordering expects `identity`, `random:SEED`, or a JSON permutation");
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("`{s}` is not a number"))
        })
        .collect()
}

fn bitstring(assignment: &Assignment, n: usize) -> String {
    (1..=n)
        .map(|i| if assignment.get(VarId::new(i)) { '1' } else { '0' })
        .collect()
}
