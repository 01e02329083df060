//! Strategy benchmark: identity ordering vs best-of-r random orderings vs
//! the guided annealer, over a list of named systems. Each method repeats
//! `reps` times on a fixed seed schedule and reports per-problem medians.

use std::time::Instant;

use bcs_core::{solve_with_ordering, BoolSystem, VarOrder};
use bcs_ml::{optimize_with, Confidence, GbtModel, ResidualStats, SaConfig, SpectrumCost};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::report::Table;
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Identity,
    RandomBest,
    Annealed,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::RandomBest => "random_best",
            Method::Annealed => "annealed",
        }
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        match text.trim() {
            "identity" => Ok(Method::Identity),
            "random_best" => Ok(Method::RandomBest),
            "annealed" => Ok(Method::Annealed),
            other => Err(HarnessError::Input(format!(
                "unknown method `{other}` (expected identity, random_best, annealed)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchPlan {
    pub methods: Vec<Method>,
    /// r for the best-of-r random-ordering method.
    pub random_orderings: usize,
    /// Repetitions per (problem, method); medians are taken over these.
    pub reps: usize,
    pub sa: SaConfig,
    pub cap: usize,
    pub seed: u64,
}

/// One median cell of the report table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchCell {
    pub problem: String,
    pub method: String,
    pub median_nodes: f64,
    /// Wall time varies run to run; it lives in the JSON report only and is
    /// excluded from the CSV so the CSV reproduces byte-for-byte.
    pub median_wall_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub reps: usize,
    pub random_orderings: usize,
    pub cells: Vec<BenchCell>,
}

/// Runs every requested method on every named system.
pub fn run_bench(
    systems: &[(String, BoolSystem)],
    plan: &BenchPlan,
    model: Option<(&GbtModel, &ResidualStats)>,
) -> Result<BenchReport, HarnessError> {
    if systems.is_empty() || plan.methods.is_empty() {
        return Err(HarnessError::Input("need at least one system and one method".into()));
    }
    if plan.reps == 0 || plan.random_orderings == 0 {
        return Err(HarnessError::Input("reps and random_orderings must be positive".into()));
    }
    if plan.methods.contains(&Method::Annealed) {
        match model {
            None => {
                return Err(HarnessError::Input(
                    "the annealed method needs a trained model".into(),
                ))
            }
            Some((m, _)) => {
                for (name, system) in systems {
                    if m.n_features != system.n() {
                        return Err(HarnessError::Input(format!(
                            "model expects {} features, `{name}` has n = {}",
                            m.n_features,
                            system.n()
                        )));
                    }
                }
            }
        }
    }

    let s = systems.len();
    let (reps, r) = (plan.reps, plan.random_orderings);
    let mut sched = ChaCha8Rng::seed_from_u64(plan.seed);
    let ordering_seeds: Vec<u64> = (0..s * reps * r).map(|_| sched.random()).collect();
    let sa_seeds: Vec<u64> = (0..s * reps).map(|_| sched.random()).collect();

    let cells: Vec<Vec<BenchCell>> = systems
        .par_iter()
        .enumerate()
        .map(|(i, (name, system))| -> Result<Vec<BenchCell>, HarnessError> {
            let n = system.n();
            let mut out = Vec::with_capacity(plan.methods.len());
            for &method in &plan.methods {
                let mut nodes = Vec::with_capacity(reps);
                let mut walls = Vec::with_capacity(reps);
                match method {
                    Method::Identity => {
                        // deterministic: one run serves every rep
                        let solved =
                            solve_with_ordering(system, &VarOrder::identity(n), plan.cap)?;
                        nodes = vec![solved.cost.node_count as f64; reps];
                        walls = vec![solved.cost.wall_ms; reps];
                    }
                    Method::RandomBest => {
                        for t in 0..reps {
                            let start = Instant::now();
                            let mut best = u64::MAX;
                            for j in 0..r {
                                let seed = ordering_seeds[(i * reps + t) * r + j];
                                let o = VarOrder::random(n, seed);
                                let solved = solve_with_ordering(system, &o, plan.cap)?;
                                best = best.min(solved.cost.node_count);
                            }
                            nodes.push(best as f64);
                            walls.push(start.elapsed().as_secs_f64() * 1e3);
                        }
                    }
                    Method::Annealed => {
                        let (gbt, res) = model.expect("checked above");
                        let cost = SpectrumCost::new(gbt, system)?;
                        for t in 0..reps {
                            let start = Instant::now();
                            let cfg =
                                SaConfig { seed: sa_seeds[i * reps + t], ..plan.sa.clone() };
                            let conf = Confidence::Resampled {
                                residuals: &res.residuals,
                                h: cfg.h,
                            };
                            let picked = optimize_with(n, &cost, conf, &cfg)?;
                            let solved =
                                solve_with_ordering(system, &picked.best_ordering, plan.cap)?;
                            nodes.push(solved.cost.node_count as f64);
                            walls.push(start.elapsed().as_secs_f64() * 1e3);
                        }
                    }
                }
                out.push(BenchCell {
                    problem: name.clone(),
                    method: method.name().into(),
                    median_nodes: stats::median(&nodes),
                    median_wall_ms: stats::median(&walls),
                });
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;

    Ok(BenchReport {
        reps,
        random_orderings: r,
        cells: cells.into_iter().flatten().collect(),
    })
}

impl BenchReport {
    /// Aligned text table mirroring the CSV plus wall-time medians.
    pub fn summary_table(&self) -> String {
        let mut table = Table::new(&["problem", "method", "median_nodes", "median_wall_ms"]);
        for cell in &self.cells {
            table.row(&[
                cell.problem.clone(),
                cell.method.clone(),
                format!("{}", cell.median_nodes),
                format!("{:.3}", cell.median_wall_ms),
            ]);
        }
        table.render()
    }

    pub const CSV_HEADERS: [&'static str; 3] = ["problem", "method", "median_nodes"];

    /// Deterministic CSV rows (no wall times).
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|cell| {
                vec![
                    cell.problem.clone(),
                    cell.method.clone(),
                    format!("{}", cell.median_nodes),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_random_system, InstanceSpec};

    fn corpus(count: usize, seed: u64) -> Vec<(String, BoolSystem)> {
        (0..count)
            .map(|i| {
                let spec = InstanceSpec {
                    n: 8,
                    m: 8,
                    seed: seed + i as u64,
                    ..InstanceSpec::default()
                };
                (format!("sys-{i:03}"), gen_random_system(&spec).unwrap().0)
            })
            .collect()
    }

    #[test]
    fn bench_without_model_compares_identity_and_random() {
        let systems = corpus(4, 400);
        let plan = BenchPlan {
            methods: vec![Method::Identity, Method::RandomBest],
            random_orderings: 5,
            reps: 2,
            sa: SaConfig::default(),
            cap: bcs_core::DEFAULT_CAP,
            seed: 11,
        };
        let report = run_bench(&systems, &plan, None).unwrap();
        assert_eq!(report.cells.len(), 8);
        for cell in &report.cells {
            assert!(cell.median_nodes >= 1.0);
        }
        // identity reps collapse to one value, so median == that value
        let id_cells: Vec<&BenchCell> =
            report.cells.iter().filter(|c| c.method == "identity").collect();
        assert_eq!(id_cells.len(), 4);

        // CSV bytes reproduce exactly; wall times are kept out of it
        let again = run_bench(&systems, &plan, None).unwrap();
        assert_eq!(report.csv_rows(), again.csv_rows());
    }

    #[test]
    fn bench_validates_inputs() {
        let systems = corpus(1, 1);
        let plan = BenchPlan {
            methods: vec![Method::Annealed],
            random_orderings: 2,
            reps: 1,
            sa: SaConfig::default(),
            cap: bcs_core::DEFAULT_CAP,
            seed: 0,
        };
        // annealed without a model is refused
        assert!(run_bench(&systems, &plan, None).is_err());
        let no_methods = BenchPlan { methods: vec![], ..plan };
        assert!(run_bench(&systems, &no_methods, None).is_err());
        assert!(Method::parse("annealed").is_ok());
        assert!(Method::parse("sideways").is_err());
    }

    #[test]
    fn single_system_single_method_gives_one_row() {
        let systems = corpus(1, 7);
        let plan = BenchPlan {
            methods: vec![Method::Identity],
            random_orderings: 1,
            reps: 3,
            sa: SaConfig::default(),
            cap: bcs_core::DEFAULT_CAP,
            seed: 0,
        };
        let report = run_bench(&systems, &plan, None).unwrap();
        assert_eq!(report.cells.len(), 1);
        let text = report.summary_table();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().starts_with("problem"));
    }
}
