//! Probabilistic-claim verification: Monte-Carlo confirmation of the
//! correlation law ρ = √(1 − ê²/Σ²), and the improvement experiment that
//! measures how annealing gains decay as synthetic noise is injected into
//! the predictions.

use bcs_core::{solve_with_ordering, BoolSystem, VarOrder};
use bcs_ml::{
    optimize_with, ordering_hash, Confidence, GbtModel, MlError, OrderingCost, ResidualStats,
    SaConfig, SpectrumCost, TargetTransform,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::gen::{gen_random_system, InstanceSpec};
use crate::stats;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma1Row {
    pub e_hat: f64,
    /// ê / Σ_τ.
    pub ratio: f64,
    pub rho_empirical: f64,
    pub rho_predicted: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub sigma_tau: f64,
    pub samples: usize,
    pub rows: Vec<Lemma1Row>,
}

/// Draws τ = f + ε with f ~ N(0, Σ²−ê²) and ε ~ N(0, ê²) independent, and
/// compares corr(τ, f) against the closed form √(1 − ê²/Σ²) for each ê.
pub fn verify_lemma1(
    sigma_tau: f64,
    e_hats: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Lemma1Report, HarnessError> {
    if !(sigma_tau > 0.0) {
        return Err(HarnessError::Input(format!("sigma_tau {sigma_tau} must be positive")));
    }
    if samples < 10_000 {
        return Err(HarnessError::Input(format!(
            "{samples} samples is below the 10000 minimum"
        )));
    }
    for &e in e_hats {
        if !(0.0..sigma_tau).contains(&e) {
            return Err(HarnessError::Input(format!(
                "e_hat {e} outside [0, sigma_tau = {sigma_tau})"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(e_hats.len());
    for &e_hat in e_hats {
        let sd_f = (sigma_tau * sigma_tau - e_hat * e_hat).sqrt();
        let noise = Normal::new(0.0, e_hat).expect("e_hat >= 0");
        let signal = Normal::new(0.0, sd_f).expect("sd_f > 0");
        let mut f = Vec::with_capacity(samples);
        let mut tau = Vec::with_capacity(samples);
        for _ in 0..samples {
            let fi = signal.sample(&mut rng);
            let ei = noise.sample(&mut rng);
            f.push(fi);
            tau.push(fi + ei);
        }
        rows.push(Lemma1Row {
            e_hat,
            ratio: e_hat / sigma_tau,
            rho_empirical: stats::pearson_r(&tau, &f)?,
            rho_predicted: (1.0 - (e_hat / sigma_tau).powi(2)).sqrt(),
        });
    }
    Ok(Lemma1Report { sigma_tau, samples, rows })
}

/// A deterministic standard-normal value attached to a key; used to build
/// noise fields that are stationary in the ordering (the same ordering
/// always draws the same noise).
fn gaussian_from_key(key: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.sample(rand_distr::StandardNormal)
}

/// Wraps a cost field with additive stationary Gaussian noise of the given
/// amplitude, keyed by the ordering hash and a per-run salt.
struct NoisyCost<C> {
    inner: C,
    amplitude: f64,
    salt: u64,
}

impl<C: OrderingCost> OrderingCost for NoisyCost<C> {
    fn cost(&self, order: &VarOrder) -> Result<f64, MlError> {
        let base = self.inner.cost(order)?;
        if self.amplitude == 0.0 {
            return Ok(base);
        }
        Ok(base + self.amplitude * gaussian_from_key(ordering_hash(order) ^ self.salt))
    }
}

/// The oracle predictor: the true transformed solving cost, by solving.
struct TrueCost<'a> {
    system: &'a BoolSystem,
    cap: usize,
}

impl OrderingCost for TrueCost<'_> {
    fn cost(&self, order: &VarOrder) -> Result<f64, MlError> {
        let result = solve_with_ordering(self.system, order, self.cap)?;
        Ok(TargetTransform::Log1pNodes.apply(result.cost.node_count as f64))
    }
}

/// A predictor with no signal at all: pure stationary noise.
struct NoiseOnlyCost {
    salt: u64,
}

impl OrderingCost for NoiseOnlyCost {
    fn cost(&self, order: &VarOrder) -> Result<f64, MlError> {
        Ok(gaussian_from_key(ordering_hash(order) ^ self.salt))
    }
}

/// Which prediction source drives the annealer in the improvement
/// experiment.
pub enum PredictorSource<'a> {
    /// A trained model with its validation residuals.
    Model { model: &'a GbtModel, stats: &'a ResidualStats },
    /// Predictions := true transformed costs (ê = 0); every prediction is a
    /// real solver run, so keep the corpus small.
    Planted,
}

#[derive(Clone, Debug)]
pub struct ImprovementPlan {
    /// Corpus shape; its seed keys the corpus and must differ from any
    /// training collection seed to keep the corpus held out.
    pub template: InstanceSpec,
    pub systems: usize,
    /// r: random orderings per system for the baseline statistics.
    pub baseline_orderings: usize,
    /// Injected noise amplitudes in multiples of the measured transformed
    /// baseline spread Σ̂_t; the zero-noise arm always runs and need not be
    /// listed.
    pub noise_levels: Vec<f64>,
    pub sa: SaConfig,
    pub cap: usize,
    /// Keys the baseline orderings, SA seeds, and noise salts.
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrendRow {
    /// Noise amplitude in multiples of Σ̂_t; the pure-noise row reports NaN
    /// serialized as null via Option (None).
    pub noise_level: Option<f64>,
    /// Measured RMSE of the (noisy) predictions against true transformed
    /// costs over the baseline set.
    pub injected_e_hat: f64,
    /// Mean over systems of Δτ = baseline median − SA node count, raw units.
    pub mean_improvement: f64,
    pub std_improvement: f64,
    pub t_stat: f64,
    pub ci95: (f64, f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub systems: usize,
    pub baseline_orderings: usize,
    /// Mean over systems of the per-system baseline node-count stddev.
    pub sigma_tau: f64,
    /// Mean over systems of the per-system baseline node-count mean.
    pub mu_b: f64,
    /// Same spread in the transformed (log1p) domain; noise amplitudes and
    /// the ρ prediction live here.
    pub sigma_t_transformed: f64,
    /// The predictor's claimed RMSE (validation for a model, 0 planted).
    pub e_hat: f64,
    /// corr(predicted, true transformed cost) over the baseline set.
    pub rho_empirical: f64,
    /// √(1 − ê²/Σ̂_t²), clamped to 0 when ê ≥ Σ̂_t.
    pub rho_predicted: f64,
    /// Zero-noise mean improvement, raw node units.
    pub delta_tau_mean: f64,
    pub delta_tau_ci95: (f64, f64),
    /// Fitted c in E[Δτ] = c·Σ_τ·ρ using the empirical ρ; 0 when undefined.
    pub c_empirical: f64,
    /// Zero-noise arm first, then each injected level in order.
    pub trend: Vec<TrendRow>,
    pub pure_noise: TrendRow,
    /// Spearman between measured ê and mean improvement across the trend
    /// rows; None with fewer than two rows.
    pub spearman_e_hat_vs_improvement: Option<f64>,
}

struct BaselineSet {
    /// Raw node counts, [system][ordering].
    nodes: Vec<Vec<f64>>,
    /// Transformed true costs.
    transformed: Vec<Vec<f64>>,
    /// Ordering hashes, for reproducing the stationary noise fields.
    hashes: Vec<Vec<u64>>,
}

fn solve_baselines(
    systems: &[BoolSystem],
    ordering_seeds: &[u64],
    r: usize,
    cap: usize,
) -> Result<BaselineSet, HarnessError> {
    let n = systems[0].n();
    let tasks: Vec<(usize, usize)> = (0..systems.len())
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .collect();
    let solved: Vec<(f64, f64, u64)> = tasks
        .par_iter()
        .map(|&(i, j)| {
            let ordering = VarOrder::random(n, ordering_seeds[i * r + j]);
            let result = solve_with_ordering(&systems[i], &ordering, cap)?;
            let nodes = result.cost.node_count as f64;
            Ok((
                nodes,
                TargetTransform::Log1pNodes.apply(nodes),
                ordering_hash(&ordering),
            ))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut set = BaselineSet {
        nodes: vec![Vec::with_capacity(r); systems.len()],
        transformed: vec![Vec::with_capacity(r); systems.len()],
        hashes: vec![Vec::with_capacity(r); systems.len()],
    };
    for (&(i, _), &(nodes, t, h)) in tasks.iter().zip(&solved) {
        set.nodes[i].push(nodes);
        set.transformed[i].push(t);
        set.hashes[i].push(h);
    }
    Ok(set)
}

/// One experiment arm: anneal every system against the given cost fields,
/// then solve the best orderings for real. Returns Δτ per system.
fn run_arm<C: OrderingCost + Sync>(
    systems: &[BoolSystem],
    costs: &[C],
    medians: &[f64],
    sa_template: &SaConfig,
    sa_seeds: &[u64],
    residuals: Option<&[f64]>,
    cap: usize,
) -> Result<Vec<f64>, HarnessError> {
    systems
        .par_iter()
        .enumerate()
        .map(|(i, system)| {
            let cfg = SaConfig { seed: sa_seeds[i], ..sa_template.clone() };
            let confidence = match residuals {
                Some(res) => Confidence::Resampled { residuals: res, h: cfg.h },
                None => Confidence::Constant(0.0),
            };
            let out = optimize_with(system.n(), &costs[i], confidence, &cfg)?;
            let solved = solve_with_ordering(system, &out.best_ordering, cap)?;
            Ok(medians[i] - solved.cost.node_count as f64)
        })
        .collect()
}

fn trend_row(noise_level: Option<f64>, injected_e_hat: f64, deltas: &[f64]) -> TrendRow {
    let mean = stats::mean(deltas);
    let std = if deltas.len() > 1 { stats::sample_std(deltas) } else { 0.0 };
    let se = (std / (deltas.len() as f64).sqrt()).max(1e-300);
    TrendRow {
        noise_level,
        injected_e_hat,
        mean_improvement: mean,
        std_improvement: std,
        t_stat: if std == 0.0 { 0.0 } else { mean / se },
        ci95: (mean - 1.96 * se, mean + 1.96 * se),
    }
}

/// RMSE of (prediction + noise) against the truth over the baseline set,
/// reproducing each arm's stationary noise from the stored ordering hashes.
fn measured_e_hat(
    predictions: &[Vec<f64>],
    baselines: &BaselineSet,
    amplitude: f64,
    salts: &[u64],
    pure_noise: bool,
) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..predictions.len() {
        for j in 0..predictions[i].len() {
            let noise = if amplitude != 0.0 || pure_noise {
                gaussian_from_key(baselines.hashes[i][j] ^ salts[i])
            } else {
                0.0
            };
            let pred = if pure_noise {
                noise
            } else {
                predictions[i][j] + amplitude * noise
            };
            let err = pred - baselines.transformed[i][j];
            sum += err * err;
            count += 1;
        }
    }
    (sum / count as f64).sqrt()
}

pub fn verify_improvement(
    plan: &ImprovementPlan,
    predictor: PredictorSource<'_>,
) -> Result<TheoremReport, HarnessError> {
    plan.template.validate()?;
    if plan.systems < 20 {
        return Err(HarnessError::Input(format!(
            "improvement corpus needs at least 20 systems, got {}",
            plan.systems
        )));
    }
    if plan.baseline_orderings < 2 {
        return Err(HarnessError::Input("need at least 2 baseline orderings".into()));
    }
    for &level in &plan.noise_levels {
        if !(level > 0.0 && level.is_finite()) {
            return Err(HarnessError::Input(format!(
                "noise level {level} must be positive (the zero arm is implicit)"
            )));
        }
    }
    if let PredictorSource::Model { model, .. } = &predictor {
        if model.n_features != plan.template.n {
            return Err(HarnessError::Input(format!(
                "model expects {} features, corpus has n = {}",
                model.n_features, plan.template.n
            )));
        }
    }

    // corpus
    let mut gen_rng = ChaCha8Rng::seed_from_u64(plan.template.seed);
    let gen_seeds: Vec<u64> = (0..plan.systems).map(|_| gen_rng.random()).collect();
    let systems: Vec<BoolSystem> = gen_seeds
        .iter()
        .map(|&seed| gen_random_system(&InstanceSpec { seed, ..plan.template }).map(|(s, _)| s))
        .collect::<Result<_, _>>()?;

    // schedule: baseline ordering seeds, SA seeds, then one salt per
    // (arm, system) with the pure-noise arm last
    let r = plan.baseline_orderings;
    let arms = 1 + plan.noise_levels.len();
    let mut sched = ChaCha8Rng::seed_from_u64(plan.seed);
    let ordering_seeds: Vec<u64> = (0..plan.systems * r).map(|_| sched.random()).collect();
    let sa_seeds: Vec<u64> = (0..plan.systems).map(|_| sched.random()).collect();
    let arm_salts: Vec<Vec<u64>> = (0..arms)
        .map(|_| (0..plan.systems).map(|_| sched.random()).collect())
        .collect();
    let pure_salts: Vec<u64> = (0..plan.systems).map(|_| sched.random()).collect();

    let baselines = solve_baselines(&systems, &ordering_seeds, r, plan.cap)?;
    let medians: Vec<f64> = baselines.nodes.iter().map(|b| stats::median(b)).collect();
    let sigma_tau = stats::mean(
        &baselines.nodes.iter().map(|b| stats::sample_std(b)).collect::<Vec<_>>(),
    );
    let mu_b = stats::mean(&baselines.nodes.iter().map(|b| stats::mean(b)).collect::<Vec<_>>());
    let sigma_t = stats::mean(
        &baselines.transformed.iter().map(|b| stats::sample_std(b)).collect::<Vec<_>>(),
    );

    // level-0 predictions on the baseline set, for ρ and the measured ê
    let predictions: Vec<Vec<f64>> = match &predictor {
        PredictorSource::Model { model, .. } => systems
            .iter()
            .enumerate()
            .map(|(i, system)| {
                let cost = SpectrumCost::new(model, system)?;
                (0..r)
                    .map(|j| {
                        let o = VarOrder::random(system.n(), ordering_seeds[i * r + j]);
                        cost.cost(&o)
                    })
                    .collect::<Result<Vec<f64>, MlError>>()
            })
            .collect::<Result<_, _>>()?,
        PredictorSource::Planted => baselines.transformed.clone(),
    };

    let flat_pred: Vec<f64> = predictions.iter().flatten().copied().collect();
    let flat_true: Vec<f64> = baselines.transformed.iter().flatten().copied().collect();
    let rho_empirical = stats::pearson_r(&flat_pred, &flat_true)?;

    let (e_hat, residuals): (f64, Option<&[f64]>) = match &predictor {
        PredictorSource::Model { stats, .. } => (stats.rmse, Some(&stats.residuals)),
        PredictorSource::Planted => (0.0, None),
    };
    let rho_predicted = if e_hat >= sigma_t {
        0.0
    } else {
        (1.0 - (e_hat / sigma_t).powi(2)).sqrt()
    };

    // arms: zero noise, each injected level, then pure noise
    let mut trend = Vec::with_capacity(arms);
    for (arm, &level) in std::iter::once(&0.0).chain(plan.noise_levels.iter()).enumerate() {
        let amplitude = level * sigma_t;
        let deltas = match &predictor {
            PredictorSource::Model { model, .. } => {
                let costs: Vec<NoisyCost<SpectrumCost>> = systems
                    .iter()
                    .enumerate()
                    .map(|(i, system)| {
                        Ok(NoisyCost {
                            inner: SpectrumCost::new(model, system)?,
                            amplitude,
                            salt: arm_salts[arm][i],
                        })
                    })
                    .collect::<Result<_, HarnessError>>()?;
                run_arm(&systems, &costs, &medians, &plan.sa, &sa_seeds, residuals, plan.cap)?
            }
            PredictorSource::Planted => {
                let costs: Vec<NoisyCost<TrueCost>> = systems
                    .iter()
                    .enumerate()
                    .map(|(i, system)| NoisyCost {
                        inner: TrueCost { system, cap: plan.cap },
                        amplitude,
                        salt: arm_salts[arm][i],
                    })
                    .collect();
                run_arm(&systems, &costs, &medians, &plan.sa, &sa_seeds, residuals, plan.cap)?
            }
        };
        trend.push(trend_row(
            Some(level),
            measured_e_hat(&predictions, &baselines, amplitude, &arm_salts[arm], false),
            &deltas,
        ));
    }

    let pure_costs: Vec<NoiseOnlyCost> =
        (0..plan.systems).map(|i| NoiseOnlyCost { salt: pure_salts[i] }).collect();
    let pure_deltas =
        run_arm(&systems, &pure_costs, &medians, &plan.sa, &sa_seeds, residuals, plan.cap)?;
    let pure_noise = trend_row(
        None,
        measured_e_hat(&predictions, &baselines, 0.0, &pure_salts, true),
        &pure_deltas,
    );

    let delta_tau_mean = trend[0].mean_improvement;
    let denom = sigma_tau * rho_empirical;
    let c_empirical = if denom.abs() > 0.0 { delta_tau_mean / denom } else { 0.0 };
    let spearman = if trend.len() >= 2 {
        let xs: Vec<f64> = trend.iter().map(|t| t.injected_e_hat).collect();
        let ys: Vec<f64> = trend.iter().map(|t| t.mean_improvement).collect();
        stats::spearman(&xs, &ys).ok()
    } else {
        None
    };

    Ok(TheoremReport {
        systems: plan.systems,
        baseline_orderings: r,
        sigma_tau,
        mu_b,
        sigma_t_transformed: sigma_t,
        e_hat,
        rho_empirical,
        rho_predicted,
        delta_tau_mean,
        delta_tau_ci95: trend[0].ci95,
        c_empirical,
        trend,
        pure_noise,
        spearman_e_hat_vs_improvement: spearman,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemGain {
    pub system_id: u64,
    pub gen_seed: u64,
    pub baseline_median: f64,
    pub sa_node_count: u64,
    /// sa_node_count / baseline_median.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GainReport {
    pub systems: usize,
    pub baseline_orderings: usize,
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub per_system: Vec<SystemGain>,
}

/// Head-to-head evaluation on held-out systems: SA-optimized cost against
/// the per-system median of r random orderings, in raw node counts.
pub fn end_to_end_gain(
    template: &InstanceSpec,
    systems: usize,
    baseline_orderings: usize,
    model: &GbtModel,
    stats_in: &ResidualStats,
    sa_template: &SaConfig,
    cap: usize,
    seed: u64,
) -> Result<GainReport, HarnessError> {
    template.validate()?;
    if systems == 0 || baseline_orderings < 2 {
        return Err(HarnessError::Input(
            "need at least 1 system and 2 baseline orderings".into(),
        ));
    }
    if model.n_features != template.n {
        return Err(HarnessError::Input(format!(
            "model expects {} features, corpus has n = {}",
            model.n_features, template.n
        )));
    }

    let mut gen_rng = ChaCha8Rng::seed_from_u64(template.seed);
    let gen_seeds: Vec<u64> = (0..systems).map(|_| gen_rng.random()).collect();
    let corpus: Vec<BoolSystem> = gen_seeds
        .iter()
        .map(|&s| gen_random_system(&InstanceSpec { seed: s, ..*template }).map(|(sys, _)| sys))
        .collect::<Result<_, _>>()?;

    let r = baseline_orderings;
    let mut sched = ChaCha8Rng::seed_from_u64(seed);
    let ordering_seeds: Vec<u64> = (0..systems * r).map(|_| sched.random()).collect();
    let sa_seeds: Vec<u64> = (0..systems).map(|_| sched.random()).collect();

    let baselines = solve_baselines(&corpus, &ordering_seeds, r, cap)?;
    let medians: Vec<f64> = baselines.nodes.iter().map(|b| stats::median(b)).collect();

    let per_system: Vec<SystemGain> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, system)| {
            let cost = SpectrumCost::new(model, system)?;
            let cfg = SaConfig { seed: sa_seeds[i], ..sa_template.clone() };
            let confidence =
                Confidence::Resampled { residuals: &stats_in.residuals, h: cfg.h };
            let out = optimize_with(system.n(), &cost, confidence, &cfg)?;
            let solved = solve_with_ordering(system, &out.best_ordering, cap)?;
            let sa_nodes = solved.cost.node_count;
            Ok(SystemGain {
                system_id: i as u64,
                gen_seed: gen_seeds[i],
                baseline_median: medians[i],
                sa_node_count: sa_nodes,
                ratio: sa_nodes as f64 / medians[i],
            })
        })
        .collect::<Result<_, HarnessError>>()?;

    let ratios: Vec<f64> = per_system.iter().map(|g| g.ratio).collect();
    Ok(GainReport {
        systems,
        baseline_orderings: r,
        median_ratio: stats::median(&ratios),
        mean_ratio: stats::mean(&ratios),
        per_system,
    })
}
