//! Simulated annealing over variable orderings with a learned cost field.
//!
//! The move set is arbitrary transpositions. Each iteration samples a pool
//! of q distinct swaps, ranks them by predicted cost, proposes the best one
//! (or, with probability ε, a uniform pool member), applies Metropolis
//! acceptance on the predicted ΔE, and cools geometrically with a factor
//! that widens while the predictor's recent residual variance is high. The
//! returned ordering is the best one the chain visited, never the final
//! state.
//!
//! Determinism contract: given a seed, the RNG stream is consumed in this
//! exact order — σ₀ shuffle; temperature-calibration orderings (only when
//! `t0` is unset); then per iteration: one pool sample, the explore coin
//! (only when ε > 0), a uniform pool pick (only when the coin fires), the
//! acceptance draw (only when the acceptance probability is below 1), and
//! residual-resampling draws (only when β > 0 without spot checks). With
//! β = 0, ε = 0, q = 1 the loop is bit-for-bit classical swap-move SA.

use std::cell::Cell;
use std::collections::VecDeque;

use bcs_core::{solve_with_ordering, BoolSystem, VarOrder, DEFAULT_CAP};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MlError;
use crate::gbt::{sample_variance, GbtModel, ResidualStats};

/// Orderings probed when `t0` is left unset.
const CALIBRATION_DRAWS: usize = 30;
const MIN_T0: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaConfig {
    /// Initial temperature; unset means calibrate to the sample standard
    /// deviation of predicted costs over 30 seeded random orderings
    /// (floored at 1e-6) so that α acts on a ΔE-matched scale.
    pub t0: Option<f64>,
    /// Geometric cooling rate, in (0,1).
    pub alpha: f64,
    /// Sensitivity of the cooling factor to predictor residual variance.
    pub beta: f64,
    /// Residual window length for the variance estimate.
    pub h: usize,
    /// Iteration count K. Zero is allowed and returns σ₀ untouched.
    pub iterations: usize,
    /// Candidate-swap pool size q; unset means min(32, n(n−1)/2).
    pub pool: Option<usize>,
    /// Probability of proposing a uniform pool member instead of the
    /// top-ranked one.
    pub epsilon_explore: f64,
    /// Every s iterations, solve the current best ordering for real and
    /// feed the genuine residual into the variance window; unset keeps the
    /// resampled-residual source.
    pub spot_check_every: Option<usize>,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            t0: None,
            alpha: 0.95,
            beta: 0.5,
            h: 20,
            iterations: 500,
            pool: None,
            epsilon_explore: 0.1,
            spot_check_every: None,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<(), MlError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(MlError::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(MlError::Config(format!("beta {} must be finite and >= 0", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.epsilon_explore) {
            return Err(MlError::Config(format!(
                "epsilon_explore {} outside [0, 1]",
                self.epsilon_explore
            )));
        }
        if self.beta > 0.0 && self.h < 2 {
            return Err(MlError::Config(format!(
                "window length {} too short for a variance estimate",
                self.h
            )));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0) {
                return Err(MlError::Config(format!("t0 {t0} must be positive")));
            }
        }
        if let Some(q) = self.pool {
            if q == 0 {
                return Err(MlError::Config("pool size must be at least 1".into()));
            }
        }
        if let Some(s) = self.spot_check_every {
            if s == 0 {
                return Err(MlError::Config("spot_check_every must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Metropolis acceptance on predicted cost change: 1 when the move improves
/// (or ties), exp(−ΔE/t) otherwise.
pub fn accept_probability(delta_e: f64, t: f64) -> Result<f64, MlError> {
    if !(t > 0.0) {
        return Err(MlError::Domain(format!("temperature {t} must be positive")));
    }
    if delta_e < 0.0 {
        Ok(1.0)
    } else {
        Ok((-delta_e / t).exp())
    }
}

/// One cooling step: t_{k+1} = α · t_k · (1 + β · window_var). With β = 0
/// this is pure geometric cooling; positive residual variance slows the
/// schedule down.
pub fn adaptive_cool(t_k: f64, alpha: f64, beta: f64, window_var: f64) -> Result<f64, MlError> {
    if !(t_k > 0.0) {
        return Err(MlError::Domain(format!("temperature {t_k} must be positive")));
    }
    if window_var < 0.0 {
        return Err(MlError::Domain(format!("window variance {window_var} is negative")));
    }
    Ok(alpha * t_k * (1.0 + beta * window_var))
}

/// Anything that prices an ordering. Implementations must be deterministic:
/// the annealer trusts repeated calls on the same ordering to agree.
pub trait OrderingCost {
    fn cost(&self, order: &VarOrder) -> Result<f64, MlError>;
}

/// The learned cost field: predicted (transformed) solving cost of a system
/// under an ordering, computed by permuting the system's base spectrum.
pub struct SpectrumCost<'a> {
    model: &'a GbtModel,
    spectrum: bcs_core::Spectrum,
}

impl<'a> SpectrumCost<'a> {
    pub fn new(model: &'a GbtModel, system: &BoolSystem) -> Result<Self, MlError> {
        if model.n_features != system.n() {
            return Err(MlError::Input(format!(
                "model expects {} features, system has {} variables",
                model.n_features,
                system.n()
            )));
        }
        Ok(SpectrumCost { model, spectrum: bcs_core::Spectrum::of(system) })
    }
}

impl OrderingCost for SpectrumCost<'_> {
    fn cost(&self, order: &VarOrder) -> Result<f64, MlError> {
        self.model.predict(self.spectrum.permuted(order).as_slice())
    }
}

/// A scored transposition of the current ordering.
#[derive(Clone, Debug)]
pub struct Candidate {
    /// 1-based positions with i < j.
    pub i: usize,
    pub j: usize,
    pub ordering: VarOrder,
    pub predicted: f64,
}

/// Maps a lex rank in [0, n(n−1)/2) to the transposition (i, j), 1 ≤ i < j ≤ n:
/// rank 0 is (1,2), rank 1 is (1,3), and so on.
fn unrank_pair(mut rank: usize, n: usize) -> (usize, usize) {
    for i in 1..n {
        let count = n - i;
        if rank < count {
            return (i, i + 1 + rank);
        }
        rank -= count;
    }
    unreachable!("pair rank out of range for n = {n}")
}

/// Samples q distinct transpositions of `current`, prices each, and returns
/// them sorted by predicted cost ascending (ties broken by lowest i, then
/// j). Consumes exactly one pool sample from the RNG. A pool larger than
/// n(n−1)/2 is clamped to cover every transposition.
pub fn guided_neighbors<C: OrderingCost + ?Sized, R: Rng + ?Sized>(
    current: &VarOrder,
    cost: &C,
    q: usize,
    rng: &mut R,
) -> Result<Vec<Candidate>, MlError> {
    let n = current.n();
    if n < 2 {
        return Err(MlError::Input(format!("no transpositions exist for n = {n}")));
    }
    if q == 0 {
        return Err(MlError::Config("pool size must be at least 1".into()));
    }
    let pool = n * (n - 1) / 2;
    let take = q.min(pool);

    let mut candidates = Vec::with_capacity(take);
    for rank in sample_indices(rng, pool, take) {
        let (i, j) = unrank_pair(rank, n);
        let ordering = current.swapped(i, j)?;
        let predicted = cost.cost(&ordering)?;
        candidates.push(Candidate { i, j, ordering, predicted });
    }
    candidates.sort_by(|a, b| {
        a.predicted
            .total_cmp(&b.predicted)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    Ok(candidates)
}

/// Residual-variance source for the adaptive cooling factor. Consulted once
/// per iteration, and only when β > 0.
pub enum Confidence<'a> {
    /// Fixed variance; 0 reduces cooling to the geometric schedule.
    Constant(f64),
    /// Sample variance of h residuals redrawn (with replacement) from a
    /// holdout residual stream each iteration: stochastic but stationary.
    Resampled { residuals: &'a [f64], h: usize },
    /// Every `every` iterations, price the incumbent best ordering with the
    /// true cost function and window the genuine residuals.
    SpotCheck {
        truth: Box<dyn FnMut(&VarOrder) -> Result<f64, MlError> + 'a>,
        every: usize,
        h: usize,
        window: VecDeque<f64>,
    },
}

impl Confidence<'_> {
    fn window_var<R: Rng + ?Sized>(
        &mut self,
        iteration: usize,
        best: &VarOrder,
        best_predicted: f64,
        rng: &mut R,
    ) -> Result<f64, MlError> {
        match self {
            Confidence::Constant(v) => Ok(*v),
            Confidence::Resampled { residuals, h } => {
                if residuals.is_empty() {
                    return Err(MlError::Input(
                        "no residuals to resample; use beta 0 or spot checks".into(),
                    ));
                }
                let draws: Vec<f64> = (0..*h)
                    .map(|_| residuals[rng.random_range(0..residuals.len())])
                    .collect();
                Ok(sample_variance(&draws))
            }
            Confidence::SpotCheck { truth, every, h, window } => {
                if iteration % *every == 0 {
                    let observed = truth(best)?;
                    window.push_back(observed - best_predicted);
                    while window.len() > *h {
                        window.pop_front();
                    }
                }
                if window.len() < 2 {
                    return Ok(0.0);
                }
                let values: Vec<f64> = window.iter().copied().collect();
                Ok(sample_variance(&values))
            }
        }
    }
}

/// One iteration of the chain as recorded in the trace. The hash is of the
/// pre-move ordering; `temperature` is the value used for acceptance at
/// this iteration, before cooling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub ordering_hash: u64,
    /// Swapped positions (1-based, i < j) of the proposed move.
    pub candidate: (usize, usize),
    pub delta_e: f64,
    pub temperature: f64,
    pub accepted: bool,
    /// Predicted cost of the proposed ordering.
    pub predicted_cost: f64,
    /// Best predicted cost seen up to and including this iteration.
    pub best_cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SaTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_ordering: VarOrder,
    /// Predicted (transformed) cost of `best_ordering`.
    pub predicted_cost: f64,
    pub trace: SaTrace,
    /// Cost-field calls made by the chain, σ₀ included; temperature
    /// calibration probes are not counted. Bounded by K·q + 1.
    pub evaluations: u64,
}

/// FNV-1a (64-bit) over the little-endian bytes of the one-based ordering.
pub fn ordering_hash(order: &VarOrder) -> u64 {
    fnv1a64(order.to_one_based().iter().flat_map(|&p| (p as u32).to_le_bytes()))
}

fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

struct CountingCost<'a, C: ?Sized> {
    inner: &'a C,
    calls: Cell<u64>,
}

impl<C: OrderingCost + ?Sized> OrderingCost for CountingCost<'_, C> {
    fn cost(&self, order: &VarOrder) -> Result<f64, MlError> {
        self.calls.set(self.calls.get() + 1);
        self.inner.cost(order)
    }
}

/// Runs the annealer against an arbitrary cost field; `optimize` is the
/// model-backed entry point. `confidence` is consulted only when β > 0.
pub fn optimize_with<C: OrderingCost + ?Sized>(
    n: usize,
    cost: &C,
    mut confidence: Confidence<'_>,
    cfg: &SaConfig,
) -> Result<OptimizeResult, MlError> {
    cfg.validate()?;
    if n < 2 {
        return Err(MlError::Input(format!(
            "ordering search needs at least 2 variables, got {n}"
        )));
    }

    let counter = CountingCost { inner: cost, calls: Cell::new(0) };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut current = VarOrder::random_with(&mut rng, n);
    let mut current_cost = counter.cost(&current)?;

    let mut t = match cfg.t0 {
        Some(t0) => t0,
        None => {
            let probes: Vec<f64> = (0..CALIBRATION_DRAWS)
                .map(|_| cost.cost(&VarOrder::random_with(&mut rng, n)))
                .collect::<Result<_, _>>()?;
            sample_variance(&probes).sqrt().max(MIN_T0)
        }
    };

    let mut best = current.clone();
    let mut best_cost = current_cost;
    let q = cfg.pool.unwrap_or_else(|| 32.min(n * (n - 1) / 2));
    let mut records = Vec::with_capacity(cfg.iterations);

    for iteration in 1..=cfg.iterations {
        let candidates = guided_neighbors(&current, &counter, q, &mut rng)?;
        let chosen = if cfg.epsilon_explore > 0.0 && rng.random::<f64>() < cfg.epsilon_explore {
            &candidates[rng.random_range(0..candidates.len())]
        } else {
            &candidates[0]
        };

        let delta_e = chosen.predicted - current_cost;
        let p = accept_probability(delta_e, t)?;
        let accepted = if p >= 1.0 { true } else { rng.random::<f64>() < p };

        let pre_move_hash = ordering_hash(&current);
        if accepted {
            current = chosen.ordering.clone();
            current_cost = chosen.predicted;
            if current_cost < best_cost {
                best_cost = current_cost;
                best = current.clone();
            }
        }

        records.push(TraceRecord {
            iteration,
            ordering_hash: pre_move_hash,
            candidate: (chosen.i, chosen.j),
            delta_e,
            temperature: t,
            accepted,
            predicted_cost: chosen.predicted,
            best_cost,
        });

        let window_var = if cfg.beta > 0.0 {
            confidence.window_var(iteration, &best, best_cost, &mut rng)?
        } else {
            0.0
        };
        t = adaptive_cool(t, cfg.alpha, cfg.beta, window_var)?;
    }

    Ok(OptimizeResult {
        best_ordering: best,
        predicted_cost: best_cost,
        trace: SaTrace { records },
        evaluations: counter.calls.get(),
    })
}

/// Searches for a low-predicted-cost ordering of `system`. The residual
/// source for adaptive cooling is the model's validation residuals,
/// resampled each iteration, unless `cfg.spot_check_every` switches to
/// genuine residuals from real solver runs on the incumbent best.
pub fn optimize(
    system: &BoolSystem,
    model: &GbtModel,
    stats: &ResidualStats,
    cfg: &SaConfig,
) -> Result<OptimizeResult, MlError> {
    let cost = SpectrumCost::new(model, system)?;
    let confidence = match cfg.spot_check_every {
        Some(every) => Confidence::SpotCheck {
            truth: Box::new(move |order: &VarOrder| {
                let result = solve_with_ordering(system, order, DEFAULT_CAP)?;
                Ok(model.target_transform.apply(result.cost.node_count as f64))
            }),
            every,
            h: cfg.h,
            window: VecDeque::new(),
        },
        None => Confidence::Resampled { residuals: &stats.residuals, h: cfg.h },
    };
    optimize_with(system.n(), &cost, confidence, cfg)
}
