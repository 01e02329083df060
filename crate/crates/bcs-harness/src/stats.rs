//! Statistical primitives: correlation coefficients, k-means with k-means++
//! seeding, and silhouette scores. Everything is deterministic given a seed
//! and pinned against reference-library values in the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::HarnessError;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance, divisor n-1.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

/// Population standard deviation, divisor n.
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Pearson r without a p-value; errors when either side has zero variance.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, HarnessError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(HarnessError::Input(format!(
            "pearson needs two equal-length series of at least 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(HarnessError::Input("pearson of a zero-variance series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson r with the two-sided p-value from the exact t-distribution of r
/// under the null (n-2 degrees of freedom). Needs n >= 3 for the test.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64), HarnessError> {
    let r = pearson_r(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(HarnessError::Input("pearson p-value needs at least 3 points".into()));
    }
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return Ok((r, 0.0));
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok((r, p))
}

/// Ranks with ties averaged, 1-based like the usual convention.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut at = 0;
    while at < order.len() {
        let mut end = at + 1;
        while end < order.len() && values[order[end]] == values[order[at]] {
            end += 1;
        }
        // positions at..end hold equal values; each gets the mean rank
        let rank = (at + 1 + end) as f64 / 2.0;
        for &idx in &order[at..end] {
            ranks[idx] = rank;
        }
        at = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, HarnessError> {
    pearson_r(&average_ranks(x), &average_ranks(y))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    /// Sum of squared distances to assigned centers.
    pub inertia: f64,
}

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` seeded
/// starts. Deterministic given the seed; ties in assignment go to the
/// lowest cluster index.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<KMeansResult, HarnessError> {
    if k == 0 || restarts == 0 {
        return Err(HarnessError::Input("k and restarts must be positive".into()));
    }
    if points.len() < k {
        return Err(HarnessError::Input(format!(
            "{} points cannot form {k} clusters",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(HarnessError::Input("points have mixed dimensions".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts {
        let run = lloyd(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> KMeansResult {
    let mut centers = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; points.len()];
    for _round in 0..300 {
        // assignment step
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = squared_distance(p, center);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if labels[i] != best_c {
                labels[i] = best_c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        // update step
        let mut sums = vec![vec![0.0; points[0].len()]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster on the point farthest from its
                // assigned center (lowest index on ties)
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        squared_distance(&points[a], &centers[labels[a]])
                            .total_cmp(&squared_distance(&points[b], &centers[labels[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("points nonempty");
                centers[c] = points[far].clone();
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| squared_distance(p, &centers[l]))
        .sum();
    KMeansResult { labels, centers, inertia }
}

/// k-means++: first center uniform, each next drawn with probability
/// proportional to the squared distance from the nearest chosen center.
fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut draw = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if draw < w {
                    pick = i;
                    break;
                }
                draw -= w;
            }
            pick
        } else {
            // all remaining points duplicate a center
            rng.random_range(0..points.len())
        };
        centers.push(points[next].clone());
        for (w, p) in d2.iter_mut().zip(points) {
            let d = squared_distance(p, centers.last().unwrap());
            if d < *w {
                *w = d;
            }
        }
    }
    centers
}

/// Mean silhouette coefficient with Euclidean distances. Points in
/// singleton clusters score 0, the scikit-learn convention.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Result<f64, HarnessError> {
    if points.len() != labels.len() || points.is_empty() {
        return Err(HarnessError::Input("silhouette needs aligned nonempty inputs".into()));
    }
    let k = labels.iter().max().unwrap() + 1;
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(HarnessError::Input("silhouette needs at least 2 clusters".into()));
    }

    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let own = labels[i];
        if sizes[own] == 1 {
            continue; // s(i) = 0
        }
        let mut sums = vec![0.0; k];
        for (j, q) in points.iter().enumerate() {
            if i != j {
                sums[labels[j]] += distance(p, q);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    Ok(total / points.len() as f64)
}
