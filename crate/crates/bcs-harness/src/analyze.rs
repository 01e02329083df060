//! Spectrum-space clustering and correlation analysis of a collected
//! dataset: silhouette quality of k-means clusters, per-cluster cost
//! statistics, per-feature correlation against cost, and the inverse
//! check (cluster by cost, measure intra-cluster spectrum similarity).

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetRecord;
use crate::error::HarnessError;
use crate::stats;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub cost_mean: f64,
    /// Sample standard deviation; 0 for singleton clusters.
    pub cost_std: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: usize,
    /// None when the feature is constant across the dataset.
    pub r: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub k: usize,
    pub records: usize,
    pub silhouette_mean: f64,
    pub clusters: Vec<ClusterSummary>,
    pub feature_correlations: Vec<FeatureCorrelation>,
    /// Inverse analysis: cluster records by cost (1-D k-means) and average
    /// the pairwise Pearson correlation between member spectra within each
    /// cluster. None when no cluster has two correlatable members.
    pub cost_cluster_spectrum_correlation: Option<f64>,
}

pub fn analyze(
    records: &[DatasetRecord],
    k: usize,
    seed: u64,
) -> Result<AnalysisReport, HarnessError> {
    if records.len() < k {
        return Err(HarnessError::Input(format!(
            "{} records cannot form {k} clusters",
            records.len()
        )));
    }
    let dim = records[0].spectrum.len();
    if records.iter().any(|r| r.spectrum.len() != dim) {
        return Err(HarnessError::Input("records have mixed spectrum lengths".into()));
    }

    let points: Vec<Vec<f64>> = records.iter().map(|r| r.spectrum.as_slice().to_vec()).collect();
    let costs: Vec<f64> = records.iter().map(|r| r.target).collect();

    let km = stats::kmeans(&points, k, 50, seed)?;
    let silhouette_mean = stats::silhouette(&points, &km.labels)?;

    let mut clusters = Vec::with_capacity(k);
    for c in 0..k {
        let member_costs: Vec<f64> = km
            .labels
            .iter()
            .zip(&costs)
            .filter(|(&l, _)| l == c)
            .map(|(_, &t)| t)
            .collect();
        let (cost_mean, cost_std) = if member_costs.is_empty() {
            (0.0, 0.0)
        } else if member_costs.len() == 1 {
            (member_costs[0], 0.0)
        } else {
            (stats::mean(&member_costs), stats::sample_std(&member_costs))
        };
        clusters.push(ClusterSummary { cluster: c, size: member_costs.len(), cost_mean, cost_std });
    }

    let mut feature_correlations = Vec::with_capacity(dim);
    for f in 0..dim {
        let column: Vec<f64> = points.iter().map(|p| p[f]).collect();
        let rp = stats::pearson(&column, &costs).ok();
        feature_correlations.push(FeatureCorrelation {
            feature: f,
            r: rp.map(|v| v.0),
            p: rp.map(|v| v.1),
        });
    }

    let cost_points: Vec<Vec<f64>> = costs.iter().map(|&t| vec![t]).collect();
    let cost_km = stats::kmeans(&cost_points, k, 50, seed)?;
    let cost_cluster_spectrum_correlation = intra_cluster_spectrum_corr(&points, &cost_km.labels, k);

    Ok(AnalysisReport {
        k,
        records: records.len(),
        silhouette_mean,
        clusters,
        feature_correlations,
        cost_cluster_spectrum_correlation,
    })
}

/// Mean over clusters of the mean pairwise spectrum correlation inside the
/// cluster; pairs whose correlation is undefined (constant spectra) are
/// skipped, as are clusters with fewer than two members.
fn intra_cluster_spectrum_corr(
    points: &[Vec<f64>],
    labels: &[usize],
    k: usize,
) -> Option<f64> {
    let mut cluster_means = Vec::new();
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p)
            .collect();
        if members.len() < 2 {
            continue;
        }
        let mut sum = 0.0;
        let mut count = 0usize;
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                if let Ok(r) = stats::pearson_r(members[a], members[b]) {
                    sum += r;
                    count += 1;
                }
            }
        }
        if count > 0 {
            cluster_means.push(sum / count as f64);
        }
    }
    if cluster_means.is_empty() {
        None
    } else {
        Some(stats::mean(&cluster_means))
    }
}
