//! Unsupervised filter metrics (variance, multicollinearity, Laplacian score,
//! mutual information), direction normalization, and the combined feature
//! ranking with its named metric combinations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::FeatureTable;

/// Which way a metric's raw score points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    HigherIsRelevant,
    LowerIsRelevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Variance,
    Multicollinearity,
    Laplacian,
    MutualInfo,
}

impl std::fmt::Display for MetricName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MetricName::Variance => "variance",
            MetricName::Multicollinearity => "multicollinearity",
            MetricName::Laplacian => "laplacian",
            MetricName::MutualInfo => "mutual_info",
        };
        f.write_str(s)
    }
}

/// Per-feature raw scores for one metric plus the direction-normalized
/// relevance in [0, 1] (1 = most relevant under the metric's orientation).
#[derive(Debug, Clone, Serialize)]
pub struct MetricScores {
    pub metric: MetricName,
    pub orientation: Orientation,
    pub feature_names: Vec<String>,
    pub raw: Vec<f64>,
    pub relevance: Vec<f64>,
    /// Flags features whose raw score was undefined (e.g. constant columns
    /// under the Laplacian score); they are assigned the worst raw value.
    pub degenerate: Vec<bool>,
}

/// Flips direction and min-max scales raw scores into relevance. When all
/// raw scores are equal every feature gets relevance 0.5.
fn finish(
    metric: MetricName,
    orientation: Orientation,
    feature_names: Vec<String>,
    raw: Vec<f64>,
    degenerate: Vec<bool>,
) -> MetricScores {
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let relevance = raw
        .iter()
        .map(|&r| {
            if span == 0.0 {
                0.5
            } else {
                match orientation {
                    Orientation::HigherIsRelevant => (r - min) / span,
                    Orientation::LowerIsRelevant => (max - r) / span,
                }
            }
        })
        .collect();
    MetricScores {
        metric,
        orientation,
        feature_names,
        raw,
        relevance,
        degenerate,
    }
}

fn require_complete(ft: &FeatureTable) -> Result<()> {
    if !ft.is_complete() {
        return Err(Error::Cleaning(
            "filter metrics require a table with no missing values".into(),
        ));
    }
    Ok(())
}

/// Population variance per feature; higher is more relevant.
pub fn variance_scores(ft: &FeatureTable) -> Result<MetricScores> {
    require_complete(ft)?;
    let n = ft.node_count() as f64;
    let raw: Vec<f64> = (0..ft.feature_count())
        .map(|f| {
            let col = ft.dense_column(f).expect("complete table");
            let mean = col.iter().sum::<f64>() / n;
            col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
        })
        .collect();
    let degenerate = vec![false; raw.len()];
    Ok(finish(
        MetricName::Variance,
        Orientation::HigherIsRelevant,
        ft.feature_names(),
        raw,
        degenerate,
    ))
}

/// Population Pearson correlation. Either side constant yields 0.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx.sqrt() * vy.sqrt())
    }
}

/// `raw(f) = 1 - max over g != f of |pearson(f, g)|`; higher is more
/// relevant. A single-feature table scores 1 (no collinearity possible).
pub fn multicollinearity_scores(ft: &FeatureTable) -> Result<MetricScores> {
    require_complete(ft)?;
    let fcount = ft.feature_count();
    let cols: Vec<Vec<f64>> = (0..fcount)
        .map(|f| ft.dense_column(f).expect("complete table"))
        .collect();
    let raw: Vec<f64> = (0..fcount)
        .map(|f| {
            let worst = (0..fcount)
                .filter(|&g| g != f)
                .map(|g| pearson(&cols[f], &cols[g]).abs())
                .fold(0.0f64, f64::max);
            1.0 - worst
        })
        .collect();
    let degenerate = vec![false; raw.len()];
    Ok(finish(
        MetricName::Multicollinearity,
        Orientation::HigherIsRelevant,
        ft.feature_names(),
        raw,
        degenerate,
    ))
}

/// Symmetrized k-nearest-neighbor affinity matrix over node rows: Gaussian
/// weights `exp(-dist^2 / bandwidth)` on kNN edges, zero elsewhere. Distance
/// ties break toward the smaller node index.
fn knn_affinity(rows: &[Vec<f64>], k: usize, bandwidth: Option<f64>) -> (Vec<Vec<f64>>, f64) {
    let n = rows.len();
    let mut dist2 = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            dist2[i][j] = d2;
            dist2[j][i] = d2;
        }
    }
    let mut neighbor_sets: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut knn_d2_sum = 0.0;
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist2[i][a].total_cmp(&dist2[i][b]).then(a.cmp(&b)));
        order.truncate(k);
        knn_d2_sum += order.iter().map(|&j| dist2[i][j]).sum::<f64>();
        neighbor_sets.push(order);
    }
    let bw = bandwidth.unwrap_or_else(|| {
        let mean = knn_d2_sum / (n * k) as f64;
        if mean > 0.0 {
            mean
        } else {
            1.0
        }
    });
    let mut w = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for &j in &neighbor_sets[i] {
            let weight = (-dist2[i][j] / bw).exp();
            w[i][j] = weight;
            w[j][i] = weight;
        }
    }
    (w, bw)
}

/// Laplacian score per feature; lower is more relevant. Builds a kNN graph
/// over node rows (Euclidean distance across all features), weights the
/// edges with a Gaussian kernel, and scores each column by how well it
/// respects that local structure:
///
/// `raw = (f~' L f~) / (f~' D f~)` with `f~ = f - (f' D 1 / 1' D 1) 1`,
/// `D` the diagonal degree matrix of the affinity and `L = D - W`.
///
/// Constant features make the denominator vanish; they are flagged
/// degenerate and assigned the worst (largest) observed score. `bandwidth`
/// defaults to the mean squared kNN distance.
pub fn laplacian_scores(
    ft: &FeatureTable,
    k: usize,
    bandwidth: Option<f64>,
) -> Result<MetricScores> {
    require_complete(ft)?;
    let n = ft.node_count();
    if k < 1 || n <= k {
        return Err(Error::Config(format!(
            "laplacian score requires node count > k >= 1, got n = {n}, k = {k}"
        )));
    }
    if let Some(bw) = bandwidth {
        if bw <= 0.0 {
            return Err(Error::Config(format!("bandwidth must be positive, got {bw}")));
        }
    }
    let fcount = ft.feature_count();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..fcount)
                .map(|f| ft.value(i, f).expect("complete table"))
                .collect()
        })
        .collect();
    let (w, _) = knn_affinity(&rows, k, bandwidth);
    let degrees: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let total_degree: f64 = degrees.iter().sum();

    let mut raw = vec![0.0f64; fcount];
    let mut degenerate = vec![false; fcount];
    for f in 0..fcount {
        let col = ft.dense_column(f).expect("complete table");
        let weighted_mean =
            col.iter().zip(&degrees).map(|(x, d)| x * d).sum::<f64>() / total_degree;
        let centered: Vec<f64> = col.iter().map(|x| x - weighted_mean).collect();
        let denom: f64 = centered.iter().zip(&degrees).map(|(x, d)| x * x * d).sum();
        if denom <= 1e-12 {
            degenerate[f] = true;
            continue;
        }
        // f~' L f~ = f~' D f~ - f~' W f~
        let mut quad_w = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad_w += w[i][j] * centered[i] * centered[j];
            }
        }
        raw[f] = (denom - quad_w) / denom;
    }
    let worst = raw
        .iter()
        .zip(&degenerate)
        .filter(|(_, &d)| !d)
        .map(|(&r, _)| r)
        .fold(f64::NEG_INFINITY, f64::max);
    for f in 0..fcount {
        if degenerate[f] {
            raw[f] = if worst.is_finite() { worst } else { 0.0 };
        }
    }
    Ok(finish(
        MetricName::Laplacian,
        Orientation::LowerIsRelevant,
        ft.feature_names(),
        raw,
        degenerate,
    ))
}

fn bin_of(x: f64, bins: usize) -> usize {
    let clamped = x.clamp(0.0, 1.0);
    ((clamped * bins as f64) as usize).min(bins - 1)
}

/// Mutual information between two columns discretized into `bins` equal-width
/// bins over [0, 1], in bits.
pub fn binned_mutual_information(x: &[f64], y: &[f64], bins: usize) -> f64 {
    let n = x.len();
    let mut joint = vec![0.0f64; bins * bins];
    let mut px = vec![0.0f64; bins];
    let mut py = vec![0.0f64; bins];
    for (&a, &b) in x.iter().zip(y) {
        let (ba, bb) = (bin_of(a, bins), bin_of(b, bins));
        joint[ba * bins + bb] += 1.0;
        px[ba] += 1.0;
        py[bb] += 1.0;
    }
    let n = n as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let pab = joint[a * bins + b] / n;
            if pab > 0.0 {
                mi += pab * (pab / ((px[a] / n) * (py[b] / n))).log2();
            }
        }
    }
    mi
}

/// `raw(f)` = mean pairwise mutual information between `f` and every other
/// feature; lower is more relevant (0 means no shared information). A
/// single-feature table scores 0.
pub fn mutual_info_scores(ft: &FeatureTable, bins: usize) -> Result<MetricScores> {
    require_complete(ft)?;
    if bins < 1 {
        return Err(Error::Config("bins must be at least 1".into()));
    }
    let fcount = ft.feature_count();
    let cols: Vec<Vec<f64>> = (0..fcount)
        .map(|f| ft.dense_column(f).expect("complete table"))
        .collect();
    let raw: Vec<f64> = (0..fcount)
        .map(|f| {
            if fcount < 2 {
                return 0.0;
            }
            let total: f64 = (0..fcount)
                .filter(|&g| g != f)
                .map(|g| binned_mutual_information(&cols[f], &cols[g], bins))
                .sum();
            total / (fcount - 1) as f64
        })
        .collect();
    let degenerate = vec![false; raw.len()];
    Ok(finish(
        MetricName::MutualInfo,
        Orientation::LowerIsRelevant,
        ft.feature_names(),
        raw,
        degenerate,
    ))
}

/// One feature's position in the combined ranking.
#[derive(Debug, Clone, Serialize)]
pub struct RankedFeature {
    pub name: String,
    /// Combined final score: `s_sum * (3*R1 + 2*R2 + R3) / 3`.
    pub final_score: f64,
    /// Sum of relevance values across the combined metrics.
    pub s_sum: f64,
    /// How many metrics ranked this feature 1st, 2nd, and 3rd.
    pub rank_counts: [usize; 3],
}

/// Ordered feature ranking (best first) with per-feature provenance.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureRanking {
    pub frm_name: String,
    pub features: Vec<RankedFeature>,
}

impl FeatureRanking {
    pub fn ordered_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }
}

fn frm_name_for(metrics: &[MetricName]) -> String {
    use MetricName::*;
    match metrics {
        [Variance] => "FR-Var".into(),
        [Multicollinearity] => "FR-MultiCol".into(),
        [Laplacian] => "FR-Lap".into(),
        [MutualInfo] => "FR-MutualInfo".into(),
        [Variance, Multicollinearity] => "FR-Var-Col".into(),
        [Multicollinearity, Laplacian] => "FR-Col-Lap".into(),
        [Variance, Multicollinearity, Laplacian] => "FR-Var-Col-Lap".into(),
        [Variance, Multicollinearity, Laplacian, MutualInfo] => "FR-All".into(),
        other => {
            let parts: Vec<String> = other.iter().map(|m| m.to_string()).collect();
            format!("FR-custom({})", parts.join("+"))
        }
    }
}

/// Combines metric scores into a single ranking. For each feature,
/// `s_sum` adds its relevance across metrics and `R_k` counts the metrics
/// ranking it at position k (ties toward the lower feature index); the
/// final score is `s_sum * (3*R1 + 2*R2 + R3) / 3`, sorted descending with
/// ties broken by `s_sum`, then by original feature index.
pub fn combined_ranking(metrics: &[MetricScores]) -> Result<FeatureRanking> {
    let first = metrics
        .first()
        .ok_or_else(|| Error::Contract("combined ranking needs at least one metric".into()))?;
    let names = &first.feature_names;
    for m in metrics {
        if &m.feature_names != names {
            return Err(Error::Contract(format!(
                "metric {} scores a different feature set",
                m.metric
            )));
        }
    }
    let fcount = names.len();
    let mut s_sum = vec![0.0f64; fcount];
    let mut rank_counts = vec![[0usize; 3]; fcount];
    for m in metrics {
        for (f, &rel) in m.relevance.iter().enumerate() {
            s_sum[f] += rel;
        }
        let mut order: Vec<usize> = (0..fcount).collect();
        order.sort_by(|&a, &b| m.relevance[b].total_cmp(&m.relevance[a]).then(a.cmp(&b)));
        for (pos, &f) in order.iter().take(3).enumerate() {
            rank_counts[f][pos] += 1;
        }
    }
    let final_scores: Vec<f64> = (0..fcount)
        .map(|f| {
            let [r1, r2, r3] = rank_counts[f];
            s_sum[f] * (3 * r1 + 2 * r2 + r3) as f64 / 3.0
        })
        .collect();
    let mut order: Vec<usize> = (0..fcount).collect();
    order.sort_by(|&a, &b| {
        final_scores[b]
            .total_cmp(&final_scores[a])
            .then(s_sum[b].total_cmp(&s_sum[a]))
            .then(a.cmp(&b))
    });
    let features = order
        .into_iter()
        .map(|f| RankedFeature {
            name: names[f].clone(),
            final_score: final_scores[f],
            s_sum: s_sum[f],
            rank_counts: rank_counts[f],
        })
        .collect();
    Ok(FeatureRanking {
        frm_name: frm_name_for(&metrics.iter().map(|m| m.metric).collect::<Vec<_>>()),
        features,
    })
}

/// Named metric combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frm {
    Var,
    MultiCol,
    Lap,
    MutualInfo,
    VarCol,
    ColLap,
    VarColLap,
    All,
}

impl Frm {
    pub const ALL: [Frm; 8] = [
        Frm::Var,
        Frm::MultiCol,
        Frm::Lap,
        Frm::MutualInfo,
        Frm::VarCol,
        Frm::ColLap,
        Frm::VarColLap,
        Frm::All,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Frm::Var => "FR-Var",
            Frm::MultiCol => "FR-MultiCol",
            Frm::Lap => "FR-Lap",
            Frm::MutualInfo => "FR-MutualInfo",
            Frm::VarCol => "FR-Var-Col",
            Frm::ColLap => "FR-Col-Lap",
            Frm::VarColLap => "FR-Var-Col-Lap",
            Frm::All => "FR-All",
        }
    }

    pub fn parse(s: &str) -> Result<Frm> {
        Frm::ALL
            .iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| {
                let known: Vec<&str> = Frm::ALL.iter().map(Frm::name).collect();
                Error::Config(format!(
                    "unknown feature ranking method {s:?}; known: {}",
                    known.join(", ")
                ))
            })
    }

    pub fn metrics(&self) -> &'static [MetricName] {
        use MetricName::*;
        match self {
            Frm::Var => &[Variance],
            Frm::MultiCol => &[Multicollinearity],
            Frm::Lap => &[Laplacian],
            Frm::MutualInfo => &[MutualInfo],
            Frm::VarCol => &[Variance, Multicollinearity],
            Frm::ColLap => &[Multicollinearity, Laplacian],
            Frm::VarColLap => &[Variance, Multicollinearity, Laplacian],
            Frm::All => &[Variance, Multicollinearity, Laplacian, MutualInfo],
        }
    }
}

impl std::fmt::Display for Frm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Tunables for the metrics that need them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterParams {
    /// kNN neighbor count for the Laplacian score (capped at n - 1).
    pub knn: usize,
    /// Gaussian kernel bandwidth; defaults to the mean squared kNN distance.
    pub bandwidth: Option<f64>,
    /// Equal-width bin count for mutual information.
    pub mi_bins: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            knn: 5,
            bandwidth: None,
            mi_bins: 5,
        }
    }
}

/// Scores the table under every metric in the combination and ranks.
pub fn rank_features(ft: &FeatureTable, frm: Frm, params: &FilterParams) -> Result<FeatureRanking> {
    let scores: Vec<MetricScores> = frm
        .metrics()
        .iter()
        .map(|m| match m {
            MetricName::Variance => variance_scores(ft),
            MetricName::Multicollinearity => multicollinearity_scores(ft),
            MetricName::Laplacian => {
                let k = params.knn.min(ft.node_count().saturating_sub(1)).max(1);
                laplacian_scores(ft, k, params.bandwidth)
            }
            MetricName::MutualInfo => mutual_info_scores(ft, params.mi_bins),
        })
        .collect::<Result<_>>()?;
    combined_ranking(&scores)
}
