//! Dataset cleaning: crisp normalization, one-hot encoding, null handling,
//! detached-node removal, and connected edge-limited sampling of large graphs.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FeatureKind, FeatureMeta, FeatureTable, Graph};

/// What the cleaning pipeline removed or rewrote.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CleaningReport {
    pub nodes_removed: usize,
    pub features_removed: Vec<String>,
    /// Original feature name to the derived binary indicator names.
    pub features_encoded: BTreeMap<String, Vec<String>>,
    pub null_cells_before: usize,
}

impl CleaningReport {
    /// Folds another stage's report into this one.
    pub fn absorb(&mut self, other: CleaningReport) {
        self.nodes_removed += other.nodes_removed;
        self.features_removed.extend(other.features_removed);
        self.features_encoded.extend(other.features_encoded);
        self.null_cells_before += other.null_cells_before;
    }
}

/// Min-max scales every feature into [0, 1]: `x' = (x - min) / (max - min)`.
/// Constant features map to 0 for all nodes. Requires a complete table with
/// no categorical columns (encode those first); idempotent.
pub fn normalize_crisp(ft: &FeatureTable) -> Result<FeatureTable> {
    if !ft.is_complete() {
        return Err(Error::Cleaning(format!(
            "cannot normalize a table with {} missing values",
            ft.null_count()
        )));
    }
    if let Some(meta) = ft
        .features()
        .iter()
        .find(|m| m.kind == FeatureKind::Categorical)
    {
        return Err(Error::Cleaning(format!(
            "categorical feature {:?} must be one-hot encoded before normalization",
            meta.name
        )));
    }
    let n = ft.node_count();
    let f = ft.feature_count();
    let mut values = vec![Some(0.0); n * f];
    for feat in 0..f {
        let col = ft.dense_column(feat)?;
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        for (row, &x) in col.iter().enumerate() {
            let scaled = if span == 0.0 || n == 0 {
                0.0
            } else {
                (x - min) / span
            };
            values[row * f + feat] = Some(scaled);
        }
    }
    FeatureTable::new(ft.node_ids().to_vec(), ft.features().to_vec(), values)
}

fn value_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Replaces `feature` with one binary indicator column per distinct label
/// ("`<feature> <label>`"), inserted at the original position in
/// first-appearance label order. A node's missing value stays missing across
/// all indicators. Returns the new table and the derived column names.
pub fn encode_categorical(ft: &FeatureTable, feature: &str) -> Result<(FeatureTable, Vec<String>)> {
    let slot = ft
        .feature_index(feature)
        .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
    let meta = &ft.features()[slot];
    let n = ft.node_count();

    // Label text per node, in node order; None for absent cells.
    let cell_labels: Vec<Option<String>> = (0..n)
        .map(|row| {
            ft.value(row, slot).map(|v| match (&meta.kind, &meta.labels) {
                (FeatureKind::Categorical, Some(labels)) => labels
                    .get(v as usize)
                    .cloned()
                    .unwrap_or_else(|| value_label(v)),
                _ => value_label(v),
            })
        })
        .collect();

    let mut labels: Vec<String> = Vec::new();
    for label in cell_labels.iter().flatten() {
        if !labels.iter().any(|l| l == label) {
            labels.push(label.clone());
        }
    }
    if labels.is_empty() {
        return Err(Error::Cleaning(format!(
            "feature {feature:?} has no observed values to encode"
        )));
    }

    let derived: Vec<String> = labels.iter().map(|l| format!("{feature} {l}")).collect();
    let mut features: Vec<FeatureMeta> = Vec::with_capacity(ft.feature_count() - 1 + labels.len());
    features.extend_from_slice(&ft.features()[..slot]);
    features.extend(derived.iter().map(FeatureMeta::binary));
    features.extend_from_slice(&ft.features()[slot + 1..]);

    let fw = features.len();
    let mut values: Vec<Option<f64>> = Vec::with_capacity(n * fw);
    for row in 0..n {
        for f in 0..slot {
            values.push(ft.value(row, f));
        }
        match &cell_labels[row] {
            Some(label) => {
                for l in &labels {
                    values.push(Some(if l == label { 1.0 } else { 0.0 }));
                }
            }
            None => values.extend(std::iter::repeat(None).take(labels.len())),
        }
        for f in slot + 1..ft.feature_count() {
            values.push(ft.value(row, f));
        }
    }
    let table = FeatureTable::new(ft.node_ids().to_vec(), features, values)?;
    Ok((table, derived))
}

/// Null-handling pass: features whose null fraction exceeds
/// `feature_null_fraction` are dropped first, then nodes whose null fraction
/// over the remaining features exceeds `node_null_fraction`. Any residual
/// null is an error listing the offending cells.
pub fn drop_nulls(
    ft: &FeatureTable,
    feature_null_fraction: f64,
    node_null_fraction: f64,
) -> Result<(FeatureTable, CleaningReport)> {
    for (name, t) in [
        ("feature_null_fraction", feature_null_fraction),
        ("node_null_fraction", node_null_fraction),
    ] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("{name} must be in [0, 1], got {t}")));
        }
    }
    let n = ft.node_count();
    let mut report = CleaningReport {
        null_cells_before: ft.null_count(),
        ..CleaningReport::default()
    };

    let keep_features: Vec<usize> = (0..ft.feature_count())
        .filter(|&f| {
            let nulls = ft.column(f).iter().filter(|v| v.is_none()).count();
            let frac = if n == 0 { 0.0 } else { nulls as f64 / n as f64 };
            if frac > feature_null_fraction {
                report.features_removed.push(ft.features()[f].name.clone());
                false
            } else {
                true
            }
        })
        .collect();
    let ft = ft.select_features(&keep_features)?;

    let fw = ft.feature_count();
    let keep_nodes: Vec<usize> = (0..n)
        .filter(|&row| {
            let nulls = (0..fw).filter(|&f| ft.value(row, f).is_none()).count();
            let frac = if fw == 0 { 0.0 } else { nulls as f64 / fw as f64 };
            frac <= node_null_fraction
        })
        .collect();
    report.nodes_removed = n - keep_nodes.len();
    let ft = ft.select_rows(&keep_nodes)?;

    if !ft.is_complete() {
        let mut offending = Vec::new();
        for row in 0..ft.node_count() {
            for f in 0..ft.feature_count() {
                if ft.value(row, f).is_none() {
                    offending.push(format!(
                        "({}, {})",
                        ft.node_ids()[row],
                        ft.features()[f].name
                    ));
                }
            }
        }
        return Err(Error::Cleaning(format!(
            "nulls remain after both passes: {}",
            offending.join(", ")
        )));
    }
    Ok((ft, report))
}

/// Keeps only the largest connected component (ties broken toward the
/// component containing the smallest node index); feature rows are filtered
/// in lockstep.
pub fn remove_detached(g: &Graph, ft: &FeatureTable) -> Result<(Graph, FeatureTable, CleaningReport)> {
    crate::graph::ensure_aligned(g, ft)?;
    if g.node_count() == 0 {
        return Err(Error::Cleaning("graph has no nodes".into()));
    }
    let components = g.connected_components();
    let largest = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .expect("at least one component");
    let report = CleaningReport {
        nodes_removed: g.node_count() - largest.len(),
        ..CleaningReport::default()
    };
    let graph = g.induced_subgraph(largest)?;
    let table = ft.select_rows(largest)?;
    Ok((graph, table, report))
}

/// Frontier-growth sampler settings. `edge_limit` bounds the induced edge
/// count; each processed node attaches between `growth_min` and `growth_max`
/// of its unsampled neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub edge_limit: usize,
    pub growth_min: usize,
    pub growth_max: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(edge_limit: usize, seed: u64) -> Self {
        Self {
            edge_limit,
            growth_min: 2,
            growth_max: 5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.edge_limit < 1 {
            return Err(Error::Config("edge_limit must be at least 1".into()));
        }
        if self.growth_min < 1 || self.growth_min > self.growth_max {
            return Err(Error::Config(format!(
                "growth bounds must satisfy 1 <= min <= max, got {}..{}",
                self.growth_min, self.growth_max
            )));
        }
        Ok(())
    }
}

/// Draws `k` distinct elements from `pool` uniformly, in draw order.
fn draw_without_replacement(pool: &mut Vec<usize>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let k = k.min(pool.len());
    for i in 0..k {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool[..k].to_vec()
}

/// Grows a connected sample frontier-wise from a random seed node: attach
/// `growth_min..=growth_max` of the current node's unsampled neighbors,
/// enqueue the additions, and repeat. Every edge between an added node and
/// the already-sampled set counts against `edge_limit` (induced-edge
/// semantics); the process stops before any addition that would exceed it.
///
/// The result is connected with every degree at least 1, and identical for
/// identical seeds.
pub fn sample_connected(g: &Graph, cfg: &SamplerConfig) -> Result<Graph> {
    cfg.validate()?;
    let candidates: Vec<usize> = (0..g.node_count()).filter(|&v| g.degree(v) > 0).collect();
    if candidates.is_empty() {
        return Err(Error::Structure(
            "cannot sample a graph with no edges".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = candidates[rng.random_range(0..candidates.len())];

    let mut sampled: HashSet<usize> = HashSet::from([start]);
    let mut edge_count = 0usize;
    let mut queue = VecDeque::from([start]);

    'grow: while let Some(u) = queue.pop_front() {
        let mut avail: Vec<usize> = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|v| !sampled.contains(v))
            .collect();
        if avail.is_empty() {
            continue;
        }
        let want = rng.random_range(cfg.growth_min..=cfg.growth_max);
        let chosen = draw_without_replacement(&mut avail, want, &mut rng);
        for v in chosen {
            let new_edges = g
                .neighbors(v)
                .iter()
                .filter(|w| sampled.contains(w))
                .count();
            if edge_count + new_edges > cfg.edge_limit {
                break 'grow;
            }
            sampled.insert(v);
            edge_count += new_edges;
            queue.push_back(v);
        }
        if g.neighbors(u).iter().any(|v| !sampled.contains(v)) {
            queue.push_back(u);
        }
    }

    let mut keep: Vec<usize> = sampled.into_iter().collect();
    keep.sort_unstable();
    g.induced_subgraph(&keep)
}
