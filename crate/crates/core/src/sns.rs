//! The social-network simulator: per-feature sDNA weights drive homophily
//! and preferential attachment, and a seeded greedy loop forms a network
//! under an edge budget.
//!
//! A pair's score combines three terms. The homophily term rewards feature
//! similarity, the preferential term rewards attaching to currently
//! high-degree nodes (gated by the pair's feature values), and a small
//! uniform noise term breaks ties between otherwise identical pairs:
//!
//! ```text
//! score(i, j) = sum_f hdna_f * (1 - |x_if - x_jf|)
//!             + sum_f pdna_f * (x_if * dhat_j + x_jf * dhat_i) / 2
//!             + noise_ij
//! ```
//!
//! with `dhat = degree / max(1, current max degree)`. Edges are placed one
//! at a time against *current* degrees, so preferential attachment compounds
//! as the network grows.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FeatureTable, Graph};
use crate::tpe::{Dimension, SearchSpace};

/// Per-feature homophily (`hdna`) and preferential-attachment (`pdna`)
/// weights, each in [-1, 1]. This is the optimizer's search point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocialDna {
    active_features: Vec<String>,
    hdna: Vec<f64>,
    pdna: Vec<f64>,
}

impl SocialDna {
    pub fn new(active_features: Vec<String>, hdna: Vec<f64>, pdna: Vec<f64>) -> Result<Self> {
        if hdna.len() != active_features.len() || pdna.len() != active_features.len() {
            return Err(Error::Contract(format!(
                "sDNA dimension mismatch: {} features, {} hdna, {} pdna",
                active_features.len(),
                hdna.len(),
                pdna.len()
            )));
        }
        if hdna.iter().chain(&pdna).any(|w| !(-1.0..=1.0).contains(w)) {
            return Err(Error::Contract("sDNA weights must lie in [-1, 1]".into()));
        }
        Ok(Self {
            active_features,
            hdna,
            pdna,
        })
    }

    /// Decodes an optimizer point laid out as all hdna weights followed by
    /// all pdna weights, in feature order.
    pub fn from_point(active_features: Vec<String>, point: &[f64]) -> Result<Self> {
        let f = active_features.len();
        if point.len() != 2 * f {
            return Err(Error::Contract(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                2 * f
            )));
        }
        Self::new(
            active_features,
            point[..f].to_vec(),
            point[f..].to_vec(),
        )
    }

    /// The `[-1, 1]^(2F)` box this sDNA lives in, hdna dims first.
    pub fn search_space(active_features: &[String]) -> Result<SearchSpace> {
        let mut dims = Vec::with_capacity(2 * active_features.len());
        for name in active_features {
            dims.push(Dimension::new(format!("hdna {name}"), -1.0, 1.0)?);
        }
        for name in active_features {
            dims.push(Dimension::new(format!("pdna {name}"), -1.0, 1.0)?);
        }
        SearchSpace::new(dims)
    }

    pub fn active_features(&self) -> &[String] {
        &self.active_features
    }

    pub fn hdna(&self) -> &[f64] {
        &self.hdna
    }

    pub fn pdna(&self) -> &[f64] {
        &self.pdna
    }
}

/// Network-formation settings. `edge_budget` is the simulated edge count,
/// normally set to the target network's edge count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationParams {
    pub encounter_rate: u32,
    pub random_interference: f64,
    pub formation_seed: u64,
    pub edge_budget: usize,
}

impl SimulationParams {
    pub fn new(edge_budget: usize) -> Self {
        Self {
            encounter_rate: 1,
            random_interference: 0.001,
            formation_seed: 50,
            edge_budget,
        }
    }

    /// Non-fatal configuration concerns the caller should surface.
    pub fn warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.random_interference > 0.01 {
            warnings.push(format!(
                "random_interference {} is large; it should stay well below the score scale",
                self.random_interference
            ));
        }
        if self.encounter_rate > 1 {
            warnings.push(format!(
                "encounter_rate {} collapses to 1 on a simple graph",
                self.encounter_rate
            ));
        }
        warnings
    }

    fn validate(&self, pair_count: usize) -> Result<()> {
        if self.edge_budget < 1 {
            return Err(Error::Config("edge_budget must be at least 1".into()));
        }
        if self.edge_budget > pair_count {
            return Err(Error::Config(format!(
                "edge_budget {} exceeds the {} available node pairs",
                self.edge_budget, pair_count
            )));
        }
        if self.random_interference < 0.0 {
            return Err(Error::Config(
                "random_interference must be nonnegative".into(),
            ));
        }
        if self.encounter_rate < 1 {
            return Err(Error::Config("encounter_rate must be at least 1".into()));
        }
        Ok(())
    }
}

/// Similarity of two nodes on one feature: `1 - |x_if - x_jf|`. Expects a
/// crisp-normalized (complete, [0, 1]-valued) table.
pub fn feature_similarity(ft: &FeatureTable, i: usize, j: usize, feature: usize) -> f64 {
    let xi = ft.value(i, feature).expect("crisp-normalized table");
    let xj = ft.value(j, feature).expect("crisp-normalized table");
    1.0 - (xi - xj).abs()
}

/// Link score for one node pair under the current degree map; see the module
/// docs for the formula. `noise` is this pair's pre-drawn interference term.
pub fn pair_score(
    ft: &FeatureTable,
    i: usize,
    j: usize,
    dna: &SocialDna,
    degrees: &[usize],
    noise: f64,
) -> Result<f64> {
    let max_degree = degrees.iter().copied().max().unwrap_or(0).max(1) as f64;
    let dhat_i = degrees[i] as f64 / max_degree;
    let dhat_j = degrees[j] as f64 / max_degree;
    let mut score = noise;
    for (slot, name) in dna.active_features.iter().enumerate() {
        let f = ft
            .feature_index(name)
            .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
        let xi = ft.value(i, f).expect("crisp-normalized table");
        let xj = ft.value(j, f).expect("crisp-normalized table");
        score += dna.hdna[slot] * (1.0 - (xi - xj).abs());
        score += dna.pdna[slot] * (xi * dhat_j + xj * dhat_i) / 2.0;
    }
    Ok(score)
}

/// Greedily forms a network with exactly `edge_budget` edges.
///
/// All unordered pairs are enumerated once (the encounter rate collapses to
/// one on a simple graph) and each receives a noise draw from a RNG seeded
/// with `formation_seed`, in pair-index order. Edges are then added one at a
/// time: the highest-scoring non-edge under *current* degrees wins, degrees
/// update, and scoring repeats. Identical inputs produce identical networks.
pub fn form_network(ft: &FeatureTable, dna: &SocialDna, params: &SimulationParams) -> Result<Graph> {
    let n = ft.node_count();
    let pair_count = n * (n - 1) / 2;
    params.validate(pair_count)?;

    let active: Vec<usize> = dna
        .active_features
        .iter()
        .map(|name| {
            ft.feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))
        })
        .collect::<Result<_>>()?;
    let cols = ft.dense_columns(&active)?;

    // Static per-pair terms: homophily sum and the pair list itself.
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(pair_count);
    let mut homophily: Vec<f64> = Vec::with_capacity(pair_count);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut h = 0.0;
            for (slot, col) in cols.iter().enumerate() {
                h += dna.hdna[slot] * (1.0 - (col[i] - col[j]).abs());
            }
            pairs.push((i, j));
            homophily.push(h);
        }
    }
    // Per-node preferential gate: a_i = sum_f pdna_f * x_if, so the dynamic
    // term is (a_i * dhat_j + a_j * dhat_i) / 2.
    let gate: Vec<f64> = (0..n)
        .map(|i| {
            cols.iter()
                .zip(dna.pdna())
                .map(|(col, p)| p * col[i])
                .sum()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.formation_seed);
    let noise: Vec<f64> = (0..pair_count)
        .map(|_| rng.random::<f64>() * params.random_interference)
        .collect();

    let mut degrees = vec![0usize; n];
    let mut taken = vec![false; pair_count];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(params.edge_budget);
    for _ in 0..params.edge_budget {
        let max_degree = degrees.iter().copied().max().unwrap_or(0).max(1) as f64;
        let mut best: Option<(f64, usize)> = None;
        for (p, &(i, j)) in pairs.iter().enumerate() {
            if taken[p] {
                continue;
            }
            let dhat_i = degrees[i] as f64 / max_degree;
            let dhat_j = degrees[j] as f64 / max_degree;
            let score = homophily[p] + (gate[i] * dhat_j + gate[j] * dhat_i) / 2.0 + noise[p];
            if best.map_or(true, |(s, _)| score > s) {
                best = Some((score, p));
            }
        }
        let (_, p) = best.expect("budget <= pair count leaves a free pair");
        taken[p] = true;
        let (i, j) = pairs[p];
        degrees[i] += 1;
        degrees[j] += 1;
        edges.push((i, j));
    }
    Graph::new(ft.node_ids().to_vec(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FeatureMeta;

    fn binary_table(bits: &[f64]) -> FeatureTable {
        FeatureTable::new(
            (0..bits.len()).map(|i| format!("n{i}")).collect(),
            vec![FeatureMeta::binary("flag")],
            bits.iter().map(|&b| Some(b)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn similarity_trivial_cases() {
        let ft = FeatureTable::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![FeatureMeta::numeric("x")],
            vec![Some(0.5), Some(0.5), Some(0.25), Some(0.75)],
        )
        .unwrap();
        assert_eq!(feature_similarity(&ft, 0, 1, 0), 1.0);
        assert_eq!(feature_similarity(&ft, 2, 3, 0), 0.5);
        let extremes = binary_table(&[0.0, 1.0]);
        assert_eq!(feature_similarity(&extremes, 0, 1, 0), 0.0);
    }

    #[test]
    fn pair_score_homophily_only() {
        let ft = binary_table(&[0.0, 0.0, 1.0]);
        let dna = SocialDna::new(vec!["flag".into()], vec![1.0], vec![0.0]).unwrap();
        let degrees = vec![0, 0, 0];
        let same = pair_score(&ft, 0, 1, &dna, &degrees, 0.0004).unwrap();
        let cross = pair_score(&ft, 0, 2, &dna, &degrees, 0.0002).unwrap();
        assert!((same - 1.0004).abs() < 1e-12);
        assert!((cross - 0.0002).abs() < 1e-12);
    }

    #[test]
    fn pair_score_zero_weights_is_noise_only() {
        let ft = binary_table(&[0.0, 1.0]);
        let dna = SocialDna::new(vec!["flag".into()], vec![0.0], vec![0.0]).unwrap();
        let score = pair_score(&ft, 0, 1, &dna, &[3, 1], 0.0007).unwrap();
        assert_eq!(score, 0.0007);
    }

    #[test]
    fn pair_score_negative_hdna_decreases_with_similarity() {
        let ft = FeatureTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![FeatureMeta::numeric("x")],
            vec![Some(0.0), Some(0.1), Some(0.9)],
        )
        .unwrap();
        let dna = SocialDna::new(vec!["x".into()], vec![-1.0], vec![0.0]).unwrap();
        let degrees = vec![0; 3];
        let near = pair_score(&ft, 0, 1, &dna, &degrees, 0.0).unwrap();
        let far = pair_score(&ft, 0, 2, &dna, &degrees, 0.0).unwrap();
        assert!(near < far);
    }

    #[test]
    fn dna_validation() {
        assert!(SocialDna::new(vec!["a".into()], vec![1.5], vec![0.0]).is_err());
        assert!(SocialDna::new(vec!["a".into()], vec![0.0], vec![]).is_err());
        let dna = SocialDna::from_point(vec!["a".into(), "b".into()], &[0.1, 0.2, 0.3, 0.4])
            .unwrap();
        assert_eq!(dna.hdna(), &[0.1, 0.2]);
        assert_eq!(dna.pdna(), &[0.3, 0.4]);
    }

    #[test]
    fn search_space_layout() {
        let space =
            SocialDna::search_space(&["sex".to_string(), "age".to_string()]).unwrap();
        let names: Vec<&str> = space.dims().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, vec!["hdna sex", "hdna age", "pdna sex", "pdna age"]);
        assert!(space.dims().iter().all(|d| d.lower == -1.0 && d.upper == 1.0));
    }

    #[test]
    fn budget_forces_complete_graph() {
        let ft = binary_table(&[0.0, 1.0, 0.0, 1.0]);
        let dna = SocialDna::new(vec!["flag".into()], vec![-0.5], vec![0.3]).unwrap();
        let params = SimulationParams::new(6);
        let g = form_network(&ft, &dna, &params).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(g.degree_sequence().iter().all(|&d| d == 3));
    }

    #[test]
    fn formation_is_deterministic() {
        let ft = binary_table(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        let dna = SocialDna::new(vec!["flag".into()], vec![0.7], vec![0.4]).unwrap();
        let params = SimulationParams::new(5);
        let a = form_network(&ft, &dna, &params).unwrap();
        let b = form_network(&ft, &dna, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn homophily_selects_within_class_pairs() {
        // Nodes {0,1} share class 0 and {2,3} share class 1; with hdna = 1
        // the two within-class pairs outscore every cross pair.
        let ft = binary_table(&[0.0, 0.0, 1.0, 1.0]);
        let dna = SocialDna::new(vec!["flag".into()], vec![1.0], vec![0.0]).unwrap();
        let params = SimulationParams {
            edge_budget: 2,
            ..SimulationParams::new(2)
        };
        let g = form_network(&ft, &dna, &params).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn excessive_budget_rejected() {
        let ft = binary_table(&[0.0, 1.0]);
        let dna = SocialDna::new(vec!["flag".into()], vec![1.0], vec![0.0]).unwrap();
        let params = SimulationParams::new(2); // only 1 pair exists
        assert!(matches!(
            form_network(&ft, &dna, &params),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn greedy_scores_match_pair_score_oracle() {
        // The fast path (precomputed homophily + gate) must agree with the
        // direct pair_score formula.
        let ft = FeatureTable::new(
            (0..5).map(|i| format!("n{i}")).collect(),
            vec![FeatureMeta::numeric("x"), FeatureMeta::numeric("y")],
            vec![
                Some(0.1),
                Some(0.9),
                Some(0.4),
                Some(0.2),
                Some(0.8),
                Some(0.5),
                Some(0.3),
                Some(0.7),
                Some(0.6),
                Some(0.0),
            ],
        )
        .unwrap();
        let dna = SocialDna::new(
            vec!["x".into(), "y".into()],
            vec![0.8, -0.3],
            vec![0.5, 0.2],
        )
        .unwrap();
        let degrees = vec![2, 0, 1, 3, 1];
        for i in 0..5 {
            for j in (i + 1)..5 {
                let direct = pair_score(&ft, i, j, &dna, &degrees, 0.0).unwrap();
                // Recompute via the decomposition used in form_network.
                let cols = ft.dense_columns(&[0, 1]).unwrap();
                let max_degree = *degrees.iter().max().unwrap() as f64;
                let dhat_i = degrees[i] as f64 / max_degree;
                let dhat_j = degrees[j] as f64 / max_degree;
                let h: f64 = cols
                    .iter()
                    .zip(dna.hdna())
                    .map(|(c, w)| w * (1.0 - (c[i] - c[j]).abs()))
                    .sum();
                let gate_i: f64 = cols.iter().zip(dna.pdna()).map(|(c, p)| p * c[i]).sum();
                let gate_j: f64 = cols.iter().zip(dna.pdna()).map(|(c, p)| p * c[j]).sum();
                let fast = h + (gate_i * dhat_j + gate_j * dhat_i) / 2.0;
                assert!((direct - fast).abs() < 1e-12, "pair ({i}, {j})");
            }
        }
    }

    #[test]
    fn raising_hdna_keeps_most_similar_pair_on_top() {
        let ft = FeatureTable::new(
            (0..4).map(|i| format!("n{i}")).collect(),
            vec![FeatureMeta::numeric("x")],
            vec![Some(0.50), Some(0.52), Some(0.1), Some(0.95)],
        )
        .unwrap();
        let degrees = vec![0; 4];
        let rank_of_best = |h: f64| -> usize {
            let dna = SocialDna::new(vec!["x".into()], vec![h], vec![0.0]).unwrap();
            let mut scored: Vec<(f64, (usize, usize))> = Vec::new();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    scored.push((pair_score(&ft, i, j, &dna, &degrees, 0.0).unwrap(), (i, j)));
                }
            }
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            scored.iter().position(|&(_, p)| p == (0, 1)).unwrap()
        };
        let mut last = rank_of_best(0.1);
        for h in [0.3, 0.6, 1.0] {
            let rank = rank_of_best(h);
            assert!(rank <= last, "raising hdna demoted the most-similar pair");
            last = rank;
        }
        assert_eq!(last, 0);
    }
}
