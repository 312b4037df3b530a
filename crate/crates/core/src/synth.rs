//! Synthetic benchmark generators: planted-homophily instances whose edges
//! follow one informative feature, plain uniform feature tables, and G(n, m)
//! random graphs. Used by tests, benchmarks, and the `synth` CLI command.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{FeatureMeta, FeatureTable, Graph};
use crate::sns::{form_network, SimulationParams, SocialDna};

/// Settings for a planted-homophily instance.
#[derive(Debug, Clone, Copy)]
pub struct PlantedConfig {
    pub nodes: usize,
    /// Uninformative uniform noise columns alongside the informative one.
    pub noise_features: usize,
    /// Edge count of the generated target network.
    pub edges: usize,
    /// Seed for the noise feature values.
    pub seed: u64,
    pub formation_seed: u64,
    pub random_interference: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            nodes: 30,
            noise_features: 4,
            edges: 60,
            seed: 7,
            formation_seed: 50,
            random_interference: 0.001,
        }
    }
}

/// A generated instance: the target graph, the feature table, and the name
/// of the informative feature the edges were generated from.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub features: FeatureTable,
    pub informative_feature: String,
}

/// Builds a node table with one balanced binary "class" feature plus noise
/// columns, then forms the target network from the class feature alone
/// (full homophily weight, no preferential term).
pub fn planted_homophily(cfg: &PlantedConfig) -> Result<PlantedInstance> {
    if cfg.nodes < 4 {
        return Err(Error::Config("planted instance needs at least 4 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.nodes;
    let informative = "class".to_string();

    let mut features = vec![FeatureMeta::binary(&informative)];
    for k in 0..cfg.noise_features {
        features.push(FeatureMeta::numeric(format!("noise{k}")));
    }
    let mut values = Vec::with_capacity(n * features.len());
    for node in 0..n {
        values.push(Some(if node < n / 2 { 0.0 } else { 1.0 }));
        for _ in 0..cfg.noise_features {
            values.push(Some(rng.random::<f64>()));
        }
    }
    let table = FeatureTable::new(
        (0..n).map(|i| format!("n{i}")).collect(),
        features,
        values,
    )?;

    let dna = SocialDna::new(vec![informative.clone()], vec![1.0], vec![0.0])?;
    let params = SimulationParams {
        edge_budget: cfg.edges,
        formation_seed: cfg.formation_seed,
        random_interference: cfg.random_interference,
        encounter_rate: 1,
    };
    let graph = form_network(&table, &dna, &params)?;
    Ok(PlantedInstance {
        graph,
        features: table,
        informative_feature: informative,
    })
}

/// Uniform-random feature table in [0, 1], for property tests.
pub fn random_table(nodes: usize, features: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metas: Vec<FeatureMeta> = (0..features)
        .map(|f| FeatureMeta::numeric(format!("f{f}")))
        .collect();
    let values: Vec<Option<f64>> = (0..nodes * features)
        .map(|_| Some(rng.random::<f64>()))
        .collect();
    FeatureTable::new(
        (0..nodes).map(|i| format!("n{i}")).collect(),
        metas,
        values,
    )
    .expect("dimensions consistent by construction")
}

/// G(n, m): `edges` distinct pairs drawn uniformly without replacement.
pub fn random_graph(nodes: usize, edges: usize, seed: u64) -> Result<Graph> {
    let pair_count = nodes.saturating_mul(nodes.saturating_sub(1)) / 2;
    if edges > pair_count {
        return Err(Error::Config(format!(
            "cannot place {edges} edges among {pair_count} pairs"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(pair_count);
    for i in 0..nodes {
        for j in (i + 1)..nodes {
            pairs.push((i, j));
        }
    }
    for i in 0..edges {
        let j = rng.random_range(i..pairs.len());
        pairs.swap(i, j);
    }
    pairs.truncate(edges);
    Graph::new((0..nodes).map(|i| format!("n{i}")).collect(), &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_instance_has_requested_shape() {
        let cfg = PlantedConfig::default();
        let inst = planted_homophily(&cfg).unwrap();
        assert_eq!(inst.graph.node_count(), 30);
        assert_eq!(inst.graph.edge_count(), 60);
        assert_eq!(inst.features.feature_count(), 5);
        assert_eq!(inst.informative_feature, "class");
    }

    #[test]
    fn planted_edges_respect_the_class_split() {
        // With full homophily weight and tiny noise, within-class pairs
        // dominate: every edge should join nodes of the same class.
        let cfg = PlantedConfig {
            nodes: 20,
            edges: 30,
            ..PlantedConfig::default()
        };
        let inst = planted_homophily(&cfg).unwrap();
        let class = inst.features.dense_column(0).unwrap();
        for &(a, b) in inst.graph.edges() {
            assert_eq!(class[a], class[b], "cross-class edge ({a}, {b})");
        }
    }

    #[test]
    fn random_graph_has_exact_edge_count() {
        let g = random_graph(50, 200, 9).unwrap();
        assert_eq!(g.node_count(), 50);
        assert_eq!(g.edge_count(), 200);
        assert!(random_graph(4, 100, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_graph(30, 80, 5).unwrap();
        let b = random_graph(30, 80, 5).unwrap();
        assert_eq!(a, b);
        let ta = random_table(10, 3, 11);
        let tb = random_table(10, 3, 11);
        assert_eq!(ta, tb);
    }
}
