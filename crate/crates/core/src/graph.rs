//! Undirected simple graph and the node-feature table aligned with it.
//!
//! Node identifiers are opaque strings; a stable integer index assigned by
//! construction order keeps the graph and feature matrix aligned. Both types
//! are immutable after construction and safe to share across threads.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph: no self-loops, no multi-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Canonical edge list: `(i, j)` with `i < j`, sorted, deduplicated.
    edges: Vec<(usize, usize)>,
    /// Sorted neighbor lists, one per node.
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from node ids and index pairs. Duplicate pairs collapse
    /// to a single edge; self-loops and out-of-range endpoints are rejected.
    pub fn new(node_ids: Vec<String>, edge_pairs: &[(usize, usize)]) -> Result<Self> {
        let n = node_ids.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate node id {id:?}")));
            }
        }
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(edge_pairs.len());
        for &(a, b) in edge_pairs {
            if a >= n || b >= n {
                return Err(Error::Structure(format!(
                    "edge ({a}, {b}) references a node index out of range (n = {n})"
                )));
            }
            if a == b {
                return Err(Error::Structure(format!(
                    "self-loop on node {:?}",
                    node_ids[a]
                )));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();

        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            node_ids,
            index,
            edges,
            adjacency,
        })
    }

    /// Builds a graph from string-id pairs; endpoints must be declared nodes.
    pub fn from_id_pairs(node_ids: Vec<String>, pairs: &[(String, String)]) -> Result<Self> {
        let lookup: HashMap<&str, usize> = node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut edge_pairs = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let ia = *lookup
                .get(a.as_str())
                .ok_or_else(|| Error::Structure(format!("edge references undeclared node {a:?}")))?;
            let ib = *lookup
                .get(b.as_str())
                .ok_or_else(|| Error::Structure(format!("edge references undeclared node {b:?}")))?;
            edge_pairs.push((ia, ib));
        }
        Self::new(node_ids, &edge_pairs)
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.node_ids[i]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Canonical `(i, j)` edge list with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Per-node degrees in node order. The sum equals twice the edge count.
    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// True iff every component admits a 2-coloring.
    pub fn is_bipartite(&self) -> bool {
        let n = self.node_count();
        let mut color = vec![u8::MAX; n];
        for start in 0..n {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Maximal connected node sets. Components are ordered by their smallest
    /// member and each block is sorted ascending.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut block = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        block.push(v);
                        queue.push_back(v);
                    }
                }
            }
            block.sort_unstable();
            components.push(block);
        }
        components
    }

    /// Subgraph induced by `keep` (node indices, any order). Nodes are
    /// relabeled in ascending original-index order.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<Graph> {
        let mut sorted: Vec<usize> = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&v| v >= self.node_count()) {
            return Err(Error::Structure(format!(
                "induced subgraph references node index {bad} out of range"
            )));
        }
        let mut relabel = HashMap::with_capacity(sorted.len());
        for (new, &old) in sorted.iter().enumerate() {
            relabel.insert(old, new);
        }
        let node_ids: Vec<String> = sorted.iter().map(|&v| self.node_ids[v].clone()).collect();
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((*relabel.get(&a)?, *relabel.get(&b)?)))
            .collect();
        Graph::new(node_ids, &edges)
    }
}

/// Kind tag for a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Real-valued; crisp normalization maps it into [0, 1].
    Numeric,
    /// Already 0/1 valued.
    Binary,
    /// Discrete labels stored as codes; must be one-hot encoded before use.
    Categorical,
}

/// Name, kind, and (for categorical features) the code-to-label table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    /// For categorical features: label for each integer code, in
    /// first-appearance node order.
    pub labels: Option<Vec<String>>,
}

impl FeatureMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric,
            labels: None,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Binary,
            labels: None,
        }
    }

    pub fn categorical(name: impl Into<String>, labels: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical,
            labels: Some(labels),
        }
    }
}

/// Node-by-feature matrix of real values, aligned with a [`Graph`] by node id
/// order. Missing cells are explicit (`None`), never sentinel numbers; the
/// cleaning pipeline removes them before any scoring or simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    node_ids: Vec<String>,
    features: Vec<FeatureMeta>,
    /// Row-major: `values[node * feature_count + feature]`.
    values: Vec<Option<f64>>,
}

impl FeatureTable {
    pub fn new(
        node_ids: Vec<String>,
        features: Vec<FeatureMeta>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if values.len() != node_ids.len() * features.len() {
            return Err(Error::Contract(format!(
                "value matrix has {} cells, expected {} nodes x {} features",
                values.len(),
                node_ids.len(),
                features.len()
            )));
        }
        Ok(Self {
            node_ids,
            features,
            values,
        })
    }

    /// Table with no features, one empty row per node.
    pub fn empty(node_ids: Vec<String>) -> Self {
        Self {
            node_ids,
            features: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|m| m.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|m| m.name == name)
    }

    pub fn value(&self, node: usize, feature: usize) -> Option<f64> {
        self.values[node * self.features.len() + feature]
    }

    pub fn column(&self, feature: usize) -> Vec<Option<f64>> {
        (0..self.node_count())
            .map(|n| self.value(n, feature))
            .collect()
    }

    /// Column as dense values; errors if any cell is missing.
    pub fn dense_column(&self, feature: usize) -> Result<Vec<f64>> {
        self.column(feature)
            .into_iter()
            .enumerate()
            .map(|(n, v)| {
                v.ok_or_else(|| {
                    Error::Cleaning(format!(
                        "missing value at node {:?}, feature {:?}",
                        self.node_ids[n], self.features[feature].name
                    ))
                })
            })
            .collect()
    }

    /// Column-major dense view of the selected features; errors on any null.
    pub fn dense_columns(&self, feature_indices: &[usize]) -> Result<Vec<Vec<f64>>> {
        feature_indices
            .iter()
            .map(|&f| self.dense_column(f))
            .collect()
    }

    pub fn null_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Rows restricted to `keep` (node indices, ascending output order).
    pub fn select_rows(&self, keep: &[usize]) -> Result<FeatureTable> {
        let mut sorted: Vec<usize> = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&v| v >= self.node_count()) {
            return Err(Error::Contract(format!(
                "row selection references node index {bad} out of range"
            )));
        }
        let f = self.features.len();
        let mut values = Vec::with_capacity(sorted.len() * f);
        for &n in &sorted {
            values.extend_from_slice(&self.values[n * f..(n + 1) * f]);
        }
        Ok(FeatureTable {
            node_ids: sorted.iter().map(|&n| self.node_ids[n].clone()).collect(),
            features: self.features.clone(),
            values,
        })
    }

    /// Columns restricted to `keep` (feature indices, in the given order).
    pub fn select_features(&self, keep: &[usize]) -> Result<FeatureTable> {
        if let Some(&bad) = keep.iter().find(|&&f| f >= self.feature_count()) {
            return Err(Error::Contract(format!(
                "feature selection references index {bad} out of range"
            )));
        }
        let mut values = Vec::with_capacity(self.node_count() * keep.len());
        for n in 0..self.node_count() {
            for &f in keep {
                values.push(self.value(n, f));
            }
        }
        Ok(FeatureTable {
            node_ids: self.node_ids.clone(),
            features: keep.iter().map(|&f| self.features[f].clone()).collect(),
            values,
        })
    }
}

/// Checks that a graph and feature table describe the same nodes in the same
/// order.
pub fn ensure_aligned(graph: &Graph, table: &FeatureTable) -> Result<()> {
    if graph.node_ids() != table.node_ids() {
        return Err(Error::Contract(
            "graph and feature table node ids are not aligned".into(),
        ));
    }
    Ok(())
}
