//! Simulation of attributed social networks driven by per-feature weights
//! (sDNA), with unsupervised feature ranking, forward feature selection, and
//! Bayesian (TPE) optimization of the weights against a target network's
//! degree distribution.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`graph`] / [`graphml`]: the attributed-graph data model and GraphML /
//!   CSV ingestion.
//! - [`prep`]: cleaning (crisp normalization, one-hot encoding, null
//!   handling, detached-node removal) and connected sampling of large graphs.
//! - [`filters`]: the four unsupervised filter metrics and the combined
//!   feature ranking.
//! - [`sns`]: the network simulator scoring node pairs by homophily and
//!   preferential attachment under sDNA weights.
//! - [`tpe`]: the Tree-structured Parzen Estimator that tunes the weights.
//! - [`eval`]: degree-distribution histograms and Jensen-Shannon divergence.
//! - [`wrapper`]: forward selection with a stop-loss over the ranked
//!   features.
//! - [`synth`]: synthetic benchmark generators.

pub mod error;
pub mod eval;
pub mod filters;
pub mod graph;
pub mod graphml;
pub mod prep;
pub mod sns;
pub mod synth;
pub mod tpe;
pub mod wrapper;

pub use error::{Error, Result};
pub use eval::{DegreeDistribution, EvalConfig};
pub use filters::{FeatureRanking, FilterParams, Frm, MetricScores};
pub use graph::{FeatureKind, FeatureMeta, FeatureTable, Graph};
pub use graphml::{parse_graphml, write_graphml, ParsedGraph};
pub use prep::{CleaningReport, SamplerConfig};
pub use sns::{SimulationParams, SocialDna};
pub use tpe::{SearchSpace, TpeConfig, TrialHistory};
pub use wrapper::{WrapperResult, WrapperStep};
