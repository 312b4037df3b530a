//! Degree-distribution histograms with zero-bin smoothing and the
//! Jensen-Shannon divergence that scores simulated networks against targets.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Histogram settings. `numbin` should match the magnitude of the node
/// count (100 for networks around 100 nodes, 1000 near 1000); empty bins
/// are filled with `zero_alternative` so divergences stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    numbin: usize,
    zero_alternative: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            numbin: 100,
            zero_alternative: 1e-5,
        }
    }
}

impl EvalConfig {
    pub fn new(numbin: usize, zero_alternative: f64) -> Result<Self> {
        if numbin < 1 {
            return Err(Error::Config("numbin must be at least 1".into()));
        }
        if zero_alternative <= 0.0 || zero_alternative >= 1.0 / numbin as f64 {
            return Err(Error::Config(format!(
                "zero_alternative must satisfy 0 < z < 1/numbin, got {zero_alternative} with numbin {numbin}"
            )));
        }
        Ok(Self {
            numbin,
            zero_alternative,
        })
    }

    /// Bin count matching the node count's order of magnitude.
    pub fn auto_numbin(node_count: usize) -> usize {
        if node_count > 316 {
            1000
        } else {
            100
        }
    }

    pub fn numbin(&self) -> usize {
        self.numbin
    }

    pub fn zero_alternative(&self) -> f64 {
        self.zero_alternative
    }
}

/// Smoothed degree distribution: strictly positive probabilities over
/// unit-width degree bins `[b, b+1)`, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeDistribution {
    probabilities: Vec<f64>,
    /// Nodes whose degree was at or above `numbin` and got clamped into the
    /// last bin.
    clamped: usize,
}

impl DegreeDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// CSV rows of `bin,probability`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin", "probability"])?;
        for (bin, p) in self.probabilities.iter().enumerate() {
            w.write_record([bin.to_string(), format!("{p}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pre-smoothing normalized histogram of node degrees over `numbin`
/// unit-width bins; degrees beyond the range clamp into the last bin.
pub fn raw_degree_histogram(g: &Graph, cfg: &EvalConfig) -> (Vec<f64>, usize) {
    let mut counts = vec![0.0f64; cfg.numbin];
    let mut clamped = 0usize;
    for d in g.degree_sequence() {
        let bin = if d >= cfg.numbin {
            clamped += 1;
            cfg.numbin - 1
        } else {
            d
        };
        counts[bin] += 1.0;
    }
    let n = g.node_count();
    if n == 0 {
        counts[0] = 1.0;
    } else {
        for c in &mut counts {
            *c /= n as f64;
        }
    }
    (counts, clamped)
}

/// Replaces exact-zero entries with `zero_alternative` and renormalizes so
/// the vector stays a probability distribution.
pub fn smooth_and_normalize(probabilities: &[f64], zero_alternative: f64) -> Vec<f64> {
    let filled: Vec<f64> = probabilities
        .iter()
        .map(|&p| if p == 0.0 { zero_alternative } else { p })
        .collect();
    let total: f64 = filled.iter().sum();
    filled.into_iter().map(|p| p / total).collect()
}

/// Histogram of node degrees, smoothed and renormalized per the config.
pub fn degree_histogram(g: &Graph, cfg: &EvalConfig) -> DegreeDistribution {
    let (raw, clamped) = raw_degree_histogram(g, cfg);
    DegreeDistribution {
        probabilities: smooth_and_normalize(&raw, cfg.zero_alternative),
        clamped,
    }
}

/// Jensen-Shannon divergence with base-2 logs, bounded in [0, 1]. Both
/// inputs must be strictly positive distributions of equal length.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Contract(format!(
            "distribution lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.iter().chain(q).any(|&x| x <= 0.0) {
        return Err(Error::Contract(
            "distributions must be strictly positive (smooth them first)".into(),
        ));
    }
    let mut js = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        js += 0.5 * a * (a / m).log2() + 0.5 * b * (b / m).log2();
    }
    Ok(js)
}

/// Degree-distribution error between a simulated and a target graph: the JS
/// divergence of their smoothed histograms under a shared config.
pub fn dd_error(sim: &Graph, target: &Graph, cfg: &EvalConfig) -> Result<f64> {
    let p = degree_histogram(sim, cfg);
    let q = degree_histogram(target, cfg);
    js_divergence(p.probabilities(), q.probabilities())
}

/// `1 - dd_error`; the quantity the optimizer maximizes.
pub fn dd_similarity(sim: &Graph, target: &Graph, cfg: &EvalConfig) -> Result<f64> {
    Ok(1.0 - dd_error(sim, target, cfg)?)
}
