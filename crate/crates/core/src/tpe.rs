//! Tree-structured Parzen Estimator for maximizing a black-box objective
//! over a box-bounded continuous space.
//!
//! After a uniform startup phase, the trial history is split at the gamma
//! quantile of objective values into "good" and "bad" sets. Each dimension
//! gets two one-dimensional Parzen mixtures -- truncated Gaussians centered
//! at the observations plus a uniform prior component -- fitted to the good
//! (`l`) and bad (`g`) sets. Candidates drawn from `l` are ranked by the
//! density ratio `l(x) / g(x)` and the best one is suggested next.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// One box-bounded search dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dimension {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Dimension {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::Config(format!(
                "dimension bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            name: name.into(),
            lower,
            upper,
        })
    }

    fn range(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Ordered list of dimensions defining the search box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    dims: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Config("search space has no dimensions".into()));
        }
        Ok(Self { dims })
    }

    /// A box with every dimension spanning the same interval.
    pub fn uniform_box(names: &[String], lower: f64, upper: f64) -> Result<Self> {
        Self::new(
            names
                .iter()
                .map(|n| Dimension::new(n.clone(), lower, upper))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dims.len()
            && point
                .iter()
                .zip(&self.dims)
                .all(|(&x, d)| x >= d.lower && x <= d.upper)
    }
}

/// A single evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Ordered record of evaluated trials; the objective is maximized.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrialHistory {
    trials: Vec<Trial>,
}

impl TrialHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, trial: Trial) {
        self.trials.push(trial);
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    /// Highest-value trial (earliest wins ties) and its index.
    pub fn best(&self) -> Option<(usize, &Trial)> {
        self.trials
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ib.cmp(ia)))
    }

    /// Best value seen up to and including each trial.
    pub fn running_best(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.trials
            .iter()
            .map(|t| {
                best = best.max(t.value);
                best
            })
            .collect()
    }

    /// CSV rows of `trial,<dim names...>,objective`.
    pub fn write_csv<W: Write>(&self, space: &SearchSpace, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["trial".to_string()];
        header.extend(space.dims().iter().map(|d| d.name.clone()));
        header.push("objective".to_string());
        w.write_record(&header)?;
        for (i, t) in self.trials.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(t.point.iter().map(|x| format!("{x}")));
            row.push(format!("{}", t.value));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TpeConfig {
    /// Total objective evaluations.
    pub max_eval: usize,
    /// Fraction of trials forming the "good" set.
    pub gamma: f64,
    /// Uniform random trials before the Parzen machinery engages.
    pub n_startup: usize,
    /// Candidates drawn from `l` per suggestion.
    pub n_candidates: usize,
    /// Seed for the suggestion RNG stream.
    pub rstate_seed: u64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            max_eval: 100,
            gamma: 0.25,
            n_startup: 10,
            n_candidates: 24,
            rstate_seed: 42,
        }
    }
}

impl TpeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_eval < 1 {
            return Err(Error::Config("max_eval must be at least 1".into()));
        }
        if !(0.0 < self.gamma && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.n_startup < 1 {
            return Err(Error::Config("n_startup must be at least 1".into()));
        }
        if self.n_startup >= self.max_eval && self.max_eval > 1 {
            // A pure-startup run is still valid when max_eval == 1.
            if self.n_startup > self.max_eval {
                return Err(Error::Config(format!(
                    "n_startup ({}) must not exceed max_eval ({})",
                    self.n_startup, self.max_eval
                )));
            }
        }
        if self.n_candidates < 1 {
            return Err(Error::Config("n_candidates must be at least 1".into()));
        }
        Ok(())
    }
}

/// One-dimensional Parzen mixture: truncated Gaussians at the observations
/// plus one uniform prior component, all equally weighted.
struct ParzenMixture {
    lower: f64,
    upper: f64,
    /// (center, bandwidth) per observation component.
    kernels: Vec<(f64, f64)>,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

impl ParzenMixture {
    /// Bandwidths take the larger of a tenth of the dimension range and the
    /// observation's adjacent-point spacing.
    fn fit(observations: &[f64], lower: f64, upper: f64) -> Self {
        let range = upper - lower;
        let floor = 0.1 * range;
        let mut sorted = observations.to_vec();
        sorted.sort_by(f64::total_cmp);
        let kernels = observations
            .iter()
            .map(|&mu| {
                let pos = sorted
                    .iter()
                    .position(|&x| x == mu)
                    .expect("observation present in its own sort");
                let left = if pos > 0 { mu - sorted[pos - 1] } else { 0.0 };
                let right = if pos + 1 < sorted.len() {
                    sorted[pos + 1] - mu
                } else {
                    0.0
                };
                (mu, left.max(right).max(floor))
            })
            .collect();
        Self {
            lower,
            upper,
            kernels,
        }
    }

    fn component_count(&self) -> usize {
        self.kernels.len() + 1
    }

    fn pdf(&self, x: f64) -> f64 {
        let range = self.upper - self.lower;
        let mut total = 1.0 / range; // uniform prior component
        for &(mu, sigma) in &self.kernels {
            let z = (x - mu) / sigma;
            let mass = normal_cdf((self.upper - mu) / sigma) - normal_cdf((self.lower - mu) / sigma);
            total += normal_pdf(z) / (sigma * mass);
        }
        total / self.component_count() as f64
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let pick = rng.random_range(0..self.component_count());
        if pick == self.kernels.len() {
            return rng.random_range(self.lower..self.upper);
        }
        let (mu, sigma) = self.kernels[pick];
        // Rejection-sample the truncation; mu lies inside the box so the
        // acceptance probability is bounded away from zero.
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let x = mu + sigma * z;
            if x >= self.lower && x <= self.upper {
                return x;
            }
        }
    }
}

/// Proposes the next point to evaluate. During startup (or with fewer than
/// two trials) the point is uniform in the box; afterwards it maximizes the
/// good/bad density ratio over `n_candidates` draws from the good mixture.
pub fn suggest(
    history: &TrialHistory,
    space: &SearchSpace,
    cfg: &TpeConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = history.len();
    if n < cfg.n_startup.max(2) {
        return Ok(space
            .dims()
            .iter()
            .map(|d| rng.random_range(d.lower..d.upper))
            .collect());
    }

    // Split at the gamma quantile: the top fraction by value is "good".
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        history.trials()[b]
            .value
            .total_cmp(&history.trials()[a].value)
            .then(a.cmp(&b))
    });
    let n_good = ((cfg.gamma * n as f64).ceil() as usize).clamp(1, n - 1);
    let (good_idx, bad_idx) = order.split_at(n_good);

    let mixtures: Vec<(ParzenMixture, ParzenMixture)> = space
        .dims()
        .iter()
        .enumerate()
        .map(|(d, dim)| {
            let good: Vec<f64> = good_idx
                .iter()
                .map(|&t| history.trials()[t].point[d])
                .collect();
            let bad: Vec<f64> = bad_idx
                .iter()
                .map(|&t| history.trials()[t].point[d])
                .collect();
            (
                ParzenMixture::fit(&good, dim.lower, dim.upper),
                ParzenMixture::fit(&bad, dim.lower, dim.upper),
            )
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..cfg.n_candidates {
        let candidate: Vec<f64> = mixtures.iter().map(|(l, _)| l.sample(rng)).collect();
        let score: f64 = mixtures
            .iter()
            .zip(&candidate)
            .map(|((l, g), &x)| l.pdf(x).ln() - g.pdf(x).ln())
            .sum();
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }
    Ok(best.expect("n_candidates >= 1").1)
}

/// Result of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimized {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub history: TrialHistory,
}

/// Runs exactly `max_eval` objective evaluations and returns the argmax.
/// With a deterministic objective the full history is reproducible
/// byte-for-byte from the config.
pub fn optimize<F>(mut objective: F, space: &SearchSpace, cfg: &TpeConfig) -> Result<Optimized>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rstate_seed);
    let mut history = TrialHistory::new();
    for trial in 0..cfg.max_eval {
        let point = suggest(&history, space, cfg, &mut rng)?;
        let value = objective(&point).map_err(|e| Error::Objective {
            trial,
            source: Box::new(e),
        })?;
        if value.is_nan() {
            return Err(Error::Objective {
                trial,
                source: Box::new(Error::Contract("objective returned NaN".into())),
            });
        }
        history.push(Trial { point, value });
    }
    let (_, best) = history.best().expect("max_eval >= 1");
    Ok(Optimized {
        best_point: best.point.clone(),
        best_value: best.value,
        history,
    })
}

/// Uniform random search over the same space and budget; the baseline the
/// estimator is expected to beat.
pub fn random_search<F>(mut objective: F, space: &SearchSpace, cfg: &TpeConfig) -> Result<Optimized>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let pure = TpeConfig {
        n_startup: cfg.max_eval.max(1),
        ..*cfg
    };
    optimize(&mut objective, space, &pure)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_space() -> SearchSpace {
        SearchSpace::new(vec![Dimension::new("x", -1.0, 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn dimension_bounds_validated() {
        assert!(Dimension::new("x", 0.0, 0.0).is_err());
        assert!(Dimension::new("x", 1.0, -1.0).is_err());
        assert!(SearchSpace::new(Vec::new()).is_err());
    }

    #[test]
    fn startup_points_are_uniform_in_box() {
        let space = unit_space();
        let cfg = TpeConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let history = TrialHistory::new();
        for _ in 0..50 {
            let p = suggest(&history, &space, &cfg, &mut rng).unwrap();
            assert!(space.contains(&p));
        }
    }

    #[test]
    fn degenerate_equal_history_still_suggests() {
        let space = unit_space();
        let cfg = TpeConfig {
            n_startup: 2,
            ..TpeConfig::default()
        };
        let mut history = TrialHistory::new();
        for i in 0..12 {
            history.push(Trial {
                point: vec![-0.9 + 0.15 * i as f64],
                value: 0.5,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = suggest(&history, &space, &cfg, &mut rng).unwrap();
        assert!(space.contains(&p));
    }

    #[test]
    fn suggestions_stay_in_box_after_startup() {
        let space = unit_space();
        let cfg = TpeConfig {
            n_startup: 5,
            ..TpeConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut history = TrialHistory::new();
        for i in 0..40 {
            let p = suggest(&history, &space, &cfg, &mut rng).unwrap();
            assert!(space.contains(&p), "trial {i} out of box: {p:?}");
            let value = -(p[0] - 0.2).powi(2);
            history.push(Trial { point: p, value });
        }
    }

    #[test]
    fn good_cluster_attracts_suggestions() {
        // Good points near 0.3, bad spread elsewhere; the suggestion should
        // land within 0.3 +/- 0.2 at least 90% of the time.
        let space = unit_space();
        let cfg = TpeConfig {
            n_startup: 2,
            ..TpeConfig::default()
        };
        let mut history = TrialHistory::new();
        for (x, v) in [
            (0.29, 1.0),
            (0.31, 0.99),
            (0.30, 0.98),
            (0.28, 0.97),
            (0.32, 0.96),
            (-0.8, 0.1),
            (-0.5, 0.12),
            (-0.2, 0.09),
            (0.0, 0.11),
            (0.7, 0.08),
            (0.9, 0.1),
            (-0.95, 0.07),
            (0.55, 0.13),
            (-0.65, 0.06),
            (0.85, 0.05),
            (-0.35, 0.04),
            (0.65, 0.03),
            (-0.1, 0.02),
            (0.99, 0.01),
            (-0.99, 0.0),
        ] {
            history.push(Trial {
                point: vec![x],
                value: v,
            });
        }
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = suggest(&history, &space, &cfg, &mut rng).unwrap();
            if (p[0] - 0.3).abs() <= 0.2 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "only {hits}/100 suggestions near the cluster");
    }

    #[test]
    fn single_eval_returns_startup_point() {
        let space = unit_space();
        let cfg = TpeConfig {
            max_eval: 1,
            n_startup: 1,
            ..TpeConfig::default()
        };
        let out = optimize(|p| Ok(p[0]), &space, &cfg).unwrap();
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.best_value, out.history.trials()[0].value);
    }

    #[test]
    fn constant_objective_returns_constant() {
        let space = unit_space();
        let cfg = TpeConfig {
            max_eval: 20,
            ..TpeConfig::default()
        };
        let out = optimize(|_| Ok(0.7), &space, &cfg).unwrap();
        assert_eq!(out.best_value, 0.7);
        assert_eq!(out.history.len(), 20);
    }

    #[test]
    fn quadratic_peak_found_within_tolerance() {
        let space = unit_space();
        let cfg = TpeConfig::default(); // max_eval 100, seed 42
        let out = optimize(|p| Ok(-(p[0] - 0.3).powi(2)), &space, &cfg).unwrap();
        assert!(
            (out.best_point[0] - 0.3).abs() <= 0.05,
            "best x = {}",
            out.best_point[0]
        );
    }

    #[test]
    fn runs_are_reproducible_byte_for_byte() {
        let space = SearchSpace::uniform_box(
            &["a".to_string(), "b".to_string()],
            -1.0,
            1.0,
        )
        .unwrap();
        let cfg = TpeConfig {
            max_eval: 30,
            ..TpeConfig::default()
        };
        let obj = |p: &[f64]| Ok(-(p[0].powi(2) + p[1].powi(2)));
        let a = optimize(obj, &space, &cfg).unwrap();
        let b = optimize(obj, &space, &cfg).unwrap();
        assert_eq!(a.history.len(), b.history.len());
        for (ta, tb) in a.history.trials().iter().zip(b.history.trials()) {
            assert_eq!(ta.value.to_bits(), tb.value.to_bits());
            for (xa, xb) in ta.point.iter().zip(&tb.point) {
                assert_eq!(xa.to_bits(), xb.to_bits());
            }
        }
    }

    #[test]
    fn running_best_is_monotone() {
        let space = unit_space();
        let cfg = TpeConfig {
            max_eval: 50,
            ..TpeConfig::default()
        };
        let out = optimize(|p| Ok(-(p[0] + 0.4).powi(2)), &space, &cfg).unwrap();
        let best = out.history.running_best();
        assert!(best.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*best.last().unwrap(), out.best_value);
    }

    #[test]
    fn objective_errors_carry_trial_index() {
        let space = unit_space();
        let cfg = TpeConfig {
            max_eval: 5,
            ..TpeConfig::default()
        };
        let mut calls = 0;
        let err = optimize(
            |_| {
                calls += 1;
                if calls == 3 {
                    Err(Error::Contract("boom".into()))
                } else {
                    Ok(0.0)
                }
            },
            &space,
            &cfg,
        )
        .unwrap_err();
        match err {
            Error::Objective { trial, .. } => assert_eq!(trial, 2),
            other => panic!("expected objective error, got {other:?}"),
        }
    }

    #[test]
    fn history_csv_layout() {
        let space = unit_space();
        let mut history = TrialHistory::new();
        history.push(Trial {
            point: vec![0.25],
            value: 0.5,
        });
        let mut buf = Vec::new();
        history.write_csv(&space, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "trial,x,objective");
        assert_eq!(lines[1], "0,0.25,0.5");
    }
}
