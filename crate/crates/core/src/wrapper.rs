//! Forward-selection wrapper: include ranked features one at a time, run one
//! full optimization per combination, and stop at the first combination that
//! fails to strictly improve the best similarity.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{degree_histogram, js_divergence, EvalConfig};
use crate::filters::FeatureRanking;
use crate::graph::{FeatureTable, Graph};
use crate::sns::{form_network, SimulationParams, SocialDna};
use crate::tpe::{optimize, TpeConfig};

/// One wrapper step: the feature combination tested, the best similarity its
/// optimization reached, and the sDNA that reached it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrapperStep {
    pub features: Vec<String>,
    pub best_similarity: f64,
    pub best_dna: SocialDna,
    pub trials: usize,
    pub seconds: f64,
}

/// Outcome of the forward selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrapperResult {
    /// The selected feature combination: the last strictly improving step.
    pub selected_features: Vec<String>,
    /// Best similarity over all steps.
    pub best_similarity: f64,
    pub steps: Vec<WrapperStep>,
    /// True when a non-improving step ended the search before the ranking
    /// was exhausted.
    pub stopped_early: bool,
}

/// What one combination's optimization produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub best_value: f64,
    pub best_dna: SocialDna,
    pub trials: usize,
}

/// The selection loop itself, generic over how a combination is optimized.
/// The best similarity starts at negative infinity, so the first combination
/// is always recorded; each later combination must strictly improve on the
/// running best or the loop breaks after recording it.
pub fn forward_select<F>(ranked_features: &[String], mut run_step: F) -> Result<WrapperResult>
where
    F: FnMut(&[String]) -> Result<StepOutcome>,
{
    if ranked_features.is_empty() {
        return Err(Error::Contract(
            "forward selection needs at least one ranked feature".into(),
        ));
    }
    let mut combination: Vec<String> = Vec::new();
    let mut selected: Vec<String> = Vec::new();
    let mut best_similarity = f64::NEG_INFINITY;
    let mut steps = Vec::new();
    let mut stopped_early = false;

    for feature in ranked_features {
        combination.push(feature.clone());
        let started = Instant::now();
        let outcome = run_step(&combination)?;
        steps.push(WrapperStep {
            features: combination.clone(),
            best_similarity: outcome.best_value,
            best_dna: outcome.best_dna,
            trials: outcome.trials,
            seconds: started.elapsed().as_secs_f64(),
        });
        if outcome.best_value > best_similarity {
            best_similarity = outcome.best_value;
            selected = combination.clone();
        } else {
            stopped_early = true;
            break;
        }
    }

    Ok(WrapperResult {
        selected_features: selected,
        best_similarity,
        steps,
        stopped_early,
    })
}

/// Runs the wrapper against a target graph: each combination is optimized
/// from scratch over `[-1, 1]^(2|FC|)` with the same seeds, maximizing the
/// degree-distribution similarity of the simulated network.
pub fn run_wrapper(
    ft: &FeatureTable,
    target: &Graph,
    ranking: &FeatureRanking,
    params: &SimulationParams,
    tpe_cfg: &TpeConfig,
    eval_cfg: &EvalConfig,
) -> Result<WrapperResult> {
    let ranked = ranking.ordered_names();
    if ranked.is_empty() {
        return Err(Error::Contract("feature ranking is empty".into()));
    }
    for name in &ranked {
        if ft.feature_index(name).is_none() {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }
    let target_hist = degree_histogram(target, eval_cfg);

    forward_select(&ranked, |combination| {
        let space = SocialDna::search_space(combination)?;
        let outcome = optimize(
            |point| {
                let dna = SocialDna::from_point(combination.to_vec(), point)?;
                let simulated = form_network(ft, &dna, params)?;
                let sim_hist = degree_histogram(&simulated, eval_cfg);
                Ok(1.0 - js_divergence(sim_hist.probabilities(), target_hist.probabilities())?)
            },
            &space,
            tpe_cfg,
        )?;
        Ok(StepOutcome {
            best_value: outcome.best_value,
            best_dna: SocialDna::from_point(combination.to_vec(), &outcome.best_point)?,
            trials: outcome.history.len(),
        })
    })
}
