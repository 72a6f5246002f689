use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::fitness::{FitnessConfig, FitnessEvaluator};
use crate::ga::{self, Evolution, GaConfig, GenerationStats};
use crate::seed;

/// Recursive feature elimination: train on the surviving columns, drop the
/// one with the lowest impurity-based importance (lowest index on ties),
/// repeat until `target_count` remain. Returns ascending column indices.
pub fn rfe_select(d: &Dataset, target_count: usize, classifier: &ClassifierSpec, seed: u64) -> Result<Vec<usize>> {
    if !classifier.kind.is_tree_based() {
        return Err(Error::Unsupported(format!(
            "RFE needs feature importances; {} has none",
            classifier.kind
        )));
    }
    if target_count == 0 || target_count > d.n_features() {
        return Err(invalid(format!(
            "RFE target {target_count} outside [1, {}]",
            d.n_features()
        )));
    }
    let mut remaining: Vec<usize> = (0..d.n_features()).collect();
    let mut round = 0u64;
    while remaining.len() > target_count {
        let spec = classifier.clone().with_seed(seed::derive(seed, &[round]));
        let model = classifiers::train(&spec, &d.features().select_columns(&remaining), d.labels())?;
        let importances = model
            .feature_importances()
            .expect("tree-based models report importances");
        let mut weakest = 0;
        for (i, &v) in importances.iter().enumerate() {
            if v < importances[weakest] {
                weakest = i;
            }
        }
        remaining.remove(weakest);
        round += 1;
    }
    Ok(remaining)
}

/// Settings for the GA arm of an experiment. The per-run seeds (GA stream,
/// inner folds, classifier) are derived from the seed passed to
/// [`GaSelector::configs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSelector {
    pub ga: GaConfig,
    pub alpha: f64,
    pub variance_penalty: bool,
    pub inner_folds: usize,
}

impl GaSelector {
    pub fn configs(&self, classifier: &ClassifierSpec, seed: u64) -> (GaConfig, FitnessConfig) {
        let ga = GaConfig {
            seed: seed::derive(seed, &[seed::stream::SELECTOR]),
            ..self.ga.clone()
        };
        let fit = FitnessConfig {
            alpha: self.alpha,
            variance_penalty: self.variance_penalty,
            inner_folds: self.inner_folds,
            classifier: classifier
                .clone()
                .with_seed(seed::derive(seed, &[seed::stream::CLASSIFIER])),
            fold_seed: seed::derive(seed, &[seed::stream::INNER_FOLDS]),
        };
        (ga, fit)
    }
}

/// Run the GA over `d` with wrapper fitness and return the hall-of-fame
/// subset (ascending indices) together with the full evolution record.
pub fn ga_select(d: &Dataset, ga: &GaConfig, fit: &FitnessConfig) -> Result<(Vec<usize>, Evolution)> {
    ga_select_with_progress(d, ga, fit, &mut |_| {})
}

pub fn ga_select_with_progress(
    d: &Dataset,
    ga: &GaConfig,
    fit: &FitnessConfig,
    progress: &mut dyn FnMut(&GenerationStats),
) -> Result<(Vec<usize>, Evolution)> {
    let evaluator = FitnessEvaluator::new(d, fit.clone())?;
    let evo = ga::evolve_with_progress(ga, d.n_features(), &evaluator, progress)?;
    Ok((evo.best.selected(), evo))
}
