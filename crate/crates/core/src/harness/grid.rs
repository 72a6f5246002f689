use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{depth_serde, ClassifierKind, ClassifierSpec, MaxFeatures};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::fitness::{FitnessConfig, FitnessEvaluator};

/// Candidate values per hyperparameter. Lists that do not apply to the
/// classifier kind being tuned are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamGrid {
    pub k: Vec<usize>,
    #[serde(with = "depth_serde::list")]
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_split: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
    pub n_estimators: Vec<usize>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            k: vec![1],
            max_depth: vec![None],
            min_samples_split: vec![2],
            min_samples_leaf: vec![1],
            max_features: vec![MaxFeatures::All],
            n_estimators: vec![100],
        }
    }
}

impl ParamGrid {
    /// The published search space for `kind` over `n_features` columns.
    pub fn standard(kind: ClassifierKind, n_features: usize) -> Self {
        let upto = |lo: usize, hi: usize| (lo..=hi).collect::<Vec<_>>();
        let depths = |hi: usize| {
            let mut d: Vec<Option<usize>> = (1..=hi).map(Some).collect();
            d.push(None);
            d
        };
        match kind {
            ClassifierKind::Knn => ParamGrid {
                k: vec![1, 3, 5, 7, 9],
                ..ParamGrid::default()
            },
            ClassifierKind::Dtc => ParamGrid {
                max_depth: depths(10),
                min_samples_split: upto(2, 10),
                min_samples_leaf: upto(1, 10),
                max_features: upto(1, n_features.max(1)).into_iter().map(MaxFeatures::Count).collect(),
                ..ParamGrid::default()
            },
            ClassifierKind::Rfc | ClassifierKind::Etc => ParamGrid {
                max_depth: depths(6),
                min_samples_split: upto(2, 5),
                min_samples_leaf: upto(1, 5),
                max_features: upto(1, MaxFeatures::Sqrt.resolve(n_features))
                    .into_iter()
                    .map(MaxFeatures::Count)
                    .collect(),
                n_estimators: vec![100, 200],
                ..ParamGrid::default()
            },
        }
    }

    /// Cross-product for `kind` in enumeration order: `k`, `max_depth`,
    /// `min_samples_split`, `min_samples_leaf`, `max_features`,
    /// `n_estimators` (outermost first). Combinations with
    /// `min_samples_leaf > min_samples_split` are skipped.
    pub fn candidates(&self, base: &ClassifierSpec) -> Result<Vec<ClassifierSpec>> {
        let kind = base.kind;
        let one = |v: usize| vec![v];
        let (ks, depths, splits, leaves, feats, ests) = match kind {
            ClassifierKind::Knn => (
                self.k.clone(),
                vec![base.max_depth],
                one(base.min_samples_split),
                one(base.min_samples_leaf),
                vec![base.max_features],
                one(base.n_estimators),
            ),
            ClassifierKind::Dtc => (
                one(base.k_neighbors),
                self.max_depth.clone(),
                self.min_samples_split.clone(),
                self.min_samples_leaf.clone(),
                self.max_features.clone(),
                one(base.n_estimators),
            ),
            ClassifierKind::Rfc | ClassifierKind::Etc => (
                one(base.k_neighbors),
                self.max_depth.clone(),
                self.min_samples_split.clone(),
                self.min_samples_leaf.clone(),
                self.max_features.clone(),
                self.n_estimators.clone(),
            ),
        };
        if ks.is_empty() || depths.is_empty() || splits.is_empty() || leaves.is_empty() || feats.is_empty() || ests.is_empty() {
            return Err(invalid(format!("empty parameter grid for {kind}")));
        }
        let mut out = Vec::new();
        for &k in &ks {
            for &max_depth in &depths {
                for &split in &splits {
                    for &leaf in &leaves {
                        if leaf > split {
                            continue;
                        }
                        for &max_features in &feats {
                            for &n_estimators in &ests {
                                let spec = ClassifierSpec {
                                    kind,
                                    k_neighbors: k,
                                    max_depth,
                                    min_samples_split: split,
                                    min_samples_leaf: leaf,
                                    max_features,
                                    n_estimators,
                                    seed: base.seed,
                                };
                                spec.validate()?;
                                out.push(spec);
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(invalid(format!("parameter grid for {kind} has no valid combination")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub spec: ClassifierSpec,
    /// Mean CV accuracy of `spec`.
    pub score: f64,
    pub fold_accuracies: Vec<f64>,
    pub evaluated: usize,
}

/// Exhaustive search: every candidate is scored by stratified `folds`-fold
/// CV mean accuracy on the same fold plan; the first best in enumeration
/// order wins.
pub fn grid_search(d: &Dataset, base: &ClassifierSpec, grid: &ParamGrid, folds: usize, seed: u64) -> Result<GridResult> {
    let candidates = grid.candidates(base)?;
    let columns: Vec<usize> = (0..d.n_features()).collect();
    let scored = candidates
        .par_iter()
        .map(|spec| {
            let cfg = FitnessConfig {
                alpha: 0.0,
                variance_penalty: false,
                inner_folds: folds,
                classifier: spec.clone(),
                fold_seed: seed,
            };
            let accs = FitnessEvaluator::new(d, cfg)?.fold_accuracies(&columns)?;
            let mean = accs.iter().sum::<f64>() / accs.len() as f64;
            Ok((mean, accs))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, (score, _)) in scored.iter().enumerate() {
        if *score > scored[best].0 {
            best = i;
        }
    }
    let (score, fold_accuracies) = scored[best].clone();
    Ok(GridResult {
        spec: candidates[best].clone(),
        score,
        fold_accuracies,
        evaluated: candidates.len(),
    })
}

/// Parse a classifier name for grid search, rejecting kinds without a grid.
pub fn grid_kind(name: &str) -> Result<ClassifierKind> {
    name.parse::<ClassifierKind>()
        .map_err(|e| Error::Unsupported(format!("grid search: {e}")))
}
