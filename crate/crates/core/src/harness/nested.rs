use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierKind, ClassifierSpec};
use crate::dataset::{make_folds, Dataset, FoldPlan};
use crate::error::{invalid, Error, Result};
use crate::fitness::{disjoint, FitnessConfig, FitnessEvaluator};
use crate::ga::{EvolutionLog, GenerationStats};
use crate::seed::{self, stream};

use super::grid::{grid_search, ParamGrid};
use super::report::{summarize, Method, ReportRow};
use super::select::{ga_select_with_progress, rfe_select, GaSelector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NestedCvSpec {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for NestedCvSpec {
    fn default() -> Self {
        NestedCvSpec {
            outer_folds: 100,
            inner_folds: 10,
            repetitions: 10,
            seed: 0,
        }
    }
}

impl NestedCvSpec {
    pub fn validate(&self, n_instances: usize) -> Result<()> {
        if self.outer_folds < 2 || self.outer_folds > n_instances {
            return Err(invalid(format!(
                "outer_folds {} outside [2, {n_instances}]",
                self.outer_folds
            )));
        }
        if self.inner_folds < 2 {
            return Err(invalid("inner_folds must be >= 2"));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be >= 1"));
        }
        Ok(())
    }

    /// Outer fold plan of repetition `rep`.
    pub fn outer_plan(&self, d: &Dataset, rep: usize) -> Result<FoldPlan> {
        make_folds(
            d,
            self.outer_folds,
            seed::derive(self.seed, &[stream::OUTER_FOLDS, rep as u64]),
            false,
        )
    }

    pub fn selector_seed(&self, rep: usize, fold: usize) -> u64 {
        seed::derive(self.seed, &[stream::SELECTOR, rep as u64, fold as u64])
    }

    pub fn final_seed(&self) -> u64 {
        seed::derive(self.seed, &[stream::FINAL])
    }
}

/// Feature-selection procedure run on (outer-)training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    All,
    Fixed(Vec<usize>),
    Rfe { target: usize, ranking: ClassifierSpec },
    Ga(GaSelector),
}

impl Selector {
    pub fn method(&self) -> Method {
        match self {
            Selector::All => Method::All,
            Selector::Fixed(_) => Method::Fixed,
            Selector::Rfe { .. } => Method::Rfe,
            Selector::Ga(_) => Method::Ga,
        }
    }
}

/// One GA generation reported from inside nested validation.
#[derive(Debug, Clone)]
pub struct Progress<'a> {
    pub classifier: ClassifierKind,
    pub alpha: f64,
    pub variance_penalty: bool,
    /// `None` for the final selection on the full dataset.
    pub repetition: Option<usize>,
    pub fold: Option<usize>,
    pub stats: &'a GenerationStats,
}

pub type ProgressFn<'a> = &'a (dyn Fn(&Progress<'_>) + Sync);

struct Selection {
    features: Vec<usize>,
    /// Model spec and its inner-CV mean accuracy when the selector already
    /// computed them (GA hall of fame).
    scored: Option<(ClassifierSpec, f64)>,
    evolution: Option<EvolutionLog>,
}

fn run_selector(
    selector: &Selector,
    d: &Dataset,
    classifier: &ClassifierSpec,
    seed: u64,
    at: (Option<usize>, Option<usize>),
    progress: Option<ProgressFn<'_>>,
) -> Result<Selection> {
    match selector {
        Selector::All => Ok(Selection {
            features: (0..d.n_features()).collect(),
            scored: None,
            evolution: None,
        }),
        Selector::Fixed(list) => {
            if list.is_empty() {
                return Err(invalid("fixed feature list is empty"));
            }
            if let Some(&j) = list.iter().find(|&&j| j >= d.n_features()) {
                return Err(invalid(format!("fixed feature index {j} out of range")));
            }
            Ok(Selection {
                features: list.clone(),
                scored: None,
                evolution: None,
            })
        }
        Selector::Rfe { target, ranking } => Ok(Selection {
            features: rfe_select(d, *target, ranking, seed)?,
            scored: None,
            evolution: None,
        }),
        Selector::Ga(sel) => {
            let (ga, fit) = sel.configs(classifier, seed);
            let mut report = |stats: &GenerationStats| {
                if let Some(p) = progress {
                    p(&Progress {
                        classifier: classifier.kind,
                        alpha: sel.alpha,
                        variance_penalty: sel.variance_penalty,
                        repetition: at.0,
                        fold: at.1,
                        stats,
                    });
                }
            };
            let (features, evo) = ga_select_with_progress(d, &ga, &fit, &mut report)?;
            Ok(Selection {
                features,
                scored: Some((fit.classifier.clone(), evo.best_report.effectiveness)),
                evolution: Some(evo.log),
            })
        }
    }
}

/// Everything one (repetition, outer fold) produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub repetition: usize,
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub selected: Vec<usize>,
    pub model_spec: ClassifierSpec,
    pub inner_accuracy: f64,
    pub correct: usize,
    pub evolution: Option<EvolutionLog>,
}

#[derive(Debug, Clone)]
pub struct NestedOutcome {
    pub row: ReportRow,
    pub folds: Vec<FoldOutcome>,
    pub final_selection: Vec<usize>,
    pub final_evolution: Option<EvolutionLog>,
}

/// Nested cross-validation of a selection procedure.
///
/// For every repetition and outer fold, the selector, any grid search and
/// the final model fit see only the outer-training rows; the fitted model is
/// then scored on the held-out rows. Validation accuracy is pooled over each
/// repetition and averaged across repetitions. Inner statistics summarize
/// the inner-CV mean accuracy reached on each outer-training set.
pub fn nested_validate(
    d: &Dataset,
    selector: &Selector,
    spec: &NestedCvSpec,
    classifier: &ClassifierSpec,
    tuning: Option<&ParamGrid>,
    progress: Option<ProgressFn<'_>>,
) -> Result<NestedOutcome> {
    spec.validate(d.n_instances())?;
    classifier.validate()?;

    let mut plans = Vec::with_capacity(spec.repetitions);
    for rep in 0..spec.repetitions {
        let plan = spec.outer_plan(d, rep)?;
        // Coverage: each instance is held out exactly once per repetition.
        let mut seen = vec![0usize; d.n_instances()];
        for f in 0..plan.n_folds {
            for i in plan.test_indices(f) {
                seen[i] += 1;
            }
        }
        if seen.iter().any(|&c| c != 1) {
            return Err(Error::Leakage(format!(
                "repetition {rep}: outer folds do not partition the instances"
            )));
        }
        plans.push(plan);
    }
    let jobs: Vec<(usize, usize)> = (0..spec.repetitions)
        .flat_map(|r| (0..spec.outer_folds).map(move |f| (r, f)))
        .collect();

    let folds = jobs
        .par_iter()
        .map(|&(rep, fold)| {
            run_outer_fold(d, &plans[rep], selector, spec, classifier, tuning, rep, fold, progress).map_err(|e| {
                Error::Fold {
                    repetition: rep,
                    fold,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let repetition_validation: Vec<f64> = (0..spec.repetitions)
        .map(|rep| {
            let correct: usize = folds.iter().filter(|f| f.repetition == rep).map(|f| f.correct).sum();
            correct as f64 / d.n_instances() as f64
        })
        .collect();
    let validation = repetition_validation.iter().sum::<f64>() / spec.repetitions as f64;

    let inner_accuracies: Vec<f64> = folds.iter().map(|f| f.inner_accuracy).collect();
    let (min_test, avg_test, std_test, max_test) = summarize(&inner_accuracies)?;
    let mean_fold_num_features =
        folds.iter().map(|f| f.selected.len()).sum::<usize>() as f64 / folds.len() as f64;

    let final_sel = run_selector(selector, d, classifier, spec.final_seed(), (None, None), progress)
        .map_err(|e| e.context("final selection on the full dataset"))?;

    let (alpha, variance_penalty, ga) = match selector {
        Selector::Ga(sel) => (Some(sel.alpha), Some(sel.variance_penalty), Some(sel.clone())),
        _ => (None, None, None),
    };
    let row = ReportRow {
        method: selector.method(),
        classifier: classifier.kind.to_string(),
        alpha,
        variance_penalty,
        num_features: final_sel.features.len(),
        selected_features: final_sel
            .features
            .iter()
            .map(|&j| d.feature_names()[j].clone())
            .collect(),
        mean_fold_num_features,
        min_test,
        avg_test,
        std_test,
        max_test,
        validation,
        repetition_validation,
        inner_accuracies,
        classifier_spec: Some(classifier.clone()),
        ga,
        nested: Some(spec.clone()),
    };
    row.check()?;
    Ok(NestedOutcome {
        row,
        folds,
        final_selection: final_sel.features,
        final_evolution: final_sel.evolution,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_outer_fold(
    d: &Dataset,
    plan: &FoldPlan,
    selector: &Selector,
    spec: &NestedCvSpec,
    classifier: &ClassifierSpec,
    tuning: Option<&ParamGrid>,
    rep: usize,
    fold: usize,
    progress: Option<ProgressFn<'_>>,
) -> Result<FoldOutcome> {
    let train = plan.train_indices(fold);
    let test = plan.test_indices(fold);
    if !disjoint(&train, &test) || train.len() + test.len() != d.n_instances() {
        return Err(Error::Leakage("outer training rows overlap the test fold".into()));
    }
    let train_d = d.subset_rows(&train)?;
    if train_d.n_instances() != train.len() {
        return Err(Error::Leakage("selector view differs from the training partition".into()));
    }

    let seed = spec.selector_seed(rep, fold);
    let selection = run_selector(selector, &train_d, classifier, seed, (Some(rep), Some(fold)), progress)?;
    let columns = selection.features;

    let (model_spec, inner_accuracy) = match (tuning, selection.scored) {
        (Some(grid), _) => {
            let view = train_d.select_columns(&columns)?;
            let base = classifier.clone().with_seed(seed::derive(seed, &[stream::CLASSIFIER]));
            let best = grid_search(&view, &base, grid, spec.inner_folds, seed::derive(seed, &[stream::INNER_FOLDS]))?;
            (best.spec, best.score)
        }
        (None, Some(scored)) => scored,
        (None, None) => {
            let model_spec = classifier.clone().with_seed(seed::derive(seed, &[stream::CLASSIFIER]));
            let cfg = FitnessConfig {
                alpha: 0.0,
                variance_penalty: false,
                inner_folds: spec.inner_folds,
                classifier: model_spec.clone(),
                fold_seed: seed::derive(seed, &[stream::INNER_FOLDS]),
            };
            let accs = FitnessEvaluator::new(&train_d, cfg)?.fold_accuracies(&columns)?;
            let mean = accs.iter().sum::<f64>() / accs.len() as f64;
            (model_spec, mean)
        }
    };

    let x = d.features();
    let y = d.labels();
    let model = classifiers::train(&model_spec, &train_d.features().select_columns(&columns), train_d.labels())?;
    let predicted = classifiers::predict(&model, &x.select(&test, &columns))?;
    let correct = predicted
        .iter()
        .zip(&test)
        .filter(|(p, &i)| **p == y[i])
        .count();

    Ok(FoldOutcome {
        repetition: rep,
        fold,
        test_indices: test,
        selected: columns,
        model_spec,
        inner_accuracy,
        correct,
        evolution: selection.evolution,
    })
}
