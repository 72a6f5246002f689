//! Experiment harness: baselines, RFE, GA-driven selection, nested
//! cross-validation and report assembly.

mod grid;
mod nested;
mod report;
mod select;
pub mod synthetic;

pub use grid::{grid_kind, grid_search, GridResult, ParamGrid};
pub use nested::{nested_validate, FoldOutcome, NestedCvSpec, NestedOutcome, Progress, ProgressFn, Selector};
pub use report::{summarize, DatasetSummary, ExperimentReport, Method, ReportMeta, ReportRow, STANDARD_NOTES};
pub use select::{ga_select, ga_select_with_progress, rfe_select, GaSelector};

use crate::classifiers::ClassifierSpec;
use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::ga::GaConfig;

/// GA sweep over classifiers, penalty weights and the variance flag.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub classifiers: Vec<ClassifierSpec>,
    pub alphas: Vec<f64>,
    pub variance_flags: Vec<bool>,
    pub ga: GaConfig,
    pub nested: NestedCvSpec,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: ExperimentReport,
    /// One entry per GA row of the report, same order.
    pub runs: Vec<NestedOutcome>,
}

/// Run every (flag, classifier, alpha) combination under nested validation.
/// The report starts with the majority baseline row.
pub fn sweep(d: &Dataset, plan: &SweepPlan, progress: Option<ProgressFn<'_>>) -> Result<SweepOutcome> {
    if plan.classifiers.is_empty() || plan.alphas.is_empty() || plan.variance_flags.is_empty() {
        return Err(invalid("sweep needs at least one classifier, penalty and variance flag"));
    }
    let mut report = ExperimentReport::new(d, plan.nested.seed);
    report.rows.push(ReportRow::baseline(d));
    let mut runs = Vec::new();
    for &flag in &plan.variance_flags {
        for clf in &plan.classifiers {
            for &alpha in &plan.alphas {
                let selector = Selector::Ga(GaSelector {
                    ga: plan.ga.clone(),
                    alpha,
                    variance_penalty: flag,
                    inner_folds: plan.nested.inner_folds,
                });
                let out = nested_validate(d, &selector, &plan.nested, clf, None, progress)
                    .map_err(|e| e.context(format!("{} alpha={alpha} var={flag}", clf.kind)))?;
                report.rows.push(out.row.clone());
                runs.push(out);
            }
        }
    }
    report.validate()?;
    Ok(SweepOutcome { report, runs })
}
