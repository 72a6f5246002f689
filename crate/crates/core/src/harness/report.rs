use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::dataset::{majority_baseline, Dataset};
use crate::error::{invalid, Error, Result};

use super::nested::NestedCvSpec;
use super::select::GaSelector;

/// How the feature subset of a row was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    All,
    Fixed,
    Rfe,
    Ga,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    /// Classifier kind, or `majority` for the baseline row.
    pub classifier: String,
    pub alpha: Option<f64>,
    pub variance_penalty: Option<bool>,
    /// Size of the subset selected on the full dataset.
    pub num_features: usize,
    pub selected_features: Vec<String>,
    /// Mean subset size over the outer-training selections.
    pub mean_fold_num_features: f64,
    pub min_test: f64,
    pub avg_test: f64,
    /// Population standard deviation of `inner_accuracies`.
    pub std_test: f64,
    pub max_test: f64,
    /// Pooled outer-test accuracy, averaged over repetitions.
    pub validation: f64,
    pub repetition_validation: Vec<f64>,
    /// Inner-CV mean test accuracy per (repetition, outer fold), in order.
    pub inner_accuracies: Vec<f64>,
    pub classifier_spec: Option<ClassifierSpec>,
    pub ga: Option<GaSelector>,
    pub nested: Option<NestedCvSpec>,
}

/// `(min, mean, population std, max)`.
pub fn summarize(values: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if values.is_empty() {
        return Err(invalid("summary of an empty sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, mean, var.sqrt(), max))
}

impl ReportRow {
    pub fn baseline(d: &Dataset) -> Self {
        let b = majority_baseline(d);
        ReportRow {
            method: Method::Baseline,
            classifier: "majority".into(),
            alpha: None,
            variance_penalty: None,
            num_features: 0,
            selected_features: Vec::new(),
            mean_fold_num_features: 0.0,
            min_test: b,
            avg_test: b,
            std_test: 0.0,
            max_test: b,
            validation: b,
            repetition_validation: vec![b],
            inner_accuracies: vec![b],
            classifier_spec: None,
            ga: None,
            nested: None,
        }
    }

    /// Report invariants: ordered summary, non-negative spread, and summary
    /// statistics recomputable from the stored accuracies.
    pub fn check(&self) -> Result<()> {
        let ctx = || format!("{:?}/{} row", self.method, self.classifier);
        if !(self.min_test <= self.avg_test && self.avg_test <= self.max_test) {
            return Err(Error::Data(format!(
                "{}: min {} <= avg {} <= max {} violated",
                ctx(),
                self.min_test,
                self.avg_test,
                self.max_test
            )));
        }
        if self.std_test.is_nan() || self.std_test < 0.0 {
            return Err(Error::Data(format!("{}: negative std", ctx())));
        }
        let (min, avg, std, max) = summarize(&self.inner_accuracies)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        if !(close(min, self.min_test) && close(avg, self.avg_test) && close(std, self.std_test) && close(max, self.max_test)) {
            return Err(Error::Data(format!(
                "{}: summary does not match stored accuracies",
                ctx()
            )));
        }
        Ok(())
    }

    fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            format!("{:?}", self.method).to_lowercase(),
            self.classifier.clone(),
            opt(self.alpha.map(|a| a.to_string())),
            opt(self.variance_penalty.map(|v| v.to_string())),
            self.num_features.to_string(),
            format!("{:.4}", self.min_test),
            format!("{:.4}", self.avg_test),
            format!("{:.4}", self.std_test),
            format!("{:.4}", self.max_test),
            format!("{:.4}", self.validation),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_instances: usize,
    pub n_features: usize,
    pub class_names: [String; 2],
    pub class_counts: [usize; 2],
    pub majority_baseline: f64,
}

impl DatasetSummary {
    pub fn of(d: &Dataset) -> Self {
        DatasetSummary {
            n_instances: d.n_instances(),
            n_features: d.n_features(),
            class_names: d.class_names().clone(),
            class_counts: d.class_counts(),
            majority_baseline: majority_baseline(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub master_seed: u64,
    pub dataset: DatasetSummary,
    pub notes: Vec<String>,
    /// Resolved run configuration, filled in by the caller.
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub meta: ReportMeta,
    pub rows: Vec<ReportRow>,
}

pub const STANDARD_NOTES: [&str; 4] = [
    "inner folds are stratified and drawn once per selector run; every genotype of a GA run is scored on the same folds",
    "fold-accuracy variance and test-accuracy std are population statistics (divide by n)",
    "outer folds are plain shuffled folds; validation is pooled accuracy per repetition, averaged over repetitions",
    "the reference 13-feature subset is not published; fixed-list comparisons are by accuracy band only",
];

impl ExperimentReport {
    pub fn new(d: &Dataset, master_seed: u64) -> Self {
        ExperimentReport {
            meta: ReportMeta {
                master_seed,
                dataset: DatasetSummary::of(d),
                notes: STANDARD_NOTES.iter().map(|s| s.to_string()).collect(),
                config: serde_json::Value::Null,
            },
            rows: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rows.iter().try_for_each(ReportRow::check)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Data(format!("report serialization: {e}")))
    }

    /// One line per row: method, classifier, penalty, var_penalty, noF,
    /// min/avg/std/max inner test accuracy, validation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Data(format!("report export: {e}"));
        w.write_record([
            "method",
            "classifier",
            "penalty",
            "var_penalty",
            "noF",
            "min",
            "avg",
            "std",
            "max",
            "validation",
        ])
        .map_err(to_err)?;
        for r in &self.rows {
            w.write_record(r.csv_record()).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::Data(format!("report export: {e}")))
    }

    /// Wide comparison: one line per (method, variance flag, penalty) with a
    /// `noF`/`val` column pair per classifier.
    pub fn write_comparison_csv<W: Write>(&self, out: W) -> Result<()> {
        let kinds: Vec<ClassifierKind> = ClassifierKind::ALL
            .into_iter()
            .filter(|k| self.rows.iter().any(|r| r.classifier == k.as_str()))
            .collect();
        let type_label = |r: &ReportRow| match (r.method, r.variance_penalty) {
            (Method::Ga, Some(true)) => "varpenalty".to_string(),
            (Method::Ga, _) => "evolutive".to_string(),
            (m, _) => format!("{m:?}").to_lowercase(),
        };
        let mut groups: Vec<(String, Option<f64>)> = Vec::new();
        for r in &self.rows {
            if r.method == Method::Baseline {
                continue;
            }
            let key = (type_label(r), r.alpha);
            if !groups.contains(&key) {
                groups.push(key);
            }
        }

        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Data(format!("comparison export: {e}"));
        let mut header = vec!["type".to_string(), "penalty".to_string()];
        for k in &kinds {
            header.push(format!("{k}_noF"));
            header.push(format!("{k}_val"));
        }
        w.write_record(&header).map_err(to_err)?;
        for (label, alpha) in &groups {
            let mut rec = vec![label.clone(), alpha.map(|a| a.to_string()).unwrap_or_default()];
            for k in &kinds {
                match self
                    .rows
                    .iter()
                    .find(|r| &type_label(r) == label && r.alpha == *alpha && r.classifier == k.as_str())
                {
                    Some(r) => {
                        rec.push(r.num_features.to_string());
                        rec.push(format!("{:.4}", r.validation));
                    }
                    None => {
                        rec.push(String::new());
                        rec.push(String::new());
                    }
                }
            }
            w.write_record(&rec).map_err(to_err)?;
        }
        if let Some(b) = self.rows.iter().find(|r| r.method == Method::Baseline) {
            let mut rec = vec!["baseline".to_string(), String::new()];
            for _ in &kinds {
                rec.push("0".into());
                rec.push(format!("{:.4}", b.validation));
            }
            w.write_record(&rec).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::Data(format!("comparison export: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let (min, avg, std, max) = summarize(&[0.5, 0.7, 0.6]).unwrap();
        assert_eq!((min, max), (0.5, 0.7));
        assert!((avg - 0.6).abs() < 1e-15);
        assert!((std - (0.02f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn check_catches_tampering() {
        let mut row = ReportRow::baseline(
            &Dataset::from_parts(
                crate::matrix::Matrix::new(vec![0.0, 1.0, 2.0], 3, 1).unwrap(),
                vec![0, 0, 1],
            )
            .unwrap(),
        );
        row.check().unwrap();
        row.avg_test += 0.1;
        assert!(row.check().is_err());
    }
}
