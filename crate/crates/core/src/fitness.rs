//! Wrapper fitness: cross-validated accuracy of a classifier restricted to
//! the selected features, traded off against subset size and, optionally,
//! against the spread of per-fold accuracies.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec};
use crate::dataset::{make_folds, Dataset, FoldPlan};
use crate::error::{invalid, Error, Result};
use crate::ga::{Evaluator, Genotype};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Weight of the reduction term.
    pub alpha: f64,
    pub variance_penalty: bool,
    pub inner_folds: usize,
    pub classifier: ClassifierSpec,
    pub fold_seed: u64,
}

impl FitnessConfig {
    pub fn new(alpha: f64, variance_penalty: bool, classifier: ClassifierSpec) -> Self {
        FitnessConfig {
            alpha,
            variance_penalty,
            inner_folds: 10,
            classifier,
            fold_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.inner_folds < 2 {
            return Err(invalid("inner_folds must be >= 2"));
        }
        self.classifier.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub fold_accuracies: Vec<f64>,
    /// Mean of `fold_accuracies`.
    pub effectiveness: f64,
    /// Population variance of `fold_accuracies`.
    pub variance: f64,
    pub num_selected: usize,
    pub num_total: usize,
    pub alpha: f64,
    pub variance_penalty: bool,
    pub fitness: f64,
}

impl FitnessReport {
    /// Assemble a report from per-fold accuracies.
    pub fn from_folds(
        fold_accuracies: Vec<f64>,
        num_selected: usize,
        num_total: usize,
        alpha: f64,
        variance_penalty: bool,
    ) -> Result<Self> {
        if fold_accuracies.is_empty() {
            return Err(invalid("no fold accuracies"));
        }
        let k = fold_accuracies.len() as f64;
        let effectiveness = fold_accuracies.iter().sum::<f64>() / k;
        let variance = fold_accuracies
            .iter()
            .map(|a| (a - effectiveness).powi(2))
            .sum::<f64>()
            / k;
        let fitness = if variance_penalty {
            fitness_eq2(effectiveness, variance, num_selected, num_total, alpha)?
        } else {
            fitness_eq1(effectiveness, num_selected, num_total, alpha)?
        };
        Ok(FitnessReport {
            fold_accuracies,
            effectiveness,
            variance,
            num_selected,
            num_total,
            alpha,
            variance_penalty,
            fitness,
        })
    }

    /// Fitness recomputed from the stored components.
    pub fn recompute(&self) -> Result<f64> {
        if self.variance_penalty {
            fitness_eq2(self.effectiveness, self.variance, self.num_selected, self.num_total, self.alpha)
        } else {
            fitness_eq1(self.effectiveness, self.num_selected, self.num_total, self.alpha)
        }
    }
}

fn check_domain(effectiveness: f64, num_selected: usize, num_total: usize, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&effectiveness) {
        return Err(invalid(format!("effectiveness {effectiveness} outside [0, 1]")));
    }
    if num_total == 0 {
        return Err(invalid("num_total must be >= 1"));
    }
    if num_selected > num_total {
        return Err(invalid(format!("{num_selected} selected of {num_total} features")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(())
}

fn reduction(num_selected: usize, num_total: usize) -> f64 {
    (num_total - num_selected) as f64 / num_total as f64
}

/// `(1 - alpha) * effectiveness + alpha * (|F| - |S|) / |F|`
pub fn fitness_eq1(effectiveness: f64, num_selected: usize, num_total: usize, alpha: f64) -> Result<f64> {
    check_domain(effectiveness, num_selected, num_total, alpha)?;
    Ok((1.0 - alpha) * effectiveness + alpha * reduction(num_selected, num_total))
}

/// `(1 - alpha) * (effectiveness - variance) + alpha * (|F| - |S|) / |F|`
pub fn fitness_eq2(
    effectiveness: f64,
    variance: f64,
    num_selected: usize,
    num_total: usize,
    alpha: f64,
) -> Result<f64> {
    check_domain(effectiveness, num_selected, num_total, alpha)?;
    if variance.is_nan() || variance < 0.0 {
        return Err(invalid(format!("variance {variance} is negative")));
    }
    Ok((1.0 - alpha) * (effectiveness - variance) + alpha * reduction(num_selected, num_total))
}

/// Fitness evaluator bound to one dataset and one fold plan.
///
/// The fold plan is drawn once from `fold_seed` and reused for every
/// genotype. Results are memoized by genotype; the cache only avoids
/// recomputation of a pure function.
pub struct FitnessEvaluator<'a> {
    data: &'a Dataset,
    cfg: FitnessConfig,
    plan: FoldPlan,
    folds: Vec<(Vec<usize>, Vec<usize>)>,
    cache: Mutex<HashMap<Genotype, FitnessReport>>,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(data: &'a Dataset, cfg: FitnessConfig) -> Result<Self> {
        cfg.validate()?;
        let plan = make_folds(data, cfg.inner_folds, cfg.fold_seed, true)?;
        let folds = (0..plan.n_folds)
            .map(|f| (plan.train_indices(f), plan.test_indices(f)))
            .collect();
        Ok(FitnessEvaluator {
            data,
            cfg,
            plan,
            folds,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &FitnessConfig {
        &self.cfg
    }

    pub fn fold_plan(&self) -> &FoldPlan {
        &self.plan
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("fitness cache poisoned").len()
    }

    /// Per-fold test accuracies of the configured classifier on `columns`.
    pub fn fold_accuracies(&self, columns: &[usize]) -> Result<Vec<f64>> {
        let x = self.data.features();
        let y = self.data.labels();
        self.folds
            .iter()
            .map(|(train, test)| {
                if !disjoint(train, test) {
                    return Err(Error::Leakage("inner training fold overlaps its test fold".into()));
                }
                let y_train: Vec<usize> = train.iter().map(|&i| y[i]).collect();
                let y_test: Vec<usize> = test.iter().map(|&i| y[i]).collect();
                let model = classifiers::train(&self.cfg.classifier, &x.select(train, columns), &y_train)?;
                if model.n_features() != columns.len() {
                    return Err(Error::Leakage(format!(
                        "classifier saw {} columns, {} selected",
                        model.n_features(),
                        columns.len()
                    )));
                }
                let pred = classifiers::predict(&model, &x.select(test, columns))?;
                classifiers::accuracy(&pred, &y_test)
            })
            .collect()
    }

    fn compute(&self, g: &Genotype) -> Result<FitnessReport> {
        if g.len() != self.data.n_features() {
            return Err(invalid(format!(
                "genotype has {} genes, dataset has {} features",
                g.len(),
                self.data.n_features()
            )));
        }
        let columns = g.selected();
        if columns.is_empty() {
            return Err(invalid("empty genotype"));
        }
        let accs = self.fold_accuracies(&columns)?;
        FitnessReport::from_folds(accs, columns.len(), g.len(), self.cfg.alpha, self.cfg.variance_penalty)
    }
}

impl Evaluator for FitnessEvaluator<'_> {
    fn evaluate(&self, g: &Genotype) -> Result<FitnessReport> {
        if let Some(hit) = self.cache.lock().expect("fitness cache poisoned").get(g) {
            return Ok(hit.clone());
        }
        let report = self.compute(g)?;
        self.cache
            .lock()
            .expect("fitness cache poisoned")
            .insert(g.clone(), report.clone());
        Ok(report)
    }
}

/// Sorted-slice disjointness check.
pub(crate) fn disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Evaluate one genotype on `d`.
pub fn evaluate(g: &Genotype, d: &Dataset, cfg: &FitnessConfig) -> Result<FitnessReport> {
    FitnessEvaluator::new(d, cfg.clone())?.compute(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eq1_edge_cases() {
        assert_eq!(fitness_eq1(0.73, 5, 10, 0.0).unwrap(), 0.73);
        assert_eq!(fitness_eq1(0.2, 0, 10, 1.0).unwrap(), 1.0);
        let v = fitness_eq1(0.7479, 13, 1203, 0.3).unwrap();
        assert!((v - 0.820_288_1).abs() < 1e-7, "{v}");
    }

    #[test]
    fn eq2_edge_cases() {
        assert_eq!(
            fitness_eq2(0.6, 0.0, 3, 20, 0.4).unwrap(),
            fitness_eq1(0.6, 3, 20, 0.4).unwrap()
        );
        let v = fitness_eq2(0.66, 0.01, 4, 1203, 0.5).unwrap();
        assert!((v - 0.823_337_5).abs() < 1e-7, "{v}");
        assert_eq!(
            fitness_eq2(0.1, 0.2, 4, 10, 1.0).unwrap(),
            fitness_eq2(0.9, 0.0, 4, 10, 1.0).unwrap()
        );
    }

    #[test]
    fn domain_errors() {
        assert!(fitness_eq1(1.1, 1, 2, 0.5).is_err());
        assert!(fitness_eq1(0.5, 3, 2, 0.5).is_err());
        assert!(fitness_eq1(0.5, 0, 0, 0.5).is_err());
        assert!(fitness_eq1(0.5, 1, 2, -0.1).is_err());
        assert!(fitness_eq2(0.5, -0.01, 1, 2, 0.5).is_err());
        assert!(fitness_eq2(0.5, f64::NAN, 1, 2, 0.5).is_err());
    }

    #[test]
    fn report_components_are_consistent() {
        let r = FitnessReport::from_folds(vec![1.0, 0.5, 0.75, 0.75], 2, 8, 0.3, true).unwrap();
        assert_eq!(r.effectiveness, 0.75);
        assert!((r.variance - 0.03125).abs() < 1e-15);
        assert_eq!(r.fitness, r.recompute().unwrap());
    }

    #[test]
    fn disjointness() {
        assert!(disjoint(&[0, 2, 4], &[1, 3]));
        assert!(!disjoint(&[0, 2, 4], &[4]));
        assert!(disjoint(&[], &[1]));
    }
}
