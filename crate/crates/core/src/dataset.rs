//! Tabular binary-classification data: loading, validation, baselines and
//! cross-validation fold plans.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Binary classification dataset. Class id 0 is the majority class when
/// loaded from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: [String; 2],
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: [String; 2],
    ) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::Data(format!(
                "need at least 2 instances, got {}",
                features.rows()
            )));
        }
        if features.cols() < 1 {
            return Err(Error::Data("need at least 1 feature".into()));
        }
        if labels.len() != features.rows() {
            return Err(Error::Data(format!(
                "{} labels for {} instances",
                labels.len(),
                features.rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Data(format!("label {bad} is not a binary class id")));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Data(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate feature name {name:?}")));
            }
        }
        for i in 0..features.rows() {
            if let Some(j) = features.row(i).iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "non-finite value at instance {i}, feature {:?}",
                    feature_names[j]
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
            class_names,
        })
    }

    /// Convenience constructor with generated names `f0, f1, ...` and classes `0`, `1`.
    pub fn from_parts(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let names = (0..features.cols()).map(|j| format!("f{j}")).collect();
        Dataset::new(features, labels, names, ["0".into(), "1".into()])
    }

    pub fn n_instances(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String; 2] {
        &self.class_names
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows `indices` in the given order; feature space unchanged.
    pub fn subset_rows(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.n_instances()) {
            return Err(invalid(format!("instance index {i} out of range")));
        }
        Dataset::new(
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Columns `indices` in the given order, with their names.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&j) = indices.iter().find(|&&j| j >= self.n_features()) {
            return Err(invalid(format!("feature index {j} out of range")));
        }
        Dataset::new(
            self.features.select_columns(indices),
            self.labels.clone(),
            indices.iter().map(|&j| self.feature_names[j].clone()).collect(),
            self.class_names.clone(),
        )
    }

    /// Resolve feature names to column indices.
    pub fn feature_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let lookup: HashMap<&str, usize> = self
            .feature_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        names
            .iter()
            .map(|n| {
                lookup
                    .get(n.as_ref())
                    .copied()
                    .ok_or_else(|| Error::Data(format!("unknown feature {:?}", n.as_ref())))
            })
            .collect()
    }

    /// Write features followed by a `label_name` column holding class names.
    /// Values round-trip exactly through [`load_csv`].
    pub fn write_csv<W: Write>(&self, out: W, label_name: &str) -> Result<()> {
        let to_err = |e: csv::Error| Error::Data(format!("dataset export: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(label_name);
        w.write_record(&header).map_err(to_err)?;
        for i in 0..self.n_instances() {
            let mut rec: Vec<String> = self.features.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.class_names[self.labels[i]].clone());
            w.write_record(&rec).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::Data(format!("dataset export: {e}")))
    }
}

/// Which column holds the class label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelColumn {
    #[default]
    Last,
    Named(String),
}

impl LabelColumn {
    pub fn from_option(name: Option<&str>) -> Self {
        match name {
            Some(n) => LabelColumn::Named(n.to_string()),
            None => LabelColumn::Last,
        }
    }
}

/// Load a comma-separated file with a header row.
///
/// The label column must hold exactly two distinct values; the more frequent
/// one becomes class 0 (ties go to the value seen first). Every other column
/// must parse as a finite number.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let cell_err = |row: usize, column: &str, message: String| Error::Cell {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message,
    };

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| cell_err(1, "<header>", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 2 {
        return Err(cell_err(
            1,
            "<header>",
            "need at least one feature column and a label column".into(),
        ));
    }
    let label_idx = match label_column {
        LabelColumn::Last => headers.len() - 1,
        LabelColumn::Named(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| cell_err(1, name, "label column not found in header".into()))?,
    };

    let mut seen = HashSet::new();
    for (j, h) in headers.iter().enumerate() {
        if j != label_idx && !seen.insert(h.as_str()) {
            return Err(cell_err(1, h, "duplicate feature name".into()));
        }
    }
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            cell_err(line, "<record>", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                if cell.is_empty() {
                    return Err(cell_err(line, &headers[j], "missing label".into()));
                }
                raw_labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                return Err(cell_err(line, &headers[j], "missing value".into()));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| cell_err(line, &headers[j], format!("non-numeric value {cell:?}")))?;
            if !v.is_finite() {
                return Err(cell_err(line, &headers[j], format!("non-finite value {cell:?}")));
            }
            values.push(v);
        }
    }

    // Distinct label values in first-appearance order.
    let mut distinct: Vec<(String, usize)> = Vec::new();
    for l in &raw_labels {
        match distinct.iter_mut().find(|(name, _)| name == l) {
            Some((_, c)) => *c += 1,
            None => distinct.push((l.clone(), 1)),
        }
    }
    if distinct.len() != 2 {
        return Err(cell_err(
            1,
            &headers[label_idx],
            format!("label column must hold exactly 2 classes, found {}", distinct.len()),
        ));
    }
    let majority = if distinct[1].1 > distinct[0].1 { 1 } else { 0 };
    let class_names = [
        distinct[majority].0.clone(),
        distinct[1 - majority].0.clone(),
    ];
    let labels = raw_labels
        .iter()
        .map(|l| usize::from(*l != class_names[0]))
        .collect();

    let n = raw_labels.len();
    let features = Matrix::new(values, n, feature_names.len())?;
    Dataset::new(features, labels, feature_names, class_names)
        .map_err(|e| e.context(path.display().to_string()))
}

/// Accuracy of always predicting the most frequent class.
pub fn majority_baseline(d: &Dataset) -> f64 {
    let counts = d.class_counts();
    counts[0].max(counts[1]) as f64 / d.n_instances() as f64
}

/// Assignment of instances to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn n_instances(&self) -> usize {
        self.assignments.len()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Held-out instance indices of `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Training instance indices for `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Audit export: `instance_index,fold_id`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Data(format!("fold plan export: {e}"));
        w.write_record(["instance_index", "fold_id"]).map_err(to_err)?;
        for (i, f) in self.assignments.iter().enumerate() {
            w.write_record([i.to_string(), f.to_string()]).map_err(to_err)?;
        }
        w.flush()
            .map_err(|e| Error::Data(format!("fold plan export: {e}")))?;
        Ok(())
    }
}

/// Split `d` into `k` folds.
///
/// Instances are shuffled with a seeded RNG and dealt round-robin. With
/// `stratified`, each class is shuffled separately and the classes are dealt
/// one after another, so per-fold class counts are within one of the
/// proportional share whenever `k` does not exceed the class count.
pub fn make_folds(d: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    make_folds_for_labels(d.labels(), k, seed, stratified)
}

pub fn make_folds_for_labels(
    labels: &[usize],
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 {
        return Err(invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(invalid(format!("{k} folds for {n} instances")));
    }
    let mut rng = seed::rng(seed);
    let order: Vec<usize> = if stratified {
        let mut order = Vec::with_capacity(n);
        for class in 0..2 {
            let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            members.shuffle(&mut rng);
            order.extend(members);
        }
        order
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    };
    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = pos % k;
    }
    Ok(FoldPlan {
        n_folds: k,
        assignments,
        seed,
        stratified,
    })
}
