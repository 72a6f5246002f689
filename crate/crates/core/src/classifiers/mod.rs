//! Wrapper classifiers behind a single train/predict interface.

mod forest;
mod knn;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

pub use forest::{bootstrap_sample, Forest};
pub use knn::Knn;
pub use tree::{gini, DecisionTree, Node, SplitMode, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Dtc,
    Rfc,
    Etc,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Knn,
        ClassifierKind::Dtc,
        ClassifierKind::Rfc,
        ClassifierKind::Etc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Dtc => "dtc",
            ClassifierKind::Rfc => "rfc",
            ClassifierKind::Etc => "etc",
        }
    }

    pub fn is_tree_based(self) -> bool {
        !matches!(self, ClassifierKind::Knn)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "dtc" => Ok(ClassifierKind::Dtc),
            "rfc" => Ok(ClassifierKind::Rfc),
            "etc" => Ok(ClassifierKind::Etc),
            "xgbc" => Err(Error::Unsupported(
                "gradient boosting (xgbc) is not implemented".into(),
            )),
            other => Err(Error::Unsupported(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Number of candidate features examined at each tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaxFeatures {
    All,
    /// `floor(sqrt(n_features))`, at least 1.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let n = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Count(c) => c.min(n_features),
        };
        n.max(1)
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::Count(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CountOrWord {
    Count(usize),
    Word(String),
}

impl Serialize for MaxFeatures {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MaxFeatures::Count(c) => s.serialize_u64(*c as u64),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for MaxFeatures {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match CountOrWord::deserialize(d)? {
            CountOrWord::Count(0) => Err(serde::de::Error::custom("max_features must be >= 1")),
            CountOrWord::Count(c) => Ok(MaxFeatures::Count(c)),
            CountOrWord::Word(w) => match w.to_ascii_lowercase().as_str() {
                "all" | "none" => Ok(MaxFeatures::All),
                "sqrt" => Ok(MaxFeatures::Sqrt),
                _ => Err(serde::de::Error::custom(format!("bad max_features {w:?}"))),
            },
        }
    }
}

/// Tree depth limit; `None` is unlimited. Serialized as an integer or `"none"`
/// because the config format has no null.
pub mod depth_serde {
    use super::CountOrWord;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(d) => s.serialize_u64(*d as u64),
            None => s.serialize_str("none"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        from_repr(CountOrWord::deserialize(d)?).map_err(serde::de::Error::custom)
    }

    pub(super) fn from_repr(v: CountOrWord) -> Result<Option<usize>, String> {
        match v {
            CountOrWord::Count(0) => Err("max_depth must be >= 1".into()),
            CountOrWord::Count(c) => Ok(Some(c)),
            CountOrWord::Word(w) if w.eq_ignore_ascii_case("none") => Ok(None),
            CountOrWord::Word(w) => Err(format!("bad max_depth {w:?}")),
        }
    }

    pub mod list {
        use super::super::CountOrWord;
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Option<usize>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for d in v {
                match d {
                    Some(d) => seq.serialize_element(d)?,
                    None => seq.serialize_element("none")?,
                }
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Option<usize>>, D::Error> {
            Vec::<CountOrWord>::deserialize(d)?
                .into_iter()
                .map(|v| super::from_repr(v).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// Classifier hyperparameters. Fields that do not apply to `kind` are
/// ignored but kept so reports record them verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub k_neighbors: usize,
    #[serde(with = "depth_serde")]
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub n_estimators: usize,
    pub seed: u64,
}

impl ClassifierSpec {
    /// Defaults used inside wrapper fitness: 1-NN, fully grown trees,
    /// 100-tree forests over `sqrt` candidate features.
    pub fn default_for(kind: ClassifierKind) -> Self {
        let max_features = match kind {
            ClassifierKind::Rfc | ClassifierKind::Etc => MaxFeatures::Sqrt,
            _ => MaxFeatures::All,
        };
        ClassifierSpec {
            kind,
            k_neighbors: 1,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features,
            n_estimators: 100,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(invalid("k_neighbors must be >= 1"));
        }
        if self.max_depth == Some(0) {
            return Err(invalid("max_depth must be >= 1"));
        }
        if self.min_samples_split < 2 {
            return Err(invalid("min_samples_split must be >= 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(invalid("min_samples_leaf must be >= 1"));
        }
        if self.min_samples_leaf > self.min_samples_split {
            return Err(invalid(format!(
                "min_samples_leaf ({}) exceeds min_samples_split ({})",
                self.min_samples_leaf, self.min_samples_split
            )));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(invalid("max_features must be >= 1"));
        }
        if self.n_estimators == 0 {
            return Err(invalid("n_estimators must be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn tree_params(&self, n_features: usize, mode: SplitMode) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features.resolve(n_features),
            mode,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ModelState {
    Knn(Knn),
    Tree(DecisionTree),
    Forest(Forest),
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    n_features: usize,
    state: ModelState,
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    /// Mean impurity decrease per feature, normalized to sum to 1
    /// (all zeros when no split was made). `None` for kNN.
    pub fn feature_importances(&self) -> Option<Vec<f64>> {
        let raw = match &self.state {
            ModelState::Knn(_) => return None,
            ModelState::Tree(t) => t.normalized_importances(),
            ModelState::Forest(f) => f.importances(),
        };
        Some(raw)
    }
}

/// Majority class of `y`; ties go to class 0.
pub(crate) fn majority_class(y: impl IntoIterator<Item = usize>) -> usize {
    let mut counts = [0usize; 2];
    for l in y {
        counts[l] += 1;
    }
    usize::from(counts[1] > counts[0])
}

pub fn train(spec: &ClassifierSpec, x: &Matrix, y: &[usize]) -> Result<TrainedModel> {
    spec.validate()?;
    if x.rows() == 0 || x.cols() == 0 {
        return Err(invalid("empty training matrix"));
    }
    if y.len() != x.rows() {
        return Err(invalid(format!(
            "{} labels for {} training rows",
            y.len(),
            x.rows()
        )));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(invalid("labels must be 0 or 1"));
    }
    let state = match spec.kind {
        ClassifierKind::Knn => ModelState::Knn(Knn::fit(x, y, spec.k_neighbors)),
        ClassifierKind::Dtc => {
            let params = spec.tree_params(x.cols(), SplitMode::Best);
            let sample: Vec<usize> = (0..x.rows()).collect();
            let mut rng = crate::seed::rng(spec.seed);
            ModelState::Tree(DecisionTree::fit(x, y, &sample, &params, &mut rng))
        }
        ClassifierKind::Rfc | ClassifierKind::Etc => ModelState::Forest(Forest::fit(spec, x, y)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: x.cols(),
        state,
    })
}

pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<usize>> {
    if x.cols() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            actual: x.cols(),
        });
    }
    let out = (0..x.rows())
        .map(|i| {
            let row = x.row(i);
            match &model.state {
                ModelState::Knn(k) => k.predict_row(row),
                ModelState::Tree(t) => t.predict_row(row),
                ModelState::Forest(f) => f.predict_row(row),
            }
        })
        .collect();
    Ok(out)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(invalid("accuracy of an empty prediction"));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}
