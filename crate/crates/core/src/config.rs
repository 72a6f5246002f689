//! TOML run configuration shared by the command-line tool.
//!
//! ```toml
//! dataset = "toxicity.csv"
//! label_column = "Class"
//! seed = 7
//! classifiers = ["knn", "dtc"]
//!
//! [ga]
//! p_crossover = 0.75
//! p_mutation = 0.15
//! init_prob = 0.01
//! population = 50
//! generations = 300
//!
//! [fitness]
//! penalty = [0.3, 0.5, 0.7]
//! var_penalty = [false, true]
//! ```
//!
//! Relative paths are resolved against the directory holding the file and
//! stored as absolute paths.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{depth_serde, ClassifierKind, ClassifierSpec, MaxFeatures};
use crate::dataset::{load_csv, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::harness::{grid_kind, NestedCvSpec, ParamGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub per_gene_flip: f64,
    pub init_prob: f64,
    pub population: usize,
    pub generations: usize,
    pub elitism: usize,
}

impl Default for GaSection {
    fn default() -> Self {
        let g = GaConfig::default();
        GaSection {
            p_crossover: g.p_crossover,
            p_mutation: g.p_mutation,
            per_gene_flip: g.per_gene_flip,
            init_prob: g.init_prob,
            population: g.population,
            generations: g.generations,
            elitism: g.elitism,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessSection {
    /// Reduction weights (alpha) to sweep.
    pub penalty: Vec<f64>,
    /// Variance-penalty settings to sweep.
    pub var_penalty: Vec<bool>,
}

impl Default for FitnessSection {
    fn default() -> Self {
        FitnessSection {
            penalty: vec![0.3, 0.5, 0.7],
            var_penalty: vec![false, true],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NestedSection {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub repetitions: usize,
}

impl Default for NestedSection {
    fn default() -> Self {
        let n = NestedCvSpec::default();
        NestedSection {
            outer_folds: n.outer_folds,
            inner_folds: n.inner_folds,
            repetitions: n.repetitions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Depth(#[serde(with = "depth_serde")] pub Option<usize>);

/// Overrides applied to the default spec of every classifier kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_neighbors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<Depth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_samples_split: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_samples_leaf: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_features: Option<MaxFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_estimators: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeSection {
    /// File with one feature name per line; takes precedence over `target`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features_file: Option<PathBuf>,
    pub target: usize,
    pub ranking: ClassifierKind,
    /// Run RFE inside every outer fold instead of once on the full data.
    pub inside_cv: bool,
    pub grid_search: bool,
}

impl Default for RfeSection {
    fn default() -> Self {
        RfeSection {
            features_file: None,
            target: 13,
            ranking: ClassifierKind::Dtc,
            inside_cv: false,
            grid_search: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub classifiers: Vec<ClassifierKind>,
    pub ga: GaSection,
    pub fitness: FitnessSection,
    pub nested: NestedSection,
    pub model: ModelSection,
    pub rfe: RfeSection,
    /// Grid per classifier name; kinds without an entry use the standard grid.
    pub grid: BTreeMap<String, ParamGrid>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            label_column: None,
            seed: 0,
            out: None,
            classifiers: ClassifierKind::ALL.to_vec(),
            ga: GaSection::default(),
            fitness: FitnessSection::default(),
            nested: NestedSection::default(),
            model: ModelSection::default(),
            rfe: RfeSection::default(),
            grid: BTreeMap::new(),
        }
    }
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Read `path` and resolve relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = std::path::absolute(path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        cfg.dataset = cfg.dataset.map(|p| absolute(&base, &p));
        cfg.out = cfg.out.map(|p| absolute(&base, &p));
        cfg.rfe.features_file = cfg.rfe.features_file.map(|p| absolute(&base, &p));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        match &self.dataset {
            None => return cfg_err("no dataset given".into()),
            Some(p) if !p.is_file() => return cfg_err(format!("dataset {} does not exist", p.display())),
            _ => {}
        }
        if let Some(p) = &self.rfe.features_file {
            if !p.is_file() {
                return cfg_err(format!("features_file {} does not exist", p.display()));
            }
        }
        if self.classifiers.is_empty() {
            return cfg_err("classifiers list is empty".into());
        }
        if self.fitness.penalty.is_empty() || self.fitness.var_penalty.is_empty() {
            return cfg_err("fitness.penalty and fitness.var_penalty must be non-empty".into());
        }
        if let Some(a) = self.fitness.penalty.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return cfg_err(format!("penalty {a} outside [0, 1]"));
        }
        for name in self.grid.keys() {
            grid_kind(name)?;
        }
        self.ga_config().validate()?;
        for spec in self.classifier_specs() {
            spec.validate()?;
        }
        let n = &self.nested;
        if n.outer_folds < 2 || n.inner_folds < 2 || n.repetitions == 0 {
            return cfg_err("nested needs outer_folds >= 2, inner_folds >= 2, repetitions >= 1".into());
        }
        Ok(())
    }

    pub fn label(&self) -> LabelColumn {
        LabelColumn::from_option(self.label_column.as_deref())
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        let path = self.dataset.as_ref().ok_or_else(|| Error::Config("no dataset given".into()))?;
        load_csv(path, &self.label())
    }

    /// GA settings; the run seed is filled in per selector run.
    pub fn ga_config(&self) -> GaConfig {
        let g = &self.ga;
        GaConfig {
            p_crossover: g.p_crossover,
            p_mutation: g.p_mutation,
            per_gene_flip: g.per_gene_flip,
            init_prob: g.init_prob,
            population: g.population,
            generations: g.generations,
            elitism: g.elitism,
            seed: 0,
        }
    }

    pub fn nested_spec(&self) -> NestedCvSpec {
        NestedCvSpec {
            outer_folds: self.nested.outer_folds,
            inner_folds: self.nested.inner_folds,
            repetitions: self.nested.repetitions,
            seed: self.seed,
        }
    }

    pub fn classifier_spec(&self, kind: ClassifierKind) -> ClassifierSpec {
        let m = &self.model;
        let mut s = ClassifierSpec::default_for(kind);
        if let Some(v) = m.k_neighbors {
            s.k_neighbors = v;
        }
        if let Some(Depth(v)) = m.max_depth {
            s.max_depth = v;
        }
        if let Some(v) = m.min_samples_split {
            s.min_samples_split = v;
        }
        if let Some(v) = m.min_samples_leaf {
            s.min_samples_leaf = v;
        }
        if let Some(v) = m.max_features {
            s.max_features = v;
        }
        if let Some(v) = m.n_estimators {
            s.n_estimators = v;
        }
        s
    }

    pub fn classifier_specs(&self) -> Vec<ClassifierSpec> {
        self.classifiers.iter().map(|&k| self.classifier_spec(k)).collect()
    }

    pub fn grid_for(&self, kind: ClassifierKind, n_features: usize) -> ParamGrid {
        self.grid
            .get(kind.as_str())
            .cloned()
            .unwrap_or_else(|| ParamGrid::standard(kind, n_features))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot render config: {e}")))
    }

    /// Everything that affects results, as embedded in emitted files. The
    /// output directory is left out so runs into different directories
    /// produce identical files.
    pub fn embedded(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.out = None;
        serde_json::to_value(&c).expect("config is always representable as JSON")
    }
}
