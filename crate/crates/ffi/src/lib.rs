//! C interface to `evofs`.
//!
//! Every fallible function returns an [`EvofsStatus`]; on failure a
//! description is available from [`evofs_last_error_message`] on the same
//! thread. Objects crossing the boundary are opaque handles that must be
//! released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use evofs::classifiers::{ClassifierKind, ClassifierSpec, MaxFeatures};
use evofs::dataset::{load_csv, majority_baseline, Dataset, LabelColumn};
use evofs::fitness::{fitness_eq1, fitness_eq2, FitnessConfig};
use evofs::ga::{GaConfig, GenerationStats, Genotype};
use evofs::harness::ga_select;
use evofs::matrix::Matrix;
use evofs::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvofsStatus {
    Ok = 0,
    NullPointer = 1,
    Io = 2,
    Parse = 3,
    Data = 4,
    InvalidArgument = 5,
    Dimension = 6,
    Unsupported = 7,
    Leakage = 8,
    Config = 9,
    Utf8 = 10,
    Panic = 11,
}

impl EvofsStatus {
    fn of(e: &Error) -> Self {
        match e.category() {
            "io" => EvofsStatus::Io,
            "parse" => EvofsStatus::Parse,
            "data" => EvofsStatus::Data,
            "dimension" => EvofsStatus::Dimension,
            "unsupported" => EvofsStatus::Unsupported,
            "leakage" => EvofsStatus::Leakage,
            "config" => EvofsStatus::Config,
            _ => EvofsStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: EvofsStatus, msg: impl Into<String>) -> EvofsStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), EvofsStatus>) -> EvofsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EvofsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(EvofsStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: evofs::Result<T>) -> Result<T, EvofsStatus> {
    r.map_err(|e| fail(EvofsStatus::of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), EvofsStatus> {
    if p.is_null() {
        Err(fail(EvofsStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, EvofsStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EvofsStatus::Utf8, format!("{name} is not valid UTF-8")))
}

/// Message of the last failure on the calling thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn evofs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn evofs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque dataset handle.
pub struct EvofsDataset {
    inner: Dataset,
}

/// Load a CSV with a header row. `label_column` may be NULL to use the last
/// column.
///
/// # Safety
/// `path` and a non-NULL `label_column` must be NUL-terminated strings;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    out: *mut *mut EvofsDataset,
) -> EvofsStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = str_arg(path, "path")?;
        let label = if label_column.is_null() {
            LabelColumn::Last
        } else {
            LabelColumn::Named(str_arg(label_column, "label_column")?.to_string())
        };
        let inner = lift(load_csv(path, &label))?;
        *out = Box::into_raw(Box::new(EvofsDataset { inner }));
        Ok(())
    })
}

/// Build a dataset from a row-major `rows x cols` feature array and 0/1
/// labels. Features are named `f0, f1, ...`.
///
/// # Safety
/// `features` must hold `rows * cols` doubles, `labels` `rows` bytes, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_dataset_from_arrays(
    features: *const f64,
    rows: usize,
    cols: usize,
    labels: *const u8,
    out: *mut *mut EvofsDataset,
) -> EvofsStatus {
    guard(|| {
        non_null(features, "features")?;
        non_null(labels, "labels")?;
        non_null(out, "out")?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(EvofsStatus::InvalidArgument, "rows * cols overflows"))?;
        let values = std::slice::from_raw_parts(features, n).to_vec();
        let labels = std::slice::from_raw_parts(labels, rows).iter().map(|&l| l as usize).collect();
        let matrix = lift(Matrix::new(values, rows, cols))?;
        let inner = lift(Dataset::from_parts(matrix, labels))?;
        *out = Box::into_raw(Box::new(EvofsDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn evofs_dataset_free(ds: *mut EvofsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live handle; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_dataset_shape(ds: *const EvofsDataset, rows: *mut usize, cols: *mut usize) -> EvofsStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(rows, "rows")?;
        non_null(cols, "cols")?;
        *rows = (*ds).inner.n_instances();
        *cols = (*ds).inner.n_features();
        Ok(())
    })
}

/// Instances per class label. For datasets loaded from CSV, label 0 is the
/// majority class.
///
/// # Safety
/// `ds` must be a live handle; `counts` must hold two writable values.
#[no_mangle]
pub unsafe extern "C" fn evofs_dataset_class_counts(ds: *const EvofsDataset, counts: *mut usize) -> EvofsStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(counts, "counts")?;
        let c = (*ds).inner.class_counts();
        *counts = c[0];
        *counts.add(1) = c[1];
        Ok(())
    })
}

/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_dataset_majority_baseline(ds: *const EvofsDataset, out: *mut f64) -> EvofsStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(out, "out")?;
        *out = majority_baseline(&(*ds).inner);
        Ok(())
    })
}

/// Size-penalized fitness without the variance term.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_fitness_eq1(
    effectiveness: f64,
    num_selected: usize,
    num_total: usize,
    alpha: f64,
    out: *mut f64,
) -> EvofsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(fitness_eq1(effectiveness, num_selected, num_total, alpha))?;
        Ok(())
    })
}

/// Size-penalized fitness with the fold-variance term.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_fitness_eq2(
    effectiveness: f64,
    variance: f64,
    num_selected: usize,
    num_total: usize,
    alpha: f64,
    out: *mut f64,
) -> EvofsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(fitness_eq2(effectiveness, variance, num_selected, num_total, alpha))?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvofsClassifierKind {
    Knn = 0,
    Dtc = 1,
    Rfc = 2,
    Etc = 3,
}

impl From<EvofsClassifierKind> for ClassifierKind {
    fn from(k: EvofsClassifierKind) -> Self {
        match k {
            EvofsClassifierKind::Knn => ClassifierKind::Knn,
            EvofsClassifierKind::Dtc => ClassifierKind::Dtc,
            EvofsClassifierKind::Rfc => ClassifierKind::Rfc,
            EvofsClassifierKind::Etc => ClassifierKind::Etc,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvofsMaxFeatures {
    All = 0,
    Sqrt = 1,
    Count = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvofsClassifierSpec {
    pub kind: EvofsClassifierKind,
    pub k_neighbors: usize,
    /// 0 means unlimited.
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: EvofsMaxFeatures,
    /// Used when `max_features` is `COUNT`.
    pub max_features_count: usize,
    pub n_estimators: usize,
    pub seed: u64,
}

impl EvofsClassifierSpec {
    fn from_spec(s: &ClassifierSpec) -> Self {
        let (max_features, max_features_count) = match s.max_features {
            MaxFeatures::All => (EvofsMaxFeatures::All, 0),
            MaxFeatures::Sqrt => (EvofsMaxFeatures::Sqrt, 0),
            MaxFeatures::Count(c) => (EvofsMaxFeatures::Count, c),
        };
        EvofsClassifierSpec {
            kind: match s.kind {
                ClassifierKind::Knn => EvofsClassifierKind::Knn,
                ClassifierKind::Dtc => EvofsClassifierKind::Dtc,
                ClassifierKind::Rfc => EvofsClassifierKind::Rfc,
                ClassifierKind::Etc => EvofsClassifierKind::Etc,
            },
            k_neighbors: s.k_neighbors,
            max_depth: s.max_depth.unwrap_or(0),
            min_samples_split: s.min_samples_split,
            min_samples_leaf: s.min_samples_leaf,
            max_features,
            max_features_count,
            n_estimators: s.n_estimators,
            seed: s.seed,
        }
    }

    fn to_spec(self) -> ClassifierSpec {
        ClassifierSpec {
            kind: self.kind.into(),
            k_neighbors: self.k_neighbors,
            max_depth: (self.max_depth > 0).then_some(self.max_depth),
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
            max_features: match self.max_features {
                EvofsMaxFeatures::All => MaxFeatures::All,
                EvofsMaxFeatures::Sqrt => MaxFeatures::Sqrt,
                EvofsMaxFeatures::Count => MaxFeatures::Count(self.max_features_count),
            },
            n_estimators: self.n_estimators,
            seed: self.seed,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvofsFitnessConfig {
    pub alpha: f64,
    pub variance_penalty: bool,
    pub inner_folds: usize,
    pub classifier: EvofsClassifierSpec,
    pub fold_seed: u64,
}

impl EvofsFitnessConfig {
    fn to_config(self) -> FitnessConfig {
        FitnessConfig {
            alpha: self.alpha,
            variance_penalty: self.variance_penalty,
            inner_folds: self.inner_folds,
            classifier: self.classifier.to_spec(),
            fold_seed: self.fold_seed,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvofsFitnessReport {
    pub effectiveness: f64,
    pub variance: f64,
    pub num_selected: usize,
    pub num_total: usize,
    pub fitness: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvofsGaConfig {
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub per_gene_flip: f64,
    pub init_prob: f64,
    pub population: usize,
    pub generations: usize,
    pub elitism: usize,
    pub seed: u64,
}

impl EvofsGaConfig {
    fn to_config(self) -> GaConfig {
        GaConfig {
            p_crossover: self.p_crossover,
            p_mutation: self.p_mutation,
            per_gene_flip: self.per_gene_flip,
            init_prob: self.init_prob,
            population: self.population,
            generations: self.generations,
            elitism: self.elitism,
            seed: self.seed,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvofsGenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_accuracy: f64,
    pub best_num_features: usize,
}

impl From<&GenerationStats> for EvofsGenerationStats {
    fn from(s: &GenerationStats) -> Self {
        EvofsGenerationStats {
            generation: s.generation,
            best_fitness: s.best_fitness,
            mean_fitness: s.mean_fitness,
            best_accuracy: s.best_accuracy,
            best_num_features: s.best_num_features,
        }
    }
}

/// Fill `out` with the wrapper-fitness defaults for `kind`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_classifier_default(kind: EvofsClassifierKind, out: *mut EvofsClassifierSpec) -> EvofsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = EvofsClassifierSpec::from_spec(&ClassifierSpec::default_for(kind.into()));
        Ok(())
    })
}

/// Fill `out` with the default GA parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_ga_config_default(out: *mut EvofsGaConfig) -> EvofsStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = GaConfig::default();
        *out = EvofsGaConfig {
            p_crossover: g.p_crossover,
            p_mutation: g.p_mutation,
            per_gene_flip: g.per_gene_flip,
            init_prob: g.init_prob,
            population: g.population,
            generations: g.generations,
            elitism: g.elitism,
            seed: g.seed,
        };
        Ok(())
    })
}

/// Score one feature subset. `genotype` holds one byte per feature, nonzero
/// meaning selected.
///
/// # Safety
/// `ds` must be a live handle, `genotype` must hold `len` bytes, `cfg` must
/// be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_evaluate(
    ds: *const EvofsDataset,
    genotype: *const u8,
    len: usize,
    cfg: *const EvofsFitnessConfig,
    out: *mut EvofsFitnessReport,
) -> EvofsStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(genotype, "genotype")?;
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        let bits = std::slice::from_raw_parts(genotype, len).iter().map(|&b| b != 0).collect();
        let g = Genotype::new(bits);
        let r = lift(evofs::fitness::evaluate(&g, &(*ds).inner, &(*cfg).to_config()))?;
        *out = EvofsFitnessReport {
            effectiveness: r.effectiveness,
            variance: r.variance,
            num_selected: r.num_selected,
            num_total: r.num_total,
            fitness: r.fitness,
        };
        Ok(())
    })
}

/// Opaque result of a GA selection run.
pub struct EvofsSelection {
    features: Vec<usize>,
    fitness: f64,
    effectiveness: f64,
    log: Vec<GenerationStats>,
}

/// Run GA feature selection over the whole dataset.
///
/// # Safety
/// `ds` must be a live handle, `ga` and `fit` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_ga_select(
    ds: *const EvofsDataset,
    ga: *const EvofsGaConfig,
    fit: *const EvofsFitnessConfig,
    out: *mut *mut EvofsSelection,
) -> EvofsStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(ga, "ga")?;
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let (features, evo) = lift(ga_select(&(*ds).inner, &(*ga).to_config(), &(*fit).to_config()))?;
        *out = Box::into_raw(Box::new(EvofsSelection {
            features,
            fitness: evo.best_report.fitness,
            effectiveness: evo.best_report.effectiveness,
            log: evo.log.rows,
        }));
        Ok(())
    })
}

/// Selected column indices in ascending order. The array is owned by the
/// selection and lives until it is freed.
///
/// # Safety
/// `sel` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_selection_features(sel: *const EvofsSelection, len: *mut usize) -> *const usize {
    if sel.is_null() || len.is_null() {
        return ptr::null();
    }
    *len = (*sel).features.len();
    (*sel).features.as_ptr()
}

/// Fitness and mean inner-CV accuracy of the selected subset.
///
/// # Safety
/// `sel` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_selection_score(
    sel: *const EvofsSelection,
    fitness: *mut f64,
    effectiveness: *mut f64,
) -> EvofsStatus {
    guard(|| {
        non_null(sel, "sel")?;
        if !fitness.is_null() {
            *fitness = (*sel).fitness;
        }
        if !effectiveness.is_null() {
            *effectiveness = (*sel).effectiveness;
        }
        Ok(())
    })
}

/// Number of logged generations (generations + 1).
///
/// # Safety
/// `sel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evofs_selection_log_len(sel: *const EvofsSelection) -> usize {
    if sel.is_null() {
        0
    } else {
        (*sel).log.len()
    }
}

/// # Safety
/// `sel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evofs_selection_log_row(
    sel: *const EvofsSelection,
    index: usize,
    out: *mut EvofsGenerationStats,
) -> EvofsStatus {
    guard(|| {
        non_null(sel, "sel")?;
        non_null(out, "out")?;
        let sel = &*sel;
        let row = sel
            .log
            .get(index)
            .ok_or_else(|| fail(EvofsStatus::InvalidArgument, format!("log row {index} out of range")))?;
        *out = row.into();
        Ok(())
    })
}

/// # Safety
/// `sel` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn evofs_selection_free(sel: *mut EvofsSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}
