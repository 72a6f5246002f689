use rand::Rng as _;
use rayon::prelude::*;

use crate::matrix::Matrix;
use crate::seed::{self, stream, Rng};

use super::tree::{normalize, DecisionTree, SplitMode};
use super::{majority_class, ClassifierKind, ClassifierSpec};

/// Random forest (bootstrap + best splits) or extra trees (full sample +
/// random thresholds), combined by majority vote.
#[derive(Debug, Clone)]
pub struct Forest {
    trees: Vec<DecisionTree>,
    default_class: usize,
}

fn tree_rng(spec_seed: u64, tree_index: usize) -> Rng {
    seed::rng(seed::derive(spec_seed, &[stream::TREE, tree_index as u64]))
}

fn draw_bootstrap(rng: &mut Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// The bootstrap rows a random forest with `spec_seed` uses for tree
/// `tree_index` over `n` training rows.
pub fn bootstrap_sample(spec_seed: u64, tree_index: usize, n: usize) -> Vec<usize> {
    draw_bootstrap(&mut tree_rng(spec_seed, tree_index), n)
}

impl Forest {
    pub(crate) fn fit(spec: &ClassifierSpec, x: &Matrix, y: &[usize]) -> Self {
        let (mode, bootstrap) = match spec.kind {
            ClassifierKind::Etc => (SplitMode::Random, false),
            _ => (SplitMode::Best, true),
        };
        let params = spec.tree_params(x.cols(), mode);
        let n = x.rows();
        let full: Vec<usize> = (0..n).collect();
        // Per-tree seeds make the result independent of scheduling.
        let trees = (0..spec.n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(spec.seed, t);
                let sample = if bootstrap {
                    draw_bootstrap(&mut rng, n)
                } else {
                    full.clone()
                };
                DecisionTree::fit(x, y, &sample, &params, &mut rng)
            })
            .collect();
        Forest {
            trees,
            default_class: majority_class(y.iter().copied()),
        }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub(crate) fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = [0usize; 2];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        match votes[0].cmp(&votes[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => self.default_class,
        }
    }

    /// Mean of the per-tree normalized importances, renormalized.
    pub(crate) fn importances(&self) -> Vec<f64> {
        let Some(first) = self.trees.first() else {
            return Vec::new();
        };
        let mut acc = vec![0.0; first.raw_importances().len()];
        for t in &self.trees {
            for (a, v) in acc.iter_mut().zip(t.normalized_importances()) {
                *a += v;
            }
        }
        normalize(&acc)
    }
}
