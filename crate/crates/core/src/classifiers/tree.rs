use rand::Rng as _;

use crate::matrix::Matrix;
use crate::seed::Rng;

use super::majority_class;

/// Smallest impurity decrease that counts as a split.
const MIN_GAIN: f64 = 1e-12;

/// Gini impurity of a two-class count vector.
pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Exhaustive search over midpoints of consecutive distinct values.
    Best,
    /// One uniformly drawn threshold per candidate feature (extra trees).
    Random,
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Resolved number of candidate features per node.
    pub max_features: usize,
    pub mode: SplitMode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: usize,
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: [usize; 2],
    },
}

impl Node {
    pub fn counts(&self) -> [usize; 2] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => *counts,
        }
    }
}

/// Binary CART tree with Gini impurity. Samples go left when
/// `x[feature] <= threshold`.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    importances: Vec<f64>,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    params: &'a TreeParams,
    default_class: usize,
    nodes: Vec<Node>,
    importances: Vec<f64>,
    scratch: Vec<(f64, usize)>,
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl DecisionTree {
    /// Grow a tree on the rows listed in `sample` (duplicates allowed, as in
    /// a bootstrap draw).
    pub fn fit(x: &Matrix, y: &[usize], sample: &[usize], params: &TreeParams, rng: &mut Rng) -> Self {
        let mut b = Builder {
            x,
            y,
            params,
            default_class: majority_class(sample.iter().map(|&i| y[i])),
            nodes: Vec::new(),
            importances: vec![0.0; x.cols()],
            scratch: Vec::with_capacity(sample.len()),
        };
        let mut indices = sample.to_vec();
        b.build(&mut indices, 0, rng);
        DecisionTree {
            nodes: b.nodes,
            importances: b.importances,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Total weighted impurity decrease per feature (sample-count weighted).
    pub fn raw_importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn normalized_importances(&self) -> Vec<f64> {
        normalize(&self.importances)
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { class, .. } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

pub(crate) fn normalize(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter().map(|x| x / total).collect()
    } else {
        vec![0.0; v.len()]
    }
}

impl Builder<'_> {
    fn leaf(&mut self, counts: [usize; 2]) -> usize {
        let class = match counts[0].cmp(&counts[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => self.default_class,
        };
        self.nodes.push(Node::Leaf { class, counts });
        self.nodes.len() - 1
    }

    fn build(&mut self, indices: &mut [usize], depth: usize, rng: &mut Rng) -> usize {
        let n = indices.len();
        let mut counts = [0usize; 2];
        for &i in indices.iter() {
            counts[self.y[i]] += 1;
        }
        let p = self.params;
        let stop = counts[0] == 0
            || counts[1] == 0
            || p.max_depth.is_some_and(|d| depth >= d)
            || n < p.min_samples_split
            || n < 2 * p.min_samples_leaf;
        if stop {
            return self.leaf(counts);
        }

        let Some(best) = self.best_split(indices, counts, rng) else {
            return self.leaf(counts);
        };

        self.importances[best.feature] += n as f64 * best.gain;

        // Partition in place: left block first.
        let mut split = 0;
        for k in 0..n {
            if self.x.get(indices[k], best.feature) <= best.threshold {
                indices.swap(k, split);
                split += 1;
            }
        }
        debug_assert!(split > 0 && split < n);

        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: 0, counts });
        let (l, r) = indices.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            counts,
        };
        id
    }

    fn candidate_features(&self, rng: &mut Rng) -> Vec<usize> {
        let n_features = self.x.cols();
        if self.params.max_features >= n_features {
            (0..n_features).collect()
        } else {
            let mut picked =
                rand::seq::index::sample(rng, n_features, self.params.max_features).into_vec();
            picked.sort_unstable();
            picked
        }
    }

    fn best_split(&mut self, indices: &[usize], counts: [usize; 2], rng: &mut Rng) -> Option<Candidate> {
        let n = indices.len();
        let parent = gini(counts);
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<Candidate> = None;

        let weighted = |left: [usize; 2]| {
            let right = [counts[0] - left[0], counts[1] - left[1]];
            let nl = (left[0] + left[1]) as f64;
            let nr = (right[0] + right[1]) as f64;
            (nl * gini(left) + nr * gini(right)) / n as f64
        };

        for feature in self.candidate_features(rng) {
            match self.params.mode {
                SplitMode::Best => {
                    self.scratch.clear();
                    self.scratch
                        .extend(indices.iter().map(|&i| (self.x.get(i, feature), self.y[i])));
                    self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut left = [0usize; 2];
                    for k in 1..n {
                        left[self.scratch[k - 1].1] += 1;
                        let (lo, hi) = (self.scratch[k - 1].0, self.scratch[k].0);
                        if lo >= hi || k < min_leaf || n - k < min_leaf {
                            continue;
                        }
                        let gain = parent - weighted(left);
                        if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                            let mid = lo + (hi - lo) / 2.0;
                            let threshold = if mid < hi { mid } else { lo };
                            best = Some(Candidate {
                                gain,
                                feature,
                                threshold,
                            });
                        }
                    }
                }
                SplitMode::Random => {
                    let (lo, hi) = indices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        let v = self.x.get(i, feature);
                        (lo.min(v), hi.max(v))
                    });
                    if lo >= hi {
                        continue;
                    }
                    let threshold = rng.gen_range(lo..hi);
                    let mut left = [0usize; 2];
                    for &i in indices {
                        if self.x.get(i, feature) <= threshold {
                            left[self.y[i]] += 1;
                        }
                    }
                    let nl = left[0] + left[1];
                    if nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let gain = parent - weighted(left);
                    if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                        best = Some(Candidate {
                            gain,
                            feature,
                            threshold,
                        });
                    }
                }
            }
        }
        best
    }
}
