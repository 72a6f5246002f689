use crate::matrix::Matrix;

use super::majority_class;

/// Brute-force k-nearest-neighbors over raw (unscaled) features with
/// Euclidean distance.
///
/// Equidistant neighbors at the k-boundary are resolved by lower training
/// index; a tied vote falls back to the training set's majority class.
#[derive(Debug, Clone)]
pub struct Knn {
    points: Matrix,
    labels: Vec<usize>,
    k: usize,
    default_class: usize,
}

impl Knn {
    pub(crate) fn fit(x: &Matrix, y: &[usize], k: usize) -> Self {
        Knn {
            points: x.clone(),
            labels: y.to_vec(),
            k,
            default_class: majority_class(y.iter().copied()),
        }
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub(crate) fn predict_row(&self, query: &[f64]) -> usize {
        let n = self.points.rows();
        let k = self.k.min(n);

        if k == 1 {
            let mut best = (f64::INFINITY, 0usize);
            for i in 0..n {
                let d = sq_dist(self.points.row(i), query);
                if d < best.0 {
                    best = (d, i);
                }
            }
            return self.labels[best.1];
        }

        let mut ranked: Vec<(f64, usize)> = (0..n)
            .map(|i| (sq_dist(self.points.row(i), query), i))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = [0usize; 2];
        for &(_, i) in &ranked[..k] {
            votes[self.labels[i]] += 1;
        }
        match votes[0].cmp(&votes[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => self.default_class,
        }
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
