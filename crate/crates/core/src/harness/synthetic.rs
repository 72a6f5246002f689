use rand::seq::index::sample;
use rand::Rng as _;

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Planted-signal benchmark: every feature takes one of the three level
/// midpoints `1/6, 1/2, 5/6` uniformly at random; the label is 1 iff the
/// levels `floor(3x)` of the informative features sum to at least 3.
///
/// Each informative feature adds information on its own (1, 2 and 3 known
/// features give Bayes accuracies of 20/27, 22/27 and 1), so wrapper search
/// can climb towards the planted set one feature at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub dataset: Dataset,
    pub informative: Vec<usize>,
}

pub fn planted_label(levels_sum: usize) -> usize {
    usize::from(levels_sum >= 3)
}

pub fn planted(n_instances: usize, n_features: usize, n_informative: usize, seed: u64) -> Result<Planted> {
    if n_informative == 0 || n_informative > n_features {
        return Err(invalid(format!(
            "{n_informative} informative features out of {n_features}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut informative = sample(&mut rng, n_features, n_informative).into_vec();
    informative.sort_unstable();

    let mut values = Vec::with_capacity(n_instances * n_features);
    let mut labels = Vec::with_capacity(n_instances);
    for _ in 0..n_instances {
        let row: Vec<f64> = (0..n_features)
            .map(|_| (f64::from(rng.gen_range(0..3u8)) + 0.5) / 3.0)
            .collect();
        let level_sum: usize = informative.iter().map(|&j| (row[j] * 3.0).floor() as usize).sum();
        labels.push(planted_label(level_sum));
        values.extend(row);
    }
    let dataset = Dataset::from_parts(Matrix::new(values, n_instances, n_features)?, labels)?;
    Ok(Planted { dataset, informative })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_the_planted_rule() {
        let p = planted(100, 8, 3, 4).unwrap();
        let d = &p.dataset;
        for i in 0..d.n_instances() {
            let s: usize = p.informative.iter().map(|&j| (d.features().get(i, j) * 3.0).floor() as usize).sum();
            assert_eq!(d.labels()[i], planted_label(s));
        }
        assert_eq!(p.informative.len(), 3);
        assert_eq!(planted(100, 8, 3, 4).unwrap(), p);
    }
}
