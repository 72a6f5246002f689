//! Library results checked against independent brute-force computations.

use evofs::classifiers::{self, ClassifierKind, ClassifierSpec};
use evofs::dataset::Dataset;
use evofs::fitness::{evaluate, fitness_eq1, fitness_eq2, FitnessConfig, FitnessEvaluator};
use evofs::ga::Genotype;
use evofs::harness::synthetic::planted;
use evofs::harness::{grid_search, nested_validate, NestedCvSpec, ParamGrid, Selector};
use evofs::matrix::Matrix;
use evofs::seed;
use proptest::prelude::*;
use rand::Rng as _;

fn eq1_oracle(e: f64, s: usize, f: usize, a: f64) -> f64 {
    (1.0 - a) * e + a * ((f - s) as f64 / f as f64)
}

fn eq2_oracle(e: f64, v: f64, s: usize, f: usize, a: f64) -> f64 {
    (1.0 - a) * (e - v) + a * ((f - s) as f64 / f as f64)
}

#[test]
fn fitness_matches_recomputation_on_1000_tuples() {
    let mut rng = seed::rng(10);
    for _ in 0..1000 {
        let f = rng.gen_range(1..2000usize);
        let s = rng.gen_range(0..=f);
        let e = rng.gen::<f64>();
        let v = rng.gen::<f64>() * 0.25;
        let a = rng.gen::<f64>();
        assert!((fitness_eq1(e, s, f, a).unwrap() - eq1_oracle(e, s, f, a)).abs() <= 1e-12);
        assert!((fitness_eq2(e, v, s, f, a).unwrap() - eq2_oracle(e, v, s, f, a)).abs() <= 1e-12);
    }
    assert!((fitness_eq1(0.7479, 13, 1203, 0.3).unwrap() - 0.8202881).abs() < 1e-7);
    assert!((fitness_eq2(0.66, 0.01, 4, 1203, 0.5).unwrap() - 0.8233375).abs() < 1e-7);
}

#[test]
fn fitness_edge_cases() {
    assert_eq!(fitness_eq1(0.61, 7, 20, 0.0).unwrap(), 0.61);
    assert_eq!(fitness_eq1(0.3, 0, 20, 1.0).unwrap(), 1.0);
    assert_eq!(fitness_eq2(0.8, 0.0, 3, 9, 0.4).unwrap(), fitness_eq1(0.8, 3, 9, 0.4).unwrap());
    assert_eq!(fitness_eq2(0.2, 0.1, 3, 9, 1.0).unwrap(), fitness_eq2(0.9, 0.0, 3, 9, 1.0).unwrap());
    assert!(fitness_eq1(0.5, 3, 0, 0.5).is_err());
    assert!(fitness_eq1(0.5, 4, 3, 0.5).is_err());
    assert!(fitness_eq1(1.5, 1, 3, 0.5).is_err());
    assert!(fitness_eq1(0.5, 1, 3, -0.1).is_err());
    assert!(fitness_eq2(0.5, -0.1, 1, 3, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fewer_features_never_lower_fitness(e in 0.0f64..=1.0, f in 2usize..500, s_frac in 0.0f64..1.0, a in 0.0f64..=1.0) {
        let s = 1 + ((f - 1) as f64 * s_frac) as usize;
        let bigger = fitness_eq1(e, s, f, a).unwrap();
        let smaller = fitness_eq1(e, s - 1, f, a).unwrap();
        prop_assert!(smaller >= bigger - 1e-15);
    }

    #[test]
    fn variance_penalty_never_helps(e in 0.0f64..=1.0, v in 0.0f64..0.25, f in 1usize..500, s_frac in 0.0f64..=1.0, a in 0.0f64..=1.0) {
        let s = (f as f64 * s_frac) as usize;
        prop_assert!(fitness_eq2(e, v, s, f, a).unwrap() <= fitness_eq1(e, s, f, a).unwrap() + 1e-15);
    }
}

#[test]
fn report_fields_recompute_independently() {
    let p = planted(60, 6, 2, 4).unwrap();
    let cfg = FitnessConfig {
        alpha: 0.3,
        variance_penalty: true,
        inner_folds: 10,
        classifier: ClassifierSpec::default_for(ClassifierKind::Knn),
        fold_seed: 2,
    };
    let r = evaluate(&Genotype::ones(6), &p.dataset, &cfg).unwrap();
    assert_eq!(r.fold_accuracies.len(), 10);
    let n = r.fold_accuracies.len() as f64;
    let mean = r.fold_accuracies.iter().sum::<f64>() / n;
    let var = r.fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    assert!((r.effectiveness - mean).abs() < 1e-12);
    assert!((r.variance - var).abs() < 1e-12);
    assert!(r.effectiveness >= 0.5);
    assert!((r.fitness - eq2_oracle(mean, var, 6, 6, 0.3)).abs() < 1e-12);
    let again = evaluate(&Genotype::ones(6), &p.dataset, &cfg).unwrap();
    assert_eq!(format!("{r:?}"), format!("{again:?}"));
}

/// 1-NN on a constant column: every distance ties, so each test instance gets
/// the label of the lowest-index training instance.
#[test]
fn constant_feature_degenerates_to_tie_break() {
    let n = 40;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        values.push(3.0);
        values.push(i as f64);
        labels.push(usize::from(i % 3 == 0));
    }
    let d = Dataset::from_parts(Matrix::new(values, n, 2).unwrap(), labels.clone()).unwrap();
    let cfg = FitnessConfig::new(0.0, false, ClassifierSpec::default_for(ClassifierKind::Knn));
    let ev = FitnessEvaluator::new(&d, cfg).unwrap();
    let accs = ev.fold_accuracies(&[0]).unwrap();
    let plan = ev.fold_plan();
    for (f, acc) in accs.iter().enumerate() {
        let first_train = *plan.train_indices(f).iter().min().unwrap();
        let test = plan.test_indices(f);
        let expect = test.iter().filter(|&&i| labels[i] == labels[first_train]).count() as f64 / test.len() as f64;
        assert!((acc - expect).abs() < 1e-15, "fold {f}");
    }
}

fn brute_knn(train: &[(Vec<f64>, usize)], q: &[f64], k: usize) -> usize {
    let mut dist: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (x, _))| (x.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let votes = dist[..k].iter().filter(|(_, i)| train[*i].1 == 1).count();
    let ones = train.iter().filter(|(_, l)| *l == 1).count();
    let majority = usize::from(ones * 2 > train.len());
    match (2 * votes).cmp(&k) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => majority,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn knn_matches_brute_force(seed in any::<u64>(), k in 1usize..8, n in 8usize..40, dims in 1usize..4) {
        let mut rng = seed::rng(seed);
        let train: Vec<(Vec<f64>, usize)> = (0..n)
            .map(|_| ((0..dims).map(|_| rng.gen_range(0..5) as f64).collect(), rng.gen_range(0..2)))
            .collect();
        let rows: Vec<Vec<f64>> = train.iter().map(|(x, _)| x.clone()).collect();
        let y: Vec<usize> = train.iter().map(|(_, l)| *l).collect();
        let spec = ClassifierSpec { k_neighbors: k.min(n), ..ClassifierSpec::default_for(ClassifierKind::Knn) };
        let model = classifiers::train(&spec, &Matrix::from_rows(&rows).unwrap(), &y).unwrap();
        let queries: Vec<Vec<f64>> = (0..10).map(|_| (0..dims).map(|_| rng.gen_range(0..5) as f64 + 0.5).collect()).collect();
        let pred = classifiers::predict(&model, &Matrix::from_rows(&queries).unwrap()).unwrap();
        for (q, p) in queries.iter().zip(pred) {
            prop_assert_eq!(p, brute_knn(&train, q, k.min(n)));
        }
    }

    #[test]
    fn unlimited_tree_fits_distinct_points(seed in any::<u64>(), n in 4usize..40) {
        let mut rng = seed::rng(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * 0.5, rng.gen::<f64>()]).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let model = classifiers::train(&ClassifierSpec::default_for(ClassifierKind::Dtc), &x, &y).unwrap();
        prop_assert_eq!(classifiers::predict(&model, &x).unwrap(), y);
    }
}

/// Brute-force leave-one-out accuracy of 1-NN with Euclidean distance and
/// ties to the lowest training index.
fn loo_1nn(d: &Dataset) -> f64 {
    let x = d.features();
    let n = d.n_instances();
    let mut correct = 0;
    for i in 0..n {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in (0..n).filter(|&j| j != i) {
            let dist: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist < best.0 {
                best = (dist, j);
            }
        }
        correct += usize::from(d.labels()[best.1] == d.labels()[i]);
    }
    correct as f64 / n as f64
}

#[test]
fn nested_leave_one_out_equals_brute_force() {
    let p = planted(45, 4, 2, 12).unwrap();
    let spec = NestedCvSpec {
        outer_folds: 45,
        inner_folds: 3,
        repetitions: 1,
        seed: 5,
    };
    let knn = ClassifierSpec::default_for(ClassifierKind::Knn);
    let out = nested_validate(&p.dataset, &Selector::All, &spec, &knn, None, None).unwrap();
    assert!((out.row.validation - loo_1nn(&p.dataset)).abs() < 1e-12);
}

#[test]
fn perfectly_informative_feature_validates_to_one() {
    let mut rng = seed::rng(3);
    let n = 50;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let x0 = rng.gen::<f64>();
        values.extend([x0, rng.gen::<f64>(), rng.gen::<f64>()]);
        labels.push(usize::from(x0 > 0.5));
    }
    let d = Dataset::from_parts(Matrix::new(values, n, 3).unwrap(), labels).unwrap();
    let spec = NestedCvSpec {
        outer_folds: 10,
        inner_folds: 5,
        repetitions: 2,
        seed: 1,
    };
    // Leaf-size-one trees on one clean feature make no mistakes away from the
    // threshold; kNN on the same column is the independent check.
    for kind in [ClassifierKind::Knn, ClassifierKind::Dtc] {
        let out = nested_validate(&d, &Selector::Fixed(vec![0]), &spec, &ClassifierSpec::default_for(kind), None, None)
            .unwrap();
        assert!(out.row.validation >= 0.96, "{kind}: {}", out.row.validation);
    }
    let fixed = nested_validate(
        &d,
        &Selector::Fixed(vec![0]),
        &spec,
        &ClassifierSpec::default_for(ClassifierKind::Dtc),
        None,
        None,
    )
    .unwrap();
    let again = nested_validate(
        &d,
        &Selector::Fixed(vec![0]),
        &spec,
        &ClassifierSpec::default_for(ClassifierKind::Dtc),
        None,
        None,
    )
    .unwrap();
    assert_eq!(fixed.row, again.row);
}

#[test]
fn label_function_of_one_feature_is_perfect() {
    // Labels are a deterministic function of well-separated values of feature 0.
    let n = 40;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let l = i % 2;
        values.push(l as f64 * 10.0 + (i as f64) * 0.01);
        values.push((i * 13 % 7) as f64);
        labels.push(l);
    }
    let d = Dataset::from_parts(Matrix::new(values, n, 2).unwrap(), labels).unwrap();
    let spec = NestedCvSpec {
        outer_folds: 8,
        inner_folds: 4,
        repetitions: 2,
        seed: 9,
    };
    for kind in ClassifierKind::ALL {
        let clf = ClassifierSpec {
            n_estimators: 10,
            ..ClassifierSpec::default_for(kind)
        };
        let out = nested_validate(&d, &Selector::Fixed(vec![0]), &spec, &clf, None, None).unwrap();
        assert_eq!(out.row.validation, 1.0, "{kind}");
    }
}

#[test]
fn knn_grid_matches_brute_force_scoring() {
    let p = planted(90, 3, 3, 21).unwrap();
    let grid = ParamGrid::standard(ClassifierKind::Knn, 3);
    let base = ClassifierSpec::default_for(ClassifierKind::Knn);
    let best = grid_search(&p.dataset, &base, &grid, 5, 4).unwrap();
    assert_eq!(best.evaluated, 5);

    // Score every k separately and take the first maximum.
    let mut scores = Vec::new();
    for k in [1, 3, 5, 7, 9] {
        let cfg = FitnessConfig {
            alpha: 0.0,
            variance_penalty: false,
            inner_folds: 5,
            classifier: ClassifierSpec { k_neighbors: k, ..base.clone() },
            fold_seed: 4,
        };
        let accs = FitnessEvaluator::new(&p.dataset, cfg).unwrap().fold_accuracies(&[0, 1, 2]).unwrap();
        scores.push((k, accs.iter().sum::<f64>() / accs.len() as f64));
    }
    let top = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let first = scores.iter().find(|s| s.1 == top).unwrap();
    assert_eq!(best.spec.k_neighbors, first.0);
    assert_eq!(best.score, first.1);
}

#[test]
fn knn_grid_picks_one_neighbor_when_it_is_optimal() {
    // Tight same-label pairs spaced far apart with alternating labels: the
    // nearest neighbor is the partner, wider votes reach the other label.
    let n = 80;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        values.push((i / 2) as f64 + (i % 2) as f64 * 0.1);
        labels.push((i / 2) % 2);
    }
    let d = Dataset::from_parts(Matrix::new(values, n, 1).unwrap(), labels).unwrap();
    let base = ClassifierSpec::default_for(ClassifierKind::Knn);
    let scores: Vec<f64> = [1, 3, 5, 7, 9]
        .iter()
        .map(|&k| {
            let cfg = FitnessConfig {
                alpha: 0.0,
                variance_penalty: false,
                inner_folds: 10,
                classifier: ClassifierSpec { k_neighbors: k, ..base.clone() },
                fold_seed: 1,
            };
            let accs = FitnessEvaluator::new(&d, cfg).unwrap().fold_accuracies(&[0]).unwrap();
            accs.iter().sum::<f64>() / accs.len() as f64
        })
        .collect();
    assert!(scores[1..].iter().all(|&s| s < scores[0]), "{scores:?}");
    let best = grid_search(&d, &base, &ParamGrid::standard(ClassifierKind::Knn, 1), 10, 1).unwrap();
    assert_eq!(best.spec.k_neighbors, 1);
    assert_eq!(best.score, scores[0]);
}

#[test]
fn grid_ties_resolve_to_first_candidate() {
    let p = planted(40, 3, 1, 2).unwrap();
    // Identical candidates score identically.
    let grid = ParamGrid {
        max_depth: vec![Some(50), Some(60)],
        ..ParamGrid::default()
    };
    let best = grid_search(&p.dataset, &ClassifierSpec::default_for(ClassifierKind::Dtc), &grid, 4, 0).unwrap();
    assert_eq!(best.spec.max_depth, Some(50));
    let single = ParamGrid::default();
    let best = grid_search(&p.dataset, &ClassifierSpec::default_for(ClassifierKind::Dtc), &single, 4, 0).unwrap();
    assert_eq!(best.evaluated, 1);
}

/// Planted Bayes accuracies by exhaustive enumeration of level triples: with
/// `known` of the 3 informative features observed, the best guess is the
/// majority label among completions of the unknown levels.
#[test]
fn planted_bayes_accuracies() {
    let triples: Vec<[usize; 3]> = (0..27).map(|c| [c / 9, (c / 3) % 3, c % 3]).collect();
    let label = |t: &[usize; 3]| usize::from(t.iter().sum::<usize>() >= 3);
    let bayes = |known: usize| {
        let mut correct = 0;
        for t in &triples {
            let matching: Vec<&[usize; 3]> = triples.iter().filter(|u| u[..known] == t[..known]).collect();
            let ones = matching.iter().filter(|u| label(u) == 1).count();
            let guess = usize::from(2 * ones > matching.len());
            correct += usize::from(guess == label(t));
        }
        correct as f64 / 27.0
    };
    assert!((bayes(1) - 20.0 / 27.0).abs() < 1e-15);
    assert!((bayes(2) - 22.0 / 27.0).abs() < 1e-15);
    assert_eq!(bayes(3), 1.0);
}
