use proptest::prelude::*;
use textrait_core::{FeatureMatrix, Forest, ForestConfig, MaxFeatures};

fn small_forest() -> ForestConfig {
    ForestConfig {
        trees: 15,
        max_features: MaxFeatures::Sqrt,
        min_samples_leaf: 2,
        ..ForestConfig::default()
    }
}

fn rows(n: usize, d: usize, values: &[f64]) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..d).map(|j| values[(i * d + j) % values.len()]).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_stay_in_target_range(
        values in proptest::collection::vec(-3.0f64..3.0, 40..120),
        y in proptest::collection::vec(1.0f64..5.0, 30),
        probe in proptest::collection::vec(-10.0f64..10.0, 3),
    ) {
        let x = FeatureMatrix::from_dense(rows(30, 3, &values)).unwrap();
        let forest = Forest::fit(&x, &y, &small_forest(), 5).unwrap();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = forest.predict(&FeatureMatrix::from_dense(vec![probe]).unwrap()).unwrap()[0];
        prop_assert!(p >= lo && p <= hi);
    }

    #[test]
    fn shifting_targets_shifts_predictions(
        values in proptest::collection::vec(0.0f64..1.0, 60..150),
        y in proptest::collection::vec(1.0f64..5.0, 40),
        shift in -50.0f64..50.0,
    ) {
        let x = FeatureMatrix::from_dense(rows(40, 4, &values)).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let a = Forest::fit(&x, &y, &small_forest(), 9).unwrap().predict(&x).unwrap();
        let b = Forest::fit(&x, &shifted, &small_forest(), 9).unwrap().predict(&x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((q - p - shift).abs() < 1e-9, "{p} + {shift} vs {q}");
        }
    }
}

#[test]
fn ensemble_is_more_stable_than_one_tree() {
    // spread of predictions across seeds shrinks as trees are added
    let values: Vec<f64> = (0..400).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
    let x = FeatureMatrix::from_dense(rows(100, 4, &values)).unwrap();
    let y: Vec<f64> = x.rows().iter().map(|r| 1.0 + 3.0 * r.get(0) + (r.get(1) - 0.5)).collect();
    let spread = |trees: usize| {
        let config = ForestConfig { trees, ..ForestConfig::default() };
        let preds: Vec<Vec<f64>> = (0..6).map(|s| Forest::fit(&x, &y, &config, s).unwrap().predict(&x).unwrap()).collect();
        (0..x.len())
            .map(|i| {
                let col: Vec<f64> = preds.iter().map(|p| p[i]).collect();
                let m = col.iter().sum::<f64>() / col.len() as f64;
                col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64
            })
            .sum::<f64>()
    };
    assert!(spread(50) < spread(1) / 5.0);
}
