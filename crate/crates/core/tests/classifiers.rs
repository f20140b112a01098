use proptest::prelude::*;

use fracture_core::classifiers::{
    best_split, decode_model, encode_model, load_model, plurality, predict_forest, predict_proba_gbdt, predict_svc,
    save_model, train_forest, train_gbdt, train_linear_svc, ClassifierError, ForestConfig, GbdtConfig, LinearSvcConfig,
    Model,
};
use fracture_core::features::FeatureMatrix;

fn matrix(rows: &[Vec<f32>]) -> FeatureMatrix {
    FeatureMatrix::from_rows(rows).unwrap()
}

/// Exhaustive search over every midpoint between distinct sorted values.
fn brute_force_gain(g: &[f64], h: &[f64], x: &[f64], lambda: f64, gamma: f64) -> Option<f64> {
    let mut xs: Vec<f64> = x.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (gt, ht): (f64, f64) = (g.iter().sum(), h.iter().sum());
    let score = |gs: f64, hs: f64| gs * gs / (hs + lambda);
    let mut best: Option<f64> = None;
    for w in xs.windows(2) {
        let t = w[0] + (w[1] - w[0]) / 2.0;
        let (mut gl, mut hl) = (0.0, 0.0);
        for i in 0..x.len() {
            if x[i] < t {
                gl += g[i];
                hl += h[i];
            }
        }
        let gain = 0.5 * (score(gl, hl) + score(gt - gl, ht - hl) - score(gt, ht)) - gamma;
        if gain > 0.0 && best.is_none_or(|b| gain > b) {
            best = Some(gain);
        }
    }
    best
}

fn two_clusters() -> (FeatureMatrix, Vec<u8>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..20 {
        let jitter = (i % 5) as f32 * 0.1;
        rows.push(vec![-3.0 + jitter]);
        labels.push(0);
        rows.push(vec![3.0 - jitter]);
        labels.push(1);
    }
    (matrix(&rows), labels)
}

fn small_gbdt(rounds: usize) -> GbdtConfig {
    GbdtConfig { rounds, max_depth: 3, ..Default::default() }
}

#[test]
fn hand_evaluated_split() {
    let s = best_split(&[-1.0, -1.0, 1.0], &[1.0; 3], &[1.0, 2.0, 3.0], 1.0, 0.0).unwrap();
    assert_eq!(s.threshold, 2.5);
    assert!((s.gain - 0.5 * (4.0 / 3.0 + 0.5 - 0.25)).abs() < 1e-12);
    assert!(best_split(&[1.0, -1.0], &[1.0; 2], &[4.0, 4.0], 1.0, 0.0).is_none());
    assert!(best_split(&[1.0, 1.0], &[1.0; 2], &[0.0, 1.0], 1.0, 10.0).is_none());
}

#[test]
fn two_clusters_are_separated_by_stumps() {
    let (fm, labels) = two_clusters();
    let cfg = GbdtConfig { rounds: 20, max_depth: 1, ..Default::default() };
    let model = train_gbdt(&fm, &labels, 2, &cfg).unwrap();
    assert_eq!(model.rounds(), 20);
    assert!(model.trees.iter().flatten().all(|t| t.depth() <= 1));
    assert_eq!(predict_proba_gbdt(&model, &fm).unwrap().argmax(), labels);
}

#[test]
fn zero_rounds_give_uniform_rows() {
    let (fm, labels) = two_clusters();
    let model = train_gbdt(&fm, &labels, 3, &GbdtConfig { rounds: 0, ..Default::default() }).unwrap();
    let p = predict_proba_gbdt(&model, &fm).unwrap();
    assert!(p.data.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn training_guards() {
    let (fm, _) = two_clusters();
    let zeros = vec![0u8; fm.n()];
    assert_eq!(train_gbdt(&fm, &zeros, 3, &small_gbdt(2)).unwrap_err(), ClassifierError::DegenerateLabels);
    assert_eq!(train_forest(&fm, &zeros, 3, &ForestConfig::default()).unwrap_err(), ClassifierError::DegenerateLabels);
    assert_eq!(
        train_linear_svc(&fm, &zeros, 3, &LinearSvcConfig::default()).unwrap_err(),
        ClassifierError::DegenerateLabels
    );
    let (fm, labels) = two_clusters();
    let model = train_gbdt(&fm, &labels, 2, &small_gbdt(2)).unwrap();
    let wide = fm.with_constant_column(0.0);
    assert!(matches!(predict_proba_gbdt(&model, &wide), Err(ClassifierError::DimensionMismatch { expected: 1, got: 2 })));
}

#[test]
fn plurality_votes() {
    assert_eq!(plurality(&[120, 50, 30]), 0);
    assert_eq!(plurality(&[100, 100, 0]), 0);
    assert_eq!(plurality(&[10, 30, 30]), 1);
}

#[test]
fn svc_separates_a_separable_plane_and_has_one_row_per_class() {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..30 {
        let t = i as f32 / 30.0;
        rows.push(vec![t, 1.0 + t]);
        labels.push(0);
        rows.push(vec![1.0 + t, t]);
        labels.push(1);
    }
    let fm = matrix(&rows);
    let model = train_linear_svc(&fm, &labels, 2, &LinearSvcConfig { epochs: 300, ..Default::default() }).unwrap();
    assert_eq!(model.weights.len(), 2 * 3);
    assert_eq!(predict_svc(&model, &fm).unwrap(), labels);

    let zeros = matrix(&vec![vec![0.0, 0.0]; 5]);
    let preds = predict_svc(&model, &zeros).unwrap();
    assert!(preds.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn duplicated_samples_keep_the_first_round_splits() {
    let (fm, labels) = two_clusters();
    let doubled_rows: Vec<Vec<f32>> = fm.rows().chain(fm.rows()).map(<[f32]>::to_vec).collect();
    let doubled_labels: Vec<u8> = labels.iter().chain(&labels).copied().collect();
    let cfg = small_gbdt(1);
    let a = train_gbdt(&fm, &labels, 2, &cfg).unwrap();
    let b = train_gbdt(&matrix(&doubled_rows), &doubled_labels, 2, &GbdtConfig { lambda: 2.0 * cfg.lambda, ..cfg }).unwrap();
    for (ta, tb) in a.trees[0].iter().zip(&b.trees[0]) {
        assert_eq!(ta.splits(), tb.splits());
    }
}

#[test]
fn model_files_round_trip() {
    let (fm, labels) = two_clusters();
    let models = [
        Model::Gbdt(train_gbdt(&fm, &labels, 2, &small_gbdt(5)).unwrap()),
        Model::Forest(train_forest(&fm, &labels, 2, &ForestConfig { n_trees: 7, ..Default::default() }).unwrap()),
        Model::Svc(train_linear_svc(&fm, &labels, 2, &LinearSvcConfig::default()).unwrap()),
    ];
    let dir = tempfile::tempdir().unwrap();
    for m in &models {
        assert_eq!(&decode_model(&encode_model(m)).unwrap(), m);
        let path = dir.path().join(format!("{}.mdl", m.kind_name()));
        save_model(&path, m).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.predict(&fm).unwrap(), m.predict(&fm).unwrap());
    }
    let bytes = encode_model(&models[0]);
    assert!(matches!(decode_model(&bytes[..bytes.len() - 1]), Err(ClassifierError::Codec(_))));
    assert!(matches!(decode_model(b"NOPE"), Err(ClassifierError::Codec(_))));
}

fn dataset(max_n: usize, d: usize) -> impl Strategy<Value = (Vec<Vec<f32>>, Vec<u8>)> {
    (6..max_n).prop_flat_map(move |n| {
        (
            prop::collection::vec(prop::collection::vec(-4i8..4, d).prop_map(|r| r.into_iter().map(f32::from).collect()), n),
            prop::collection::vec(0u8..3, n).prop_filter("need two classes", |l| l.iter().any(|&c| c != l[0])),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn best_split_matches_enumeration(
        rows in prop::collection::vec((-8i32..8, 1u32..8, -6i32..6), 2..30),
        lambda in 0.0f64..3.0,
        gamma in 0.0f64..0.5,
    ) {
        let g: Vec<f64> = rows.iter().map(|r| f64::from(r.0) / 4.0).collect();
        let h: Vec<f64> = rows.iter().map(|r| f64::from(r.1) / 8.0).collect();
        let x: Vec<f64> = rows.iter().map(|r| f64::from(r.2)).collect();
        let got = best_split(&g, &h, &x, lambda, gamma).map(|s| s.gain);
        let want = brute_force_gain(&g, &h, &x, lambda, gamma);
        match (got, want) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn doubling_weights_keeps_the_split(
        rows in prop::collection::vec((-8i32..8, 1u32..8, -6i32..6), 2..30),
        lambda in 0u32..8,
    ) {
        // Dyadic inputs keep every sum exact, so the doubled gain is exactly twice the original.
        let g: Vec<f64> = rows.iter().map(|r| f64::from(r.0) / 4.0).collect();
        let h: Vec<f64> = rows.iter().map(|r| f64::from(r.1) / 8.0).collect();
        let x: Vec<f64> = rows.iter().map(|r| f64::from(r.2)).collect();
        let lambda = f64::from(lambda) / 4.0;
        let dup = |v: &[f64]| -> Vec<f64> { v.iter().chain(v).copied().collect() };
        let single = best_split(&g, &h, &x, lambda, 0.0);
        let double = best_split(&dup(&g), &dup(&h), &dup(&x), 2.0 * lambda, 0.0);
        prop_assert_eq!(single.map(|s| s.threshold), double.map(|s| s.threshold));
        prop_assert_eq!(single.map(|s| 2.0 * s.gain), double.map(|s| s.gain));
    }

    #[test]
    fn margins_are_additive_over_rounds((rows, labels) in dataset(40, 3), r in 0usize..5) {
        let fm = matrix(&rows);
        let full = train_gbdt(&fm, &labels, 3, &small_gbdt(r + 1)).unwrap();
        let head = full.truncated(r).margins(&fm).unwrap();
        let whole = full.margins(&fm).unwrap();
        for i in 0..fm.n() {
            for k in 0..3 {
                let next = full.trees[r][k].predict(fm.row(i));
                prop_assert_eq!(head.row(i)[k] + next, whole.row(i)[k]);
            }
        }
    }

    #[test]
    fn probability_rows_are_normalized((rows, labels) in dataset(40, 3), probe in prop::collection::vec(-10.0f32..10.0, 3 * 8)) {
        let model = train_gbdt(&matrix(&rows), &labels, 3, &small_gbdt(10)).unwrap();
        let probe = FeatureMatrix::new(8, 3, probe).unwrap();
        let p = predict_proba_gbdt(&model, &probe).unwrap();
        for i in 0..p.n {
            prop_assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(p.row(i).iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn forest_ignores_tree_order((rows, labels) in dataset(40, 4), seed in any::<u64>()) {
        let fm = matrix(&rows);
        let model = train_forest(&fm, &labels, 3, &ForestConfig { n_trees: 15, seed, ..Default::default() }).unwrap();
        let mut reversed = model.clone();
        reversed.trees.reverse();
        prop_assert_eq!(predict_forest(&model, &fm).unwrap(), predict_forest(&reversed, &fm).unwrap());
    }

    #[test]
    fn svc_ignores_a_zero_column((rows, labels) in dataset(40, 4), seed in any::<u64>()) {
        let fm = matrix(&rows);
        let cfg = LinearSvcConfig { epochs: 20, seed, ..Default::default() };
        let plain = train_linear_svc(&fm, &labels, 3, &cfg).unwrap();
        let wide = fm.with_constant_column(0.0);
        let padded = train_linear_svc(&wide, &labels, 3, &cfg).unwrap();
        prop_assert_eq!(predict_svc(&plain, &fm).unwrap(), predict_svc(&padded, &wide).unwrap());
    }
}
