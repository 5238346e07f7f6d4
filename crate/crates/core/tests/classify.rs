mod common;

use effhmm::classify::{classify_sequence, evaluate, split_per_class, train_classifier, ScoreMode};
use effhmm::learning::TrainConfig;
use effhmm::pipelines::iris::{fit_bins, iris_trend_sequence, parse_iris_csv};
use effhmm::pipelines::sampler::sample_many;
use effhmm::{
    ClassLabel, Classifier, EffHmmModel, IrisRecord, LabeledDataset, ObservationSequence, Variant,
};
use proptest::prelude::*;

fn label(s: &str) -> ClassLabel {
    ClassLabel::new(s).unwrap()
}

fn iris_dataset() -> LabeledDataset {
    let records: Vec<IrisRecord> = parse_iris_csv(include_str!("../data/iris.csv")).unwrap();
    let spec = fit_bins(&records).unwrap();
    let items = records
        .iter()
        .map(|r| (iris_trend_sequence(r, &spec), r.species.clone()))
        .collect();
    LabeledDataset::new(items, 3).unwrap()
}

fn labels_of(ds: &LabeledDataset) -> Vec<ClassLabel> {
    ds.items().iter().map(|(_, l)| l.clone()).collect()
}

#[test]
fn iris_protocol_trains_three_valid_converged_models() {
    let ds = iris_dataset();
    let split = split_per_class(&labels_of(&ds), 10, 3);
    assert_eq!((split.train.len(), split.test.len()), (30, 120));
    let clf: Classifier =
        train_classifier(&ds.subset(&split.train), &TrainConfig::default()).unwrap();
    assert_eq!(clf.models().len(), 3);
    for (l, model) in clf.models() {
        assert!(model.validate().is_ok(), "{l}");
        assert!(clf.reports()[l].converged, "{l}");
    }
    let report = evaluate(&clf, &ds.subset(&split.test), ScoreMode::Raw).unwrap();
    assert_eq!(report.total(), 120);
    let again = evaluate(&clf, &ds.subset(&split.test), ScoreMode::Raw).unwrap();
    assert_eq!(report, again);
}

#[test]
fn split_respects_classes_and_records_shortfalls() {
    let labels: Vec<ClassLabel> = ["a", "a", "a", "b", "b", "c", "c", "c", "c"]
        .iter()
        .map(|s| label(s))
        .collect();
    let split = split_per_class(&labels, 3, 8);
    assert_eq!(split.shortfalls, vec![(label("b"), 2)]);
    assert_eq!(split.train.len(), 8);
    assert_eq!(
        split.test,
        split
            .test
            .iter()
            .copied()
            .filter(|&i| labels[i] == label("c"))
            .collect::<Vec<_>>()
    );
    assert_eq!(split_per_class(&labels, 3, 8), split);
}

fn separated_models() -> (EffHmmModel, EffHmmModel) {
    let a = EffHmmModel::from_rows(
        Variant::EvidenceFeedForward,
        vec![0.5, 0.5],
        vec![vec![0.9, 0.1], vec![0.1, 0.9]],
        vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.8, 0.1]],
        Some(vec![
            vec![vec![0.8, 0.1, 0.1]; 3],
            vec![vec![0.1, 0.8, 0.1]; 3],
        ]),
    )
    .unwrap();
    let b = EffHmmModel::from_rows(
        Variant::EvidenceFeedForward,
        vec![0.5, 0.5],
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        vec![vec![0.1, 0.1, 0.8], vec![0.1, 0.45, 0.45]],
        Some(vec![
            vec![vec![0.1, 0.1, 0.8]; 3],
            vec![vec![0.2, 0.4, 0.4]; 3],
        ]),
    )
    .unwrap();
    (a, b)
}

#[test]
fn own_samples_score_higher_under_their_own_model() {
    let (a, b) = separated_models();
    let mut models = std::collections::BTreeMap::new();
    models.insert(label("a"), a.clone());
    models.insert(label("b"), b);
    let clf = Classifier::new(models, TrainConfig::default(), Default::default()).unwrap();
    let samples = sample_many(&a, 15, 1000, 77).unwrap();
    let wins = samples
        .iter()
        .filter(|s| classify_sequence(&clf, s, ScoreMode::Raw).unwrap().label == label("a"))
        .count();
    assert!(wins >= 950, "{wins}");
}

#[test]
fn normalized_scores_keep_the_report_schema() {
    let ds = iris_dataset();
    let split = split_per_class(&labels_of(&ds), 10, 0);
    let clf: Classifier =
        train_classifier(&ds.subset(&split.train), &TrainConfig::default()).unwrap();
    let test = ds.subset(&split.test);
    let raw = serde_json::to_value(evaluate(&clf, &test, ScoreMode::Raw).unwrap()).unwrap();
    let norm =
        serde_json::to_value(evaluate(&clf, &test, ScoreMode::LengthNormalized).unwrap()).unwrap();
    let keys = |v: &serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&raw), keys(&norm));
    assert_ne!(raw["scores"], norm["scores"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn argmax_ignores_a_common_rescale(shift in -50.0f64..50.0, seq in proptest::collection::vec(0usize..3, 1..12)) {
        let (a, b) = separated_models();
        let obs = ObservationSequence::new(seq).unwrap();
        let la = effhmm::inference::log_likelihood(&a, &obs).unwrap();
        let lb = effhmm::inference::log_likelihood(&b, &obs).unwrap();
        let mut models = std::collections::BTreeMap::new();
        models.insert(label("a"), a);
        models.insert(label("b"), b);
        let clf = Classifier::new(models, TrainConfig::default(), Default::default()).unwrap();
        let picked = classify_sequence(&clf, &obs, ScoreMode::Raw).unwrap().label;
        let shifted = if lb + shift > la + shift { label("b") } else { label("a") };
        prop_assert_eq!(picked, shifted);
    }
}
