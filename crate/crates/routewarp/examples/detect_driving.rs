//! Driving detection: window features from driving and non-driving traces,
//! a small Gini tree, held-out confusion matrix and ROC.
//!
//! Run with: cargo run --release --example detect_driving

use routewarp::detect::{
    roc_auc, roc_curve, stratified_split, train_tree, window_features, ActivityClass,
    ConfusionMatrix, LabeledWindow,
};
use routewarp::maneuvers::GridNetwork;
use routewarp::synth::{synth_corpus, synth_null_trace, CorpusSpec};

fn main() {
    let network = GridNetwork::new(32, 32, 100.0);
    let spec = CorpusSpec::new(4, 3, 60);
    println!("synthesizing driving and non-driving traces...");
    let journeys = synth_corpus(&network, &spec).expect("corpus");

    let mut rows: Vec<LabeledWindow> = Vec::new();
    for j in &journeys {
        for w in window_features(&j.trace, 2.0).expect("windows") {
            rows.push(LabeledWindow {
                features: w.as_vector(),
                label: ActivityClass::Driving,
            });
        }
    }
    let driving_windows = rows.len();
    for i in 0..12 {
        let t = synth_null_trace(400.0, 10.0, 1000 + i).expect("null trace");
        for w in window_features(&t, 2.0).expect("windows") {
            rows.push(LabeledWindow {
                features: w.as_vector(),
                label: ActivityClass::Null,
            });
        }
    }
    println!(
        "windows: {} driving, {} null",
        driving_windows,
        rows.len() - driving_windows
    );

    let (train, test) = stratified_split(&rows, 0.6, 17);
    let tree = train_tree(&train, 4, 17).expect("training");
    let confusion = ConfusionMatrix::evaluate(&tree, &test);
    let pct = confusion.as_percentages();
    println!("\nheld-out confusion (percent of test set):");
    println!("              predicted driving   predicted null");
    println!("  driving     {:>14.1}    {:>12.1}", pct[0][0], pct[0][1]);
    println!("  null        {:>14.1}    {:>12.1}", pct[1][0], pct[1][1]);
    println!("accuracy: {:.2} %", 100.0 * confusion.accuracy());

    let curve = roc_curve(&tree, &test);
    println!("ROC AUC: {:.4} over {} threshold points", roc_auc(&curve), curve.len());
}
