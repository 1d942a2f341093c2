//! Driving detection: per-axis accelerometer statistics over short windows,
//! classified by a small Gini-impurity decision tree.
//!
//! Features are the per-axis mean and population variance of acceleration
//! over non-overlapping windows (2 s in the reference pipeline), which makes
//! them independent of the sampling rate. The tree is greedy: at each node
//! the split minimizing weighted Gini impurity over all six features is
//! taken, with candidate thresholds placed midway between consecutive sorted
//! feature values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace_io::ImuTrace;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("window of {window} s does not fit the trace ({duration:.2} s)")]
    TraceTooShort { window: f64, duration: f64 },
    #[error("window must be positive, got {0}")]
    BadWindow(f64),
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("training data is empty")]
    EmptyTraining,
    #[error("max_depth must be at least 1")]
    BadDepth,
}

/// Class label for a feature window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivityClass {
    Driving,
    Null,
}

/// Per-axis accelerometer statistics over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFeatures {
    pub mean: [f64; 3],
    pub variance: [f64; 3],
    pub label: Option<ActivityClass>,
}

impl WindowFeatures {
    /// Feature vector layout: `[mean_x, mean_y, mean_z, var_x, var_y, var_z]`.
    pub fn as_vector(&self) -> [f64; 6] {
        [
            self.mean[0],
            self.mean[1],
            self.mean[2],
            self.variance[0],
            self.variance[1],
            self.variance[2],
        ]
    }
}

/// Splits a trace into non-overlapping `window`-second groups and computes
/// per-axis mean and population variance of the accelerometer. A trailing
/// group is kept when at least half populated.
pub fn window_features(
    trace: &ImuTrace,
    window: f64,
) -> Result<Vec<WindowFeatures>, DetectError> {
    if window <= 0.0 {
        return Err(DetectError::BadWindow(window));
    }
    let duration = trace.duration();
    if duration + 1.0 / trace.nominal_rate() < window {
        return Err(DetectError::TraceTooShort { window, duration });
    }
    let t0 = trace.samples()[0].t;
    let n_windows = trace
        .samples()
        .iter()
        .map(|s| ((s.t - t0) / window).floor() as usize)
        .max()
        .unwrap()
        + 1;
    let mut groups: Vec<Vec<[f64; 3]>> = vec![Vec::new(); n_windows];
    for s in trace.samples() {
        let k = ((s.t - t0) / window).floor() as usize;
        groups[k].push(s.accel);
    }
    let expected = (window * trace.nominal_rate()).round().max(1.0);
    let mut out = Vec::with_capacity(n_windows);
    for (k, g) in groups.iter().enumerate() {
        if g.is_empty() {
            continue;
        }
        if k == n_windows - 1 && (g.len() as f64) < 0.5 * expected {
            break;
        }
        let n = g.len() as f64;
        let mut mean = [0.0; 3];
        for a in g {
            for (m, v) in mean.iter_mut().zip(a) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut variance = [0.0; 3];
        for a in g {
            for axis in 0..3 {
                variance[axis] += (a[axis] - mean[axis]).powi(2);
            }
        }
        for v in &mut variance {
            *v /= n;
        }
        out.push(WindowFeatures {
            mean,
            variance,
            label: None,
        });
    }
    if out.is_empty() {
        return Err(DetectError::TraceTooShort { window, duration });
    }
    Ok(out)
}

/// A labeled training/evaluation row.
#[derive(Debug, Clone, Copy)]
pub struct LabeledWindow {
    pub features: [f64; 6],
    pub label: ActivityClass,
}

/// Binary decision tree over the six window features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        below: Box<TreeNode>,
        above: Box<TreeNode>,
    },
    Leaf {
        class: ActivityClass,
        /// Fraction of training rows at this leaf labeled driving; doubles
        /// as the score for ROC sweeps.
        driving_purity: f64,
        samples: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub max_depth: usize,
    pub root: TreeNode,
}

/// Trains a greedy Gini tree. Deterministic: splits are scanned in feature
/// order with midpoint thresholds, so the seed only matters to callers that
/// shuffle their data first.
pub fn train_tree(
    data: &[LabeledWindow],
    max_depth: usize,
    _seed: u64,
) -> Result<DecisionTree, DetectError> {
    if data.is_empty() {
        return Err(DetectError::EmptyTraining);
    }
    if max_depth == 0 {
        return Err(DetectError::BadDepth);
    }
    let driving = data.iter().filter(|r| r.label == ActivityClass::Driving).count();
    if driving == 0 || driving == data.len() {
        return Err(DetectError::SingleClass);
    }
    let rows: Vec<&LabeledWindow> = data.iter().collect();
    Ok(DecisionTree {
        max_depth,
        root: grow(&rows, max_depth),
    })
}

fn gini(driving: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = driving as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

fn leaf(rows: &[&LabeledWindow]) -> TreeNode {
    let driving = rows.iter().filter(|r| r.label == ActivityClass::Driving).count();
    let purity = driving as f64 / rows.len() as f64;
    TreeNode::Leaf {
        class: if 2 * driving >= rows.len() {
            ActivityClass::Driving
        } else {
            ActivityClass::Null
        },
        driving_purity: purity,
        samples: rows.len(),
    }
}

fn grow(rows: &[&LabeledWindow], depth_left: usize) -> TreeNode {
    let driving = rows.iter().filter(|r| r.label == ActivityClass::Driving).count();
    if depth_left == 0 || driving == 0 || driving == rows.len() || rows.len() < 2 {
        return leaf(rows);
    }
    let parent_impurity = gini(driving, rows.len()) * rows.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
    for feature in 0..6 {
        let mut values: Vec<(f64, ActivityClass)> = rows
            .iter()
            .map(|r| (r.features[feature], r.label))
            .collect();
        values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let total_driving = driving;
        let mut below_driving = 0usize;
        for i in 0..values.len() - 1 {
            if values[i].1 == ActivityClass::Driving {
                below_driving += 1;
            }
            if values[i].0 == values[i + 1].0 {
                continue;
            }
            let threshold = 0.5 * (values[i].0 + values[i + 1].0);
            let below_n = i + 1;
            let above_n = values.len() - below_n;
            let weighted = gini(below_driving, below_n) * below_n as f64
                + gini(total_driving - below_driving, above_n) * above_n as f64;
            match best {
                Some((b, _, _)) if weighted >= b => {}
                _ => best = Some((weighted, feature, threshold)),
            }
        }
    }
    let Some((weighted, feature, threshold)) = best else {
        return leaf(rows);
    };
    if weighted >= parent_impurity {
        return leaf(rows);
    }
    let below: Vec<&LabeledWindow> = rows
        .iter()
        .filter(|r| r.features[feature] <= threshold)
        .copied()
        .collect();
    let above: Vec<&LabeledWindow> = rows
        .iter()
        .filter(|r| r.features[feature] > threshold)
        .copied()
        .collect();
    TreeNode::Split {
        feature,
        threshold,
        below: Box::new(grow(&below, depth_left - 1)),
        above: Box::new(grow(&above, depth_left - 1)),
    }
}

/// Classifies one window; the score is the training driving-purity of the
/// leaf, usable as a threshold for ROC sweeps.
pub fn classify(tree: &DecisionTree, features: &[f64; 6]) -> (ActivityClass, f64) {
    let mut node = &tree.root;
    loop {
        match node {
            TreeNode::Leaf {
                class,
                driving_purity,
                ..
            } => return (*class, *driving_purity),
            TreeNode::Split {
                feature,
                threshold,
                below,
                above,
            } => {
                node = if features[*feature] <= *threshold {
                    below
                } else {
                    above
                };
            }
        }
    }
}

/// Stratified shuffle split: each class is shuffled separately (seeded) and
/// cut at `train_fraction`.
pub fn stratified_split(
    data: &[LabeledWindow],
    train_fraction: f64,
    seed: u64,
) -> (Vec<LabeledWindow>, Vec<LabeledWindow>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [ActivityClass::Driving, ActivityClass::Null] {
        let mut rows: Vec<LabeledWindow> =
            data.iter().filter(|r| r.label == class).copied().collect();
        rows.shuffle(&mut rng);
        let cut = (rows.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&rows[..cut]);
        test.extend_from_slice(&rows[cut..]);
    }
    (train, test)
}

/// Confusion counts over a labeled set, in the printed table's layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMatrix {
    pub driving_driving: usize,
    pub driving_null: usize,
    pub null_driving: usize,
    pub null_null: usize,
}

impl ConfusionMatrix {
    pub fn evaluate(tree: &DecisionTree, rows: &[LabeledWindow]) -> Self {
        let mut m = ConfusionMatrix {
            driving_driving: 0,
            driving_null: 0,
            null_driving: 0,
            null_null: 0,
        };
        for r in rows {
            let (pred, _) = classify(tree, &r.features);
            match (r.label, pred) {
                (ActivityClass::Driving, ActivityClass::Driving) => m.driving_driving += 1,
                (ActivityClass::Driving, ActivityClass::Null) => m.driving_null += 1,
                (ActivityClass::Null, ActivityClass::Driving) => m.null_driving += 1,
                (ActivityClass::Null, ActivityClass::Null) => m.null_null += 1,
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.driving_driving + self.driving_null + self.null_driving + self.null_null
    }

    pub fn accuracy(&self) -> f64 {
        (self.driving_driving + self.null_null) as f64 / self.total() as f64
    }

    /// Percent-of-total cells in the same layout as the printed table:
    /// rows actual (driving, null) x columns predicted (driving, null).
    pub fn as_percentages(&self) -> [[f64; 2]; 2] {
        let t = self.total() as f64;
        [
            [
                100.0 * self.driving_driving as f64 / t,
                100.0 * self.driving_null as f64 / t,
            ],
            [
                100.0 * self.null_driving as f64 / t,
                100.0 * self.null_null as f64 / t,
            ],
        ]
    }
}

/// ROC curve from sweeping the leaf-score threshold, as
/// `(threshold, fpr, tpr)` rows from (0,0) to (1,1).
pub fn roc_curve(tree: &DecisionTree, rows: &[LabeledWindow]) -> Vec<(f64, f64, f64)> {
    let scored: Vec<(f64, bool)> = rows
        .iter()
        .map(|r| {
            let (_, score) = classify(tree, &r.features);
            (score, r.label == ActivityClass::Driving)
        })
        .collect();
    let positives = scored.iter().filter(|(_, p)| *p).count().max(1) as f64;
    let negatives = scored.iter().filter(|(_, p)| !*p).count().max(1) as f64;
    let mut thresholds: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut curve = vec![(f64::INFINITY, 0.0, 0.0)];
    for th in thresholds {
        let tp = scored.iter().filter(|(s, p)| *p && *s >= th).count() as f64;
        let fp = scored.iter().filter(|(s, p)| !*p && *s >= th).count() as f64;
        curve.push((th, fp / negatives, tp / positives));
    }
    if curve.last().map(|&(_, f, t)| (f, t)) != Some((1.0, 1.0)) {
        curve.push((f64::NEG_INFINITY, 1.0, 1.0));
    }
    curve
}

/// Trapezoidal area under the ROC curve.
pub fn roc_auc(curve: &[(f64, f64, f64)]) -> f64 {
    curve
        .windows(2)
        .map(|w| {
            let (_, f0, t0) = w[0];
            let (_, f1, t1) = w[1];
            (f1 - f0) * 0.5 * (t0 + t1)
        })
        .sum()
}
