//! Multinomial logistic regression and the frozen-embedding linear probe.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_PROBE_ITERATIONS: usize = 500;
pub const DEFAULT_PROBE_L2: f64 = 1e-4;
/// Fraction of each class placed in the probe's training mask.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.2;

/// Softmax classifier on standardized features, fit by full-batch gradient descent.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticRegression {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    mean: DVector<f64>,
    scale: DVector<f64>,
}

impl LogisticRegression {
    /// Fits on rows `x` with labels `< classes`, mean cross-entropy plus `l2/2 |W|^2`.
    pub fn fit(x: &DMatrix<f64>, y: &[usize], classes: usize, iterations: usize, l2: f64) -> Result<Self> {
        let (n, d) = x.shape();
        if n == 0 || n != y.len() {
            return Err(Error::InvalidArgument(format!("{n} training rows for {} labels", y.len())));
        }
        if let Some(&c) = y.iter().find(|&&c| c >= classes) {
            return Err(Error::InvalidArgument(format!("label {c} outside {classes} classes")));
        }
        let mean = DVector::from_fn(d, |j, _| x.column(j).mean());
        let scale = DVector::from_fn(d, |j, _| {
            let sd = x.column(j).map(|v| (v - mean[j]).powi(2)).mean().sqrt();
            if sd > 1e-12 { sd } else { 1.0 }
        });
        let mut model = Self { weights: DMatrix::zeros(d, classes), bias: DVector::zeros(classes), mean, scale };
        let z = model.standardize(x);
        let step = 1.0 / (0.5 * gram_max_eigenvalue(&z) + l2);
        let nf = n as f64;
        for _ in 0..iterations {
            let mut g = model.probabilities_std(&z);
            for (i, &c) in y.iter().enumerate() {
                g[(i, c)] -= 1.0;
            }
            g /= nf;
            let dw = z.transpose() * &g + &model.weights * l2;
            let db = g.row_sum().transpose();
            model.weights -= dw * step;
            model.bias -= db * step;
        }
        Ok(model)
    }

    fn standardize(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j])
    }

    fn probabilities_std(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut logits = z * &self.weights;
        for mut row in logits.row_iter_mut() {
            row += self.bias.transpose();
            let max = row.max();
            row.apply(|v| *v = (*v - max).exp());
            let sum = row.sum();
            row /= sum;
        }
        logits
    }

    pub fn probabilities(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.probabilities_std(&self.standardize(x))
    }

    /// Arg-max class per row; ties go to the smaller class id.
    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<usize> {
        let p = self.probabilities(x);
        p.row_iter()
            .map(|row| {
                let mut best = 0;
                for c in 1..row.len() {
                    if row[c] > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

/// Largest eigenvalue of `[Z 1]^T [Z 1] / N` by power iteration.
fn gram_max_eigenvalue(z: &DMatrix<f64>) -> f64 {
    let n = z.nrows() as f64;
    let aug = DMatrix::from_fn(z.nrows(), z.ncols() + 1, |i, j| if j < z.ncols() { z[(i, j)] } else { 1.0 });
    let gram = aug.transpose() * &aug / n;
    let mut v = DVector::from_element(gram.nrows(), 1.0);
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = &gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w) / v.norm_squared();
        v = w / norm;
        if (next - lambda).abs() <= 1e-10 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(1e-12)
}

/// Test-set metrics of a probe.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
}

impl ProbeResult {
    pub fn from_predictions(truth: &[usize], predicted: &[usize], classes: usize, seed: u64, train_size: usize) -> Self {
        let mut confusion = vec![vec![0usize; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = (0..classes).map(|c| ratio(confusion[c][c], (0..classes).map(|t| confusion[t][c]).sum())).collect();
        let recall = (0..classes).map(|c| ratio(confusion[c][c], confusion[c].iter().sum())).collect();
        Self {
            accuracy: ratio(correct, truth.len()),
            precision,
            recall,
            confusion,
            seed,
            train_size,
            test_size: truth.len(),
        }
    }
}

/// Stratified node split: `train_fraction` of each class (at least one node) to
/// train, the rest to test.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed_value: u64) -> Result<(Vec<bool>, Vec<bool>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = seed::stream_rng(seed_value, "probe/split");
    let mut train = vec![false; labels.len()];
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let k = ((members.len() as f64 * train_fraction).round() as usize).clamp(1, members.len());
        for &i in &members[..k] {
            train[i] = true;
        }
    }
    let test = train.iter().map(|t| !t).collect();
    Ok((train, test))
}

/// Fits a probe on the training mask of frozen embeddings and scores the test mask.
pub fn linear_probe(
    embeddings: &DMatrix<f64>,
    labels: &[usize],
    train_mask: &[bool],
    test_mask: &[bool],
    seed: u64,
    iterations: usize,
    l2: f64,
) -> Result<ProbeResult> {
    let n = embeddings.nrows();
    if labels.len() != n || train_mask.len() != n || test_mask.len() != n {
        return Err(Error::Shape(format!(
            "{n} embeddings, {} labels, masks of {} and {}",
            labels.len(),
            train_mask.len(),
            test_mask.len()
        )));
    }
    if train_mask.iter().zip(test_mask).any(|(a, b)| *a && *b) {
        return Err(Error::InvalidArgument("train and test masks overlap".into()));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    for c in 0..classes {
        let present = labels.contains(&c);
        if present && !(0..n).any(|i| train_mask[i] && labels[i] == c) {
            return Err(Error::MissingClass(c));
        }
    }
    let rows = |mask: &[bool]| -> Vec<usize> { (0..n).filter(|&i| mask[i]).collect() };
    let (tr, te) = (rows(train_mask), rows(test_mask));
    if te.is_empty() {
        return Err(Error::InvalidArgument("empty test mask".into()));
    }
    let xtr = embeddings.select_rows(&tr);
    let ytr: Vec<usize> = tr.iter().map(|&i| labels[i]).collect();
    let clf = LogisticRegression::fit(&xtr, &ytr, classes, iterations, l2)?;
    let predicted = clf.predict(&embeddings.select_rows(&te));
    let truth: Vec<usize> = te.iter().map(|&i| labels[i]).collect();
    Ok(ProbeResult::from_predictions(&truth, &predicted, classes, seed, tr.len()))
}
