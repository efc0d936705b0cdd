//! Balanced accuracy, one-vs-rest sensitivity/specificity, rank-based AUC,
//! and multi-crop score aggregation.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::format::{fields, parse_f64, parse_usize, sig, skip_line};
use crate::scalar::{sigmoid, Scalar};

/// Rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    cells: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            cells: vec![0; classes * classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::Dimension("confusion matrix must be square".into()));
        }
        Ok(Self {
            classes: c,
            cells: rows.concat(),
        })
    }

    pub fn from_pairs(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Dimension("truth and prediction lengths differ".into()));
        }
        let mut cm = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        if truth >= self.classes || predicted >= self.classes {
            return Err(Error::param(format!(
                "class pair ({truth}, {predicted}) outside 0..{}",
                self.classes
            )));
        }
        self.cells[truth * self.classes + predicted] += 1;
        Ok(())
    }

    /// Adds another shard's counts.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.classes != self.classes {
            return Err(Error::Dimension("cannot merge matrices of different size".into()));
        }
        self.cells.iter_mut().zip(&other.cells).for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.cells[truth * self.classes + predicted]
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        self.cells[truth * self.classes..(truth + 1) * self.classes].iter().sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, predicted)).sum()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    /// Recall of class `i`, or `None` when the class has no samples.
    pub fn recall(&self, i: usize) -> Option<f64> {
        let row = self.row_sum(i);
        (row > 0).then(|| self.get(i, i) as f64 / row as f64)
    }

    /// Mean of per-class recalls.
    pub fn balanced_accuracy(&self) -> Result<f64> {
        if self.classes == 0 {
            return Err(Error::param("empty confusion matrix"));
        }
        let mut sum = 0.0;
        for i in 0..self.classes {
            sum += self.recall(i).ok_or_else(|| Error::UndefinedClass {
                class: i,
                msg: "no samples of this class, recall undefined".into(),
            })?;
        }
        Ok(sum / self.classes as f64)
    }

    /// One-vs-rest sensitivity and specificity per class.
    pub fn class_report(&self) -> ClassReport {
        let total = self.total();
        let mut sensitivity = Vec::with_capacity(self.classes);
        let mut specificity = Vec::with_capacity(self.classes);
        for i in 0..self.classes {
            let tp = self.get(i, i);
            let fn_ = self.row_sum(i) - tp;
            let fp = self.col_sum(i) - tp;
            let tn = total - tp - fn_ - fp;
            sensitivity.push((tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64));
            specificity.push((tn + fp > 0).then(|| tn as f64 / (tn + fp) as f64));
        }
        let defined: Vec<f64> = specificity.iter().flatten().copied().collect();
        let avg_specificity = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        ClassReport {
            sensitivity,
            specificity,
            avg_specificity,
        }
    }
}

/// `None` marks a class whose denominator is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub sensitivity: Vec<Option<f64>>,
    pub specificity: Vec<Option<f64>>,
    /// Mean over classes with a defined specificity.
    pub avg_specificity: Option<f64>,
}

/// One scored sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction<T> {
    pub id: String,
    pub label: usize,
    pub scores: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet<T> {
    num_classes: usize,
    samples: Vec<Prediction<T>>,
}

impl<T: Scalar> PredictionSet<T> {
    pub fn new(num_classes: usize) -> Self {
        Self {
            num_classes,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, p: Prediction<T>) -> Result<()> {
        if p.scores.len() != self.num_classes {
            return Err(Error::Dimension(format!(
                "sample {} has {} scores, expected {}",
                p.id,
                p.scores.len(),
                self.num_classes
            )));
        }
        if p.label >= self.num_classes {
            return Err(Error::param(format!("sample {} label {} out of range", p.id, p.label)));
        }
        if p.scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::param(format!("sample {} has a non-finite score", p.id)));
        }
        self.samples.push(p);
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn samples(&self) -> &[Prediction<T>] {
        &self.samples
    }

    /// Confusion matrix with the argmax score as the predicted class.
    pub fn confusion(&self) -> ConfusionMatrix {
        let mut cm = ConfusionMatrix::new(self.num_classes);
        for s in &self.samples {
            cm.record(s.label, argmax(&s.scores)).expect("validated on push");
        }
        cm
    }
}

/// Index of the largest score; the first one wins ties.
pub fn argmax<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Per-class one-vs-rest AUC.
#[derive(Clone, Debug, PartialEq)]
pub struct AucReport {
    /// `None` for classes without positives or without negatives.
    pub per_class: Vec<Option<f64>>,
    pub excluded: Vec<usize>,
    /// Mean over the classes that were not excluded.
    pub mean: Option<f64>,
}

/// AUC of `scores` for the positives marked in `positive`, via the
/// Mann-Whitney statistic with mid-ranks for ties. Counts stay integral
/// (ranks are doubled) so the result is one exact division.
pub fn binary_auc<T: PartialOrd + Copy>(scores: &[T], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count() as u128;
    let n_neg = positive.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Positions i..j share the mid-rank (i + 1 + j) / 2.
        let twice_rank = (i + 1 + j) as u128;
        let pos_in_group = order[i..j].iter().filter(|&&k| positive[k]).count() as u128;
        twice_rank_sum += twice_rank * pos_in_group;
        i = j;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Some(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

pub fn avg_auc<T: Scalar>(preds: &PredictionSet<T>) -> AucReport {
    let c = preds.num_classes();
    let mut per_class = Vec::with_capacity(c);
    let mut excluded = Vec::new();
    for k in 0..c {
        let scores: Vec<T> = preds.samples().iter().map(|s| s.scores[k]).collect();
        let positive: Vec<bool> = preds.samples().iter().map(|s| s.label == k).collect();
        let auc = binary_auc(&scores, &positive);
        if auc.is_none() {
            excluded.push(k);
        }
        per_class.push(auc);
    }
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    AucReport {
        per_class,
        excluded,
        mean,
    }
}

/// What gets averaged across crops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CropAverage {
    /// Arithmetic mean of the scores as given.
    Probability,
    /// Mean of `logit(p)`, mapped back through the sigmoid.
    Logit,
}

impl std::str::FromStr for CropAverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "prob" | "probability" => Ok(CropAverage::Probability),
            "logit" => Ok(CropAverage::Logit),
            other => Err(Error::param(format!("unknown crop average {other:?}"))),
        }
    }
}

/// Elementwise mean of the crop score vectors.
pub fn aggregate_crops<T: Scalar>(crops: &[Vec<T>]) -> Result<Vec<T>> {
    let first = crops.first().ok_or_else(|| Error::param("no crops to aggregate"))?;
    let c = first.len();
    if crops.iter().any(|v| v.len() != c) {
        return Err(Error::Dimension("crop score vectors differ in length".into()));
    }
    // running mean
    let mut mean = first.clone();
    for (k, v) in crops.iter().enumerate().skip(1) {
        let n = T::from_usize(k + 1).expect("crop count fits scalar");
        mean.iter_mut().zip(v).for_each(|(m, x)| *m += (*x - *m) / n);
    }
    Ok(mean)
}

pub fn aggregate_crops_with<T: Scalar>(crops: &[Vec<T>], mode: CropAverage) -> Result<Vec<T>> {
    match mode {
        CropAverage::Probability => aggregate_crops(crops),
        CropAverage::Logit => {
            let eps = T::lit(1e-12);
            let logits: Vec<Vec<T>> = crops
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|&p| {
                            let p = p.max(eps).min(T::one() - eps);
                            (p / (T::one() - p)).ln()
                        })
                        .collect()
                })
                .collect();
            Ok(aggregate_crops(&logits)?.into_iter().map(sigmoid).collect())
        }
    }
}

/// Reads `sample_id, true_class, score_0 .. score_{C-1}` rows. A sample id
/// may repeat (one row per crop); rows are returned in file order.
pub fn read_predictions<R: BufRead>(input: R) -> Result<Vec<Prediction<f64>>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<predictions>", e))?;
        if skip_line(&line) {
            continue;
        }
        let f = fields(&line);
        if rows.is_empty() && f.get(1) == Some(&"true_class") {
            continue;
        }
        if f.len() < 3 {
            return Err(Error::parse(lineno, "row needs sample_id, true_class and scores"));
        }
        let scores = f[2..]
            .iter()
            .map(|s| parse_f64(s, lineno))
            .collect::<Result<Vec<_>>>()?;
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::parse(lineno, "scores must be finite"));
        }
        if *width.get_or_insert(scores.len()) != scores.len() {
            return Err(Error::parse(lineno, "row has a different number of scores"));
        }
        let label = parse_usize(f[1], lineno)?;
        if label >= scores.len() {
            return Err(Error::parse(lineno, format!("true_class {label} has no score column")));
        }
        rows.push(Prediction {
            id: f[0].to_string(),
            label,
            scores,
        });
    }
    Ok(rows)
}

pub fn write_predictions<W: Write, T: Scalar>(mut out: W, preds: &[Prediction<T>]) -> Result<()> {
    let io = |e| Error::io("<predictions>", e);
    if let Some(first) = preds.first() {
        let cols: Vec<String> = (0..first.scores.len()).map(|i| format!("score_{i}")).collect();
        writeln!(out, "sample_id,true_class,{}", cols.join(",")).map_err(io)?;
    }
    for p in preds {
        write!(out, "{},{}", p.id, p.label).map_err(io)?;
        for s in &p.scores {
            write!(out, ",{}", sig(s.as_f64(), 9)).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

/// Groups rows by sample id (first-appearance order) and averages each
/// group. Every sample must have exactly one row or exactly `k` rows.
pub fn group_crops(rows: Vec<Prediction<f64>>, k: usize, mode: CropAverage) -> Result<PredictionSet<f64>> {
    let c = rows.first().map(|r| r.scores.len()).unwrap_or(0);
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (usize, Vec<Vec<f64>>)> = HashMap::new();
    for r in rows {
        match groups.get_mut(&r.id) {
            Some((label, crops)) => {
                if *label != r.label {
                    return Err(Error::param(format!("sample {} has conflicting true classes", r.id)));
                }
                crops.push(r.scores);
            }
            None => {
                order.push(r.id.clone());
                groups.insert(r.id, (r.label, vec![r.scores]));
            }
        }
    }
    let mut set = PredictionSet::new(c);
    for id in order {
        let (label, crops) = groups.remove(&id).expect("grouped above");
        if crops.len() != 1 && crops.len() != k {
            return Err(Error::param(format!(
                "sample {id} has {} rows, expected 1 or {k}",
                crops.len()
            )));
        }
        set.push(Prediction {
            scores: aggregate_crops_with(&crops, mode)?,
            id,
            label,
        })?;
    }
    Ok(set)
}

/// The full evaluation block.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub bacc: f64,
    pub classes: ClassReport,
    pub auc: AucReport,
}

impl MetricsReport {
    pub fn evaluate<T: Scalar>(preds: &PredictionSet<T>) -> Result<Self> {
        let cm = preds.confusion();
        Ok(Self {
            bacc: cm.balanced_accuracy()?,
            classes: cm.class_report(),
            auc: avg_auc(preds),
        })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| sig(x, 9)).unwrap_or_else(|| "undefined".into())
}

impl fmt::Display for MetricsReport {
    /// Flat `key=value` lines: bacc, sens_i, spec_i, avg_spec, auc_i, avg_auc.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bacc={}", sig(self.bacc, 9))?;
        for (i, s) in self.classes.sensitivity.iter().enumerate() {
            writeln!(f, "sens_{i}={}", opt(*s))?;
        }
        for (i, s) in self.classes.specificity.iter().enumerate() {
            writeln!(f, "spec_{i}={}", opt(*s))?;
        }
        writeln!(f, "avg_spec={}", opt(self.classes.avg_specificity))?;
        for (i, a) in self.auc.per_class.iter().enumerate() {
            writeln!(f, "auc_{i}={}", opt(*a))?;
        }
        writeln!(f, "avg_auc={}", opt(self.auc.mean))
    }
}
