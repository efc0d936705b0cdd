use std::io::{BufRead, Write};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{fields, parse_f64, parse_usize, skip_line};
use crate::loss::ClassStats;
use crate::rng::{stream, DATA};
use crate::scalar::{round_half_up, Scalar};

/// Feature vectors with observed labels. `clean_labels` differ from
/// `labels` only for synthetic sets built with label noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub dim: usize,
    pub num_classes: usize,
    pub ids: Vec<String>,
    pub features: Vec<Vec<T>>,
    pub labels: Vec<usize>,
    pub clean_labels: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(num_classes: usize, features: Vec<Vec<T>>, labels: Vec<usize>) -> Result<Self> {
        let ids = (0..labels.len()).map(|i| format!("s{i}")).collect();
        Self::with_clean(num_classes, ids, features, labels.clone(), labels)
    }

    pub fn with_clean(
        num_classes: usize,
        ids: Vec<String>,
        features: Vec<Vec<T>>,
        labels: Vec<usize>,
        clean_labels: Vec<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        if features.len() != n || clean_labels.len() != n || ids.len() != n {
            return Err(Error::Dimension("ids, features and labels differ in length".into()));
        }
        if n == 0 {
            return Err(Error::param("dataset is empty"));
        }
        let dim = features[0].len();
        if dim == 0 || features.iter().any(|f| f.len() != dim) {
            return Err(Error::Dimension("feature vectors must share a positive length".into()));
        }
        if let Some(&y) = labels.iter().chain(&clean_labels).find(|&&y| y >= num_classes) {
            return Err(Error::param(format!("label {y} outside 0..{num_classes}")));
        }
        Ok(Self {
            dim,
            num_classes,
            ids,
            features,
            labels,
            clean_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_stats(&self) -> Result<ClassStats> {
        ClassStats::from_labels(&self.labels, self.num_classes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub counts: Vec<u64>,
    pub dim: usize,
    /// Distance between any two class centres.
    pub separation: f64,
    /// Fraction of labels replaced by a uniformly drawn wrong class.
    pub eta: f64,
    pub seed: u64,
}

/// Unit-variance Gaussian clusters centred at `(separation/√2)·e_i`, so every
/// pair of centres is `separation` apart. Exactly `round(eta·n)` samples get a
/// wrong label.
pub fn make_synthetic<T: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<T>> {
    let c = spec.counts.len();
    if c < 2 {
        return Err(Error::param("synthetic data needs at least two classes"));
    }
    if spec.counts.contains(&0) {
        return Err(Error::param("synthetic class counts must be positive"));
    }
    if spec.dim < c {
        return Err(Error::param(format!("dim {} is below the class count {c}", spec.dim)));
    }
    if !(0.0..0.5).contains(&spec.eta) {
        return Err(Error::param(format!("label noise {} outside [0, 0.5)", spec.eta)));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
        return Err(Error::param(format!("separation {} must be finite and >= 0", spec.separation)));
    }
    let offset = spec.separation / std::f64::consts::SQRT_2;
    let mut rng = stream(spec.seed, DATA, &[0]);
    let mut features = Vec::new();
    let mut clean = Vec::new();
    for (class, &n) in spec.counts.iter().enumerate() {
        for _ in 0..n {
            let v: Vec<T> = (0..spec.dim)
                .map(|d| {
                    let noise: f64 = rng.sample(StandardNormal);
                    T::lit(if d == class { offset + noise } else { noise })
                })
                .collect();
            features.push(v);
            clean.push(class);
        }
    }
    let n = clean.len();
    let flips = round_half_up(spec.eta * n as f64) as usize;
    let mut noise_rng = stream(spec.seed, DATA, &[1]);
    let mut labels = clean.clone();
    for i in index::sample(&mut noise_rng, n, flips) {
        let wrong = noise_rng.random_range(0..c - 1);
        labels[i] = if wrong >= clean[i] { wrong + 1 } else { wrong };
    }
    let ids = (0..n).map(|i| format!("s{i}")).collect();
    Dataset::with_clean(c, ids, features, labels, clean)
}

/// One epoch of indices into `pool` in which every class appears
/// `max_i N_i` times: each sample once, then minority classes topped up by
/// draws with replacement. The result is shuffled.
pub fn oversample_indices<R: Rng + ?Sized>(
    pool: &[usize],
    labels: &[usize],
    stats: &ClassStats,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let c = stats.num_classes();
    let mut by_class = vec![Vec::new(); c];
    for &i in pool {
        let y = *labels.get(i).ok_or_else(|| Error::param(format!("index {i} outside the label list")))?;
        by_class
            .get_mut(y)
            .ok_or_else(|| Error::param(format!("label {y} outside 0..{c}")))?
            .push(i);
    }
    for (k, members) in by_class.iter().enumerate() {
        if members.len() as u64 != stats.count(k) {
            return Err(Error::param(format!(
                "class {k} has {} pool members but the stats say {}",
                members.len(),
                stats.count(k)
            )));
        }
    }
    let target = by_class.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(target * c);
    for members in &by_class {
        out.extend_from_slice(members);
        for _ in members.len()..target {
            out.push(members[rng.random_range(0..members.len())]);
        }
    }
    out.shuffle(rng);
    Ok(out)
}

/// Writes `sample_id,label,f_0..f_{d-1}` rows with round-trip precision.
pub fn write_features<W: Write, T: Scalar>(mut out: W, data: &Dataset<T>) -> Result<()> {
    let io = |e| Error::io("<features>", e);
    write!(out, "sample_id,label").map_err(io)?;
    for d in 0..data.dim {
        write!(out, ",f{d}").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for i in 0..data.len() {
        write!(out, "{},{}", data.ids[i], data.labels[i]).map_err(io)?;
        for v in &data.features[i] {
            write!(out, ",{:?}", v.as_f64()).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

/// Reads a feature file. Class count is the largest label plus one unless
/// `num_classes` is given.
pub fn read_features<R: BufRead, T: Scalar>(input: R, num_classes: Option<usize>) -> Result<Dataset<T>> {
    let mut ids = Vec::new();
    let mut feats = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let no = i + 1;
        let line = line.map_err(|e| Error::io("<features>", e))?;
        if skip_line(&line) {
            continue;
        }
        let f = fields(&line);
        if f.len() < 3 {
            return Err(Error::parse(no, "expected sample_id,label,features..."));
        }
        if ids.is_empty() && f[1] == "label" {
            continue;
        }
        labels.push(parse_usize(f[1], no)?);
        let row = f[2..]
            .iter()
            .map(|s| parse_f64(s, no).map(T::lit))
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = feats.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::parse(no, format!("{} features, expected {first}", row.len())));
            }
        }
        feats.push(row);
        ids.push(f[0].to_string());
    }
    let c = num_classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    Dataset::with_clean(c, ids, feats, labels.clone(), labels)
}
