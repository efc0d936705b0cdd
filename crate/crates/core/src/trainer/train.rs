use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, OptimizerState};
use super::data::{oversample_indices, Dataset};
use super::model::{backward_into, forward, ModelParams};
use super::regularize::RegularizerConfig;
use crate::datasets::stratified_indices;
use crate::error::{Error, Result};
use crate::format::sig;
use crate::loss::{ClassStats, Loss, LossConfig};
use crate::metrics::{argmax, ConfusionMatrix};
use crate::rng::{stream, DROPOUT, INIT, SHUFFLE};
use crate::scalar::Scalar;
use crate::schedule::{cls_beta, lr_at, ScheduleConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub hidden_dim: usize,
    pub batch_size: usize,
    /// Share of each class held out for the per-epoch validation score.
    pub val_fraction: T,
    pub regularizer: RegularizerConfig,
    /// Class-balanced resampling of each epoch instead of a plain shuffle.
    pub oversample: bool,
    pub adam: AdamConfig<T>,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            batch_size: 128,
            val_fraction: T::lit(0.2),
            regularizer: RegularizerConfig::default(),
            oversample: false,
            adam: AdamConfig::default(),
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 {
            return Err(Error::param("hidden_dim must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size must be at least 1"));
        }
        let f = self.val_fraction.as_f64();
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::param(format!("val_fraction {f} outside (0, 1)")));
        }
        self.regularizer.validate(self.hidden_dim)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord<T> {
    pub epoch: u32,
    pub beta: T,
    pub lr: T,
    pub train_loss: T,
    pub val_bacc: Option<f64>,
    pub val_sens: Vec<Option<f64>>,
}

#[derive(Clone, Debug)]
pub struct TrainOutput<T> {
    pub params: ModelParams<T>,
    pub log: Vec<EpochRecord<T>>,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    /// Counts the loss was weighted with (training portion).
    pub stats: ClassStats,
}

impl<T> TrainOutput<T> {
    pub fn final_bacc(&self) -> Option<f64> {
        self.log.last().and_then(|r| r.val_bacc)
    }
}

/// Confusion matrix of eval-mode argmax predictions against `truth`.
pub fn confusion<T: Scalar>(
    params: &ModelParams<T>,
    data: &Dataset<T>,
    indices: &[usize],
    truth: &[usize],
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(data.num_classes);
    for &i in indices {
        let z = forward(params, &data.features[i], None)?.logits;
        cm.record(truth[i], argmax(&z))?;
    }
    Ok(cm)
}

/// Trains from a seeded initialization.
///
/// The held-out split is stratified on `clean_labels` and scored against
/// them; the loss only ever sees `labels`. With `max_epochs == 0` the
/// initialization is returned.
pub fn train<T: Scalar>(
    data: &Dataset<T>,
    cfg: &TrainConfig<T>,
    loss_cfg: &LossConfig<T>,
    sched: &ScheduleConfig<T>,
    seed: u64,
) -> Result<TrainOutput<T>> {
    cfg.validate()?;
    ScheduleConfig {
        max_epochs: sched.max_epochs.max(1),
        ..sched.clone()
    }
    .validate()?;
    if data.is_empty() {
        return Err(Error::param("dataset is empty"));
    }
    let (train_idx, val_idx) =
        stratified_indices(&data.clean_labels, data.num_classes, 1.0 - cfg.val_fraction.as_f64(), seed)?;
    let train_labels: Vec<usize> = train_idx.iter().map(|&i| data.labels[i]).collect();
    let stats = ClassStats::from_labels(&train_labels, data.num_classes)?;
    let loss = Loss::new(loss_cfg.clone(), stats.clone())?;
    let mut params = ModelParams::init(data.dim, cfg.hidden_dim, data.num_classes, &mut stream(seed, INIT, &[]))?;
    let mut opt = OptimizerState::new(&params, cfg.adam);
    let mut grads = params.zeros_like();
    let mut log = Vec::with_capacity(sched.max_epochs as usize);

    for epoch in 0..sched.max_epochs {
        let beta = cls_beta(epoch, sched);
        let lr = lr_at(epoch, sched);
        let mut shuffle_rng = stream(seed, SHUFFLE, &[u64::from(epoch)]);
        let order = if cfg.oversample {
            oversample_indices(&train_idx, &data.labels, &stats, &mut shuffle_rng)?
        } else {
            let mut o = train_idx.clone();
            o.shuffle(&mut shuffle_rng);
            o
        };
        let mut loss_sum = T::zero();
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grads.scale(T::zero());
            let inv = T::one() / T::from_usize(batch.len()).expect("batch fits scalar");
            for (k, &i) in batch.iter().enumerate() {
                let pos = (b * cfg.batch_size + k) as u64;
                let mask = cfg
                    .regularizer
                    .sample_mask(cfg.hidden_dim, &mut stream(seed, DROPOUT, &[u64::from(epoch), pos]))?
                    .map(|m| m.into_iter().map(T::lit).collect::<Vec<T>>());
                let x = &data.features[i];
                let fwd = forward(&params, x, mask.as_deref())?;
                let out = loss.eval(&fwd.logits, data.labels[i], beta)?;
                if !out.value.is_finite() || out.grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::Diverged {
                        epoch: epoch as usize,
                        msg: format!("non-finite loss {} on sample {}", out.value, data.ids[i]),
                    });
                }
                loss_sum += out.value;
                let dz: Vec<T> = out.grad.iter().map(|&g| g * inv).collect();
                backward_into(&params, &fwd, x, &dz, &mut grads)?;
            }
            adam_step(&mut opt, &mut params, &grads, lr)?;
        }
        if params.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged {
                epoch: epoch as usize,
                msg: "non-finite parameters after update".into(),
            });
        }
        let cm = confusion(&params, data, &val_idx, &data.clean_labels)?;
        log.push(EpochRecord {
            epoch,
            beta,
            lr,
            train_loss: loss_sum / T::from_usize(order.len().max(1)).expect("count fits scalar"),
            val_bacc: cm.balanced_accuracy().ok(),
            val_sens: (0..data.num_classes).map(|k| cm.recall(k)).collect(),
        });
    }
    Ok(TrainOutput {
        params,
        log,
        train_indices: train_idx,
        val_indices: val_idx,
        stats,
    })
}

fn opt_sig(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| sig(x, 9))
}

/// `epoch,beta,lr,train_loss,val_bacc,val_sens_0..` with 9 significant digits.
pub fn write_epoch_log<W: Write, T: Scalar>(mut out: W, log: &[EpochRecord<T>], num_classes: usize) -> Result<()> {
    let io = |e| Error::io("<epoch log>", e);
    write!(out, "epoch,beta,lr,train_loss,val_bacc").map_err(io)?;
    for k in 0..num_classes {
        write!(out, ",val_sens_{k}").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for r in log {
        write!(
            out,
            "{},{},{},{},{}",
            r.epoch,
            sig(r.beta.as_f64(), 9),
            sig(r.lr.as_f64(), 9),
            sig(r.train_loss.as_f64(), 9),
            opt_sig(r.val_bacc)
        )
        .map_err(io)?;
        for s in &r.val_sens {
            write!(out, ",{}", opt_sig(*s)).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}
