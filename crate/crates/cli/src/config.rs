//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use imbal_core::loss::{LossConfig, LossFamily};
use imbal_core::metrics::CropAverage;
use imbal_core::policy::{MagnitudeMode, PartnerScope, PolicyConfig, SlotSubset};
use imbal_core::schedule::{ScheduleConfig, ScheduleMode};
use imbal_core::trainer::{AdamConfig, RegularizerConfig, RegularizerKind, SyntheticSpec, TrainConfig};

pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const KEYS: &[Key] = &[
    Key { name: "seed", default: "0", help: "master seed for every random stream" },
    Key { name: "n", default: "2", help: "transforms drawn per image" },
    Key { name: "order", default: "color,shape", help: "subset per draw slot (color, shape, any); length must equal n" },
    Key { name: "p_exec", default: "0.7", help: "probability that a drawn transform is executed" },
    Key { name: "magnitude", default: "full_random", help: "full_random, cm<level> or rm<level>" },
    Key { name: "with_replacement", default: "true", help: "allow the same transform twice in one plan" },
    Key { name: "partner_scope", default: "dataset", help: "sample_pairing partners: dataset or batch" },
    Key { name: "crop_size", default: "224", help: "output crop side in pixels" },
    Key { name: "jpeg_quality", default: "95", help: "quality for .jpg outputs" },
    Key { name: "output_format", default: "png", help: "augmented image format: png or jpg" },
    Key { name: "family", default: "mwnl", help: "loss: ce, ce_rw, cb_focal, mwl_focal, mwnl" },
    Key { name: "alpha", default: "1.1", help: "terminal weighting exponent" },
    Key { name: "gamma", default: "2.0", help: "focal modulating exponent r" },
    Key { name: "clamp_t", default: "0.1", help: "outlier clamp threshold T (mwnl)" },
    Key { name: "class_coeff", default: "", help: "per-class coefficients C_i, comma-separated; empty means all 1" },
    Key { name: "beta_cb", default: "0.999", help: "class-balanced beta for cb_focal" },
    Key { name: "class_counts", default: "", help: "per-class counts for the loss command; empty means 1 each" },
    Key { name: "beta_eff", default: "", help: "weighting exponent for the loss command; empty means alpha" },
    Key { name: "schedule", default: "cls", help: "static, drw, drw(<epoch>) or cls" },
    Key { name: "e1", default: "20", help: "epoch where the cls ramp starts" },
    Key { name: "e2", default: "60", help: "epoch where the cls ramp reaches alpha" },
    Key { name: "drw_switch", default: "20", help: "switch epoch for schedule = drw" },
    Key { name: "lr", default: "0.001", help: "starting learning rate" },
    Key { name: "lr_decay", default: "0.1", help: "learning-rate decay factor lambda" },
    Key { name: "lr_milestone_start", default: "30", help: "first decay epoch" },
    Key { name: "lr_milestone_step", default: "10", help: "epochs between decays" },
    Key { name: "max_epochs", default: "70", help: "training epochs" },
    Key { name: "regularizer", default: "none", help: "none, dropout or dropblock (square hidden_dim)" },
    Key { name: "drop_prob", default: "0.1", help: "drop rate p" },
    Key { name: "block_size", default: "5", help: "DropBlock block side s" },
    Key { name: "hidden_dim", default: "64", help: "hidden units" },
    Key { name: "input_dim", default: "0", help: "feature count; 0 infers it from the data" },
    Key { name: "batch_size", default: "128", help: "minibatch size" },
    Key { name: "val_fraction", default: "0.2", help: "stratified hold-out share" },
    Key { name: "oversample", default: "false", help: "class-balanced resampling per epoch" },
    Key { name: "train_data", default: "synthetic", help: "feature file (sample_id,label,f...) or `synthetic`" },
    Key { name: "synthetic_counts", default: "1000,500,100,50,20", help: "per-class counts for synthetic data" },
    Key { name: "synthetic_dim", default: "8", help: "feature dimension for synthetic data" },
    Key { name: "synthetic_separation", default: "2.5", help: "distance between synthetic class centres" },
    Key { name: "synthetic_eta", default: "0.0", help: "synthetic label-noise fraction" },
    Key { name: "k_crops", default: "16", help: "crops per sample at evaluation" },
    Key { name: "crop_average", default: "prob", help: "average crops as prob or logit" },
];

/// Help text listing every key and its default.
pub fn keys_help() -> String {
    let width = KEYS.iter().map(|k| k.name.len()).max().unwrap_or(0);
    let mut s = String::from("Configuration keys (file `key = value`, or --set key=value):\n");
    for k in KEYS {
        let d = if k.default.is_empty() { "\"\"" } else { k.default };
        let _ = writeln!(s, "  {:width$}  default {d:<20} {}", k.name, k.help);
    }
    s
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = KEYS
            .iter()
            .find(|k| k.name == key)
            .ok_or_else(|| anyhow!("unknown configuration key `{key}`"))?;
        self.values.insert(k.name, value.trim().to_string());
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected `key = value`", i + 1))?;
            self.set(k.trim(), v).with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got `{kv}`"))?;
        self.set(k.trim(), v)
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("known key")
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse::<T>().map_err(|e| anyhow!("bad value `{v}` for `{key}`: {e}"))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| s.trim().parse::<T>().map_err(|e| anyhow!("bad entry `{s}` in `{key}`: {e}")))
            .collect()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => bail!("bad value `{v}` for `{key}`: expected true or false"),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed")
    }

    pub fn policy(&self) -> Result<PolicyConfig> {
        let order: Vec<SlotSubset> = self.list("order")?;
        let cfg = PolicyConfig {
            n: self.get("n")?,
            p_exec: self.get("p_exec")?,
            order,
            magnitude_mode: self.get::<MagnitudeMode>("magnitude")?,
            crop_size: self.get("crop_size")?,
            with_replacement: self.flag("with_replacement")?,
            partner_scope: self.get::<PartnerScope>("partner_scope")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn jpeg_quality(&self) -> Result<u8> {
        self.get("jpeg_quality")
    }

    pub fn output_ext(&self) -> Result<&'static str> {
        match self.raw("output_format") {
            "png" => Ok("png"),
            "jpg" | "jpeg" => Ok("jpg"),
            v => bail!("bad value `{v}` for `output_format`: expected png or jpg"),
        }
    }

    pub fn loss(&self) -> Result<LossConfig<f64>> {
        Ok(LossConfig {
            family: self.get::<LossFamily>("family")?,
            alpha: self.get("alpha")?,
            gamma: self.get("gamma")?,
            clamp_t: self.get("clamp_t")?,
            class_coeff: self.list("class_coeff")?,
            beta_cb: self.get("beta_cb")?,
        })
    }

    pub fn class_counts(&self) -> Result<Vec<u64>> {
        self.list("class_counts")
    }

    pub fn beta_eff(&self) -> Result<Option<f64>> {
        if self.raw("beta_eff").is_empty() {
            Ok(None)
        } else {
            self.get("beta_eff").map(Some)
        }
    }

    pub fn schedule(&self) -> Result<ScheduleConfig<f64>> {
        let cfg = ScheduleConfig {
            mode: ScheduleMode::parse_with_default(self.raw("schedule"), self.get("drw_switch")?)?,
            e1: self.get("e1")?,
            e2: self.get("e2")?,
            alpha: self.get("alpha")?,
            lr_start: self.get("lr")?,
            lr_decay: self.get("lr_decay")?,
            lr_milestone_start: self.get("lr_milestone_start")?,
            lr_milestone_step: self.get("lr_milestone_step")?,
            max_epochs: self.get("max_epochs")?,
        };
        Ok(cfg)
    }

    pub fn train(&self) -> Result<TrainConfig<f64>> {
        Ok(TrainConfig {
            hidden_dim: self.get("hidden_dim")?,
            batch_size: self.get("batch_size")?,
            val_fraction: self.get("val_fraction")?,
            regularizer: RegularizerConfig {
                kind: self.get::<RegularizerKind>("regularizer")?,
                drop_prob: self.get("drop_prob")?,
                block_size: self.get("block_size")?,
            },
            oversample: self.flag("oversample")?,
            adam: AdamConfig::default(),
        })
    }

    pub fn input_dim(&self) -> Result<usize> {
        self.get("input_dim")
    }

    /// `None` selects the synthetic generator.
    pub fn train_data(&self) -> Option<PathBuf> {
        match self.raw("train_data") {
            "synthetic" => None,
            p => Some(PathBuf::from(p)),
        }
    }

    pub fn synthetic(&self) -> Result<SyntheticSpec> {
        Ok(SyntheticSpec {
            counts: self.list("synthetic_counts")?,
            dim: self.get("synthetic_dim")?,
            separation: self.get("synthetic_separation")?,
            eta: self.get("synthetic_eta")?,
            seed: self.seed()?,
        })
    }

    pub fn k_crops(&self) -> Result<usize> {
        self.get("k_crops")
    }

    pub fn crop_average(&self) -> Result<CropAverage> {
        self.get("crop_average")
    }
}
