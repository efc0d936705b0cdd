//! Epoch schedules: the weighting exponent β(E) and step learning-rate decay.
//!
//! Epochs are 0-indexed integers and both values change only at epoch
//! boundaries.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// β = α from the first epoch.
    Static,
    /// β = 0 before `e_switch`, α from `e_switch` on.
    Drw { e_switch: u32 },
    /// Quadratic ramp from 0 at `e1` to α at `e2`.
    Cls,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleMode::Static => f.write_str("static"),
            ScheduleMode::Drw { e_switch } => write!(f, "drw({e_switch})"),
            ScheduleMode::Cls => f.write_str("cls"),
        }
    }
}

impl ScheduleMode {
    /// Parses `static`, `cls`, `drw` (switch at `default_switch`) or `drw(<epoch>)`.
    pub fn parse_with_default(s: &str, default_switch: u32) -> Result<Self> {
        match s.trim() {
            "static" => Ok(ScheduleMode::Static),
            "cls" => Ok(ScheduleMode::Cls),
            "drw" => Ok(ScheduleMode::Drw {
                e_switch: default_switch,
            }),
            other => {
                let inner = other
                    .strip_prefix("drw(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| other.strip_prefix("drw:"))
                    .ok_or_else(|| Error::param(format!("unknown schedule mode {other:?}")))?;
                let e_switch = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::param(format!("bad drw switch epoch in {other:?}")))?;
                Ok(ScheduleMode::Drw { e_switch })
            }
        }
    }
}

impl FromStr for ScheduleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_default(s, 20)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig<T> {
    pub mode: ScheduleMode,
    pub e1: u32,
    pub e2: u32,
    pub alpha: T,
    pub lr_start: T,
    pub lr_decay: T,
    pub lr_milestone_start: u32,
    pub lr_milestone_step: u32,
    pub max_epochs: u32,
}

impl<T: Scalar> Default for ScheduleConfig<T> {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::Cls,
            e1: 20,
            e2: 60,
            alpha: T::lit(1.1),
            lr_start: T::lit(0.001),
            lr_decay: T::lit(0.1),
            lr_milestone_start: 30,
            lr_milestone_step: 10,
            max_epochs: 70,
        }
    }
}

/// Schedule values in effect for one epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleState<T> {
    pub epoch: u32,
    pub beta_eff: T,
    pub lr: T,
}

impl<T: Scalar> ScheduleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.e1 >= self.e2 {
            return Err(Error::param(format!("e1 ({}) must be below e2 ({})", self.e1, self.e2)));
        }
        if !(self.lr_decay > T::zero() && self.lr_decay <= T::one()) {
            return Err(Error::param(format!("lr_decay {} outside (0, 1]", self.lr_decay)));
        }
        if !self.lr_start.is_finite() || self.lr_start <= T::zero() {
            return Err(Error::param(format!("lr_start {} must be positive", self.lr_start)));
        }
        if self.lr_milestone_step == 0 {
            return Err(Error::param("lr_milestone_step must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::param("max_epochs must be at least 1"));
        }
        if !self.alpha.is_finite() || self.alpha < T::zero() {
            return Err(Error::param(format!("alpha {} must be >= 0", self.alpha)));
        }
        Ok(())
    }

    pub fn state(&self, epoch: u32) -> ScheduleState<T> {
        ScheduleState {
            epoch,
            beta_eff: cls_beta(epoch, self),
            lr: lr_at(epoch, self),
        }
    }
}

/// Weighting exponent for `epoch` under `cfg.mode`.
pub fn cls_beta<T: Scalar>(epoch: u32, cfg: &ScheduleConfig<T>) -> T {
    match cfg.mode {
        ScheduleMode::Static => cfg.alpha,
        ScheduleMode::Drw { e_switch } => {
            if epoch < e_switch {
                T::zero()
            } else {
                cfg.alpha
            }
        }
        ScheduleMode::Cls => {
            if epoch <= cfg.e1 {
                T::zero()
            } else if epoch >= cfg.e2 {
                cfg.alpha
            } else {
                let frac = T::from_u32(epoch - cfg.e1).expect("epoch fits scalar")
                    / T::from_u32(cfg.e2 - cfg.e1).expect("epoch fits scalar");
                frac * frac * cfg.alpha
            }
        }
    }
}

/// Step decay: multiplied by `lr_decay` at `lr_milestone_start` and every
/// `lr_milestone_step` epochs after.
pub fn lr_at<T: Scalar>(epoch: u32, cfg: &ScheduleConfig<T>) -> T {
    let decays = if epoch >= cfg.lr_milestone_start {
        (epoch - cfg.lr_milestone_start) / cfg.lr_milestone_step.max(1) + 1
    } else {
        0
    };
    // repeated multiplication: 1e-3 * 0.1 * 0.1 == 1e-5
    (0..decays).fold(cfg.lr_start, |lr, _| lr * cfg.lr_decay)
}

/// Writes `epoch,beta,lr` rows for epochs `0..=max_epochs`.
pub fn write_schedule_dump<T: Scalar, W: Write>(mut out: W, cfg: &ScheduleConfig<T>) -> Result<()> {
    let io = |e| Error::io("<schedule>", e);
    writeln!(out, "epoch,beta,lr").map_err(io)?;
    for e in 0..=cfg.max_epochs {
        let s = cfg.state(e);
        writeln!(out, "{e},{},{}", sig(s.beta_eff.as_f64(), 9), sig(s.lr.as_f64(), 9)).map_err(io)?;
    }
    Ok(())
}
