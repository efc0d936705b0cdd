use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Subset, TransformKind};

/// Which kinds a slot may draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotSubset {
    Color,
    Shape,
    Any,
}

impl SlotSubset {
    pub fn kinds(self) -> &'static [TransformKind] {
        match self {
            SlotSubset::Color => &TransformKind::COLOR,
            SlotSubset::Shape => &TransformKind::SHAPE,
            SlotSubset::Any => &TransformKind::ALL,
        }
    }

    pub fn admits(self, kind: TransformKind) -> bool {
        match self {
            SlotSubset::Color => kind.subset() == Subset::Color,
            SlotSubset::Shape => kind.subset() == Subset::Shape,
            SlotSubset::Any => true,
        }
    }
}

impl fmt::Display for SlotSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotSubset::Color => "color",
            SlotSubset::Shape => "shape",
            SlotSubset::Any => "any",
        })
    }
}

impl FromStr for SlotSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "color" => Ok(SlotSubset::Color),
            "shape" => Ok(SlotSubset::Shape),
            "any" => Ok(SlotSubset::Any),
            other => Err(Error::param(format!("unknown slot subset {other:?}"))),
        }
    }
}

/// Constant level vs. uniform draw up to the level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelMode {
    Constant,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeMode {
    /// Uniform over the whole table range.
    FullRandom,
    /// Fixed level `m` (CM).
    Constant(u32),
    /// Uniform between the identity endpoint and level `m` (RM).
    RandomUpTo(u32),
}

impl fmt::Display for MagnitudeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MagnitudeMode::FullRandom => f.write_str("full_random"),
            MagnitudeMode::Constant(l) => write!(f, "cm{l}"),
            MagnitudeMode::RandomUpTo(l) => write!(f, "rm{l}"),
        }
    }
}

impl FromStr for MagnitudeMode {
    type Err = Error;

    /// Accepts `full_random`, `cm<level>` / `cm(<level>)`, `rm<level>` / `rm(<level>)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full_random" {
            return Ok(MagnitudeMode::FullRandom);
        }
        let level = |rest: &str| -> Result<u32> {
            let rest = rest.trim_start_matches('(').trim_end_matches(')');
            rest.parse::<u32>()
                .map_err(|_| Error::param(format!("bad magnitude level in {s:?}")))
        };
        if let Some(rest) = s.strip_prefix("cm") {
            Ok(MagnitudeMode::Constant(level(rest)?))
        } else if let Some(rest) = s.strip_prefix("rm") {
            Ok(MagnitudeMode::RandomUpTo(level(rest)?))
        } else {
            Err(Error::param(format!("unknown magnitude mode {s:?}")))
        }
    }
}

/// Where sample-pairing partners come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartnerScope {
    Dataset,
    Batch,
}

impl FromStr for PartnerScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dataset" => Ok(PartnerScope::Dataset),
            "batch" => Ok(PartnerScope::Batch),
            other => Err(Error::param(format!("unknown partner scope {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Draws per image.
    pub n: usize,
    /// Execution probability shared by every draw.
    pub p_exec: f64,
    /// Subset per slot; `order.len() == n`.
    pub order: Vec<SlotSubset>,
    pub magnitude_mode: MagnitudeMode,
    pub crop_size: u32,
    /// Whether a kind may repeat across the slots of one plan.
    pub with_replacement: bool,
    pub partner_scope: PartnerScope,
}

impl Default for PolicyConfig {
    /// Two draws, color then shape, executed with probability 0.7, random
    /// in-range magnitudes, 224 crops.
    fn default() -> Self {
        Self {
            n: 2,
            p_exec: 0.7,
            order: vec![SlotSubset::Color, SlotSubset::Shape],
            magnitude_mode: MagnitudeMode::FullRandom,
            crop_size: 224,
            with_replacement: true,
            partner_scope: PartnerScope::Dataset,
        }
    }
}

impl PolicyConfig {
    /// Builds an order string like `color,shape,color` into a config with
    /// matching `n`.
    pub fn with_order(mut self, order: Vec<SlotSubset>) -> Self {
        self.n = order.len();
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_exec) {
            return Err(Error::param(format!("p_exec {} outside [0, 1]", self.p_exec)));
        }
        if self.order.len() != self.n {
            return Err(Error::param(format!(
                "order has {} slots but n = {}",
                self.order.len(),
                self.n
            )));
        }
        if self.crop_size == 0 {
            return Err(Error::param("crop_size must be at least 1"));
        }
        if let MagnitudeMode::Constant(0) | MagnitudeMode::RandomUpTo(0) = self.magnitude_mode {
            return Err(Error::param("magnitude level must be at least 1"));
        }
        if !self.with_replacement {
            for subset in [SlotSubset::Color, SlotSubset::Shape] {
                let need = self.order.iter().filter(|s| **s == subset).count();
                if need > subset.kinds().len() {
                    return Err(Error::param(format!(
                        "{need} {subset} slots without replacement exceed the subset size"
                    )));
                }
            }
            if self.n > TransformKind::ALL.len() {
                return Err(Error::param("more slots than transforms without replacement"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_two_alternating_draws() {
        let cfg = PolicyConfig::default();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.order, vec![SlotSubset::Color, SlotSubset::Shape]);
        assert_eq!(cfg.p_exec, 0.7);
        assert_eq!(cfg.crop_size, 224);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_configs() {
        let cfg = PolicyConfig {
            p_exec: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PolicyConfig {
            n: 3,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PolicyConfig {
            magnitude_mode: MagnitudeMode::Constant(0),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PolicyConfig {
            with_replacement: false,
            ..PolicyConfig::default()
        }
        .with_order(vec![SlotSubset::Shape; 9]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn magnitude_mode_parses() {
        assert_eq!("full_random".parse::<MagnitudeMode>().unwrap(), MagnitudeMode::FullRandom);
        assert_eq!("cm5".parse::<MagnitudeMode>().unwrap(), MagnitudeMode::Constant(5));
        assert_eq!("rm(10)".parse::<MagnitudeMode>().unwrap(), MagnitudeMode::RandomUpTo(10));
        assert!("xm3".parse::<MagnitudeMode>().is_err());
        for m in [MagnitudeMode::FullRandom, MagnitudeMode::Constant(3), MagnitudeMode::RandomUpTo(12)] {
            assert_eq!(m.to_string().parse::<MagnitudeMode>().unwrap(), m);
        }
    }
}
