use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    None,
    Dropout,
    /// Hidden vector viewed as a square grid.
    DropBlock,
}

impl fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegularizerKind::None => "none",
            RegularizerKind::Dropout => "dropout",
            RegularizerKind::DropBlock => "dropblock",
        })
    }
}

impl FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(RegularizerKind::None),
            "dropout" => Ok(RegularizerKind::Dropout),
            "dropblock" => Ok(RegularizerKind::DropBlock),
            other => Err(Error::param(format!("unknown regularizer {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizerConfig {
    pub kind: RegularizerKind,
    pub drop_prob: f64,
    pub block_size: usize,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        Self {
            kind: RegularizerKind::None,
            drop_prob: 0.1,
            block_size: 5,
        }
    }
}

impl RegularizerConfig {
    pub fn validate(&self, hidden_dim: usize) -> Result<()> {
        if !(0.0..1.0).contains(&self.drop_prob) {
            return Err(Error::param(format!("drop_prob {} outside [0, 1)", self.drop_prob)));
        }
        if self.block_size == 0 {
            return Err(Error::param("block_size must be at least 1"));
        }
        if self.kind == RegularizerKind::DropBlock {
            let side = square_side(hidden_dim).ok_or_else(|| {
                Error::param(format!("dropblock needs a square hidden size, got {hidden_dim}"))
            })?;
            if self.block_size > side {
                return Err(Error::param(format!(
                    "block_size {} exceeds the {side}x{side} hidden grid",
                    self.block_size
                )));
            }
        }
        Ok(())
    }

    /// Training-time multiplier for the hidden vector, or `None` when no
    /// regularizer is active.
    pub fn sample_mask<R: Rng + ?Sized>(&self, hidden_dim: usize, rng: &mut R) -> Result<Option<Vec<f64>>> {
        if self.drop_prob == 0.0 {
            return Ok(None);
        }
        match self.kind {
            RegularizerKind::None => Ok(None),
            RegularizerKind::Dropout => Ok(Some(dropout_mask(hidden_dim, self.drop_prob, rng)?)),
            RegularizerKind::DropBlock => {
                let side = square_side(hidden_dim)
                    .ok_or_else(|| Error::param(format!("dropblock needs a square hidden size, got {hidden_dim}")))?;
                dropblock_mask(side, side, self.drop_prob, self.block_size, rng).map(Some)
            }
        }
    }
}

pub fn square_side(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n && n > 0).then_some(s)
}

/// Independent drops with inverted scaling `1/(1-p)`.
pub fn dropout_mask<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param(format!("drop probability {p} outside [0, 1)")));
    }
    let keep = 1.0 / (1.0 - p);
    Ok((0..n).map(|_| if rng.random_bool(p) { 0.0 } else { keep }).collect())
}

/// Start of the block centred on `c`, and the clipped range it covers.
fn block_span(c: usize, s: usize, len: usize) -> std::ops::Range<usize> {
    let start = c as isize - (s / 2) as isize;
    let lo = start.max(0) as usize;
    let hi = ((start + s as isize).max(0) as usize).min(len);
    lo..hi
}

/// Number of block centres along an axis whose block covers `i`.
fn coverage(i: usize, s: usize, len: usize) -> usize {
    (0..len).filter(|&c| block_span(c, s, len).contains(&i)).count()
}

/// Per-cell seed rate that makes the expected dropped fraction equal `p`.
pub fn dropblock_seed_rate(h: usize, w: usize, p: f64, s: usize) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let rows: Vec<f64> = (0..h).map(|i| coverage(i, s, h) as f64).collect();
    let cols: Vec<f64> = (0..w).map(|j| coverage(j, s, w) as f64).collect();
    let expected = |g: f64| {
        let log_keep = (-g).ln_1p();
        let mut sum = 0.0;
        for r in &rows {
            for c in &cols {
                sum += -(r * c * log_keep).exp_m1();
            }
        }
        sum / (h * w) as f64
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Row-major `h x w` mask. Seeds fall on any cell with a rate chosen so the
/// expected dropped fraction is `p`; each seed zeroes the `s x s` block
/// centred on it, clipped at the borders. Survivors are scaled by
/// `total / survivors`.
pub fn dropblock_mask<R: Rng + ?Sized>(h: usize, w: usize, p: f64, s: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param(format!("drop probability {p} outside [0, 1)")));
    }
    if s == 0 || s > h.min(w) {
        return Err(Error::param(format!("block size {s} does not fit a {h}x{w} map")));
    }
    let mut mask = vec![1.0; h * w];
    if p == 0.0 {
        return Ok(mask);
    }
    let gamma = dropblock_seed_rate(h, w, p, s);
    for r in 0..h {
        for c in 0..w {
            if rng.random_bool(gamma) {
                for i in block_span(r, s, h) {
                    for j in block_span(c, s, w) {
                        mask[i * w + j] = 0.0;
                    }
                }
            }
        }
    }
    let survivors = mask.iter().filter(|&&v| v != 0.0).count();
    if survivors > 0 {
        let scale = (h * w) as f64 / survivors as f64;
        mask.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(mask)
}

/// True when every zero cell lies inside some fully zero clipped block.
pub fn zeros_form_blocks(mask: &[f64], h: usize, w: usize, s: usize) -> bool {
    let block_zero = |r: usize, c: usize| {
        block_span(r, s, h).all(|i| block_span(c, s, w).all(|j| mask[i * w + j] == 0.0))
    };
    (0..h).all(|i| {
        (0..w).all(|j| {
            mask[i * w + j] != 0.0
                || (0..h).any(|r| {
                    block_span(r, s, h).contains(&i)
                        && (0..w).any(|c| block_span(c, s, w).contains(&j) && block_zero(r, c))
                })
        })
    })
}
