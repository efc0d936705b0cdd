//! Sigmoid focal losses with class-count weighting and outlier clamping.
//!
//! Every family except plain cross-entropy works on the *transformed*
//! probabilities `p_i = sigmoid(±z_i)` (positive sign for the ground-truth
//! class, negative otherwise), summing `(1 - p_i)^γ ln p_i` over all classes.
//!
//! | family      | per-sample weight                   | per-class term          |
//! |-------------|-------------------------------------|-------------------------|
//! | `ce`        | 1                                   | softmax cross-entropy   |
//! | `ce_rw`     | `(C*_y / N_y)^β`                    | softmax cross-entropy   |
//! | `cb_focal`  | `(1 - b) / (1 - b^N_y)`             | focal                   |
//! | `mwl_focal` | `(C*_y / N_y)^β`                    | focal                   |
//! | `mwnl`      | `(C*_y / N_y)^β`                    | focal, clamped at `T`   |
//!
//! `C*_y = C_y^(1/α)`, so at `β = α` the weight is `C_y (1/N_y)^α`; the
//! cumulative schedule moves `β` from 0 to `α`. A clamped term (`p_i <= T`)
//! is replaced by the constant `(1 - T)^γ ln T` and contributes no gradient.
//!
//! Log-probabilities go through a sign-branched `log_sigmoid`, and the
//! modulating factor is evaluated as `exp(γ ln(1 - p))`, so logits of any
//! finite magnitude give finite values.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{fields, parse_f64, parse_usize, sig, skip_line};
use crate::scalar::{log_sigmoid, Scalar};

/// Per-class sample counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    counts: Vec<u64>,
}

impl ClassStats {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::param("class stats need at least one class"));
        }
        if let Some(class) = counts.iter().position(|&n| n == 0) {
            return Err(Error::UndefinedClass {
                class,
                msg: "no samples, weight undefined".into(),
            });
        }
        Ok(Self { counts })
    }

    /// Tallies labels in `0..num_classes`.
    pub fn from_labels(labels: &[usize], num_classes: usize) -> Result<Self> {
        let mut counts = vec![0u64; num_classes];
        for &y in labels {
            *counts
                .get_mut(y)
                .ok_or_else(|| Error::param(format!("label {y} outside 0..{num_classes}")))? += 1;
        }
        Self::new(counts)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, class: usize) -> u64 {
        self.counts[class]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFamily {
    Ce,
    CeRw,
    CbFocal,
    MwlFocal,
    Mwnl,
}

impl LossFamily {
    pub const ALL: [LossFamily; 5] = [
        LossFamily::Ce,
        LossFamily::CeRw,
        LossFamily::CbFocal,
        LossFamily::MwlFocal,
        LossFamily::Mwnl,
    ];

    fn exponent_weighted(self) -> bool {
        matches!(self, LossFamily::CeRw | LossFamily::MwlFocal | LossFamily::Mwnl)
    }
}

impl fmt::Display for LossFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossFamily::Ce => "ce",
            LossFamily::CeRw => "ce_rw",
            LossFamily::CbFocal => "cb_focal",
            LossFamily::MwlFocal => "mwl_focal",
            LossFamily::Mwnl => "mwnl",
        })
    }
}

impl FromStr for LossFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossFamily::ALL
            .iter()
            .copied()
            .find(|f| f.to_string() == s.trim())
            .ok_or_else(|| Error::param(format!("unknown loss family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig<T> {
    pub family: LossFamily,
    /// Terminal weighting exponent α.
    pub alpha: T,
    /// Focal exponent.
    pub gamma: T,
    /// Outlier threshold `T` (mwnl only).
    pub clamp_t: T,
    /// Per-class coefficients `C_i`; empty means all 1.
    pub class_coeff: Vec<T>,
    /// Class-balanced β (cb_focal only).
    pub beta_cb: T,
}

impl<T: Scalar> Default for LossConfig<T> {
    fn default() -> Self {
        Self {
            family: LossFamily::Mwnl,
            alpha: T::lit(1.1),
            gamma: T::lit(2.0),
            clamp_t: T::lit(0.1),
            class_coeff: Vec::new(),
            beta_cb: T::lit(0.999),
        }
    }
}

impl<T: Scalar> LossConfig<T> {
    pub fn with_family(family: LossFamily) -> Self {
        Self {
            family,
            ..Self::default()
        }
    }

    pub fn coeff(&self, class: usize) -> T {
        self.class_coeff.get(class).copied().unwrap_or_else(T::one)
    }

    /// `(1 - T)^γ ln T`, the value a clamped term takes.
    pub fn clamp_constant(&self) -> T {
        (T::one() - self.clamp_t).powf(self.gamma) * self.clamp_t.ln()
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let finite = [self.alpha, self.gamma, self.clamp_t, self.beta_cb]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("loss hyperparameters must be finite"));
        }
        if self.alpha < T::zero() {
            return Err(Error::param(format!("alpha {} must be >= 0", self.alpha)));
        }
        if self.gamma < T::zero() {
            return Err(Error::param(format!("gamma {} must be >= 0", self.gamma)));
        }
        if self.clamp_t < T::zero() || self.clamp_t >= T::one() {
            return Err(Error::param(format!("clamp_t {} outside [0, 1)", self.clamp_t)));
        }
        if self.beta_cb < T::zero() || self.beta_cb >= T::one() {
            return Err(Error::param(format!("beta_cb {} outside [0, 1)", self.beta_cb)));
        }
        if !self.class_coeff.is_empty() && self.class_coeff.len() != num_classes {
            return Err(Error::param(format!(
                "{} class coefficients for {num_classes} classes",
                self.class_coeff.len()
            )));
        }
        if let Some(c) = self.class_coeff.iter().find(|c| !c.is_finite() || **c <= T::zero()) {
            return Err(Error::param(format!("class coefficient {c} must be positive")));
        }
        if self.family.exponent_weighted()
            && self.alpha == T::zero()
            && self.class_coeff.iter().any(|&c| c != T::one())
        {
            return Err(Error::param(
                "alpha = 0 with a class coefficient != 1 leaves C* = C^(1/alpha) undefined",
            ));
        }
        Ok(())
    }
}

/// Loss value and gradient with respect to the logits.
#[derive(Clone, Debug, PartialEq)]
pub struct LossOutput<T> {
    pub value: T,
    pub grad: Vec<T>,
}

fn check_label<T>(z: &[T], y: usize) -> Result<()> {
    if y >= z.len() {
        return Err(Error::param(format!("label {y} outside 0..{}", z.len())));
    }
    Ok(())
}

#[inline]
fn signed<T: Scalar>(z: T, i: usize, y: usize) -> T {
    if i == y {
        z
    } else {
        -z
    }
}

/// `p_i = sigmoid(z_i)` for the ground-truth class, `sigmoid(-z_i)` otherwise.
pub fn transformed_probs<T: Scalar>(z: &[T], y: usize) -> Result<Vec<T>> {
    check_label(z, y)?;
    Ok(z.iter()
        .enumerate()
        .map(|(i, &zi)| log_sigmoid(signed(zi, i, y)).exp())
        .collect())
}

/// Focal term `f(s) = (1 - p)^γ ln p` with `p = sigmoid(s)`, and `df/ds`.
#[inline]
fn focal_term<T: Scalar>(s: T, gamma: T) -> (T, T, T) {
    let log_p = log_sigmoid(s);
    let log_q = log_sigmoid(-s);
    let p = log_p.exp();
    let q = log_q.exp();
    let modulator = if gamma == T::zero() {
        T::one()
    } else {
        (gamma * log_q).exp()
    };
    let value = modulator * log_p;
    // d/ds = p q d/dp, and d/dp = -γ (1-p)^(γ-1) ln p + (1-p)^γ / p.
    let deriv = modulator * (q - gamma * p * log_p);
    (p, value, deriv)
}

/// Unweighted sigmoid focal loss summed over classes.
pub fn focal_loss<T: Scalar>(z: &[T], y: usize, gamma: T) -> Result<LossOutput<T>> {
    check_label(z, y)?;
    Ok(weighted_focal(z, y, gamma, T::one(), None))
}

fn weighted_focal<T: Scalar>(z: &[T], y: usize, gamma: T, weight: T, clamp: Option<(T, T)>) -> LossOutput<T> {
    let mut total = T::zero();
    let mut grad = Vec::with_capacity(z.len());
    for (i, &zi) in z.iter().enumerate() {
        let s = signed(zi, i, y);
        let (p, value, deriv) = focal_term(s, gamma);
        match clamp {
            Some((t, g_star)) if p <= t => {
                total += g_star;
                grad.push(T::zero());
            }
            _ => {
                total += value;
                let dz = if i == y { deriv } else { -deriv };
                grad.push(-weight * dz);
            }
        }
    }
    LossOutput {
        value: -weight * total,
        grad,
    }
}

/// Class-balanced weight `(1 - β) / (1 - β^n)`.
pub fn cb_weight<T: Scalar>(n: u64, beta: T) -> T {
    if beta == T::zero() {
        return T::one();
    }
    let ln_beta = (beta - T::one()).ln_1p();
    let n = T::from_u64(n).expect("count fits scalar");
    ln_beta.exp_m1() / (n * ln_beta).exp_m1()
}

/// Multi-weight `c (1/n)^α`.
pub fn mw_weight<T: Scalar>(n: u64, alpha: T, c: T) -> T {
    let n = T::from_u64(n).expect("count fits scalar");
    c * (-alpha * n.ln()).exp()
}

/// A validated loss configuration bound to class counts, with the clamp
/// constant and per-class `ln C*_i - ln N_i` precomputed.
#[derive(Clone, Debug)]
pub struct Loss<T> {
    cfg: LossConfig<T>,
    stats: ClassStats,
    g_star: T,
    log_base: Vec<T>,
}

impl<T: Scalar> Loss<T> {
    pub fn new(cfg: LossConfig<T>, stats: ClassStats) -> Result<Self> {
        cfg.validate(stats.num_classes())?;
        let log_base = (0..stats.num_classes())
            .map(|i| {
                let c = cfg.coeff(i);
                let log_c_star = if c == T::one() { T::zero() } else { c.ln() / cfg.alpha };
                log_c_star - T::from_u64(stats.count(i)).expect("count fits scalar").ln()
            })
            .collect();
        Ok(Self {
            g_star: cfg.clamp_constant(),
            cfg,
            stats,
            log_base,
        })
    }

    pub fn config(&self) -> &LossConfig<T> {
        &self.cfg
    }

    pub fn stats(&self) -> &ClassStats {
        &self.stats
    }

    pub fn clamp_constant(&self) -> T {
        self.g_star
    }

    /// `(C*_y / N_y)^β`.
    pub fn exponent_weight(&self, y: usize, beta_eff: T) -> T {
        if beta_eff == T::zero() {
            T::one()
        } else {
            (beta_eff * self.log_base[y]).exp()
        }
    }

    fn check_beta(&self, beta_eff: T) -> Result<()> {
        let slack = T::lit(1e-12) * self.cfg.alpha.max(T::one());
        if !beta_eff.is_finite() || beta_eff < T::zero() || beta_eff > self.cfg.alpha + slack {
            return Err(Error::param(format!(
                "beta_eff {beta_eff} outside [0, alpha = {}]",
                self.cfg.alpha
            )));
        }
        Ok(())
    }

    /// Evaluates the configured family. `beta_eff` is read only by the
    /// exponent-weighted families (`ce_rw`, `mwl_focal`, `mwnl`).
    pub fn eval(&self, z: &[T], y: usize, beta_eff: T) -> Result<LossOutput<T>> {
        if z.len() != self.stats.num_classes() {
            return Err(Error::Dimension(format!(
                "{} logits for {} classes",
                z.len(),
                self.stats.num_classes()
            )));
        }
        check_label(z, y)?;
        let cfg = &self.cfg;
        Ok(match cfg.family {
            LossFamily::Ce => cross_entropy(z, y, T::one()),
            LossFamily::CeRw => {
                self.check_beta(beta_eff)?;
                cross_entropy(z, y, self.exponent_weight(y, beta_eff))
            }
            LossFamily::CbFocal => {
                let w = cb_weight(self.stats.count(y), cfg.beta_cb);
                weighted_focal(z, y, cfg.gamma, w, None)
            }
            LossFamily::MwlFocal => {
                self.check_beta(beta_eff)?;
                weighted_focal(z, y, cfg.gamma, self.exponent_weight(y, beta_eff), None)
            }
            LossFamily::Mwnl => {
                self.check_beta(beta_eff)?;
                let clamp = (cfg.clamp_t > T::zero()).then_some((cfg.clamp_t, self.g_star));
                weighted_focal(z, y, cfg.gamma, self.exponent_weight(y, beta_eff), clamp)
            }
        })
    }
}

/// Softmax cross-entropy scaled by `weight`.
fn cross_entropy<T: Scalar>(z: &[T], y: usize, weight: T) -> LossOutput<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
    let grad = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let p = (v - lse).exp();
            weight * if i == y { p - T::one() } else { p }
        })
        .collect();
    LossOutput {
        value: weight * (lse - z[y]),
        grad,
    }
}

/// Multi-weighted focal loss with optional clamp (`cfg.family` must be
/// `mwl_focal` or `mwnl`). Pass `beta_eff = cfg.alpha` for the static weight.
pub fn mwnl_loss<T: Scalar>(
    z: &[T],
    y: usize,
    stats: &ClassStats,
    cfg: &LossConfig<T>,
    beta_eff: T,
) -> Result<LossOutput<T>> {
    if !matches!(cfg.family, LossFamily::MwlFocal | LossFamily::Mwnl) {
        return Err(Error::param(format!("mwnl_loss called with family {}", cfg.family)));
    }
    Loss::new(cfg.clone(), stats.clone())?.eval(z, y, beta_eff)
}

/// Dispatches on `cfg.family`.
pub fn loss_for_family<T: Scalar>(
    z: &[T],
    y: usize,
    stats: &ClassStats,
    cfg: &LossConfig<T>,
    beta_eff: T,
) -> Result<LossOutput<T>> {
    Loss::new(cfg.clone(), stats.clone())?.eval(z, y, beta_eff)
}

/// Mean loss and mean gradient over a batch of `(logits, label)` pairs.
pub fn batch_mean<T: Scalar>(loss: &Loss<T>, batch: &[(&[T], usize)], beta_eff: T) -> Result<LossOutput<T>> {
    let c = loss.stats().num_classes();
    let mut value = T::zero();
    let mut grad = vec![T::zero(); c];
    for &(z, y) in batch {
        let out = loss.eval(z, y, beta_eff)?;
        value += out.value;
        grad.iter_mut().zip(&out.grad).for_each(|(g, d)| *g += *d);
    }
    let n = T::from_usize(batch.len().max(1)).expect("batch size fits scalar");
    grad.iter_mut().for_each(|g| *g /= n);
    Ok(LossOutput { value: value / n, grad })
}

/// One row of a logits file: `sample_id, y, z_0 .. z_{C-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitRow {
    pub sample_id: String,
    pub label: usize,
    pub logits: Vec<f64>,
}

pub fn read_logit_rows<R: BufRead>(input: R) -> Result<Vec<LogitRow>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<logits>", e))?;
        if skip_line(&line) {
            continue;
        }
        let f = fields(&line);
        if f.len() < 3 {
            return Err(Error::parse(lineno, "row needs sample_id, y and at least one logit"));
        }
        // optional header
        if rows.is_empty() && f[1] == "y" {
            continue;
        }
        let logits = f[2..]
            .iter()
            .map(|s| parse_f64(s, lineno))
            .collect::<Result<Vec<_>>>()?;
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(lineno, "logits must be finite"));
        }
        if *width.get_or_insert(logits.len()) != logits.len() {
            return Err(Error::parse(lineno, "row has a different number of logits"));
        }
        rows.push(LogitRow {
            sample_id: f[0].to_string(),
            label: parse_usize(f[1], lineno)?,
            logits,
        });
    }
    Ok(rows)
}

/// Writes `sample_id, value, grad_0 .. grad_{C-1}` rows, 9 significant digits.
pub fn write_loss_rows<W: Write>(mut out: W, rows: &[(String, LossOutput<f64>)]) -> Result<()> {
    let io = |e| Error::io("<loss output>", e);
    for (id, o) in rows {
        write!(out, "{id},{}", sig(o.value, 9)).map_err(io)?;
        for g in &o.grad {
            write!(out, ",{}", sig(*g, 9)).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}
