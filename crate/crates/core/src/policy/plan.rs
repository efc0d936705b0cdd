use std::borrow::Cow;

use rand::{Rng, SeedableRng};

use super::config::{LevelMode, MagnitudeMode, PolicyConfig};
use crate::error::{Error, Result};
use crate::imaging::{apply_transform_unbounded, crop_at, crop_source_dims, upscale_for_crop, ImageBuffer, TransformKind};
use crate::rng::StreamRng;

/// One slot of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    pub kind: TransformKind,
    pub executed: bool,
    /// `None` for kinds without a magnitude.
    pub magnitude: Option<f64>,
    /// Dataset index of the sample-pairing partner.
    pub partner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformPlan {
    pub draws: Vec<Draw>,
    /// Top-left corner of the crop in the (possibly upscaled) image.
    pub crop_offset: (u32, u32),
    /// Seeds the stream used by randomized kernels during execution.
    pub exec_seed: u64,
}

/// What the sampler needs to know about the image being planned.
#[derive(Clone, Copy, Debug)]
pub struct PlanContext<'a> {
    pub width: u32,
    pub height: u32,
    /// Candidate sample-pairing partners (whole dataset or current batch).
    pub partners: &'a [usize],
}

/// Supplies sample-pairing partner images by dataset index.
pub trait PartnerSource {
    fn partner(&self, index: usize) -> Result<Cow<'_, ImageBuffer>>;
}

impl PartnerSource for [ImageBuffer] {
    fn partner(&self, index: usize) -> Result<Cow<'_, ImageBuffer>> {
        self.get(index)
            .map(Cow::Borrowed)
            .ok_or_else(|| Error::param(format!("partner index {index} out of range")))
    }
}

impl PartnerSource for Vec<ImageBuffer> {
    fn partner(&self, index: usize) -> Result<Cow<'_, ImageBuffer>> {
        self.as_slice().partner(index)
    }
}

/// Partner source for pipelines that never pair; any lookup fails.
pub struct NoPartners;

impl PartnerSource for NoPartners {
    fn partner(&self, index: usize) -> Result<Cow<'_, ImageBuffer>> {
        Err(Error::param(format!("no partner source for index {index}")))
    }
}

/// Maps a magnitude level to a value. Level 10 reaches the far end of the
/// table range; higher levels extrapolate past it. Two-sided ranges pick the
/// direction with a fair coin.
pub fn level_to_magnitude<R: Rng + ?Sized>(
    kind: TransformKind,
    level: u32,
    mode: LevelMode,
    rng: &mut R,
) -> Result<f64> {
    let (Some(range), Some(id)) = (kind.magnitude_range(), kind.identity_magnitude()) else {
        return Err(Error::param(format!("{kind} has no magnitude")));
    };
    if level == 0 {
        return Err(Error::param("magnitude level must be at least 1"));
    }
    let extreme = if range.lo < id && id < range.hi {
        if rng.random_bool(0.5) {
            range.hi
        } else {
            range.lo
        }
    } else if id == range.lo {
        range.hi
    } else {
        range.lo
    };
    let target = id + f64::from(level) / 10.0 * (extreme - id);
    Ok(match mode {
        LevelMode::Constant => target,
        LevelMode::Random => id + rng.random::<f64>() * (target - id),
    })
}

fn draw_magnitude<R: Rng + ?Sized>(kind: TransformKind, mode: MagnitudeMode, rng: &mut R) -> Option<f64> {
    let range = kind.magnitude_range()?;
    Some(match mode {
        MagnitudeMode::FullRandom => rng.random_range(range.lo..=range.hi),
        MagnitudeMode::Constant(l) => level_to_magnitude(kind, l, LevelMode::Constant, rng).ok()?,
        MagnitudeMode::RandomUpTo(l) => level_to_magnitude(kind, l, LevelMode::Random, rng).ok()?,
    })
}

/// Draws a plan: per slot a kind uniformly from the slot's subset, an
/// execute flag with probability `p_exec`, a magnitude per the magnitude
/// mode, and a partner for sample pairing; then the crop offset.
pub fn sample_plan<R: Rng + ?Sized>(cfg: &PolicyConfig, ctx: PlanContext<'_>, rng: &mut R) -> Result<TransformPlan> {
    cfg.validate()?;
    let mut draws: Vec<Draw> = Vec::with_capacity(cfg.n);
    let mut pool = Vec::with_capacity(TransformKind::ALL.len());
    for slot in &cfg.order {
        pool.clear();
        pool.extend(
            slot.kinds()
                .iter()
                .copied()
                .filter(|k| cfg.with_replacement || draws.iter().all(|d| d.kind != *k)),
        );
        if pool.is_empty() {
            return Err(Error::param(format!("no {slot} transforms left to draw")));
        }
        let kind = pool[rng.random_range(0..pool.len())];
        let executed = rng.random_bool(cfg.p_exec);
        let magnitude = draw_magnitude(kind, cfg.magnitude_mode, rng);
        let partner = (kind == TransformKind::SamplePairing && !ctx.partners.is_empty())
            .then(|| ctx.partners[rng.random_range(0..ctx.partners.len())]);
        draws.push(Draw {
            kind,
            executed,
            magnitude,
            partner,
        });
    }
    let (w, h) = crop_source_dims(ctx.width, ctx.height, cfg.crop_size);
    let crop_offset = (
        rng.random_range(0..=w - cfg.crop_size),
        rng.random_range(0..=h - cfg.crop_size),
    );
    Ok(TransformPlan {
        draws,
        crop_offset,
        exec_seed: rng.random(),
    })
}

/// Runs the executed draws in order, then crops at the plan's offset.
/// Sample pairing without a recorded partner pairs the image with itself.
pub fn execute_plan<P: PartnerSource + ?Sized>(
    img: &ImageBuffer,
    plan: &TransformPlan,
    partners: &P,
    crop_size: u32,
) -> Result<ImageBuffer> {
    let mut rng = StreamRng::seed_from_u64(plan.exec_seed);
    let mut cur = Cow::Borrowed(img);
    for d in plan.draws.iter().filter(|d| d.executed) {
        let m = d.magnitude.unwrap_or(0.0);
        let next = if d.kind == TransformKind::SamplePairing {
            let partner = match d.partner {
                Some(i) => partners.partner(i)?,
                None => Cow::Owned(cur.as_ref().clone()),
            };
            apply_transform_unbounded(&cur, d.kind, m, &mut rng, Some(&partner))?
        } else {
            apply_transform_unbounded(&cur, d.kind, m, &mut rng, None)?
        };
        cur = Cow::Owned(next);
    }
    let src = upscale_for_crop(&cur, crop_size);
    crop_at(&src, crop_size, plan.crop_offset.0, plan.crop_offset.1)
}
