use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::resample::{quantize, resize_bilinear, to_unit, warp};
use super::{ImageBuffer, TransformKind, FILL_GRAY};
use crate::error::{Error, Result};
use crate::scalar::round_half_up;

/// Applies one transform at a magnitude inside its table range.
///
/// `partner` must be given exactly when `kind` is sample pairing; a partner of
/// a different size is resized to match. Randomized kernels (noise, flip
/// direction, cast channel, cutout position) draw from `rng`.
pub fn apply_transform<R: Rng + ?Sized>(
    img: &ImageBuffer,
    kind: TransformKind,
    magnitude: f64,
    rng: &mut R,
    partner: Option<&ImageBuffer>,
) -> Result<ImageBuffer> {
    if let Some(range) = kind.magnitude_range() {
        if !range.contains(magnitude) {
            return Err(Error::param(format!(
                "{kind} magnitude {magnitude} outside [{}, {}]",
                range.lo, range.hi
            )));
        }
    }
    apply_transform_unbounded(img, kind, magnitude, rng, partner)
}

/// Like [`apply_transform`] but accepts magnitudes past the table range, as
/// produced by magnitude levels above 10. Only values the kernel cannot
/// evaluate are rejected.
pub fn apply_transform_unbounded<R: Rng + ?Sized>(
    img: &ImageBuffer,
    kind: TransformKind,
    m: f64,
    rng: &mut R,
    partner: Option<&ImageBuffer>,
) -> Result<ImageBuffer> {
    use TransformKind::*;

    if kind.magnitude_range().is_some() && !m.is_finite() {
        return Err(Error::param(format!("{kind} magnitude must be finite")));
    }
    match (kind, partner) {
        (SamplePairing, None) => return Err(Error::param("sample_pairing needs a partner image")),
        (k, Some(_)) if k != SamplePairing => {
            return Err(Error::param(format!("{k} takes no partner image")))
        }
        _ => {}
    }

    let out = match kind {
        SamplePairing => sample_pairing(img, partner.expect("checked above"), m),
        GaussNoise => gauss_noise(img, m, rng),
        Saturation => map_unit(img, |p| {
            let g = luma(p);
            p.map(|c| g + m * (c - g))
        }),
        Contrast => {
            let mean = mean_luma(img);
            map_unit(img, |p| p.map(|c| mean + m * (c - mean)))
        }
        Brightness => map_unit(img, |p| p.map(|c| c * m)),
        Sharpness => sharpness(img, m),
        ColorCasting => color_casting(img, m, rng),
        Equalize => equalize(img),
        EqualizeYuv => equalize_yuv(img),
        Posterize => posterize(img, m),
        Autocontrast => autocontrast(img),
        Solarize => map_bytes(img, |v| if f64::from(v) > m { 255 - v } else { v }),
        Vignetting => vignetting(img, m),
        Rotate => {
            let (cx, cy) = center(img);
            let (s, c) = m.to_radians().sin_cos();
            // Counter-clockwise on screen; y points down.
            warp(img, |x, y| {
                let (dx, dy) = (x - cx, y - cy);
                (cx + dx * c - dy * s, cy + dx * s + dy * c)
            })
        }
        Flip => {
            let horizontal = rng.random_bool(0.5);
            let (w, h) = img.dims();
            ImageBuffer::from_fn(w, h, |x, y| {
                if horizontal {
                    img.pixel(w - 1 - x, y)
                } else {
                    img.pixel(x, h - 1 - y)
                }
            })
        }
        ShearX => {
            let (_, cy) = center(img);
            let t = m.to_radians().tan();
            warp(img, |x, y| (x + t * (y - cy), y))
        }
        ShearY => {
            let (cx, _) = center(img);
            let t = m.to_radians().tan();
            warp(img, |x, y| (x, y + t * (x - cx)))
        }
        Distortion => distortion(img, m),
        Scale => {
            check_positive(kind, m)?;
            zoom(img, m, m)
        }
        ScaleDiff => {
            // Horizontal by m, vertical by the mirrored factor 2 - m.
            check_positive(kind, m)?;
            check_positive(kind, 2.0 - m)?;
            zoom(img, m, 2.0 - m)
        }
        Cutout => cutout(img, m, rng),
    };
    Ok(out)
}

fn check_positive(kind: TransformKind, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{kind} factor must be positive, got {v}")))
    }
}

fn center(img: &ImageBuffer) -> (f64, f64) {
    ((f64::from(img.width()) - 1.0) / 2.0, (f64::from(img.height()) - 1.0) / 2.0)
}

#[inline]
fn luma(p: [f64; 3]) -> f64 {
    0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
}

fn map_unit(img: &ImageBuffer, f: impl Fn([f64; 3]) -> [f64; 3]) -> ImageBuffer {
    let mut out = img.clone();
    for px in out.raw_mut().chunks_exact_mut(3) {
        let v = f([to_unit(px[0]), to_unit(px[1]), to_unit(px[2])]);
        for c in 0..3 {
            px[c] = quantize(v[c]);
        }
    }
    out
}

fn map_bytes(img: &ImageBuffer, f: impl Fn(u8) -> u8) -> ImageBuffer {
    let mut out = img.clone();
    out.raw_mut().iter_mut().for_each(|v| *v = f(*v));
    out
}

fn mean_luma(img: &ImageBuffer) -> f64 {
    let n = img.as_raw().len() / 3;
    let sum: f64 = img
        .as_raw()
        .chunks_exact(3)
        .map(|p| luma([to_unit(p[0]), to_unit(p[1]), to_unit(p[2])]))
        .sum();
    sum / n as f64
}

fn sample_pairing(img: &ImageBuffer, partner: &ImageBuffer, m: f64) -> ImageBuffer {
    let resized;
    let partner = if partner.dims() == img.dims() {
        partner
    } else {
        resized = resize_bilinear(partner, img.width(), img.height());
        &resized
    };
    let mut out = img.clone();
    for (o, &b) in out.raw_mut().iter_mut().zip(partner.as_raw()) {
        *o = quantize((1.0 - m) * to_unit(*o) + m * to_unit(b));
    }
    out
}

fn gauss_noise<R: Rng + ?Sized>(img: &ImageBuffer, m: f64, rng: &mut R) -> ImageBuffer {
    let mut out = img.clone();
    for v in out.raw_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *v = quantize(to_unit(*v) + m * n);
    }
    out
}

/// Blend toward a 3x3 smoothed copy; border pixels are their own blur.
fn sharpness(img: &ImageBuffer, m: f64) -> ImageBuffer {
    let (w, h) = img.dims();
    ImageBuffer::from_fn(w, h, |x, y| {
        let p = img.pixel(x, y);
        if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
            return p;
        }
        let mut out = [0u8; 3];
        for c in 0..3 {
            let mut acc = 0.0;
            for dy in 0..3 {
                for dx in 0..3 {
                    let k = if dx == 1 && dy == 1 { 5.0 } else { 1.0 };
                    acc += k * to_unit(img.pixel(x + dx - 1, y + dy - 1)[c]);
                }
            }
            let blurred = acc / 13.0;
            out[c] = quantize(blurred + m * (to_unit(p[c]) - blurred));
        }
        out
    })
}

fn color_casting<R: Rng + ?Sized>(img: &ImageBuffer, m: f64, rng: &mut R) -> ImageBuffer {
    let channel = rng.random_range(0..3usize);
    let mut out = img.clone();
    for px in out.raw_mut().chunks_exact_mut(3) {
        px[channel] = round_half_up(f64::from(px[channel]) + m).clamp(0.0, 255.0) as u8;
    }
    out
}

/// Cumulative-histogram lookup table for one 8-bit channel. Returns `None`
/// when the channel is (nearly) constant and equalization is a no-op.
fn equalize_lut(hist: &[u64; 256]) -> Option<[u8; 256]> {
    let total: u64 = hist.iter().sum();
    let last = hist.iter().rev().find(|&&c| c > 0).copied().unwrap_or(0);
    let step = (total - last) / 255;
    if step == 0 {
        return None;
    }
    let mut lut = [0u8; 256];
    let mut n = step / 2;
    for (i, &c) in hist.iter().enumerate() {
        lut[i] = (n / step).min(255) as u8;
        n += c;
    }
    Some(lut)
}

fn equalize(img: &ImageBuffer) -> ImageBuffer {
    let mut out = img.clone();
    for c in 0..3 {
        let mut hist = [0u64; 256];
        for px in img.as_raw().chunks_exact(3) {
            hist[px[c] as usize] += 1;
        }
        if let Some(lut) = equalize_lut(&hist) {
            for px in out.raw_mut().chunks_exact_mut(3) {
                px[c] = lut[px[c] as usize];
            }
        }
    }
    out
}

/// Equalizes BT.601 luma only. With U and V held fixed, converting back to
/// RGB shifts all three channels by the same luma delta.
fn equalize_yuv(img: &ImageBuffer) -> ImageBuffer {
    let luma_of = |p: &[u8]| luma([to_unit(p[0]), to_unit(p[1]), to_unit(p[2])]);
    let mut hist = [0u64; 256];
    for px in img.as_raw().chunks_exact(3) {
        hist[quantize(luma_of(px)) as usize] += 1;
    }
    let Some(lut) = equalize_lut(&hist) else {
        return img.clone();
    };
    let mut out = img.clone();
    for px in out.raw_mut().chunks_exact_mut(3) {
        let y = luma_of(px);
        let delta = to_unit(lut[quantize(y) as usize]) - y;
        for v in px.iter_mut() {
            *v = quantize(to_unit(*v) + delta);
        }
    }
    out
}

/// Keeps the `round(m)` most significant bits of every channel.
fn posterize(img: &ImageBuffer, m: f64) -> ImageBuffer {
    let bits = round_half_up(m).clamp(0.0, 8.0) as u32;
    let mask = if bits == 0 { 0 } else { 0xFFu8 << (8 - bits) };
    map_bytes(img, |v| v & mask)
}

fn autocontrast(img: &ImageBuffer) -> ImageBuffer {
    let mut out = img.clone();
    for c in 0..3 {
        let (lo, hi) = img
            .as_raw()
            .chunks_exact(3)
            .fold((255u8, 0u8), |(lo, hi), p| (lo.min(p[c]), hi.max(p[c])));
        if hi <= lo {
            continue;
        }
        let scale = 1.0 / f64::from(hi - lo);
        for px in out.raw_mut().chunks_exact_mut(3) {
            px[c] = quantize(f64::from(px[c] - lo) * scale);
        }
    }
    out
}

/// Channel gain `1 - m (r / r_max)^2`, with r measured from the image center
/// and r_max the center-to-corner distance.
fn vignetting(img: &ImageBuffer, m: f64) -> ImageBuffer {
    let (cx, cy) = center(img);
    let r2_max = cx * cx + cy * cy;
    let (w, h) = img.dims();
    ImageBuffer::from_fn(w, h, |x, y| {
        let p = img.pixel(x, y);
        if r2_max == 0.0 {
            return p;
        }
        let (dx, dy) = (f64::from(x) - cx, f64::from(y) - cy);
        let gain = 1.0 - m * (dx * dx + dy * dy) / r2_max;
        p.map(|v| quantize(to_unit(v) * gain))
    })
}

/// Sinusoidal grid warp with peak displacement `m * min(w, h) / 10` pixels.
fn distortion(img: &ImageBuffer, m: f64) -> ImageBuffer {
    let (w, h) = (f64::from(img.width()), f64::from(img.height()));
    let amp = m * w.min(h) / 10.0;
    let tau = std::f64::consts::TAU;
    warp(img, |x, y| (x + amp * (tau * y / h).sin(), y + amp * (tau * x / w).sin()))
}

/// Zoom about the center; factors above 1 enlarge the content.
fn zoom(img: &ImageBuffer, fx: f64, fy: f64) -> ImageBuffer {
    let (cx, cy) = center(img);
    warp(img, |x, y| (cx + (x - cx) / fx, cy + (y - cy) / fy))
}

fn cutout<R: Rng + ?Sized>(img: &ImageBuffer, m: f64, rng: &mut R) -> ImageBuffer {
    let side = round_half_up(m).max(0.0) as i64;
    let (w, h) = img.dims();
    let cx = rng.random_range(0..w) as i64;
    let cy = rng.random_range(0..h) as i64;
    let mut out = img.clone();
    if side == 0 {
        return out;
    }
    let x0 = (cx - side / 2).max(0);
    let y0 = (cy - side / 2).max(0);
    let x1 = (cx - side / 2 + side).min(i64::from(w));
    let y1 = (cy - side / 2 + side).min(i64::from(h));
    for y in y0..y1 {
        for x in x0..x1 {
            out.set_pixel(x as u32, y as u32, FILL_GRAY);
        }
    }
    out
}
