use super::{ImageBuffer, FILL_GRAY};
use crate::scalar::round_half_up;

#[inline]
pub(crate) fn to_unit(v: u8) -> f64 {
    f64::from(v) / 255.0
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    round_half_up(v * 255.0).clamp(0.0, 255.0) as u8
}

/// Bilinear sample at pixel-center coordinates; neighbours outside the
/// frame contribute mid-gray.
#[inline]
fn sample_fill(img: &ImageBuffer, sx: f64, sy: f64) -> [f64; 3] {
    let (w, h) = (img.width() as i64, img.height() as i64);
    if !(sx > -1.0 && sy > -1.0 && sx < w as f64 && sy < h as f64) {
        return FILL_GRAY.map(to_unit);
    }
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let fetch = |x: i64, y: i64| -> [u8; 3] {
        if x < 0 || y < 0 || x >= w || y >= h {
            FILL_GRAY
        } else {
            img.pixel(x as u32, y as u32)
        }
    };
    let mut out = [0.0; 3];
    let taps = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1, y0, fx * (1.0 - fy)),
        (x0, y0 + 1, (1.0 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    ];
    for (x, y, wgt) in taps {
        if wgt == 0.0 {
            continue;
        }
        let p = fetch(x, y);
        for c in 0..3 {
            out[c] += wgt * to_unit(p[c]);
        }
    }
    out
}

/// Inverse-maps every output pixel through `src` and resamples. Output size
/// equals input size.
pub(crate) fn warp(img: &ImageBuffer, src: impl Fn(f64, f64) -> (f64, f64)) -> ImageBuffer {
    ImageBuffer::from_fn(img.width(), img.height(), |x, y| {
        let (sx, sy) = src(f64::from(x), f64::from(y));
        sample_fill(img, sx, sy).map(quantize)
    })
}

/// Bilinear resize with edge replication and half-pixel centers.
pub fn resize_bilinear(img: &ImageBuffer, width: u32, height: u32) -> ImageBuffer {
    if img.dims() == (width, height) {
        return img.clone();
    }
    let (sw, sh) = (img.width() as f64, img.height() as f64);
    let (kx, ky) = (sw / f64::from(width), sh / f64::from(height));
    ImageBuffer::from_fn(width, height, |x, y| {
        let sx = ((f64::from(x) + 0.5) * kx - 0.5).clamp(0.0, sw - 1.0);
        let sy = ((f64::from(y) + 0.5) * ky - 0.5).clamp(0.0, sh - 1.0);
        let x0 = sx.floor() as u32;
        let y0 = sy.floor() as u32;
        let x1 = (x0 + 1).min(img.width() - 1);
        let y1 = (y0 + 1).min(img.height() - 1);
        let fx = sx - f64::from(x0);
        let fy = sy - f64::from(y0);
        let (p00, p10, p01, p11) = (img.pixel(x0, y0), img.pixel(x1, y0), img.pixel(x0, y1), img.pixel(x1, y1));
        let mut out = [0u8; 3];
        for c in 0..3 {
            let v = (1.0 - fx) * (1.0 - fy) * to_unit(p00[c])
                + fx * (1.0 - fy) * to_unit(p10[c])
                + (1.0 - fx) * fy * to_unit(p01[c])
                + fx * fy * to_unit(p11[c]);
            out[c] = quantize(v);
        }
        out
    })
}
