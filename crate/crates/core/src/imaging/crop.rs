use rand::Rng;

use super::{resize_bilinear, ImageBuffer};
use crate::error::{Error, Result};
use crate::scalar::round_half_up;

/// Dimensions after the undersized-input rule: if either side is shorter than
/// `size`, scale so the shorter side equals `size`, preserving aspect.
pub fn crop_source_dims(width: u32, height: u32, size: u32) -> (u32, u32) {
    let short = width.min(height);
    if short >= size {
        return (width, height);
    }
    let k = f64::from(size) / f64::from(short);
    let stretch = |d: u32| {
        if d == short {
            size
        } else {
            (round_half_up(f64::from(d) * k) as u32).max(size)
        }
    };
    (stretch(width), stretch(height))
}

pub fn upscale_for_crop(img: &ImageBuffer, size: u32) -> ImageBuffer {
    let (w, h) = crop_source_dims(img.width(), img.height(), size);
    resize_bilinear(img, w, h)
}

/// Copies the `size`x`size` window at `(x, y)`.
pub fn crop_at(img: &ImageBuffer, size: u32, x: u32, y: u32) -> Result<ImageBuffer> {
    if size == 0 || x + size > img.width() || y + size > img.height() {
        return Err(Error::param(format!(
            "crop {size}x{size} at ({x}, {y}) does not fit a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    Ok(ImageBuffer::from_fn(size, size, |cx, cy| img.pixel(x + cx, y + cy)))
}

/// Uniformly placed square crop, upscaling undersized inputs first.
pub fn random_crop<R: Rng + ?Sized>(img: &ImageBuffer, size: u32, rng: &mut R) -> Result<ImageBuffer> {
    if size == 0 {
        return Err(Error::param("crop size must be at least 1"));
    }
    let src = upscale_for_crop(img, size);
    let x = rng.random_range(0..=src.width() - size);
    let y = rng.random_range(0..=src.height() - size);
    crop_at(&src, size, x, y)
}

/// Grid origins along one axis: `round(i * slack / (g - 1))` for `i < g`.
/// A single-cell grid takes the centered origin.
pub fn grid_origins(dim: u32, size: u32, g: u32) -> Vec<u32> {
    let slack = u64::from(dim.saturating_sub(size));
    if g <= 1 {
        return vec![slack.div_ceil(2) as u32];
    }
    let d = u64::from(g - 1);
    (0..u64::from(g)).map(|i| ((2 * i * slack + d) / (2 * d)) as u32).collect()
}

/// `k` crops spread evenly from the top-left to the bottom-right corner, in
/// row-major order. `k` must be a perfect square.
pub fn multi_crop_grid(img: &ImageBuffer, size: u32, k: u32) -> Result<Vec<ImageBuffer>> {
    let g = (f64::from(k)).sqrt().round() as u32;
    if k == 0 || g * g != k {
        return Err(Error::param(format!("crop count {k} is not a positive perfect square")));
    }
    if size == 0 {
        return Err(Error::param("crop size must be at least 1"));
    }
    let src = upscale_for_crop(img, size);
    let xs = grid_origins(src.width(), size, g);
    let ys = grid_origins(src.height(), size, g);
    let mut crops = Vec::with_capacity(k as usize);
    for &y in &ys {
        for &x in &xs {
            crops.push(crop_at(&src, size, x, y)?);
        }
    }
    Ok(crops)
}
