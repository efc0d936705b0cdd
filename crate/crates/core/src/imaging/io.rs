use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use super::ImageBuffer;
use crate::error::{Error, Result};

/// Quality used when re-encoding JPEG output.
pub const DEFAULT_JPEG_QUALITY: u8 = 95;

/// Decodes a PNG or JPEG file to RGB.
pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    ImageBuffer::new(w, h, rgb.into_raw())
}

/// Encodes by file extension: `.jpg`/`.jpeg` at `jpeg_quality`, anything else as PNG.
pub fn save_image(img: &ImageBuffer, path: &Path, jpeg_quality: u8) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let wrap = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    if ext == "jpg" || ext == "jpeg" {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut enc = JpegEncoder::new_with_quality(std::io::BufWriter::new(file), jpeg_quality);
        enc.encode(img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgb8)
            .map_err(wrap)
    } else {
        image::save_buffer_with_format(
            path,
            img.as_raw(),
            img.width(),
            img.height(),
            ExtendedColorType::Rgb8,
            ImageFormat::Png,
        )
        .map_err(wrap)
    }
}
