//! 8-bit RGB rasters and the 21 augmentation kernels.
//!
//! Kernels work on `[0, 1]`-normalized `f64` channels and quantize back with
//! round-half-up, so every kernel evaluated at its identity magnitude returns
//! its input bit for bit. Geometric kernels keep the output size equal to the
//! input size, sample bilinearly, and fill uncovered pixels with mid-gray.

mod buffer;
mod crop;
mod io;
mod kernels;
mod kinds;
mod resample;

pub use buffer::ImageBuffer;
pub use crop::{crop_at, crop_source_dims, grid_origins, multi_crop_grid, random_crop, upscale_for_crop};
pub use io::{load_image, save_image, DEFAULT_JPEG_QUALITY};
pub use kernels::{apply_transform, apply_transform_unbounded};
pub use kinds::{MagnitudeRange, Subset, TransformKind};
pub use resample::resize_bilinear;

/// Fill value for out-of-frame and cutout regions.
pub const FILL_GRAY: [u8; 3] = [128, 128, 128];
