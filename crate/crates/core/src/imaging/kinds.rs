use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which half of the search space a transform belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    /// Photometric: pixel values change, geometry does not.
    Color,
    /// Geometric, or masks out spatial regions.
    Shape,
}

/// Closed magnitude interval of a transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagnitudeRange {
    pub lo: f64,
    pub hi: f64,
}

impl MagnitudeRange {
    pub fn contains(&self, m: f64) -> bool {
        m >= self.lo && m <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    SamplePairing,
    GaussNoise,
    Saturation,
    Contrast,
    Brightness,
    Sharpness,
    ColorCasting,
    Equalize,
    EqualizeYuv,
    Posterize,
    Autocontrast,
    Solarize,
    Vignetting,
    Rotate,
    Flip,
    ShearX,
    ShearY,
    Distortion,
    Scale,
    ScaleDiff,
    Cutout,
}

use TransformKind::*;

impl TransformKind {
    pub const ALL: [TransformKind; 21] = [
        SamplePairing,
        GaussNoise,
        Saturation,
        Contrast,
        Brightness,
        Sharpness,
        ColorCasting,
        Equalize,
        EqualizeYuv,
        Posterize,
        Autocontrast,
        Solarize,
        Vignetting,
        Rotate,
        Flip,
        ShearX,
        ShearY,
        Distortion,
        Scale,
        ScaleDiff,
        Cutout,
    ];

    pub const COLOR: [TransformKind; 13] = [
        SamplePairing,
        GaussNoise,
        Saturation,
        Contrast,
        Brightness,
        Sharpness,
        ColorCasting,
        Equalize,
        EqualizeYuv,
        Posterize,
        Autocontrast,
        Solarize,
        Vignetting,
    ];

    pub const SHAPE: [TransformKind; 8] = [Rotate, Flip, ShearX, ShearY, Distortion, Scale, ScaleDiff, Cutout];

    pub fn subset(self) -> Subset {
        match self {
            Rotate | Flip | ShearX | ShearY | Distortion | Scale | ScaleDiff | Cutout => Subset::Shape,
            _ => Subset::Color,
        }
    }

    /// Allowed magnitudes, or `None` for kinds that take no magnitude.
    pub fn magnitude_range(self) -> Option<MagnitudeRange> {
        let (lo, hi) = match self {
            SamplePairing | GaussNoise => (0.0, 0.2),
            Saturation | Contrast | Brightness | Sharpness => (0.6, 1.4),
            ColorCasting => (-30.0, 30.0),
            Posterize => (0.0, 3.0),
            Solarize => (128.0, 255.0),
            Vignetting | Distortion => (0.0, 0.6),
            Rotate => (-40.0, 40.0),
            ShearX | ShearY => (-15.0, 15.0),
            Scale | ScaleDiff => (0.8, 1.2),
            Cutout => (0.0, 50.0),
            Equalize | EqualizeYuv | Autocontrast | Flip => return None,
        };
        Some(MagnitudeRange { lo, hi })
    }

    /// The least destructive magnitude; levels are measured away from it.
    pub fn identity_magnitude(self) -> Option<f64> {
        Some(match self {
            Rotate | ShearX | ShearY | Distortion | Vignetting | GaussNoise | SamplePairing | Cutout
            | ColorCasting => 0.0,
            Brightness | Contrast | Saturation | Sharpness | Scale | ScaleDiff => 1.0,
            Solarize => 255.0,
            Posterize => 3.0,
            Equalize | EqualizeYuv | Autocontrast | Flip => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SamplePairing => "sample_pairing",
            GaussNoise => "gauss_noise",
            Saturation => "saturation",
            Contrast => "contrast",
            Brightness => "brightness",
            Sharpness => "sharpness",
            ColorCasting => "color_casting",
            Equalize => "equalize",
            EqualizeYuv => "equalize_yuv",
            Posterize => "posterize",
            Autocontrast => "autocontrast",
            Solarize => "solarize",
            Vignetting => "vignetting",
            Rotate => "rotate",
            Flip => "flip",
            ShearX => "shear_x",
            ShearY => "shear_y",
            Distortion => "distortion",
            Scale => "scale",
            ScaleDiff => "scale_diff",
            Cutout => "cutout",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param(format!("unknown transform {s:?}")))
    }
}
