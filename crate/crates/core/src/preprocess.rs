//! Conversion of captured images into square grayscale power-of-two frames.
//!
//! The chain is `to_grayscale -> undistort -> square_crop -> resize_pow2`.
//! Cropping always happens before resizing so the resize is isotropic.

use thiserror::Error;

use crate::raster::{bilinear, Raster};

/// Smallest frame side accepted by the registration core.
pub const MIN_FRAME_SIZE: usize = 64;
/// Default frame side.
pub const DEFAULT_FRAME_SIZE: usize = 256;

/// Rec. 709 luma weights.
const LUMA: [f64; 3] = [0.2126, 0.7152, 0.0722];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("target size {0} is not a power of two")]
    TargetNotPowerOfTwo(usize),
    #[error("target size {0} is below the minimum of {MIN_FRAME_SIZE}")]
    TargetTooSmall(usize),
    #[error("image is {width}x{height}, expected a square single-channel image")]
    NotSquareGray { width: usize, height: usize },
}

/// A decoded capture: 1 (gray) or 3 (RGB) interleaved channels, samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RawImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, PreprocessError> {
        if width == 0 || height == 0 {
            return Err(PreprocessError::InvalidImage(format!(
                "zero dimension {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(PreprocessError::InvalidImage(format!(
                "unsupported channel count {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(PreprocessError::InvalidImage(format!(
                "expected {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(PreprocessError::InvalidImage(format!(
                "sample {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Single-channel image from a raster; samples are clamped into `[0, 1]`.
    pub fn from_raster(raster: &Raster) -> Self {
        let data = raster
            .data()
            .iter()
            .map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Self {
            width: raster.width(),
            height: raster.height(),
            channels: 1,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copies the first channel into a raster (the image itself when gray).
    pub fn to_raster(&self) -> Raster {
        Raster::from_vec(
            self.width,
            self.height,
            self.data.iter().step_by(self.channels).copied().collect(),
        )
    }
}

/// Square grayscale raster with a power-of-two side, ready for registration.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    raster: Raster,
    source_index: usize,
}

impl Frame {
    pub fn new(raster: Raster, source_index: usize) -> Result<Self, PreprocessError> {
        let size = raster.width();
        if raster.height() != size {
            return Err(PreprocessError::NotSquareGray {
                width: raster.width(),
                height: raster.height(),
            });
        }
        check_target(size)?;
        if let Some(bad) = raster
            .data()
            .iter()
            .find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(PreprocessError::InvalidImage(format!(
                "frame sample {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            raster,
            source_index,
        })
    }

    pub fn size(&self) -> usize {
        self.raster.width()
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }

    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn data(&self) -> &[f64] {
        self.raster.data()
    }

    pub fn into_raster(self) -> Raster {
        self.raster
    }
}

impl AsRef<Raster> for Frame {
    fn as_ref(&self) -> &Raster {
        &self.raster
    }
}

/// Two-coefficient radial lens model.
///
/// When `enabled` is false, [`undistort`] returns its input untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationParams {
    pub enabled: bool,
    pub k1: f64,
    pub k2: f64,
    /// Principal point, normalized to `[0, 1]` in each axis.
    pub center: (f64, f64),
}

impl Default for CalibrationParams {
    fn default() -> Self {
        Self {
            enabled: false,
            k1: 0.0,
            k2: 0.0,
            center: (0.5, 0.5),
        }
    }
}

pub fn to_grayscale(img: &RawImage) -> RawImage {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| (LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2]).clamp(0.0, 1.0))
        .collect();
    RawImage {
        width: img.width,
        height: img.height,
        channels: 1,
        data,
    }
}

/// Centered `s x s` crop with `s = min(width, height)`.
///
/// An odd remainder drops the extra row/column on the high-index side.
pub fn square_crop(img: &RawImage) -> RawImage {
    let side = img.width.min(img.height);
    let x0 = (img.width - side) / 2;
    let y0 = (img.height - side) / 2;
    let c = img.channels;
    let mut data = Vec::with_capacity(side * side * c);
    for y in y0..y0 + side {
        let row = (y * img.width + x0) * c;
        data.extend_from_slice(&img.data[row..row + side * c]);
    }
    RawImage {
        width: side,
        height: side,
        channels: c,
        data,
    }
}

fn check_target(target: usize) -> Result<(), PreprocessError> {
    if !target.is_power_of_two() {
        return Err(PreprocessError::TargetNotPowerOfTwo(target));
    }
    if target < MIN_FRAME_SIZE {
        return Err(PreprocessError::TargetTooSmall(target));
    }
    Ok(())
}

/// Corner-aligned bilinear resampling of a raster to `target x target`.
///
/// Output grid point `i` maps to source coordinate `i * (n - 1) / (target - 1)`,
/// so corner samples coincide with source corners.
pub fn resample_square(src: &Raster, target: usize) -> Raster {
    let sx = if target > 1 {
        (src.width() as f64 - 1.0) / (target as f64 - 1.0)
    } else {
        0.0
    };
    let sy = if target > 1 {
        (src.height() as f64 - 1.0) / (target as f64 - 1.0)
    } else {
        0.0
    };
    Raster::from_fn(target, target, |x, y| {
        src.sample_bilinear(x as f64 * sx, y as f64 * sy)
            .unwrap_or(0.0)
            .clamp(0.0, 1.0)
    })
}

/// Resizes a square gray image to a `target x target` frame.
pub fn resize_pow2(img: &RawImage, target: usize) -> Result<Frame, PreprocessError> {
    if img.channels != 1 || img.width != img.height {
        return Err(PreprocessError::NotSquareGray {
            width: img.width,
            height: img.height,
        });
    }
    check_target(target)?;
    let src = img.to_raster();
    let raster = if img.width == target {
        src
    } else {
        resample_square(&src, target)
    };
    Frame::new(raster, 0)
}

/// Inverse radial undistortion.
///
/// Each output pixel at normalized radius `r` (distance from the principal
/// point divided by half the longer image side) is sampled from the input at
/// `r_d = r * (1 + k1 r^2 + k2 r^4)` along the same ray.
pub fn undistort(img: &RawImage, calib: &CalibrationParams) -> RawImage {
    if !calib.enabled {
        return img.clone();
    }
    let (w, h, c) = (img.width, img.height, img.channels);
    let cx = calib.center.0 * (w as f64 - 1.0);
    let cy = calib.center.1 * (h as f64 - 1.0);
    let norm = w.max(h) as f64 / 2.0;
    let planes: Vec<Vec<f64>> = (0..c)
        .map(|ch| img.data.iter().skip(ch).step_by(c).copied().collect())
        .collect();
    let mut data = vec![0.0; w * h * c];
    for y in 0..h {
        for x in 0..w {
            let dx = (x as f64 - cx) / norm;
            let dy = (y as f64 - cy) / norm;
            let r2 = dx * dx + dy * dy;
            let factor = 1.0 + calib.k1 * r2 + calib.k2 * r2 * r2;
            let sx = cx + dx * factor * norm;
            let sy = cy + dy * factor * norm;
            for (ch, plane) in planes.iter().enumerate() {
                let v = bilinear(plane, w, h, sx, sy).unwrap_or(0.0);
                data[(y * w + x) * c + ch] = v.clamp(0.0, 1.0);
            }
        }
    }
    RawImage {
        width: w,
        height: h,
        channels: c,
        data,
    }
}

/// Full preprocessing chain for one capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preprocessor {
    pub frame_size: usize,
    pub calibration: CalibrationParams,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self {
            frame_size: DEFAULT_FRAME_SIZE,
            calibration: CalibrationParams::default(),
        }
    }
}

impl Preprocessor {
    pub fn new(frame_size: usize, calibration: CalibrationParams) -> Result<Self, PreprocessError> {
        check_target(frame_size)?;
        Ok(Self {
            frame_size,
            calibration,
        })
    }

    pub fn process(&self, img: &RawImage, source_index: usize) -> Result<Frame, PreprocessError> {
        let gray = to_grayscale(img);
        let gray = undistort(&gray, &self.calibration);
        let square = square_crop(&gray);
        let frame = resize_pow2(&square, self.frame_size)?;
        Ok(Frame {
            source_index,
            ..frame
        })
    }
}
