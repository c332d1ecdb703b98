//! Reading captures from disk and writing rasters back out.
//!
//! Inputs may be 8- or 16-bit grayscale or RGB PNG, or binary PGM/PPM.
//! Integer samples are normalized by `2^depth - 1`.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageReader, Luma};
use thiserror::Error;

use crate::preprocess::RawImage;
use crate::raster::Raster;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Decode { path: String, message: String },
    #[error("{path}: {message}")]
    Encode { path: String, message: String },
}

/// Extensions recognized as image files when scanning a directory.
pub const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm"];

pub fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
        .unwrap_or(false)
}

pub fn read_image(path: &Path) -> Result<RawImage, ImageIoError> {
    let display = path.display().to_string();
    let reader = ImageReader::open(path)
        .map_err(|source| ImageIoError::Io {
            path: display.clone(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| ImageIoError::Io {
            path: display.clone(),
            source,
        })?;
    let img = reader.decode().map_err(|e| ImageIoError::Decode {
        path: display.clone(),
        message: e.to_string(),
    })?;
    dynamic_to_raw(&img).map_err(|message| ImageIoError::Decode {
        path: display,
        message,
    })
}

fn dynamic_to_raw(img: &DynamicImage) -> Result<RawImage, String> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let wide = img.color().bytes_per_pixel() / img.color().channel_count() > 1;
    let color = img.color().has_color();
    let result = match (color, wide) {
        (false, false) => {
            let buf = img.to_luma8();
            RawImage::new(w, h, 1, normalize8(buf.as_raw()))
        }
        (false, true) => {
            let buf = img.to_luma16();
            RawImage::new(w, h, 1, normalize16(buf.as_raw()))
        }
        (true, false) => {
            let buf = img.to_rgb8();
            RawImage::new(w, h, 3, normalize8(buf.as_raw()))
        }
        (true, true) => {
            let buf = img.to_rgb16();
            RawImage::new(w, h, 3, normalize16(buf.as_raw()))
        }
    };
    result.map_err(|e| e.to_string())
}

fn normalize8(samples: &[u8]) -> Vec<f64> {
    samples.iter().map(|&v| v as f64 / 255.0).collect()
}

fn normalize16(samples: &[u16]) -> Vec<f64> {
    samples.iter().map(|&v| v as f64 / 65535.0).collect()
}

pub fn quantize8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn quantize16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

/// Writes a raster as 16-bit grayscale; the format follows the extension.
pub fn write_gray16(path: &Path, raster: &Raster) -> Result<(), ImageIoError> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
        raster.width() as u32,
        raster.height() as u32,
        raster.data().iter().map(|&v| quantize16(v)).collect(),
    )
    .expect("buffer size matches raster");
    buf.save(path).map_err(|e| ImageIoError::Encode {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes 8-bit grayscale samples; the format follows the extension.
pub fn write_gray8(
    path: &Path,
    width: usize,
    height: usize,
    samples: Vec<u8>,
) -> Result<(), ImageIoError> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(width as u32, height as u32, samples)
            .expect("buffer size matches dimensions");
    buf.save(path).map_err(|e| ImageIoError::Encode {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
