//! Fourier-Mellin registration of two frames.
//!
//! Rotation and scale come from phase-correlating log-polar resamplings of
//! the (windowed, high-passed) magnitude spectra. The magnitude spectrum is
//! point-symmetric, so the angle is only known modulo pi: both candidates are
//! undone on the second frame and the one whose translation correlation peaks
//! higher wins. That peak is reported as the confidence.

pub mod logpolar;
pub mod phase;
mod refine;
pub mod spectrum;
pub mod transform;
pub mod warp;

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::preprocess::Frame;
use crate::raster::Raster;

pub use logpolar::{log_polar, LogPolarGrid};
pub use phase::{phase_correlate, Correlation};
pub use spectrum::{apply_hann, fft_magnitude_centered, highpass, Fft2d};
pub use transform::{wrap_angle, SimilarityTransform};
pub use warp::{apply_similarity, circular_shift, warp_raster};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistrationError {
    #[error("degenerate input")]
    DegenerateInput,
    #[error("size mismatch: {a} vs {b}")]
    SizeMismatch { a: usize, b: usize },
    #[error("invalid registration config: {0}")]
    InvalidConfig(String),
}

/// Fourier-Mellin sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmiConfig {
    /// Angular samples over `[0, pi)`.
    pub n_theta: usize,
    /// Log-radial samples.
    pub n_rho: usize,
    /// Innermost sampled radius, in frequency bins.
    pub rho_min: f64,
    /// Results below this confidence are rejected by map building.
    pub confidence_floor: f64,
    /// Estimated scale is clamped to `[1/max_scale, max_scale]`.
    pub max_scale: f64,
}

impl FmiConfig {
    pub const DEFAULT_CONFIDENCE_FLOOR: f64 = 0.12;

    /// Defaults for a given frame size: one angular and radial sample per pixel.
    pub fn for_size(size: usize) -> Self {
        Self {
            n_theta: size,
            n_rho: size,
            rho_min: 2.0,
            confidence_floor: Self::DEFAULT_CONFIDENCE_FLOOR,
            max_scale: 4.0,
        }
    }

    pub fn validate(&self, size: usize) -> Result<(), RegistrationError> {
        let fail = |m: String| Err(RegistrationError::InvalidConfig(m));
        if self.n_theta < 64 {
            return fail(format!("n_theta {} < 64", self.n_theta));
        }
        if self.n_rho < 64 {
            return fail(format!("n_rho {} < 64", self.n_rho));
        }
        if !(self.rho_min > 0.0 && self.rho_min < size as f64 / 2.0 - 1.0) {
            return fail(format!("rho_min {} outside (0, {})", self.rho_min, size / 2));
        }
        if !(0.0..1.0).contains(&self.confidence_floor) {
            return fail(format!("confidence_floor {} outside [0, 1)", self.confidence_floor));
        }
        if !(self.max_scale.is_finite() && self.max_scale >= 1.0) {
            return fail(format!("max_scale {} must be >= 1", self.max_scale));
        }
        Ok(())
    }
}

impl Default for FmiConfig {
    fn default() -> Self {
        Self::for_size(crate::preprocess::DEFAULT_FRAME_SIZE)
    }
}

/// Estimated transform plus the translation-correlation peak in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationResult {
    pub transform: SimilarityTransform,
    pub confidence: f64,
}

/// Registration engine with FFT plans cached for one frame size.
pub struct Registrar {
    size: usize,
    cfg: FmiConfig,
    grid: LogPolarGrid,
    image_fft: Fft2d,
    polar_fft: Fft2d,
}

impl std::fmt::Debug for Registrar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registrar")
            .field("size", &self.size)
            .field("cfg", &self.cfg)
            .finish()
    }
}

/// Per-frame quantities reused when the same frame is registered again.
struct Prepared {
    windowed_spectrum: Vec<Complex64>,
    magnitude: Raster,
    polar_spectrum: Vec<Complex64>,
}

impl Registrar {
    pub fn new(size: usize, cfg: FmiConfig) -> Result<Self, RegistrationError> {
        cfg.validate(size)?;
        Ok(Self {
            size,
            cfg,
            grid: LogPolarGrid::new(size, cfg.n_theta, cfg.n_rho, cfg.rho_min),
            image_fft: Fft2d::new(size, size),
            polar_fft: Fft2d::new(cfg.n_rho, cfg.n_theta),
        })
    }

    pub fn config(&self) -> &FmiConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &LogPolarGrid {
        &self.grid
    }

    fn prepare(&self, r: &Raster) -> Result<Prepared, RegistrationError> {
        phase::check_not_constant(r)?;
        let windowed = apply_hann(r);
        let windowed_spectrum = self.image_fft.forward_real(&windowed);
        let magnitude = highpass(&spectrum::centered_magnitude_with(&self.image_fft, &windowed));
        let polar = log_polar(&magnitude, &self.grid);
        let polar_spectrum = self.polar_fft.forward_real(&polar);
        Ok(Prepared {
            windowed_spectrum,
            magnitude,
            polar_spectrum,
        })
    }

    /// Converts a log-polar correlation offset to `(rotation, scale)`.
    fn rotation_scale(&self, c: &Correlation) -> (f64, f64) {
        (c.dy * self.grid.theta_step(), self.grid.base().powf(-c.dx))
    }

    /// Rotation (modulo pi) and scale taking `b` onto `a`.
    fn spectral_estimate(&self, pa: &Prepared, pb: &Prepared) -> Result<(f64, f64), RegistrationError> {
        let coarse = phase::correlate_spectra(&self.polar_fft, &pa.polar_spectrum, &pb.polar_spectrum)?;
        let (mut rotation, mut scale) = self.rotation_scale(&coarse);

        // Resample b's spectrum on a grid pre-warped by the coarse estimate and
        // correlate again: the residual sits near zero lag, where the parabolic
        // peak fit is least biased.
        let refined_polar = logpolar::log_polar_offset(&pb.magnitude, &self.grid, -rotation, scale);
        if let Ok(residual) = phase::correlate_spectra(
            &self.polar_fft,
            &pa.polar_spectrum,
            &self.polar_fft.forward_real(&refined_polar),
        ) {
            let (dr, ds) = self.rotation_scale(&residual);
            if self.within_bins(dr, ds, 2.0) {
                rotation += dr;
                scale *= ds;
            }
        }
        Ok((rotation, scale.clamp(1.0 / self.cfg.max_scale, self.cfg.max_scale)))
    }

    fn within_bins(&self, rotation: f64, scale: f64, bins: f64) -> bool {
        rotation.abs() <= bins * self.grid.theta_step() && scale.ln().abs() <= bins * self.grid.base().ln()
    }

    /// Undoes `(scale, rotation)` on `b` and phase-correlates it against `a`.
    fn translation(
        &self,
        pa: &Prepared,
        b: &Raster,
        scale: f64,
        rotation: f64,
    ) -> Option<RegistrationResult> {
        let linear = SimilarityTransform::new(scale, rotation, 0.0, 0.0);
        let derotated = warp_raster(b, &linear.inverse());
        phase::check_not_constant(&derotated).ok()?;
        let spectrum = self.image_fft.forward_real(&apply_hann(&derotated));
        let c = phase::correlate_spectra(&self.image_fft, &pa.windowed_spectrum, &spectrum).ok()?;
        Some(RegistrationResult {
            transform: SimilarityTransform::new(scale, rotation, c.dx, c.dy),
            confidence: c.peak,
        })
    }

    pub fn register(&self, a: &Frame, b: &Frame) -> Result<RegistrationResult, RegistrationError> {
        for f in [a, b] {
            if f.size() != self.size {
                return Err(RegistrationError::SizeMismatch {
                    a: self.size,
                    b: f.size(),
                });
            }
        }
        let pa = self.prepare(a.raster())?;
        let pb = self.prepare(b.raster())?;
        let (rotation, scale) = self.spectral_estimate(&pa, &pb)?;

        let mut best: Option<RegistrationResult> = None;
        for candidate in [rotation, rotation + PI] {
            if let Some(r) = self.translation(&pa, b.raster(), scale, candidate) {
                if best.is_none_or(|b| r.confidence > b.confidence) {
                    best = Some(r);
                }
            }
        }
        let mut result = best.ok_or(RegistrationError::DegenerateInput)?;

        // Whitened correlation weights every frequency equally, so aliased
        // high frequencies bias the sub-sample estimate; a least-squares fit
        // on intensities removes most of that bias.
        if let Some(t) = refine::refine(a.raster(), b.raster(), &result.transform) {
            result.transform = t;
        }
        Ok(result)
    }
}

/// One-shot registration of `b` against `a`.
///
/// The result maps centered pixel coordinates of `b` into those of `a`.
pub fn register(a: &Frame, b: &Frame, cfg: &FmiConfig) -> Result<RegistrationResult, RegistrationError> {
    if a.size() != b.size() {
        return Err(RegistrationError::SizeMismatch {
            a: a.size(),
            b: b.size(),
        });
    }
    Registrar::new(a.size(), *cfg)?.register(a, b)
}
