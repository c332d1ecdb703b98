//! Log-polar resampling of centered magnitude spectra.
//!
//! Rows index angle over `[0, pi)`, columns index log-radius. A rotation of
//! the input about its center becomes a circular row shift; a scaling becomes
//! a column shift.

use std::f64::consts::PI;

use crate::raster::Raster;

/// Sampling geometry for a square centered raster of side `size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolarGrid {
    pub n_theta: usize,
    pub n_rho: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl LogPolarGrid {
    pub fn new(size: usize, n_theta: usize, n_rho: usize, rho_min: f64) -> Self {
        Self {
            n_theta,
            n_rho,
            rho_min,
            rho_max: size as f64 / 2.0 - 1.0,
        }
    }

    /// Ratio between consecutive radial samples.
    pub fn base(&self) -> f64 {
        (self.rho_max / self.rho_min).powf(1.0 / (self.n_rho as f64 - 1.0))
    }

    pub fn theta(&self, row: usize) -> f64 {
        PI * row as f64 / self.n_theta as f64
    }

    pub fn rho(&self, col: usize) -> f64 {
        self.rho_min * self.base().powi(col as i32)
    }

    /// Angle spanned by one row.
    pub fn theta_step(&self) -> f64 {
        PI / self.n_theta as f64
    }
}

/// Resamples `magnitude` (DC at `(size/2, size/2)`) onto `grid`.
///
/// Samples falling outside the raster are zero.
pub fn log_polar(magnitude: &Raster, grid: &LogPolarGrid) -> Raster {
    log_polar_offset(magnitude, grid, 0.0, 1.0)
}

/// Like [`log_polar`] with every sample rotated by `theta0` and radii
/// multiplied by `radius_factor`, i.e. the grid is pre-warped.
pub fn log_polar_offset(
    magnitude: &Raster,
    grid: &LogPolarGrid,
    theta0: f64,
    radius_factor: f64,
) -> Raster {
    let cx = (magnitude.width() / 2) as f64;
    let cy = (magnitude.height() / 2) as f64;
    let base = grid.base();
    let radii: Vec<f64> = (0..grid.n_rho)
        .map(|j| grid.rho_min * base.powi(j as i32) * radius_factor)
        .collect();
    let mut out = Raster::new(grid.n_rho, grid.n_theta);
    for i in 0..grid.n_theta {
        let (s, c) = (grid.theta(i) + theta0).sin_cos();
        for (j, &rho) in radii.iter().enumerate() {
            let v = magnitude
                .sample_bilinear(cx + rho * c, cy + rho * s)
                .unwrap_or(0.0);
            out.set(j, i, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = LogPolarGrid::new(256, 256, 256, 2.0);
        assert_eq!(g.rho_max, 127.0);
        assert!((g.rho(0) - 2.0).abs() < 1e-12);
        assert!((g.rho(255) - 127.0).abs() < 1e-9);
        assert!((g.theta(128) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_input_gives_constant_output() {
        let m = Raster::filled(64, 64, 0.8);
        let g = LogPolarGrid::new(64, 64, 64, 2.0);
        let lp = log_polar(&m, &g);
        assert_eq!((lp.width(), lp.height()), (64, 64));
        // rho_max = size/2 - 1 keeps every sample in bounds
        assert!(lp.data().iter().all(|&v| (v - 0.8).abs() < 1e-12));
    }
}
