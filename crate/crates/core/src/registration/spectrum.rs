//! Windowing, 2-D FFTs and magnitude-spectrum filtering.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::raster::Raster;

/// Separable 2-D FFT over a row-major `width x height` buffer.
pub struct Fft2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn forward_real(&self, raster: &Raster) -> Vec<Complex64> {
        assert_eq!((raster.width(), raster.height()), (self.width, self.height));
        let mut buf: Vec<Complex64> = raster.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform in place, scaled by `1 / (width * height)`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_inv, &self.col_inv);
        let norm = 1.0 / (self.width * self.height) as f64;
        for v in buf.iter_mut() {
            *v *= norm;
        }
    }

    fn run(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!(buf.len(), self.width * self.height);
        rows.process(buf);
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for x in 0..self.width {
            for (y, c) in column.iter_mut().enumerate() {
                *c = buf[y * self.width + x];
            }
            cols.process(&mut column);
            for (y, c) in column.iter().enumerate() {
                buf[y * self.width + x] = *c;
            }
        }
    }
}

/// Hann weights `w(i) = 0.5 (1 - cos(2 pi i / (n - 1)))`.
pub fn hann_weights(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![1.0; n];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / denom).cos()))
        .collect()
}

/// Multiplies a raster by the separable Hann window `w(x) w(y)`.
pub fn apply_hann(raster: &Raster) -> Raster {
    let wx = hann_weights(raster.width());
    let wy = hann_weights(raster.height());
    Raster::from_fn(raster.width(), raster.height(), |x, y| {
        raster.get(x, y) * wx[x] * wy[y]
    })
}

/// Moves the zero-frequency bin from index 0 to `(w/2, h/2)`.
fn fftshift_magnitude(spectrum: &[Complex64], width: usize, height: usize) -> Raster {
    let mut out = Raster::new(width, height);
    let (hw, hh) = (width / 2, height / 2);
    for y in 0..height {
        let sy = (y + height - hh) % height;
        for x in 0..width {
            let sx = (x + width - hw) % width;
            out.set(x, y, spectrum[sy * width + sx].norm());
        }
    }
    out
}

/// `|DFT|` with the DC term at `(size/2, size/2)`.
pub fn fft_magnitude_centered(raster: &Raster) -> Raster {
    let fft = Fft2d::new(raster.width(), raster.height());
    centered_magnitude_with(&fft, raster)
}

pub(crate) fn centered_magnitude_with(fft: &Fft2d, raster: &Raster) -> Raster {
    let spectrum = fft.forward_real(raster);
    fftshift_magnitude(&spectrum, raster.width(), raster.height())
}

/// Normalized centered frequency of index `i` on an axis of length `n`.
#[inline]
fn centered_freq(i: usize, n: usize) -> f64 {
    (i as f64 - (n / 2) as f64) / n as f64
}

/// Emphasis filter `H = (1 - cos(pi xi) cos(pi eta)) (2 - cos(pi xi) cos(pi eta))`.
///
/// Zero at DC, 2 at the Nyquist edges.
pub fn highpass(magnitude: &Raster) -> Raster {
    let (w, h) = (magnitude.width(), magnitude.height());
    let cx: Vec<f64> = (0..w).map(|i| (PI * centered_freq(i, w)).cos()).collect();
    let cy: Vec<f64> = (0..h).map(|i| (PI * centered_freq(i, h)).cos()).collect();
    Raster::from_fn(w, h, |x, y| {
        let c = cx[x] * cy[y];
        magnitude.get(x, y) * (1.0 - c) * (2.0 - c)
    })
}
