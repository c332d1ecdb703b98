//! Phase correlation with separable parabolic sub-sample refinement.

use rustfft::num_complex::Complex64;

use super::spectrum::Fft2d;
use super::RegistrationError;
use crate::raster::Raster;

/// Cross-power bins below this modulus are zeroed instead of normalized.
const MIN_CROSS_POWER: f64 = 1e-12;

/// Peak of a phase-correlation surface.
///
/// `(dx, dy)` satisfies `a(p + (dx, dy)) ≈ b(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub dx: f64,
    pub dy: f64,
    pub peak: f64,
}

pub fn phase_correlate(a: &Raster, b: &Raster) -> Result<Correlation, RegistrationError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(RegistrationError::SizeMismatch {
            a: a.width(),
            b: b.width(),
        });
    }
    let fft = Fft2d::new(a.width(), a.height());
    check_not_constant(a)?;
    check_not_constant(b)?;
    let fa = fft.forward_real(a);
    let fb = fft.forward_real(b);
    correlate_spectra(&fft, &fa, &fb)
}

pub(crate) fn check_not_constant(r: &Raster) -> Result<(), RegistrationError> {
    let (lo, hi) = r.min_max();
    if !(hi - lo > 1e-12 * hi.abs().max(1.0)) {
        return Err(RegistrationError::DegenerateInput);
    }
    Ok(())
}

/// Correlates two precomputed forward spectra.
pub(crate) fn correlate_spectra(
    fft: &Fft2d,
    fa: &[Complex64],
    fb: &[Complex64],
) -> Result<Correlation, RegistrationError> {
    let mut cross: Vec<Complex64> = fa
        .iter()
        .zip(fb)
        .map(|(x, y)| {
            let c = x * y.conj();
            let m = c.norm();
            if m < MIN_CROSS_POWER {
                Complex64::new(0.0, 0.0)
            } else {
                c / m
            }
        })
        .collect();
    if cross.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
        return Err(RegistrationError::DegenerateInput);
    }
    fft.inverse(&mut cross);

    let (w, h) = (fft.width(), fft.height());
    let (mut best, mut best_val) = (0usize, f64::NEG_INFINITY);
    for (i, c) in cross.iter().enumerate() {
        if c.re > best_val {
            best_val = c.re;
            best = i;
        }
    }
    let (px, py) = (best % w, best / w);
    let at = |x: usize, y: usize| cross[y * w + x].re;

    let fx = parabolic_offset(at((px + w - 1) % w, py), best_val, at((px + 1) % w, py));
    let fy = parabolic_offset(at(px, (py + h - 1) % h), best_val, at(px, (py + 1) % h));

    Ok(Correlation {
        dx: wrap_index(px, w) + fx,
        dy: wrap_index(py, h) + fy,
        peak: best_val.clamp(0.0, 1.0),
    })
}

/// Signed offset of an index on a circular axis, in `(-n/2, n/2]`.
#[inline]
fn wrap_index(i: usize, n: usize) -> f64 {
    if i > n / 2 {
        i as f64 - n as f64
    } else {
        i as f64
    }
}

/// Vertex of the parabola through `(-1, left), (0, center), (1, right)`.
#[inline]
fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let denom = left - 2.0 * center + right;
    if denom.abs() < 1e-15 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}
