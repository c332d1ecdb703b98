use super::transform::SimilarityTransform;
use crate::preprocess::Frame;
use crate::raster::Raster;

/// Resamples `src` so that `out(p) = src(t(p))` in centered coordinates.
///
/// Bilinear; samples landing outside `src` are zero. Both rasters share the
/// same dimensions and center.
pub fn warp_raster(src: &Raster, t: &SimilarityTransform) -> Raster {
    let (cx, cy) = src.center();
    let (sin, cos) = t.rotation.sin_cos();
    let (a, b) = (t.scale * cos, t.scale * sin);
    Raster::from_fn(src.width(), src.height(), |x, y| {
        let px = x as f64 - cx;
        let py = y as f64 - cy;
        let sx = a * px - b * py + t.tx + cx;
        let sy = b * px + a * py + t.ty + cy;
        src.sample_bilinear(sx, sy).unwrap_or(0.0)
    })
}

/// Warps a frame by `t`; see [`warp_raster`].
///
/// `register(f, &apply_similarity(f, t))` estimates `t`.
pub fn apply_similarity(f: &Frame, t: &SimilarityTransform) -> Frame {
    let out = warp_raster(f.raster(), t).into_vec();
    let clamped = out.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Frame::new(
        Raster::from_vec(f.size(), f.size(), clamped),
        f.source_index(),
    )
    .expect("warp preserves frame invariants")
}

/// Integer circular shift: `out(x, y) = src((x + u) mod w, (y + v) mod h)`.
///
/// Matches the translation convention of [`SimilarityTransform`], so the
/// shifted raster registers against `src` with translation `(u, v)`.
pub fn circular_shift(src: &Raster, u: isize, v: isize) -> Raster {
    let (w, h) = (src.width() as isize, src.height() as isize);
    Raster::from_fn(src.width(), src.height(), |x, y| {
        let sx = (x as isize + u).rem_euclid(w) as usize;
        let sy = (y as isize + v).rem_euclid(h) as usize;
        src.get(sx, sy)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn smooth(n: usize) -> Raster {
        Raster::from_fn(n, n, |x, y| {
            let (u, v) = (x as f64 / n as f64, y as f64 / n as f64);
            0.5 + 0.25 * (2.0 * PI * 3.0 * u).sin() * (2.0 * PI * 2.0 * v).cos()
                + 0.2 * (2.0 * PI * (u + 2.0 * v)).sin()
        })
    }

    #[test]
    fn identity_warp_is_bit_exact() {
        let r = smooth(64);
        assert_eq!(warp_raster(&r, &SimilarityTransform::identity()), r);
    }

    #[test]
    fn integer_translation_moves_samples() {
        let r = smooth(32);
        let out = warp_raster(&r, &SimilarityTransform::translation(3.0, -2.0));
        assert_eq!(out.get(10, 10), r.get(13, 8));
        // sample (30, 0) -> (33, -2) is outside
        assert_eq!(out.get(30, 0), 0.0);
    }

    #[test]
    fn half_turn_twice_round_trips() {
        let r = smooth(64);
        let t = SimilarityTransform::rotation_scale(PI, 1.0);
        let back = warp_raster(&warp_raster(&r, &t), &t);
        let rms = (r
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / r.data().len() as f64)
            .sqrt();
        assert!(rms <= 0.02, "rms {rms}");
    }

    #[test]
    fn scale_round_trip_on_central_half() {
        let r = smooth(64);
        let up = warp_raster(&r, &SimilarityTransform::rotation_scale(0.0, 2.0));
        let back = warp_raster(&up, &SimilarityTransform::rotation_scale(0.0, 0.5));
        for y in 16..48 {
            for x in 16..48 {
                assert!((back.get(x, y) - r.get(x, y)).abs() < 0.02, "({x},{y})");
            }
        }
    }

    #[test]
    fn circular_shift_convention() {
        let r = Raster::from_fn(8, 8, |x, y| (y * 8 + x) as f64);
        let s = circular_shift(&r, 2, -1);
        assert_eq!(s.get(0, 1), r.get(2, 0));
        assert_eq!(s.get(7, 0), r.get(1, 7));
        assert_eq!(circular_shift(&s, -2, 1), r);
    }
}
