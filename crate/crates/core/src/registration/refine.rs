//! Gauss-Newton polishing of a similarity estimate on raw intensities.
//!
//! Minimizes `sum (a(T p) - b(p))^2` over the pixels of `b` that `T` maps
//! inside `a`, with `T` parameterized linearly as
//! `[[alpha, -beta], [beta, alpha]] p + t`.

use super::transform::SimilarityTransform;
use crate::raster::Raster;

const MAX_ITERATIONS: usize = 12;
/// Stop once no frame corner moves by more than this many pixels.
const CONVERGED_PX: f64 = 1e-4;
/// Refinement may not move a frame corner further than this from the start.
const MAX_CORRECTION_PX: f64 = 2.0;
/// Minimum fraction of `b` that must overlap `a`.
const MIN_OVERLAP: f64 = 0.25;

fn gradients(a: &Raster) -> (Raster, Raster) {
    let (w, h) = (a.width(), a.height());
    let gx = Raster::from_fn(w, h, |x, y| {
        let l = a.get(x.saturating_sub(1), y);
        let r = a.get((x + 1).min(w - 1), y);
        (r - l) / if x == 0 || x == w - 1 { 1.0 } else { 2.0 }
    });
    let gy = Raster::from_fn(w, h, |x, y| {
        let u = a.get(x, y.saturating_sub(1));
        let d = a.get(x, (y + 1).min(h - 1));
        (d - u) / if y == 0 || y == h - 1 { 1.0 } else { 2.0 }
    });
    (gx, gy)
}

/// Largest corner displacement between two transforms on a `size` frame.
fn corner_shift(size: usize, s: &SimilarityTransform, t: &SimilarityTransform) -> f64 {
    let c = (size as f64 - 1.0) / 2.0;
    [(-c, -c), (c, -c), (-c, c), (c, c)]
        .iter()
        .map(|&p| {
            let (x0, y0) = s.apply(p);
            let (x1, y1) = t.apply(p);
            (x1 - x0).hypot(y1 - y0)
        })
        .fold(0.0, f64::max)
}

#[allow(clippy::needless_range_loop)]
fn solve4(mut m: [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..4 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..5 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]])
}

/// Refines `init` (mapping `b` into `a`), or returns `None` if the
/// refinement is ill-posed or strays too far from `init`.
#[allow(clippy::needless_range_loop)]
pub(crate) fn refine(a: &Raster, b: &Raster, init: &SimilarityTransform) -> Option<SimilarityTransform> {
    let size = a.width();
    let c = (size as f64 - 1.0) / 2.0;
    let hi = size as f64 - 1.0;
    let (gx, gy) = gradients(a);
    let (s, co) = init.rotation.sin_cos();
    let mut q = [init.scale * co, init.scale * s, init.tx, init.ty];
    let to_transform = |q: &[f64; 4]| {
        SimilarityTransform::new(q[0].hypot(q[1]), q[1].atan2(q[0]), q[2], q[3])
    };

    for _ in 0..MAX_ITERATIONS {
        let mut m = [[0.0f64; 5]; 4];
        let mut used = 0usize;
        for y in 0..size {
            let py = y as f64 - c;
            for x in 0..size {
                let px = x as f64 - c;
                let u = q[0] * px - q[1] * py + q[2] + c;
                let v = q[1] * px + q[0] * py + q[3] + c;
                if !(u >= 0.0 && u <= hi && v >= 0.0 && v <= hi) {
                    continue;
                }
                let (Some(av), Some(ax), Some(ay)) = (
                    a.sample_bilinear(u, v),
                    gx.sample_bilinear(u, v),
                    gy.sample_bilinear(u, v),
                ) else {
                    continue;
                };
                let r = av - b.get(x, y);
                let j = [ax * px + ay * py, ay * px - ax * py, ax, ay];
                for i in 0..4 {
                    for k in i..4 {
                        m[i][k] += j[i] * j[k];
                    }
                    m[i][4] -= j[i] * r;
                }
                used += 1;
            }
        }
        if (used as f64) < MIN_OVERLAP * (size * size) as f64 {
            return None;
        }
        for i in 0..4 {
            for k in 0..i {
                m[i][k] = m[k][i];
            }
        }
        let step = solve4(m)?;
        let before = to_transform(&q);
        for (p, d) in q.iter_mut().zip(step) {
            *p += d;
        }
        let after = to_transform(&q);
        if !after.is_finite() || corner_shift(size, init, &after) > MAX_CORRECTION_PX {
            return None;
        }
        if corner_shift(size, &before, &after) < CONVERGED_PX {
            break;
        }
    }
    Some(to_transform(&q))
}
