//! Seeded procedural ground textures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::Raster;

/// Multi-octave value noise normalized to `[0, 1]`.
///
/// Identical `(width, height, seed)` always yields an identical raster.
pub fn value_noise(width: usize, height: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves: [(usize, f64); 6] = [(96, 1.0), (48, 0.7), (24, 0.5), (12, 0.35), (6, 0.25), (3, 0.15)];
    let mut acc = Raster::new(width, height);
    for &(cell, amp) in &octaves {
        let gw = width / cell + 2;
        let gh = height / cell + 2;
        let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>()).collect();
        let ox = rng.random::<f64>() * cell as f64;
        let oy = rng.random::<f64>() * cell as f64;
        for y in 0..height {
            let gy = (y as f64 + oy) / cell as f64;
            let y0 = (gy.floor() as usize).min(gh - 2);
            let ty = smoothstep(gy - y0 as f64);
            for x in 0..width {
                let gx = (x as f64 + ox) / cell as f64;
                let x0 = (gx.floor() as usize).min(gw - 2);
                let tx = smoothstep(gx - x0 as f64);
                let v00 = lattice[y0 * gw + x0];
                let v10 = lattice[y0 * gw + x0 + 1];
                let v01 = lattice[(y0 + 1) * gw + x0];
                let v11 = lattice[(y0 + 1) * gw + x0 + 1];
                let top = v00 + (v10 - v00) * tx;
                let bottom = v01 + (v11 - v01) * tx;
                let v = top + (bottom - top) * ty;
                let i = y * width + x;
                acc.data_mut()[i] += amp * v;
            }
        }
    }
    normalize(&mut acc);
    acc
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Rescales samples linearly onto `[0, 1]`; constant rasters become 0.5.
pub fn normalize(r: &mut Raster) {
    let (lo, hi) = r.min_max();
    let span = hi - lo;
    for v in r.data_mut() {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.5 };
    }
}
