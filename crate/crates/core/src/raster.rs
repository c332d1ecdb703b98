//! Dense single-channel floating-point rasters and bilinear sampling.

/// Row-major grayscale raster of `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Wraps existing samples. Panics if `data.len() != width * height`.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "raster data length mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Geometric center in pixel-index coordinates, `((w-1)/2, (h-1)/2)`.
    #[inline]
    pub fn center(&self) -> (f64, f64) {
        (
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
        )
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// True when every sample equals the first within `tol`.
    pub fn is_constant(&self, tol: f64) -> bool {
        let (lo, hi) = self.min_max();
        hi - lo <= tol
    }

    /// Bilinear sample at fractional pixel-index coordinates.
    ///
    /// Returns `None` outside `[0, w-1] x [0, h-1]`.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        bilinear(&self.data, self.width, self.height, x, y)
    }

    /// Bilinear sample that treats the raster as periodic in both axes.
    pub fn sample_bilinear_wrapped(&self, x: f64, y: f64) -> f64 {
        let w = self.width as isize;
        let h = self.height as isize;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let xi = (x0 as isize).rem_euclid(w) as usize;
        let yi = (y0 as isize).rem_euclid(h) as usize;
        let xj = (xi + 1) % self.width;
        let yj = (yi + 1) % self.height;
        let top = self.get(xi, yi) * (1.0 - fx) + self.get(xj, yi) * fx;
        let bottom = self.get(xi, yj) * (1.0 - fx) + self.get(xj, yj) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Samples closer than this to the last row/column are snapped onto it.
const EDGE_EPS: f64 = 1e-9;

/// Bilinear interpolation over a row-major buffer.
///
/// Coordinates are pixel indices; the valid domain is `[0, w-1] x [0, h-1]`
/// (a small epsilon outside is tolerated and clamped).
#[inline]
pub fn bilinear(data: &[f64], width: usize, height: usize, x: f64, y: f64) -> Option<f64> {
    let max_x = (width - 1) as f64;
    let max_y = (height - 1) as f64;
    if !(x >= -EDGE_EPS && y >= -EDGE_EPS && x <= max_x + EDGE_EPS && y <= max_y + EDGE_EPS) {
        return None;
    }
    let x = x.clamp(0.0, max_x);
    let y = y.clamp(0.0, max_y);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let row0 = y0 * width;
    let row1 = y1 * width;
    // Exact grid hits skip the blend so integer-aligned warps are bit-exact.
    if fx == 0.0 && fy == 0.0 {
        return Some(data[row0 + x0]);
    }
    let top = data[row0 + x0] * (1.0 - fx) + data[row0 + x1] * fx;
    let bottom = data[row1 + x0] * (1.0 - fx) + data[row1 + x1] * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}
