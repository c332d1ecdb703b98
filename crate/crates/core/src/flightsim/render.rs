use super::blimp::BlimpState;
use crate::raster::Raster;
use crate::registration::SimilarityTransform;

/// Nadir pinhole camera with a square sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    /// Full field of view in radians.
    pub fov: f64,
    /// Sensor side in pixels.
    pub image_size: usize,
}

impl CameraModel {
    #[allow(clippy::approx_constant)]
    pub const DEFAULT_FOV: f64 = 1.0472;

    pub fn new(fov: f64, image_size: usize) -> Self {
        Self { fov, image_size }
    }

    /// Ground meters covered by one pixel at altitude `z`.
    pub fn meters_per_pixel(&self, z: f64) -> f64 {
        2.0 * z * (self.fov / 2.0).tan() / self.image_size as f64
    }
}

/// Flat textured ground plane.
///
/// The texture is centered on the world origin; texel columns run along
/// world +x and rows along world +y.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundWorld {
    pub texture: Raster,
    pub meters_per_texel: f64,
    /// Value seen off the texture.
    pub background: f64,
}

impl GroundWorld {
    pub fn new(texture: Raster, meters_per_texel: f64, background: f64) -> Self {
        Self {
            texture,
            meters_per_texel,
            background,
        }
    }

    /// Texture coordinates of a world point.
    #[inline]
    pub fn texel(&self, wx: f64, wy: f64) -> (f64, f64) {
        let (cx, cy) = self.texture.center();
        (wx / self.meters_per_texel + cx, wy / self.meters_per_texel + cy)
    }

    pub fn sample(&self, wx: f64, wy: f64) -> f64 {
        let (u, v) = self.texel(wx, wy);
        self.texture.sample_bilinear(u, v).unwrap_or(self.background)
    }
}

/// Renders the downward view: pixel `p` (centered, y down) sees world point
/// `(x, y) + m(z) R(yaw) p`.
pub fn render_view(world: &GroundWorld, state: &BlimpState, cam: &CameraModel) -> Raster {
    let n = cam.image_size;
    let c = (n as f64 - 1.0) / 2.0;
    let m = cam.meters_per_pixel(state.z);
    let (s, co) = state.yaw.sin_cos();
    Raster::from_fn(n, n, |px, py| {
        let u = px as f64 - c;
        let v = py as f64 - c;
        let wx = state.x + m * (co * u - s * v);
        let wy = state.y + m * (s * u + co * v);
        world.sample(wx, wy)
    })
}

/// Transform taking view-`b` centered pixels to view-`a` centered pixels.
pub fn ground_truth_transform(a: &BlimpState, b: &BlimpState, cam: &CameraModel) -> SimilarityTransform {
    let m_a = cam.meters_per_pixel(a.z);
    let (s, c) = a.yaw.sin_cos();
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    // R(-yaw_a) * d / m_a
    SimilarityTransform::new(
        b.z / a.z,
        b.yaw - a.yaw,
        (c * dx + s * dy) / m_a,
        (-s * dx + c * dy) / m_a,
    )
}
