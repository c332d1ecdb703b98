use std::f64::consts::PI;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // rem_euclid can return exactly 2*pi for tiny negative inputs
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Planar similarity `p_a = scale * R(rotation) * p_b + (tx, ty)`.
///
/// Points are pixel coordinates relative to the image center with the y axis
/// pointing down; `R` is the usual `[[c, -s], [s, c]]` matrix in that frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl SimilarityTransform {
    pub const fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: 0.0,
            tx: 0.0,
            ty: 0.0,
        }
    }

    /// Builds a transform, wrapping the rotation into `(-pi, pi]`.
    pub fn new(scale: f64, rotation: f64, tx: f64, ty: f64) -> Self {
        Self {
            scale,
            rotation: wrap_angle(rotation),
            tx,
            ty,
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self::new(1.0, 0.0, tx, ty)
    }

    pub fn rotation_scale(rotation: f64, scale: f64) -> Self {
        Self::new(scale, rotation, 0.0, 0.0)
    }

    /// `scale * R(rotation) * v`, without the translation.
    #[inline]
    pub fn linear(&self, v: (f64, f64)) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        (
            self.scale * (c * v.0 - s * v.1),
            self.scale * (s * v.0 + c * v.1),
        )
    }

    #[inline]
    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        let (x, y) = self.linear(p);
        (x + self.tx, y + self.ty)
    }

    /// `self ∘ rel`: maps through `rel` first, then through `self`.
    pub fn then_inner(&self, rel: &SimilarityTransform) -> SimilarityTransform {
        let (x, y) = self.linear((rel.tx, rel.ty));
        SimilarityTransform::new(
            self.scale * rel.scale,
            self.rotation + rel.rotation,
            x + self.tx,
            y + self.ty,
        )
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let inv = SimilarityTransform::new(1.0 / self.scale, -self.rotation, 0.0, 0.0);
        let (x, y) = inv.linear((self.tx, self.ty));
        SimilarityTransform { tx: -x, ty: -y, ..inv }
    }

    pub fn is_finite(&self) -> bool {
        self.scale.is_finite()
            && self.rotation.is_finite()
            && self.tx.is_finite()
            && self.ty.is_finite()
    }
}
