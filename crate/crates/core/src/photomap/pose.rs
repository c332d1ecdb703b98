use super::PhotomapError;
use crate::registration::SimilarityTransform;

/// Transform from a frame's centered pixel coordinates into map coordinates.
///
/// The map frame is the pixel frame of the first accepted frame, so that
/// frame's pose is exactly the identity.
pub type MapPose = SimilarityTransform;

/// Composed poses must keep their scale inside `[1/MAX_POSE_SCALE, MAX_POSE_SCALE]`.
pub const MAX_POSE_SCALE: f64 = 64.0;

/// Chains a relative transform onto a parent pose.
///
/// The result maps new-frame coordinates through `rel` into the parent
/// frame, then through `parent` into the map.
pub fn compose(parent: &MapPose, rel: &SimilarityTransform) -> Result<MapPose, PhotomapError> {
    let out = parent.then_inner(rel);
    if !(out.scale >= 1.0 / MAX_POSE_SCALE && out.scale <= MAX_POSE_SCALE) {
        return Err(PhotomapError::ScaleOutOfRange(out.scale));
    }
    Ok(out)
}

pub fn invert(t: &SimilarityTransform) -> SimilarityTransform {
    t.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &SimilarityTransform, b: &SimilarityTransform, tol: f64) -> bool {
        (a.scale - b.scale).abs() <= tol
            && crate::registration::wrap_angle(a.rotation - b.rotation).abs() <= tol
            && (a.tx - b.tx).abs() <= tol
            && (a.ty - b.ty).abs() <= tol
    }

    #[test]
    fn identity_is_a_unit() {
        let t = SimilarityTransform::new(1.3, -0.7, 4.0, 9.5);
        let id = SimilarityTransform::identity();
        assert_eq!(compose(&id, &t).unwrap(), t);
        assert_eq!(compose(&t, &id).unwrap(), t);
    }

    #[test]
    fn quarter_turn_parent() {
        let parent = SimilarityTransform::new(2.0, FRAC_PI_2, 10.0, 0.0);
        let rel = SimilarityTransform::translation(5.0, 0.0);
        let out = compose(&parent, &rel).unwrap();
        let expected = SimilarityTransform::new(2.0, FRAC_PI_2, 10.0, 10.0);
        assert!(close(&out, &expected, 1e-12), "{out:?}");
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&SimilarityTransform::identity()), SimilarityTransform::identity());
        let inv = invert(&SimilarityTransform::new(2.0, 0.0, 4.0, 0.0));
        assert_eq!(inv, SimilarityTransform::new(0.5, 0.0, -2.0, 0.0));
    }

    #[test]
    fn scale_range_is_enforced() {
        let big = SimilarityTransform::new(8.0, 0.0, 0.0, 0.0);
        let p = compose(&big, &big).unwrap();
        assert_eq!(p.scale, 64.0);
        assert!(matches!(compose(&p, &big), Err(PhotomapError::ScaleOutOfRange(_))));
        let small = big.inverse();
        assert!(compose(&compose(&small, &small).unwrap(), &small).is_err());
    }
}
