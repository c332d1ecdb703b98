//! Growing photomap assembly.
//!
//! Each new frame is registered against the last accepted frame, its relative
//! transform is chained onto that frame's pose, and it is blended into a
//! sparse tile canvas. Frames below the confidence floor are logged but
//! neither composited nor used as the next anchor.

pub mod canvas;
pub mod pose;

use thiserror::Error;

pub use canvas::{BlendPolicy, DirtyRegion, MapCanvas, MapExport, Tile, DEFAULT_TILE_SIZE};
pub use pose::{compose, invert, MapPose, MAX_POSE_SCALE};

use crate::preprocess::Frame;
use crate::registration::{FmiConfig, Registrar, RegistrationError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhotomapError {
    #[error("composed scale {0} outside [1/64, 64]")]
    ScaleOutOfRange(f64),
    #[error("canvas has no written pixels")]
    EmptyCanvas,
    #[error("empty frame sequence")]
    EmptySequence,
    #[error("tile size {0} must be a power of two >= 8")]
    InvalidTileSize(usize),
    #[error(transparent)]
    Registration(#[from] RegistrationError),
}

/// Outcome for one input frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub frame_index: usize,
    /// Estimated pose; for rejected frames, the pose of the anchor it failed
    /// to register against.
    pub pose: MapPose,
    pub confidence: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanvasConfig {
    pub tile_size: usize,
    pub blend: BlendPolicy,
}

impl Default for CanvasConfig {
    fn default() -> Self {
        Self {
            tile_size: DEFAULT_TILE_SIZE,
            blend: BlendPolicy::Feather,
        }
    }
}

/// Incremental map builder; feed frames in capture order.
#[derive(Debug)]
pub struct MapBuilder {
    canvas: MapCanvas,
    registrar: Option<Registrar>,
    fmi: FmiConfig,
    anchor: Option<(Frame, MapPose)>,
    records: Vec<TrajectoryRecord>,
    last_dirty: Option<DirtyRegion>,
}

impl MapBuilder {
    pub fn new(fmi: FmiConfig, canvas: CanvasConfig) -> Result<Self, PhotomapError> {
        Ok(Self {
            canvas: MapCanvas::new(canvas.tile_size, canvas.blend)?,
            registrar: None,
            fmi,
            anchor: None,
            records: Vec::new(),
            last_dirty: None,
        })
    }

    pub fn canvas(&self) -> &MapCanvas {
        &self.canvas
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    /// Area repainted by the most recent accepted frame.
    pub fn last_dirty(&self) -> Option<DirtyRegion> {
        self.last_dirty
    }

    /// Processes the next frame.
    ///
    /// Per-frame registration failures become rejections. Only invalid
    /// configuration is returned as an error.
    pub fn push(&mut self, frame: Frame) -> Result<TrajectoryRecord, PhotomapError> {
        let frame_index = self.records.len();
        let record = match self.anchor.take() {
            None => {
                let pose = MapPose::identity();
                self.last_dirty = Some(self.canvas.composite(&frame, &pose));
                self.anchor = Some((frame, pose));
                TrajectoryRecord {
                    frame_index,
                    pose,
                    confidence: 1.0,
                    accepted: true,
                }
            }
            Some((anchor, anchor_pose)) => {
                if self.registrar.is_none() {
                    self.registrar = Some(Registrar::new(anchor.size(), self.fmi)?);
                }
                let registrar = self.registrar.as_ref().expect("initialized above");
                let estimate = registrar
                    .register(&anchor, &frame)
                    .ok()
                    .and_then(|r| compose(&anchor_pose, &r.transform).ok().map(|p| (p, r.confidence)));
                match estimate {
                    Some((pose, confidence)) if confidence >= self.fmi.confidence_floor => {
                        self.last_dirty = Some(self.canvas.composite(&frame, &pose));
                        self.anchor = Some((frame, pose));
                        TrajectoryRecord {
                            frame_index,
                            pose,
                            confidence,
                            accepted: true,
                        }
                    }
                    other => {
                        self.anchor = Some((anchor, anchor_pose));
                        TrajectoryRecord {
                            frame_index,
                            pose: anchor_pose,
                            confidence: other.map_or(0.0, |(_, c)| c),
                            accepted: false,
                        }
                    }
                }
            }
        };
        self.records.push(record);
        Ok(record)
    }

    pub fn finish(self) -> (MapCanvas, Vec<TrajectoryRecord>) {
        (self.canvas, self.records)
    }
}

/// Builds a map from an ordered frame sequence.
pub fn build_map<I>(
    frames: I,
    fmi: &FmiConfig,
    canvas: CanvasConfig,
) -> Result<(MapCanvas, Vec<TrajectoryRecord>), PhotomapError>
where
    I: IntoIterator<Item = Frame>,
{
    let mut builder = MapBuilder::new(*fmi, canvas)?;
    for f in frames {
        builder.push(f)?;
    }
    if builder.records.is_empty() {
        return Err(PhotomapError::EmptySequence);
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;
    use crate::texture::value_noise;

    fn textured(seed: u64) -> Frame {
        Frame::new(value_noise(128, 128, seed), 0).unwrap()
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let r = build_map(Vec::new(), &FmiConfig::for_size(128), CanvasConfig::default());
        assert!(matches!(r, Err(PhotomapError::EmptySequence)));
    }

    #[test]
    fn single_frame_map() {
        let f = textured(1);
        let (canvas, recs) = build_map(vec![f], &FmiConfig::for_size(128), CanvasConfig::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].pose, MapPose::identity());
        assert!(recs[0].accepted);
        let e = canvas.export().unwrap();
        assert_eq!((e.width, e.height), (128, 128));
    }

    #[test]
    fn identical_frames_both_accepted() {
        let f = textured(2);
        let (_, recs) = build_map(vec![f.clone(), f], &FmiConfig::for_size(128), CanvasConfig::default()).unwrap();
        assert!(recs.iter().all(|r| r.accepted));
        let p = recs[1].pose;
        assert!((p.scale - 1.0).abs() < 0.01 && p.rotation.abs() < 0.01);
        assert!(p.tx.abs() <= 0.5 && p.ty.abs() <= 0.5);
    }

    #[test]
    fn constant_frame_is_rejected_and_anchor_kept() {
        let a = textured(3);
        let flat = Frame::new(Raster::filled(128, 128, 1.0), 1).unwrap();
        let (canvas, recs) =
            build_map(vec![a.clone(), flat, a], &FmiConfig::for_size(128), CanvasConfig::default()).unwrap();
        assert_eq!(recs.iter().map(|r| r.accepted).collect::<Vec<_>>(), [true, false, true]);
        assert_eq!(recs[1].confidence, 0.0);
        assert_eq!(canvas.frame_count(), 2);
        assert_eq!(recs.iter().map(|r| r.frame_index).collect::<Vec<_>>(), [0, 1, 2]);
    }
}
