//! Sparse, unbounded tile canvas.
//!
//! Map pixel `(X, Y)` covers the unit square `[X, X+1) x [Y, Y+1)` of the map
//! frame, so its center is at `(X + 0.5, Y + 0.5)`. With this convention an
//! even-sized frame at the identity pose lands exactly on the pixel grid.

use std::collections::BTreeMap;

use super::pose::MapPose;
use super::PhotomapError;
use crate::preprocess::Frame;

pub const DEFAULT_TILE_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlendPolicy {
    /// New samples replace old ones with full weight.
    Overwrite,
    /// Weighted average; weight grows with distance from the frame edge.
    #[default]
    Feather,
}

impl std::str::FromStr for BlendPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "overwrite" => Ok(Self::Overwrite),
            "feather" => Ok(Self::Feather),
            other => Err(format!("unknown blend policy '{other}'")),
        }
    }
}

impl std::fmt::Display for BlendPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Overwrite => "overwrite",
            Self::Feather => "feather",
        })
    }
}

/// Inclusive pixel bounds of the area changed by one composite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirtyRegion {
    pub min_x: i64,
    pub min_y: i64,
    pub max_x: i64,
    pub max_y: i64,
}

impl DirtyRegion {
    pub fn width(&self) -> i64 {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> i64 {
        self.max_y - self.min_y + 1
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    fn union(self, o: DirtyRegion) -> DirtyRegion {
        DirtyRegion {
            min_x: self.min_x.min(o.min_x),
            min_y: self.min_y.min(o.min_y),
            max_x: self.max_x.max(o.max_x),
            max_y: self.max_y.max(o.max_y),
        }
    }
}

/// One tile: sample value and blend weight per pixel. Weight 0 = unwritten.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub value: Vec<f32>,
    pub weight: Vec<f32>,
}

impl Tile {
    fn empty(tile_size: usize) -> Self {
        Self {
            value: vec![0.0; tile_size * tile_size],
            weight: vec![0.0; tile_size * tile_size],
        }
    }
}

/// Tight raster of everything written so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExport {
    /// Map-frame coordinates of the raster's top-left corner.
    pub origin_x: i64,
    pub origin_y: i64,
    pub width: usize,
    pub height: usize,
    /// Row-major values; unwritten pixels are 0.
    pub values: Vec<f32>,
    pub written: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct MapCanvas {
    tile_size: usize,
    blend: BlendPolicy,
    tiles: BTreeMap<(i64, i64), Tile>,
    bounds: Option<DirtyRegion>,
    frame_count: usize,
    last_touched: usize,
}

impl MapCanvas {
    pub fn new(tile_size: usize, blend: BlendPolicy) -> Result<Self, PhotomapError> {
        if !tile_size.is_power_of_two() || tile_size < 8 {
            return Err(PhotomapError::InvalidTileSize(tile_size));
        }
        Ok(Self {
            tile_size,
            blend,
            tiles: BTreeMap::new(),
            bounds: None,
            frame_count: 0,
            last_touched: 0,
        })
    }

    pub fn tile_size(&self) -> usize {
        self.tile_size
    }

    pub fn blend_policy(&self) -> BlendPolicy {
        self.blend
    }

    pub fn tile_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn tiles(&self) -> impl Iterator<Item = (&(i64, i64), &Tile)> {
        self.tiles.iter()
    }

    /// Number of frames composited so far.
    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    /// Tiles that received at least one write during the latest composite.
    pub fn last_touched_tiles(&self) -> usize {
        self.last_touched
    }

    /// Bounding box of all written pixels.
    pub fn bounds(&self) -> Option<DirtyRegion> {
        self.bounds
    }

    fn tile_coord(&self, v: i64) -> i64 {
        v.div_euclid(self.tile_size as i64)
    }

    /// `(value, weight)` at a map pixel, `None` when never written.
    pub fn pixel(&self, x: i64, y: i64) -> Option<(f32, f32)> {
        let t = self.tile_size as i64;
        let tile = self.tiles.get(&(self.tile_coord(x), self.tile_coord(y)))?;
        let i = (y.rem_euclid(t) * t + x.rem_euclid(t)) as usize;
        (tile.weight[i] > 0.0).then(|| (tile.value[i], tile.weight[i]))
    }

    /// Map-space footprint of a frame: bounding box of its warped corners,
    /// grown by one pixel on every side.
    pub fn footprint(size: usize, pose: &MapPose) -> DirtyRegion {
        let h = size as f64 / 2.0;
        let corners = [(-h, -h), (h, -h), (h, h), (-h, h)].map(|p| pose.apply(p));
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in corners {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        // pixel X covers [X, X+1): continuous max m falls in pixel ceil(m) - 1
        DirtyRegion {
            min_x: x0.floor() as i64 - 1,
            min_y: y0.floor() as i64 - 1,
            max_x: x1.ceil() as i64,
            max_y: y1.ceil() as i64,
        }
    }

    /// Blends `frame` into the canvas at `pose` and returns the changed area.
    pub fn composite(&mut self, frame: &Frame, pose: &MapPose) -> DirtyRegion {
        let region = Self::footprint(frame.size(), pose);
        let n = frame.size();
        let c = (n as f64 - 1.0) / 2.0;
        let half = n as f64 / 2.0;
        let inv = pose.inverse();
        let t = self.tile_size as i64;
        let raster = frame.raster();

        let mut touched = 0;
        let mut written_bounds: Option<DirtyRegion> = None;
        for ty in self.tile_coord(region.min_y)..=self.tile_coord(region.max_y) {
            for tx in self.tile_coord(region.min_x)..=self.tile_coord(region.max_x) {
                let x_lo = region.min_x.max(tx * t);
                let x_hi = region.max_x.min(tx * t + t - 1);
                let y_lo = region.min_y.max(ty * t);
                let y_hi = region.max_y.min(ty * t + t - 1);
                let existing = self.tiles.remove(&(tx, ty));
                let was_present = existing.is_some();
                let mut tile = existing.unwrap_or_else(|| Tile::empty(self.tile_size));
                let mut wrote = false;
                for y in y_lo..=y_hi {
                    for x in x_lo..=x_hi {
                        let (u, v) = inv.apply((x as f64 + 0.5, y as f64 + 0.5));
                        let (fx, fy) = (u + c, v + c);
                        let Some(sample) = raster.sample_bilinear(fx, fy) else {
                            continue;
                        };
                        let i = ((y - ty * t) * t + (x - tx * t)) as usize;
                        let (old_v, old_w) = (tile.value[i], tile.weight[i]);
                        let (val, wt) = match self.blend {
                            BlendPolicy::Overwrite => (sample as f32, 1.0f32),
                            BlendPolicy::Feather => {
                                let edge = (fx + 0.5).min(n as f64 - 0.5 - fx).min(fy + 0.5).min(n as f64 - 0.5 - fy);
                                let w = (edge / half).clamp(0.0, 1.0) as f32;
                                let total = old_w + w;
                                if total <= 0.0 {
                                    continue;
                                }
                                ((old_v * old_w + sample as f32 * w) / total, total.min(1.0))
                            }
                        };
                        tile.value[i] = val;
                        tile.weight[i] = wt;
                        wrote = true;
                        let px = DirtyRegion {
                            min_x: x,
                            min_y: y,
                            max_x: x,
                            max_y: y,
                        };
                        written_bounds = Some(written_bounds.map_or(px, |b| b.union(px)));
                    }
                }
                if wrote {
                    touched += 1;
                }
                if wrote || was_present {
                    self.tiles.insert((tx, ty), tile);
                }
            }
        }
        if let Some(wb) = written_bounds {
            self.bounds = Some(self.bounds.map_or(wb, |b| b.union(wb)));
        }
        self.last_touched = touched;
        self.frame_count += 1;
        region
    }

    /// Tight raster covering every written pixel.
    pub fn export(&self) -> Result<MapExport, PhotomapError> {
        let b = self.bounds.ok_or(PhotomapError::EmptyCanvas)?;
        let (w, h) = (b.width() as usize, b.height() as usize);
        let mut values = vec![0.0f32; w * h];
        let mut written = vec![false; w * h];
        let t = self.tile_size as i64;
        for (&(tx, ty), tile) in &self.tiles {
            for ly in 0..t {
                let y = ty * t + ly;
                if y < b.min_y || y > b.max_y {
                    continue;
                }
                for lx in 0..t {
                    let x = tx * t + lx;
                    let i = (ly * t + lx) as usize;
                    if tile.weight[i] > 0.0 {
                        let o = ((y - b.min_y) as usize) * w + (x - b.min_x) as usize;
                        values[o] = tile.value[i];
                        written[o] = true;
                    }
                }
            }
        }
        Ok(MapExport {
            origin_x: b.min_x,
            origin_y: b.min_y,
            width: w,
            height: h,
            values,
            written,
        })
    }
}
