//! `key=value` run configuration. Unknown keys are errors.

use std::str::FromStr;

use thiserror::Error;

use crate::flightsim::{BlimpModel, BlimpState, CameraModel};
use crate::photomap::{BlendPolicy, CanvasConfig, DEFAULT_TILE_SIZE};
use crate::preprocess::{CalibrationParams, Preprocessor, DEFAULT_FRAME_SIZE};
use crate::registration::FmiConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for '{key}'")]
    InvalidValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frame_size: usize,
    /// `None` follows `frame_size`.
    pub n_theta: Option<usize>,
    pub n_rho: Option<usize>,
    pub rho_min: f64,
    pub confidence_floor: f64,
    pub max_scale: f64,
    pub tile_size: usize,
    pub blend: BlendPolicy,
    pub calibration: CalibrationParams,
    pub capture_interval: f64,
    pub noise_sigma: f64,
    pub duration: f64,
    pub fov: f64,
    pub meters_per_texel: f64,
    pub background: f64,
    pub tau: f64,
    pub start_x: f64,
    pub start_y: f64,
    pub start_z: f64,
    pub start_yaw: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frame_size: DEFAULT_FRAME_SIZE,
            n_theta: None,
            n_rho: None,
            rho_min: 2.0,
            confidence_floor: FmiConfig::DEFAULT_CONFIDENCE_FLOOR,
            max_scale: 4.0,
            tile_size: DEFAULT_TILE_SIZE,
            blend: BlendPolicy::Feather,
            calibration: CalibrationParams::default(),
            capture_interval: 1.0,
            noise_sigma: 0.0,
            duration: 20.0,
            fov: CameraModel::DEFAULT_FOV,
            meters_per_texel: 0.1,
            background: 0.5,
            tau: 2.0,
            start_x: 0.0,
            start_y: 0.0,
            start_z: 20.0,
            start_yaw: 0.0,
        }
    }
}

pub const KEYS: &[&str] = &[
    "frame_size",
    "n_theta",
    "n_rho",
    "rho_min",
    "confidence_floor",
    "max_scale",
    "tile_size",
    "blend",
    "calibration",
    "k1",
    "k2",
    "center_x",
    "center_y",
    "capture_interval",
    "noise_sigma",
    "duration",
    "fov",
    "meters_per_texel",
    "background",
    "tau",
    "start_x",
    "start_y",
    "start_z",
    "start_yaw",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value)?;
    if !v.is_finite() {
        return Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(v)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "on" | "yes" => Ok(true),
        "false" | "0" | "off" | "no" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        }),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "frame_size" => self.frame_size = parse(key, value)?,
            "n_theta" => self.n_theta = Some(parse(key, value)?),
            "n_rho" => self.n_rho = Some(parse(key, value)?),
            "rho_min" => self.rho_min = parse_f64(key, value)?,
            "confidence_floor" => self.confidence_floor = parse_f64(key, value)?,
            "max_scale" => self.max_scale = parse_f64(key, value)?,
            "tile_size" => self.tile_size = parse(key, value)?,
            "blend" => {
                self.blend = value.parse().map_err(|_| ConfigError::InvalidValue {
                    key: key.to_string(),
                    value: value.to_string(),
                })?
            }
            "calibration" => self.calibration.enabled = parse_bool(key, value)?,
            "k1" => self.calibration.k1 = parse_f64(key, value)?,
            "k2" => self.calibration.k2 = parse_f64(key, value)?,
            "center_x" => self.calibration.center.0 = parse_f64(key, value)?,
            "center_y" => self.calibration.center.1 = parse_f64(key, value)?,
            "capture_interval" => self.capture_interval = parse_f64(key, value)?,
            "noise_sigma" => self.noise_sigma = parse_f64(key, value)?,
            "duration" => self.duration = parse_f64(key, value)?,
            "fov" => self.fov = parse_f64(key, value)?,
            "meters_per_texel" => self.meters_per_texel = parse_f64(key, value)?,
            "background" => self.background = parse_f64(key, value)?,
            "tau" => self.tau = parse_f64(key, value)?,
            "start_x" => self.start_x = parse_f64(key, value)?,
            "start_y" => self.start_y = parse_f64(key, value)?,
            "start_z" => self.start_z = parse_f64(key, value)?,
            "start_yaw" => self.start_yaw = parse_f64(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("expected key=value, got '{assignment}'")))?;
        self.set(k, v)
    }

    /// Applies every assignment in a config file body.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn fmi(&self) -> FmiConfig {
        FmiConfig {
            n_theta: self.n_theta.unwrap_or(self.frame_size),
            n_rho: self.n_rho.unwrap_or(self.frame_size),
            rho_min: self.rho_min,
            confidence_floor: self.confidence_floor,
            max_scale: self.max_scale,
        }
    }

    pub fn canvas(&self) -> CanvasConfig {
        CanvasConfig {
            tile_size: self.tile_size,
            blend: self.blend,
        }
    }

    pub fn preprocessor(&self) -> Preprocessor {
        Preprocessor {
            frame_size: self.frame_size,
            calibration: self.calibration,
        }
    }

    pub fn camera(&self) -> CameraModel {
        CameraModel::new(self.fov, self.frame_size)
    }

    pub fn blimp_model(&self) -> BlimpModel {
        BlimpModel {
            tau: self.tau,
            ..BlimpModel::default()
        }
    }

    pub fn initial_state(&self) -> BlimpState {
        BlimpState::at_rest(self.start_x, self.start_y, self.start_z, self.start_yaw)
    }

    /// Checks cross-field invariants after all assignments are applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Err(e) = Preprocessor::new(self.frame_size, self.calibration) {
            return bad(format!("frame_size: {e}"));
        }
        if let Err(e) = self.fmi().validate(self.frame_size) {
            return bad(e.to_string());
        }
        if !self.tile_size.is_power_of_two() || self.tile_size < 8 {
            return bad(format!("tile_size {} must be a power of two >= 8", self.tile_size));
        }
        let (cx, cy) = self.calibration.center;
        if !((0.0..=1.0).contains(&cx) && (0.0..=1.0).contains(&cy)) {
            return bad("calibration center must lie in [0,1]^2".into());
        }
        if !(self.capture_interval > 0.0) {
            return bad("capture_interval must be positive".into());
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative".into());
        }
        if !(self.duration >= 0.0) {
            return bad("duration must be non-negative".into());
        }
        if !(self.fov > 0.0 && self.fov < std::f64::consts::PI) {
            return bad("fov must lie in (0, pi)".into());
        }
        if !(self.meters_per_texel > 0.0) {
            return bad("meters_per_texel must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.background) {
            return bad("background must lie in [0, 1]".into());
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive".into());
        }
        if !(self.start_z > 0.0) {
            return bad("start_z must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_follow_frame_size() {
        let mut c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.fmi(), FmiConfig::for_size(256));
        c.set("frame_size", "128").unwrap();
        assert_eq!(c.fmi().n_theta, 128);
        c.set("n_theta", "200").unwrap();
        assert_eq!(c.fmi().n_theta, 200);
    }

    #[test]
    fn file_body_with_comments() {
        let mut c = RunConfig::default();
        c.apply_text("# test\nblend = overwrite\n\ncalibration=true # on\nk1=0.05\n").unwrap();
        assert_eq!(c.blend, BlendPolicy::Overwrite);
        assert!(c.calibration.enabled);
        assert_eq!(c.calibration.k1, 0.05);
    }

    #[test]
    fn every_listed_key_is_settable() {
        for key in KEYS {
            let mut c = RunConfig::default();
            let value = match *key {
                "blend" => "feather",
                "calibration" => "false",
                "frame_size" | "tile_size" | "n_theta" | "n_rho" => "256",
                _ => "0.5",
            };
            c.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn errors() {
        let mut c = RunConfig::default();
        assert_eq!(c.set("frame_sise", "256"), Err(ConfigError::UnknownKey("frame_sise".into())));
        assert!(matches!(c.set("rho_min", "two"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(c.set("rho_min", "inf"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(c.set("blend", "max"), Err(ConfigError::InvalidValue { .. })));
        assert_eq!(c.apply_text("a b"), Err(ConfigError::Syntax { line: 1 }));
        c.set("frame_size", "100").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.set("tile_size", "100").unwrap();
        assert!(c.validate().is_err());
    }
}
