//! Blimp flight simulator producing camera sequences with exact ground truth.
//!
//! The vehicle follows a kinematic model whose three actuators (thrust bar
//! angle, thrust speed, tail yaw rate) approach their commands through a
//! first-order lag, which makes trajectories smooth. Views are rendered from a
//! nadir camera over a flat textured plane, so consecutive frames differ by an
//! exact similarity transform.
//!
//! Units: the thrust bar angle is an angle in radians and the tail command is
//! a yaw rate in rad/s.

pub mod blimp;
pub mod render;
pub mod script;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

pub use blimp::{BlimpModel, BlimpState};
pub use render::{ground_truth_transform, render_view, CameraModel, GroundWorld};
pub use script::{CommandScript, MotorCommand, ScriptError};

use crate::raster::Raster;
use crate::registration::SimilarityTransform;

/// Integration step used by [`Simulation`].
pub const SIM_DT: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlightError {
    #[error("time step {0} outside (0, 0.5]")]
    InvalidDt(f64),
    #[error("invalid simulation setup: {0}")]
    InvalidSetup(String),
}

/// One captured view.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub index: usize,
    pub time: f64,
    pub state: BlimpState,
    pub image: Raster,
}

/// Additive Gaussian pixel noise with an explicit seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelNoise {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: BlimpModel,
    pub camera: CameraModel,
    pub initial: BlimpState,
    /// Seconds between captures; the first capture is at t = 0.
    pub capture_interval: f64,
    /// Last capture time is the largest multiple of the interval <= duration.
    pub duration: f64,
    pub noise: Option<PixelNoise>,
}

impl Simulation {
    pub fn capture_count(&self) -> usize {
        (self.duration / self.capture_interval + 1e-9).floor() as usize + 1
    }

    fn validate(&self) -> Result<(), FlightError> {
        let bad = |m: &str| Err(FlightError::InvalidSetup(m.to_string()));
        if !(self.capture_interval >= SIM_DT && self.capture_interval.is_finite()) {
            return bad("capture_interval must be at least the integration step");
        }
        let ratio = self.capture_interval / SIM_DT;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return bad("capture_interval must be a multiple of 0.02 s");
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad("duration must be non-negative");
        }
        if !(self.initial.z > 0.0) {
            return bad("initial altitude must be positive");
        }
        if !(self.camera.fov > 0.0 && self.camera.fov < std::f64::consts::PI) {
            return bad("fov must lie in (0, pi)");
        }
        if let Some(n) = self.noise {
            if !(n.sigma >= 0.0 && n.sigma.is_finite()) {
                return bad("noise sigma must be non-negative");
            }
        }
        Ok(())
    }

    /// Flies the script and renders every capture.
    pub fn run(&self, world: &GroundWorld, script: &CommandScript) -> Result<Vec<Capture>, FlightError> {
        self.validate()?;
        let steps_per_capture = (self.capture_interval / SIM_DT).round() as usize;
        let count = self.capture_count();
        let mut rng = self.noise.map(|n| (ChaCha8Rng::seed_from_u64(n.seed), n.sigma));

        let mut state = self.initial;
        let mut next_cmd = 0;
        let mut captures = Vec::with_capacity(count);
        let mut step = 0usize;
        for index in 0..count {
            let target = index * steps_per_capture;
            while step < target {
                state = self.latch(script, &mut next_cmd, step, state);
                state = self.model.step(&state, SIM_DT)?;
                step += 1;
            }
            state = self.latch(script, &mut next_cmd, step, state);
            let mut image = render_view(world, &state, &self.camera);
            if let Some((rng, sigma)) = rng.as_mut() {
                add_noise(&mut image, *sigma, rng);
            }
            captures.push(Capture {
                index,
                time: step as f64 * SIM_DT,
                state,
                image,
            });
        }
        Ok(captures)
    }

    fn latch(&self, script: &CommandScript, next: &mut usize, step: usize, mut s: BlimpState) -> BlimpState {
        let t = step as f64 * SIM_DT;
        while let Some(c) = script.commands.get(*next) {
            if c.t > t + 1e-9 {
                break;
            }
            s = s.set_motor_speeds(c.xz_angle, c.thrust, c.tail);
            *next += 1;
        }
        s
    }

    /// Pose of every capture in the first capture's pixel frame.
    pub fn ground_truth(&self, captures: &[Capture]) -> Vec<SimilarityTransform> {
        let Some(first) = captures.first() else {
            return Vec::new();
        };
        captures
            .iter()
            .map(|c| ground_truth_transform(&first.state, &c.state, &self.camera))
            .collect()
    }
}

fn add_noise(image: &mut Raster, sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for v in image.data_mut() {
        *v = (*v + normal.sample(rng)).clamp(0.0, 1.0);
    }
}
