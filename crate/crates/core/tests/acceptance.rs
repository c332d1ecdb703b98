//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photomap::cli::{self, parse_log};
use photomap::flightsim::{render_view, BlimpModel, BlimpState, CameraModel, GroundWorld, SIM_DT};
use photomap::imageio::write_gray16;
use photomap::photomap::{BlendPolicy, MapBuilder, MapCanvas, CanvasConfig, MapPose};
use photomap::preprocess::Frame;
use photomap::raster::Raster;
use photomap::registration::{
    apply_similarity, phase_correlate, wrap_angle, FmiConfig, Registrar, RegistrationError, SimilarityTransform,
};
use photomap::texture::value_noise;

struct Outcome {
    pass: bool,
    detail: String,
}

fn textured(size: usize, seed: u64) -> Frame {
    Frame::new(value_noise(size, size, seed), 0).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let reg = Registrar::new(256, FmiConfig::for_size(256)).unwrap();
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut pass = true;
    for seed in 0..10 {
        let f = textured(256, 100 + seed);
        let r = reg.register(&f, &f).unwrap();
        let t = r.transform;
        worst.0 = worst.0.max((t.scale - 1.0).abs());
        worst.1 = worst.1.max(t.rotation.abs());
        worst.2 = worst.2.max(t.tx.abs().max(t.ty.abs()));
        worst.3 = worst.3.min(r.confidence);
        pass &= (0.99..=1.01).contains(&t.scale)
            && t.rotation.abs() <= 0.01
            && t.tx.abs() <= 0.5
            && t.ty.abs() <= 0.5
            && r.confidence >= 0.9;
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: pass && elapsed <= Duration::from_secs(5),
        detail: format!(
            "max |s-1|={:.2e} max |rot|={:.2e} max |t|={:.3} min conf={:.3} time={:.2}s",
            worst.0,
            worst.1,
            worst.2,
            worst.3,
            elapsed.as_secs_f64()
        ),
    }
}

/// Fraction of `b`'s pixels that `t` maps inside the source frame.
fn overlap(size: usize, t: &SimilarityTransform) -> f64 {
    let c = (size as f64 - 1.0) / 2.0;
    let mut inside = 0usize;
    for y in 0..size {
        for x in 0..size {
            let (u, v) = t.apply((x as f64 - c, y as f64 - c));
            if (u + c) >= 0.0 && (u + c) <= size as f64 - 1.0 && (v + c) >= 0.0 && (v + c) <= size as f64 - 1.0 {
                inside += 1;
            }
        }
    }
    inside as f64 / (size * size) as f64
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let size = 256;
    let src = textured(size, 7);
    let reg = Registrar::new(size, FmiConfig::for_size(size)).unwrap();
    let rotations = [-150.0f64, -90.0, -30.0, 0.0, 30.0, 90.0, 150.0, 179.0];
    let scales = [0.8, 1.0, 1.25];
    let shifts = [0.0, 10.0, 25.0];
    let (mut eligible, mut ok, mut pi_ok, mut pi_cells) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for &deg in &rotations {
        for &s in &scales {
            for &d in &shifts {
                let truth = SimilarityTransform::new(s, deg.to_radians(), d, -0.6 * d);
                if overlap(size, &truth) < 0.6 {
                    continue;
                }
                eligible += 1;
                let b = apply_similarity(&src, &truth);
                let good = match reg.register(&src, &b) {
                    Ok(r) => {
                        let e = r.transform;
                        wrap_angle(e.rotation - truth.rotation).abs() <= 0.0175
                            && (e.scale / truth.scale - 1.0).abs() <= 0.02
                            && (e.tx - truth.tx).abs() <= 1.0
                            && (e.ty - truth.ty).abs() <= 1.0
                    }
                    Err(_) => false,
                };
                if deg == 179.0 {
                    pi_cells += 1;
                    pi_ok += usize::from(good);
                }
                if good {
                    ok += 1;
                } else {
                    failures.push(format!("({deg},{s},{d})"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let rate = ok as f64 / eligible as f64;
    Outcome {
        pass: rate >= 0.95 && elapsed <= Duration::from_secs(60),
        detail: format!(
            "{ok}/{eligible} cells ({:.1}%), 179deg cells {pi_ok}/{pi_cells}, time={:.2}s{}",
            100.0 * rate,
            elapsed.as_secs_f64(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" failed: {}", failures.join(" "))
            }
        ),
    }
}

const CURVED_SCRIPT: &str = "\
# t xz_angle thrust tail
0 0.05 1.5 0.04
18 0.05 1.5 -0.03
34 0.06 1.5 0.05
";

struct FlightRun {
    report: String,
    map: Vec<u8>,
    trajectory: Vec<u8>,
    elapsed: Duration,
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["photomap"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    if code == 0 {
        Ok(String::from_utf8_lossy(&out).into_owned())
    } else {
        Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn curved_flight(dir: &Path, seed: u64) -> Result<FlightRun, String> {
    let start = Instant::now();
    let texture = dir.join("ground.png");
    write_gray16(&texture, &value_noise(1536, 1536, 2024)).map_err(|e| e.to_string())?;
    let script = dir.join("curve.txt");
    fs::write(&script, CURVED_SCRIPT).map_err(|e| e.to_string())?;
    let frames = dir.join("frames");
    let p = |q: &Path| q.to_str().unwrap().to_string();
    let seed = seed.to_string();
    run_cli(&[
        "simulate",
        &p(&texture),
        &p(&script),
        &p(&frames),
        "--set",
        "duration=49",
        "--set",
        "noise_sigma=0.005",
        "--seed",
        &seed,
    ])?;
    let map = dir.join("map.png");
    let traj = dir.join("trajectory.log");
    run_cli(&["map", &p(&frames), &p(&map), &p(&traj)])?;
    let truth = frames.join(cli::GROUND_TRUTH_LOG);
    let report = run_cli(&["evaluate", &p(&traj), &p(&truth)])?;
    Ok(FlightRun {
        report,
        map: fs::read(&map).map_err(|e| e.to_string())?,
        trajectory: fs::read(&traj).map_err(|e| e.to_string())?,
        elapsed: start.elapsed(),
    })
}

fn report_value(report: &str, key: &str) -> Option<f64> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .and_then(|v| v.trim().parse().ok())
}

fn criterion_3(run: &Result<FlightRun, String>) -> Outcome {
    let run = match run {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: e.clone(),
            }
        }
    };
    let records = parse_log(&String::from_utf8_lossy(&run.trajectory)).unwrap_or_default();
    let accepted = records.iter().filter(|r| r.accepted).count();
    let final_err = report_value(&run.report, "final_position_error").unwrap_or(f64::INFINITY);
    let path = report_value(&run.report, "path_length").unwrap_or(0.0);
    let max_rot = report_value(&run.report, "max_rotation_error").unwrap_or(f64::INFINITY);
    let pass = records.len() == 50
        && final_err <= 0.01 * path
        && max_rot <= 0.03
        && run.elapsed <= Duration::from_secs(180);
    Outcome {
        pass,
        detail: format!(
            "captures={} accepted={accepted} final error={final_err:.3}px path={path:.1}px ({:.3}%) max rot err={max_rot:.5} time={:.1}s",
            records.len(),
            100.0 * final_err / path,
            run.elapsed.as_secs_f64()
        ),
    }
}

fn state_hash(canvas: &MapCanvas, dirty: Option<photomap::photomap::DirtyRegion>) -> u64 {
    let ts = canvas.tile_size() as i64;
    let mut h = DefaultHasher::new();
    for (&(tx, ty), tile) in canvas.tiles() {
        for ly in 0..ts {
            for lx in 0..ts {
                let (x, y) = (tx * ts + lx, ty * ts + ly);
                if dirty.is_some_and(|d| d.contains(x, y)) {
                    continue;
                }
                let i = (ly * ts + lx) as usize;
                (x, y, tile.value[i].to_bits(), tile.weight[i].to_bits()).hash(&mut h);
            }
        }
    }
    h.finish()
}

fn criterion_4() -> Outcome {
    let size = 128;
    let tile = 32;
    let mut canvas = MapCanvas::new(tile, BlendPolicy::Feather).unwrap();
    let mut k = 0u64;
    while canvas.tile_count() < 100 {
        let pose = MapPose::new(1.0, 0.1 * k as f64, 90.0 * (k % 4) as f64, 90.0 * (k / 4) as f64);
        canvas.composite(&textured(size, 300 + k), &pose);
        k += 1;
    }
    let frame = textured(size, 999);
    let pose = MapPose::new(1.1, 0.4, 150.0, 60.0);
    let mut empty = MapCanvas::new(tile, BlendPolicy::Feather).unwrap();
    empty.composite(&frame, &pose);
    let fresh_count = empty.last_touched_tiles();

    let before_tiles = canvas.tile_count();
    let footprint = MapCanvas::footprint(size, &pose);
    let before = state_hash(&canvas, Some(footprint));
    let dirty = canvas.composite(&frame, &pose);
    let after = state_hash(&canvas, Some(dirty));
    let touched = canvas.last_touched_tiles();
    Outcome {
        pass: before_tiles >= 100 && touched == fresh_count && before == after && dirty == footprint,
        detail: format!(
            "map tiles={before_tiles} touched={touched} empty-canvas touched={fresh_count} outside-dirty hash {}",
            if before == after { "unchanged" } else { "CHANGED" }
        ),
    }
}

fn white_noise(size: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Raster::from_fn(size, size, |_, _| rng.random::<f64>())
}

fn criterion_5() -> Outcome {
    let mut max_peak = 0.0f64;
    for trial in 0..20 {
        let a = white_noise(256, 2 * trial);
        let b = white_noise(256, 2 * trial + 1);
        max_peak = max_peak.max(phase_correlate(&a, &b).unwrap().peak);
    }
    let cfg = FmiConfig::for_size(256);
    let reg = Registrar::new(256, cfg).unwrap();
    let constant = Frame::new(Raster::filled(256, 256, 0.4), 0).unwrap();
    let degenerate = matches!(reg.register(&constant, &textured(256, 1)), Err(RegistrationError::DegenerateInput))
        && matches!(reg.register(&textured(256, 1), &constant), Err(RegistrationError::DegenerateInput));

    let world = GroundWorld::new(value_noise(1024, 1024, 55), 0.1, 0.5);
    let cam = CameraModel::new(CameraModel::DEFAULT_FOV, 256);
    let mut builder = MapBuilder::new(cfg, CanvasConfig::default()).unwrap();
    let mut flags = Vec::new();
    for i in 0..6 {
        let frame = if i == 3 {
            constant.clone()
        } else {
            let s = BlimpState::at_rest(1.2 * i as f64, 0.4 * i as f64, 20.0, 0.02 * i as f64);
            Frame::new(render_view(&world, &s, &cam), i).unwrap()
        };
        flags.push(builder.push(frame).unwrap().accepted);
    }
    let sequence_ok = flags.iter().enumerate().all(|(i, &a)| a == (i != 3));
    Outcome {
        pass: max_peak < 0.2 && degenerate && sequence_ok,
        detail: format!("white-noise max peak={max_peak:.4} degenerate={degenerate} acceptance flags={flags:?}"),
    }
}

fn criterion_6() -> Outcome {
    let model = BlimpModel::default();
    let tau = model.tau;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lag_err = 0.0f64;
    for _ in 0..50 {
        let v0 = rng.random_range(-3.0..3.0);
        let cmd = rng.random_range(-5.0..5.0);
        let mut s = BlimpState {
            v_thrust: v0,
            ..BlimpState::at_rest(0.0, 0.0, 1000.0, 0.0)
        }
        .set_motor_speeds(0.0, cmd, 0.0);
        let mut t = 0.0;
        for _ in 0..rng.random_range(1..60) {
            let dt = rng.random_range(1e-3..=0.5);
            s = model.step(&s, dt).unwrap();
            t += dt;
        }
        let closed = cmd + (v0 - cmd) * (-t / tau).exp();
        lag_err = lag_err.max((s.v_thrust - closed).abs());
    }

    let thrust = 2.0;
    let mut s = BlimpState::at_rest(0.0, 0.0, 20.0, 0.0).set_motor_speeds(0.0, thrust, 0.0);
    let steps = (20.0 / SIM_DT).round() as usize;
    for _ in 0..steps {
        s = model.step(&s, SIM_DT).unwrap();
    }
    let analytic = thrust * (20.0 - tau * (1.0 - (-20.0 / tau).exp()));
    let rel = (s.x - analytic).abs() / analytic;
    Outcome {
        pass: lag_err <= 1e-9 && rel <= 1e-3,
        detail: format!(
            "lag max error={lag_err:.2e} displacement={:.5} analytic={analytic:.5} rel error={:.4}%",
            s.x,
            100.0 * rel
        ),
    }
}

fn criterion_7(a: &Result<FlightRun, String>, b: &Result<FlightRun, String>) -> Outcome {
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let same_map = a.map == b.map;
            let same_log = a.trajectory == b.trajectory;
            Outcome {
                pass: same_map && same_log,
                detail: format!("map identical={same_map} trajectory identical={same_log}"),
            }
        }
        _ => Outcome {
            pass: false,
            detail: "flight run failed".into(),
        },
    }
}

fn main() -> ExitCode {
    let dir_a = tempfile::tempdir().expect("temp dir");
    let dir_b = tempfile::tempdir().expect("temp dir");
    let mut results = vec![(1, criterion_1()), (2, criterion_2())];
    let first = curved_flight(dir_a.path(), 17);
    results.push((3, criterion_3(&first)));
    results.push((4, criterion_4()));
    results.push((5, criterion_5()));
    results.push((6, criterion_6()));
    let second = curved_flight(dir_b.path(), 17);
    results.push((7, criterion_7(&first, &second)));

    let mut all = true;
    for (n, o) in &results {
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    if let Ok(run) = &first {
        if !results[2].1.pass {
            println!("{}", run.report);
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
