//! Run configuration: documented TOML schema with full defaults, overlaid by
//! environment variables (`VIO_OUT_DIR`, `VIO_SEED`) and command-line flags.
//!
//! Angles are written in degrees in the file; the library works in radians.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use vio_core::geometry::CameraIntrinsics;
use vio_core::pipeline::PipelineConfig;
use vio_core::sim::{FlightPlan, NoiseSpec, SimConfig};
use vio_core::solver::SolverOptions;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    flight: FlightSection,
    #[serde(default)]
    noise: NoiseSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    geometry: GeometrySection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlightSection {
    duration_s: Option<f64>,
    speed_mps: Option<f64>,
    altitude_m: Option<f64>,
    heading_deg: Option<f64>,
    frame_interval_s: Option<f64>,
    climb_rate_mps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    los_angle_sigma_deg: Option<f64>,
    los_frame_sigma_deg: Option<f64>,
    los_angle_max_deg: Option<f64>,
    camera_yaw_error_deg: Option<f64>,
    altimeter_sigma_m: Option<f64>,
    altimeter_distance_coeff: Option<f64>,
    ins_heading_error_deg: Option<f64>,
    ins_attitude_error_deg: Option<f64>,
    attitude_coupling: Option<f64>,
    ins_distance_scale_bound: Option<f64>,
    ins_walk_intensity: Option<f64>,
    /// Disable every channel (noise-off mode).
    disabled: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    method: Option<String>,
    dt_init: Option<f64>,
    accept_thresh: Option<f64>,
    expand_thresh: Option<f64>,
    shrink_thresh: Option<f64>,
    expand_factor: Option<f64>,
    shrink_factor: Option<f64>,
    pg_tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    landmarks_per_step: Option<usize>,
    focal_px: Option<f64>,
    rank_tol: Option<f64>,
    sensor_half_extent_px: Option<f64>,
    landmark_density_per_km2: Option<f64>,
    terrain_relief_sigma_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    out_dir: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    jobs: Option<usize>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub plan: FlightPlan,
    pub noise: NoiseSpec,
    pub sim: SimConfig,
    pub pipeline: PipelineConfig,
    pub focal_px: f64,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl RunConfig {
    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics::new(self.focal_px)
    }
}

/// Command-line overrides applied after file and environment.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub duration_s: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub fn load(
    config_path: Option<&Path>,
    paper_preset: bool,
    overrides: &Overrides,
) -> Result<RunConfig> {
    let raw: RawConfig = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            toml::from_str(&text)
                .with_context(|| format!("cannot parse config file {}", path.display()))?
        }
        None => RawConfig::default(),
    };

    // Built-in defaults are the reference scenario, so the preset flag adds
    // validation rather than different numbers.
    let mut plan = FlightPlan::reference();
    let f = &raw.flight;
    if let Some(v) = f.duration_s {
        plan.duration_s = v;
    }
    if let Some(v) = f.speed_mps {
        plan.speed_mps = v;
    }
    if let Some(v) = f.altitude_m {
        plan.altitude_m = v;
    }
    if let Some(v) = f.heading_deg {
        plan.heading_rad = v.to_radians();
    }
    if let Some(v) = f.frame_interval_s {
        plan.frame_interval_s = v;
    }
    if let Some(v) = f.climb_rate_mps {
        plan.climb_rate_mps = v;
    }

    let mut noise = NoiseSpec::reference();
    let n = &raw.noise;
    if n.disabled == Some(true) {
        noise = NoiseSpec::disabled();
    }
    if let Some(v) = n.los_angle_sigma_deg {
        noise.los_angle_sigma_rad = v.to_radians();
    }
    if let Some(v) = n.los_frame_sigma_deg {
        noise.los_frame_sigma_rad = v.to_radians();
    }
    if let Some(v) = n.los_angle_max_deg {
        noise.los_angle_max_rad = v.to_radians();
    }
    if let Some(v) = n.camera_yaw_error_deg {
        noise.camera_yaw_error_rad = v.to_radians();
    }
    if let Some(v) = n.altimeter_sigma_m {
        noise.altimeter_sigma_m = v;
    }
    if let Some(v) = n.altimeter_distance_coeff {
        noise.altimeter_distance_coeff = v;
    }
    if let Some(v) = n.ins_heading_error_deg {
        noise.ins_heading_error_rad = v.to_radians();
    }
    if let Some(v) = n.ins_attitude_error_deg {
        noise.ins_attitude_error_rad = v.to_radians();
    }
    if let Some(v) = n.attitude_coupling {
        noise.attitude_coupling = v;
    }
    if let Some(v) = n.ins_distance_scale_bound {
        noise.ins_distance_scale_bound = v;
    }
    if let Some(v) = n.ins_walk_intensity {
        noise.ins_walk_intensity = v;
    }

    let mut solver = SolverOptions::default();
    let s = &raw.solver;
    if let Some(v) = s.dt_init {
        solver.dt_init = v;
    }
    if let Some(v) = s.accept_thresh {
        solver.accept_thresh = v;
    }
    if let Some(v) = s.expand_thresh {
        solver.expand_thresh = v;
    }
    if let Some(v) = s.shrink_thresh {
        solver.shrink_thresh = v;
    }
    if let Some(v) = s.expand_factor {
        solver.expand_factor = v;
    }
    if let Some(v) = s.shrink_factor {
        solver.shrink_factor = v;
    }
    if let Some(v) = s.pg_tol {
        solver.pg_tol = Some(v);
    }
    if let Some(v) = s.max_iter {
        solver.max_iter = v;
    }

    let g = &raw.geometry;
    let mut sim = SimConfig::default();
    if let Some(v) = g.sensor_half_extent_px {
        sim.sensor_half_extent_px = v;
    }
    if let Some(v) = g.landmark_density_per_km2 {
        sim.landmark_density_per_km2 = v;
    }
    if let Some(v) = g.terrain_relief_sigma_m {
        sim.terrain_relief_sigma_m = v;
    }
    let mut pipeline = PipelineConfig {
        solver,
        ..PipelineConfig::default()
    };
    if let Some(v) = g.landmarks_per_step {
        pipeline.landmarks_per_step = v;
        sim.required_covisible = v;
    }
    if let Some(v) = g.rank_tol {
        pipeline.rank_tol = v;
    }
    if let Some(ref v) = s.method {
        pipeline.method = v.clone();
    }
    let focal_px = g.focal_px.unwrap_or(1000.0);

    let mut seeds = raw.output.seeds.unwrap_or_else(|| vec![0]);
    let mut out_dir = raw.output.out_dir.unwrap_or_else(|| PathBuf::from("runs"));
    let mut jobs = raw.output.jobs.unwrap_or(1);

    // Environment overrides: output directory and seed only.
    if let Ok(v) = std::env::var("VIO_OUT_DIR") {
        out_dir = PathBuf::from(v);
    }
    if let Ok(v) = std::env::var("VIO_SEED") {
        let seed: u64 = v
            .parse()
            .with_context(|| format!("VIO_SEED must be an integer, got {v:?}"))?;
        seeds = vec![seed];
    }

    if let Some(v) = overrides.duration_s {
        plan.duration_s = v;
    }
    if let Some(ref v) = overrides.seeds {
        seeds = v.clone();
    }
    if let Some(ref v) = overrides.out_dir {
        out_dir = v.clone();
    }
    if let Some(v) = overrides.jobs {
        jobs = v;
    }

    let config = RunConfig {
        plan,
        noise,
        sim,
        pipeline,
        focal_px,
        seeds,
        out_dir,
        jobs,
    };
    validate(&config, paper_preset)?;
    Ok(config)
}

fn validate(config: &RunConfig, paper_preset: bool) -> Result<()> {
    if config.focal_px <= 0.0 {
        bail!("geometry.focal_px: must be positive");
    }
    if config.pipeline.landmarks_per_step < 2 {
        bail!("geometry.landmarks_per_step: at least two landmarks are required");
    }
    if !(config.pipeline.rank_tol > 0.0 && config.pipeline.rank_tol < 1.0) {
        bail!("geometry.rank_tol: must lie in (0, 1)");
    }
    if config.seeds.is_empty() {
        bail!("output.seeds: at least one seed is required");
    }
    let n = &config.noise;
    let channels = [
        ("noise.los_angle_sigma_deg", n.los_angle_sigma_rad),
        ("noise.los_frame_sigma_deg", n.los_frame_sigma_rad),
        ("noise.los_angle_max_deg", n.los_angle_max_rad),
        ("noise.camera_yaw_error_deg", n.camera_yaw_error_rad),
        ("noise.altimeter_sigma_m", n.altimeter_sigma_m),
        ("noise.altimeter_distance_coeff", n.altimeter_distance_coeff),
        ("noise.ins_heading_error_deg", n.ins_heading_error_rad),
        ("noise.ins_attitude_error_deg", n.ins_attitude_error_rad),
        ("noise.attitude_coupling", n.attitude_coupling),
        ("noise.ins_distance_scale_bound", n.ins_distance_scale_bound),
        ("noise.ins_walk_intensity", n.ins_walk_intensity),
    ];
    for (name, value) in channels {
        if !(value >= 0.0 && value.is_finite()) {
            bail!("{name}: must be a nonnegative finite number");
        }
    }
    if config.jobs == 0 {
        bail!("output.jobs: must be positive");
    }
    config
        .plan
        .validate()
        .map_err(|e| anyhow::anyhow!("flight: {e}"))?;
    if config.plan.frame_count() < 3 {
        bail!("flight.duration_s: the run needs at least three frames");
    }
    if vio_core::solver::minimizer_by_name(&config.pipeline.method, Default::default()).is_none() {
        bail!(
            "solver.method: unknown strategy {:?} (expected one of {:?})",
            config.pipeline.method,
            vio_core::solver::minimizer_names()
        );
    }
    config
        .pipeline
        .solver
        .validate()
        .map_err(|e| anyhow::anyhow!("solver: {e}"))?;

    if paper_preset {
        if !config.plan.within_reference_envelope() {
            bail!(
                "flight.speed_mps/altitude_m: outside the reference envelope \
                 (speed 210-260 m/s, altitude 1000-1500 m) required by --paper-preset"
            );
        }
        let n = &config.noise;
        if n.los_angle_max_rad > 0.2f64.to_radians() + 1e-12 {
            bail!("noise.los_angle_max_deg: reference budget caps the line-of-sight error at 0.2 degrees");
        }
        if n.ins_heading_error_rad > 0.4f64.to_radians() + 1e-12 {
            bail!("noise.ins_heading_error_deg: reference budget caps the heading error at 0.4 degrees");
        }
        if n.ins_attitude_error_rad > 0.06f64.to_radians() + 1e-12 {
            bail!("noise.ins_attitude_error_deg: reference budget caps the attitude error at 0.06 degrees");
        }
        if n.altimeter_distance_coeff > 1e-4 + 1e-18 {
            bail!("noise.altimeter_distance_coeff: reference budget caps the coefficient at 1e-4");
        }
    }
    Ok(())
}
