//! Batch pipeline stages behind the `windform` subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use windform_core::config::{Project, SwarmScenario, OUTPUT_DIR_ENV};
use windform_core::fieldkit::{idw_interpolate, parse_stations, write_raster, Channel, GridSpec, IdwParams};
use windform_core::formout::write_obj;
use windform_core::iktrail::snapshot_sweep;
use windform_core::TrailSet;

/// Options for `windform interpolate`.
#[derive(Debug, Clone)]
pub struct InterpolateOptions {
    pub stations: PathBuf,
    pub power: f64,
    pub cols: usize,
    pub rows: usize,
    pub pad: f64,
    pub out: Option<PathBuf>,
}

impl InterpolateOptions {
    pub fn new(stations: impl Into<PathBuf>) -> Self {
        Self {
            stations: stations.into(),
            power: IdwParams::default().power,
            cols: GridSpec::DEFAULT_CELLS,
            rows: GridSpec::DEFAULT_CELLS,
            pad: GridSpec::DEFAULT_PAD,
            out: None,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Interpolates a station CSV onto a grid and writes `speed.asc`,
/// `dir_x.asc` and `dir_y.asc`.
pub fn interpolate(opts: &InterpolateOptions) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&opts.stations)
        .with_context(|| format!("reading {}", opts.stations.display()))?;
    let stations = parse_stations(&text)?;
    let params = IdwParams {
        power: opts.power,
        ..Default::default()
    };
    let grid = GridSpec::around_stations(&stations, opts.cols, opts.rows, opts.pad)?;
    let raster = idw_interpolate(&stations, &params, &grid)?;

    let dir = opts
        .out
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;
    let mut written = Vec::new();
    for ch in Channel::ALL {
        let path = dir.join(format!("{}.asc", ch.name()));
        write_file(&path, &write_raster(&raster, ch))?;
        written.push(path);
    }
    Ok(written)
}

/// Bakes every scatter job into `<name>.obj`.
pub fn scatter(config: &Path) -> Result<Vec<PathBuf>> {
    let project = Project::from_path(config)?;
    if project.config.scatter.is_empty() {
        bail!("{}: no scatter jobs", config.display());
    }
    let dir = project.config.output_dir();
    create_dir(&dir)?;
    let mut written = Vec::new();
    for job in &project.config.scatter {
        let scene = project.run_scatter(job)?.bake();
        let path = dir.join(format!("{}.obj", job.name));
        write_obj(&scene, &path)?;
        log::info!("{}: {} instances", job.name, scene.objects.len());
        written.push(path);
    }
    Ok(written)
}

/// Accumulates every sweep job into `<name>.obj`.
pub fn iktrail(config: &Path) -> Result<Vec<PathBuf>> {
    let project = Project::from_path(config)?;
    if project.config.sweeps.is_empty() {
        bail!("{}: no sweep jobs", config.display());
    }
    let dir = project.config.output_dir();
    create_dir(&dir)?;
    let mut written = Vec::new();
    for cfg in &project.config.sweeps {
        let job = project.sweep_job(cfg)?;
        let scene = snapshot_sweep(&job)?.bake();
        let path = dir.join(format!("{}.obj", cfg.name));
        write_obj(&scene, &path)?;
        log::info!("{}: {} instances", cfg.name, scene.objects.len());
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct MetricsRow {
    step: u64,
    time: f64,
    polarization: f64,
    mean_nn_distance: Option<f64>,
    mean_height: f64,
}

/// Runs one swarm scenario; returns the trails and the metrics CSV text.
pub fn run_scenario(project: &Project, sc: &SwarmScenario) -> Result<(TrailSet, String)> {
    if sc.steps < 1 {
        bail!("steps must be ≥ 1");
    }
    let mut sim = project.swarm_sim(sc)?;
    let mut trails = TrailSet::with_agents(sim.agents.len());
    let mut csv = csv::Writer::from_writer(Vec::new());

    let record = |sim: &windform_core::SwarmSim, csv: &mut csv::Writer<Vec<u8>>| -> Result<()> {
        let m = sim.metrics();
        csv.serialize(MetricsRow {
            step: m.step,
            time: m.time,
            polarization: m.polarization,
            mean_nn_distance: m.mean_nn_distance,
            mean_height: m.mean_height,
        })?;
        Ok(())
    };
    let sample = |sim: &windform_core::SwarmSim, trails: &mut TrailSet| {
        let t = sim.time();
        for (trail, p) in trails.trails.iter_mut().zip(sim.positions()) {
            trail
                .samples
                .push(windform_core::formout::TrailSample { t, position: p });
        }
    };

    record(&sim, &mut csv)?;
    sample(&sim, &mut trails);
    for k in 1..=sc.steps {
        sim.step();
        record(&sim, &mut csv)?;
        if k % sc.stride == 0 {
            sample(&sim, &mut trails);
        }
    }
    let bytes = csv.into_inner().context("flushing metrics")?;
    Ok((trails, String::from_utf8(bytes)?))
}

/// Runs swarm scenarios (all, or the one named) and writes
/// `<name>_trails.obj` and `<name>_metrics.csv` for each.
pub fn swarm(config: &Path, only: Option<&str>) -> Result<Vec<PathBuf>> {
    let project = Project::from_path(config)?;
    let scenarios: Vec<&SwarmScenario> = project
        .config
        .swarms
        .iter()
        .filter(|s| only.is_none_or(|n| n == s.name))
        .collect();
    if scenarios.is_empty() {
        match only {
            Some(n) => bail!("{}: no swarm scenario named {n:?}", config.display()),
            None => bail!("{}: no swarm scenarios", config.display()),
        }
    }
    let dir = project.config.output_dir();
    create_dir(&dir)?;
    let mut written = Vec::new();
    for sc in scenarios {
        let (trails, metrics) = run_scenario(&project, sc)?;
        let tubes = trails.to_tubes(sc.tube_radius, sc.tube_sides)?;
        let obj = dir.join(format!("{}_trails.obj", sc.name));
        write_obj(&tubes, &obj)?;
        let csv = dir.join(format!("{}_metrics.csv", sc.name));
        write_file(&csv, &metrics)?;
        log::info!("{}: {} agents, {} steps", sc.name, sc.n, sc.steps);
        written.push(obj);
        written.push(csv);
    }
    Ok(written)
}
