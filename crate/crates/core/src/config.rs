//! Project configuration: where the terrain and field come from, and the job
//! blocks for each generator. Relative paths resolve against the config
//! file's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldkit::{idw_interpolate, parse_stations, read_raster, FieldRaster, GridSpec, IdwParams};
use crate::formout::InstanceSet;
use crate::iktrail::{JointChain, ParamCurve, SubShape, SweepJob, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::morphscatter::{instance_set, scatter_instances, MorphTargetSet, ScatterSpec};
use crate::swarm::{
    init_swarm, streamline_track, AttractorTrack, BoidParams, Keyframe, NeighborSearch, StreamlineSpec,
    SwarmSim,
};
use crate::terrain::synthetic::SyntheticTerrain;
use crate::terrain::{load_mesh, parse_obj, TerrainMesh, WorldRect};

/// Overrides `output_dir` when set.
pub const OUTPUT_DIR_ENV: &str = "WINDFORM_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub terrain: TerrainConfig,
    #[serde(default)]
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub scatter: Vec<ScatterJob>,
    #[serde(default)]
    pub sweeps: Vec<SweepConfig>,
    #[serde(default)]
    pub swarms: Vec<SwarmScenario>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Either an OBJ file or a generated height field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticTerrain>,
    /// World rectangle `[min, max]` the UV square maps to.
    #[serde(default)]
    pub uv_bounds_world: Option<[DVec2; 2]>,
}

/// Either station observations to interpolate or three precomputed rasters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub stations: Option<PathBuf>,
    #[serde(default)]
    pub rasters: Option<RasterPaths>,
    #[serde(default)]
    pub idw: IdwParams,
    #[serde(default)]
    pub grid: GridConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterPaths {
    pub speed: PathBuf,
    pub dir_x: PathBuf,
    pub dir_y: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub cols: usize,
    pub rows: usize,
    pub pad: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            cols: GridSpec::DEFAULT_CELLS,
            rows: GridSpec::DEFAULT_CELLS,
            pad: GridSpec::DEFAULT_PAD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterJob {
    pub name: String,
    /// Morph target OBJ files in keyframe order.
    pub targets: Vec<PathBuf>,
    pub frame_count: u32,
    #[serde(default)]
    pub spec: ScatterSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubShapeConfig {
    pub joint: usize,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    pub bones: Vec<f64>,
    #[serde(default)]
    pub root: DVec3,
    pub effector_curve: ParamCurve,
    #[serde(default)]
    pub root_curve: Option<ParamCurve>,
    #[serde(default)]
    pub sub_shapes: Vec<SubShapeConfig>,
    pub frames: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

/// An attractor given by explicit keyframes or traced through the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackConfig {
    #[serde(default)]
    pub keyframes: Option<Vec<Keyframe>>,
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(default)]
    pub streamline: Option<StreamlineSpec>,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmScenario {
    pub name: String,
    pub n: usize,
    pub seed: u64,
    /// UV rectangle `[min, max]` agents spawn in.
    #[serde(default = "full_chart")]
    pub spawn: [DVec2; 2],
    #[serde(default)]
    pub params: BoidParams,
    #[serde(default)]
    pub tracks: Vec<TrackConfig>,
    pub steps: usize,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default = "default_tube_radius")]
    pub tube_radius: f64,
    #[serde(default = "default_tube_sides")]
    pub tube_sides: usize,
    #[serde(default)]
    pub neighbor_search: NeighborSearch,
}

fn full_chart() -> [DVec2; 2] {
    [DVec2::ZERO, DVec2::ONE]
}

fn one() -> usize {
    1
}

fn default_tube_radius() -> f64 {
    0.1
}

fn default_tube_sides() -> usize {
    8
}

impl SwarmScenario {
    pub fn new(name: impl Into<String>, n: usize, seed: u64, steps: usize) -> Self {
        Self {
            name: name.into(),
            n,
            seed,
            spawn: full_chart(),
            params: BoidParams::default(),
            tracks: Vec::new(),
            steps,
            stride: 1,
            tube_radius: default_tube_radius(),
            tube_sides: default_tube_sides(),
            neighbor_search: NeighborSearch::default(),
        }
    }
}

impl ProjectConfig {
    /// Parses JSON; relative paths will resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ProjectConfig = serde_json::from_str(text)?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let cfg = Self::from_json(&text, base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// `$WINDFORM_OUTPUT_DIR` when set, else `output_dir` under the base.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.resolve(&self.output_dir),
        }
    }

    /// Checks everything checkable without parsing geometry and reports all
    /// problems at once, each prefixed by its field path.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let need_file = |errs: &mut Vec<String>, field: String, p: &Path| {
            if !self.resolve(p).is_file() {
                errs.push(format!("{field}: file not found: {}", self.resolve(p).display()));
            }
        };

        let t = &self.terrain;
        match (&t.path, &t.synthetic) {
            (Some(p), None) => need_file(&mut errs, "terrain.path".into(), p),
            (None, Some(s)) => {
                if let Err(e) = s.validate() {
                    errs.push(format!("terrain.synthetic: {e}"));
                }
            }
            _ => errs.push("terrain: give exactly one of path or synthetic".into()),
        }
        if let Some([lo, hi]) = t.uv_bounds_world {
            if !(lo.is_finite() && hi.is_finite() && lo.x != hi.x && lo.y != hi.y) {
                errs.push("terrain.uv_bounds_world: must span a finite, non-empty rectangle".into());
            }
        }

        if let Some(f) = &self.field {
            match (&f.stations, &f.rasters) {
                (Some(p), None) => need_file(&mut errs, "field.stations".into(), p),
                (None, Some(r)) => {
                    need_file(&mut errs, "field.rasters.speed".into(), &r.speed);
                    need_file(&mut errs, "field.rasters.dir_x".into(), &r.dir_x);
                    need_file(&mut errs, "field.rasters.dir_y".into(), &r.dir_y);
                }
                _ => errs.push("field: give exactly one of stations or rasters".into()),
            }
            if let Err(e) = f.idw.validate() {
                errs.push(format!("field.idw: {e}"));
            }
            if f.grid.cols == 0 || f.grid.rows == 0 {
                errs.push("field.grid: cols and rows must be >= 1".into());
            }
            if !(f.grid.pad >= 0.0 && f.grid.pad.is_finite()) {
                errs.push(format!("field.grid.pad: must be >= 0, got {}", f.grid.pad));
            }
        }

        let mut names = HashSet::new();
        let mut check_name = |errs: &mut Vec<String>, field: String, name: &str| {
            if name.trim().is_empty() {
                errs.push(format!("{field}.name: must not be empty"));
            } else if !names.insert(name.to_string()) {
                errs.push(format!("{field}.name: duplicate job name {name:?}"));
            }
        };

        for (i, job) in self.scatter.iter().enumerate() {
            let at = format!("scatter[{i}]");
            check_name(&mut errs, at.clone(), &job.name);
            if self.field.is_none() {
                errs.push(format!("{at}: scatter needs a field"));
            }
            if job.targets.len() < 2 {
                errs.push(format!("{at}.targets: need at least 2 morph targets"));
            }
            for (k, p) in job.targets.iter().enumerate() {
                need_file(&mut errs, format!("{at}.targets[{k}]"), p);
            }
            if (job.frame_count as usize) < job.targets.len().max(2) {
                errs.push(format!(
                    "{at}.frame_count: must be >= max(2, number of targets), got {}",
                    job.frame_count
                ));
            }
            if let Err(Error::Invalid(list)) = job.spec.validate() {
                errs.extend(list.into_iter().map(|e| format!("{at}.{e}")));
            }
        }

        for (i, job) in self.sweeps.iter().enumerate() {
            let at = format!("sweeps[{i}]");
            check_name(&mut errs, at.clone(), &job.name);
            if let Err(e) = JointChain::validate_lengths(&job.bones) {
                errs.push(format!("{at}.bones: {e}"));
            }
            if !job.root.is_finite() {
                errs.push(format!("{at}.root: must be finite"));
            }
            if job.frames < 1 {
                errs.push(format!("{at}.frames: must be >= 1"));
            }
            if !(job.tol > 0.0) {
                errs.push(format!("{at}.tol: must be > 0, got {}", job.tol));
            }
            if job.max_iters < 1 {
                errs.push(format!("{at}.max_iters: must be >= 1"));
            }
            if let Err(e) = job.effector_curve.validate() {
                errs.push(format!("{at}.effector_curve: {e}"));
            }
            if let Some(Err(e)) = job.root_curve.as_ref().map(ParamCurve::validate) {
                errs.push(format!("{at}.root_curve: {e}"));
            }
            for (k, s) in job.sub_shapes.iter().enumerate() {
                if s.joint > job.bones.len() {
                    errs.push(format!(
                        "{at}.sub_shapes[{k}].joint: {} out of range (chain has {} joints)",
                        s.joint,
                        job.bones.len() + 1
                    ));
                }
                need_file(&mut errs, format!("{at}.sub_shapes[{k}].path"), &s.path);
            }
        }

        for (i, sc) in self.swarms.iter().enumerate() {
            let at = format!("swarms[{i}]");
            check_name(&mut errs, at.clone(), &sc.name);
            if sc.n < 1 {
                errs.push(format!("{at}.n: must be >= 1"));
            }
            if sc.steps < 1 {
                errs.push(format!("{at}.steps: steps must be ≥ 1"));
            }
            if sc.stride < 1 {
                errs.push(format!("{at}.stride: stride must be ≥ 1"));
            }
            let [lo, hi] = sc.spawn;
            if !(lo.is_finite() && hi.is_finite() && lo.x <= hi.x && lo.y <= hi.y) {
                errs.push(format!("{at}.spawn: must be [min, max] with min <= max"));
            }
            for (field, msg) in sc.params.problems() {
                errs.push(format!("{at}.params.{field}: {msg}"));
            }
            if !(sc.tube_radius > 0.0 && sc.tube_radius.is_finite()) {
                errs.push(format!("{at}.tube_radius: must be > 0, got {}", sc.tube_radius));
            }
            if sc.tube_sides < 3 {
                errs.push(format!("{at}.tube_sides: must be >= 3, got {}", sc.tube_sides));
            }
            for (k, tr) in sc.tracks.iter().enumerate() {
                let at = format!("{at}.tracks[{k}]");
                match (&tr.keyframes, &tr.streamline) {
                    (Some(keys), None) => {
                        let track = AttractorTrack {
                            keyframes: keys.clone(),
                            weight: tr.weight,
                        };
                        if let Err(e) = track.validate() {
                            errs.push(format!("{at}: {e}"));
                        }
                    }
                    (None, Some(_)) if self.field.is_none() => {
                        errs.push(format!("{at}.streamline: needs a field"));
                    }
                    (None, Some(s)) => {
                        if s.steps < 1 {
                            errs.push(format!("{at}.streamline.steps: must be >= 1"));
                        }
                        if !(s.key_dt > 0.0) {
                            errs.push(format!("{at}.streamline.key_dt: must be > 0"));
                        }
                    }
                    _ => errs.push(format!("{at}: give exactly one of keyframes or streamline")),
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(errs))
        }
    }
}

/// A config with its terrain and field loaded.
#[derive(Debug, Clone)]
pub struct Project {
    pub config: ProjectConfig,
    pub terrain: Arc<TerrainMesh>,
    pub raster: Option<Arc<FieldRaster>>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl Project {
    pub fn load(config: ProjectConfig) -> Result<Self> {
        config.validate()?;
        let terrain = load_terrain(&config)?;
        let raster = match &config.field {
            Some(f) => Some(Arc::new(load_field(&config, f)?)),
            None => None,
        };
        Ok(Self {
            config,
            terrain: Arc::new(terrain),
            raster,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::load(ProjectConfig::load(path)?)
    }

    fn require_raster(&self, what: &str) -> Result<&FieldRaster> {
        self.raster
            .as_deref()
            .ok_or_else(|| Error::Invalid(vec![format!("{what}: needs a field")]))
    }

    /// World rectangle the terrain's UV chart maps to: its binding, else the
    /// raster extent, else the mesh's own planar extent.
    pub fn uv_world_rect(&self) -> WorldRect {
        self.terrain
            .uv_world_rect(self.raster.as_deref())
            .unwrap_or_else(|| self.terrain.xy_extent())
    }

    pub fn run_scatter(&self, job: &ScatterJob) -> Result<InstanceSet> {
        let raster = self.require_raster(&job.name)?;
        let targets = job
            .targets
            .iter()
            .map(|p| {
                let path = self.config.resolve(p);
                parse_obj(&read(&path)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let set = MorphTargetSet::new(targets, job.frame_count)?;
        let instances = scatter_instances(&self.terrain, raster, &set, &job.spec)?;
        let mut out = instance_set(&self.terrain, &instances, &set)?;
        for m in &mut out.meshes {
            m.name = format!("{}_{}", job.name, m.name);
        }
        Ok(out)
    }

    pub fn sweep_job(&self, cfg: &SweepConfig) -> Result<SweepJob> {
        let mut job = SweepJob::new(
            JointChain::straight(cfg.root, cfg.bones.clone(), DVec3::X),
            cfg.effector_curve.clone(),
            cfg.frames,
        );
        job.root_curve = cfg.root_curve.clone();
        job.tol = cfg.tol;
        job.max_iters = cfg.max_iters;
        for (k, s) in cfg.sub_shapes.iter().enumerate() {
            let path = self.config.resolve(&s.path);
            job.sub_shapes.push(SubShape {
                joint: s.joint,
                name: format!("{}_shape{k}", cfg.name),
                mesh: parse_obj(&read(&path)?)?,
            });
        }
        job.validate()?;
        Ok(job)
    }

    pub fn swarm_sim(&self, sc: &SwarmScenario) -> Result<SwarmSim> {
        let mut sim = init_swarm(
            sc.n,
            sc.seed,
            (sc.spawn[0], sc.spawn[1]),
            self.terrain.clone(),
            sc.params,
        )?
        .with_raster(self.raster.clone());
        sim.neighbor_search = sc.neighbor_search;
        for tr in &sc.tracks {
            let track = match (&tr.keyframes, &tr.streamline) {
                (Some(keys), _) => AttractorTrack {
                    keyframes: keys.clone(),
                    weight: tr.weight,
                },
                (None, Some(spec)) => streamline_track(self.require_raster(&sc.name)?, &self.terrain, spec)?,
                (None, None) => unreachable!("validated"),
            };
            track.validate().map_err(|e| Error::Invalid(vec![e]))?;
            sim.tracks.push(track);
        }
        Ok(sim)
    }
}

fn load_terrain(config: &ProjectConfig) -> Result<TerrainMesh> {
    let t = &config.terrain;
    let mesh = match (&t.path, &t.synthetic) {
        (Some(p), _) => load_mesh(&read(&config.resolve(p))?)?,
        (None, Some(s)) => s.build()?,
        (None, None) => unreachable!("validated"),
    };
    Ok(match t.uv_bounds_world {
        Some([lo, hi]) => mesh.with_uv_bounds_world(Some((lo, hi))),
        None => mesh,
    })
}

fn load_field(config: &ProjectConfig, f: &FieldConfig) -> Result<FieldRaster> {
    match (&f.stations, &f.rasters) {
        (Some(p), _) => {
            let stations = parse_stations(&read(&config.resolve(p))?)?;
            let grid = GridSpec::around_stations(&stations, f.grid.cols, f.grid.rows, f.grid.pad)?;
            idw_interpolate(&stations, &f.idw, &grid)
        }
        (None, Some(r)) => {
            let load = |p: &Path| read_raster(&read(&config.resolve(p))?);
            FieldRaster::from_grids(&load(&r.speed)?, &load(&r.dir_x)?, &load(&r.dir_y)?)
        }
        (None, None) => unreachable!("validated"),
    }
}
