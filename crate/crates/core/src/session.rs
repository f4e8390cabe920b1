//! Interactive swarm session: commands, step-boundary application, a replay
//! log, and state snapshots. Transport-agnostic; the HTTP service wraps it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::config::{Project, SwarmScenario};
use crate::error::{Error, Result};
use crate::formout::{write_obj, Scene, TrailSample, TrailSet};
use crate::swarm::{attractor_position, AttractorTrack, BoidParams, Keyframe, SwarmMetrics, SwarmSim};
use crate::terrain::world_to_uv;

/// A brushed attractor: raster-world XY points lifted onto the terrain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stroke {
    pub points: Vec<DVec2>,
    pub duration_s: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(default)]
    pub z_offset: f64,
}

fn default_weight() -> f64 {
    1.0
}

/// A partial [`BoidParams`] update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsPatch {
    pub r_sep: Option<f64>,
    pub r_align: Option<f64>,
    pub r_coh: Option<f64>,
    pub w_sep: Option<f64>,
    pub w_align: Option<f64>,
    pub w_coh: Option<f64>,
    pub w_attract: Option<f64>,
    pub v_max: Option<f64>,
    pub a_max: Option<f64>,
    pub dt: Option<f64>,
}

impl ParamsPatch {
    pub fn apply(&self, p: &BoidParams) -> BoidParams {
        BoidParams {
            r_sep: self.r_sep.unwrap_or(p.r_sep),
            r_align: self.r_align.unwrap_or(p.r_align),
            r_coh: self.r_coh.unwrap_or(p.r_coh),
            w_sep: self.w_sep.unwrap_or(p.w_sep),
            w_align: self.w_align.unwrap_or(p.w_align),
            w_coh: self.w_coh.unwrap_or(p.w_coh),
            w_attract: self.w_attract.unwrap_or(p.w_attract),
            v_max: self.v_max.unwrap_or(p.v_max),
            a_max: self.a_max.unwrap_or(p.a_max),
            dt: self.dt.unwrap_or(p.dt),
        }
    }
}

/// Commands that may arrive while a run is in progress. They are applied at
/// the next step boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Command {
    Stroke(Stroke),
    Params(ParamsPatch),
}

/// A command as applied: before step `step` ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedCommand {
    pub step: u64,
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub revision: u64,
    /// Index the stroke's track will have.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: u32,
    pub position: DVec3,
    pub velocity: DVec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorView {
    pub index: usize,
    pub weight: f64,
    pub position: DVec3,
    /// Keyframe positions, for drawing the track.
    pub path: Vec<DVec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub revision: u64,
    pub running: bool,
    pub step_index: u64,
    pub time: f64,
    pub params: BoidParams,
    pub agents: Vec<AgentView>,
    pub attractors: Vec<AttractorView>,
    pub metrics: SwarmMetrics,
    pub digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    /// Tubes swept along the agent trails.
    Trails,
    /// Terrain plus trail tubes.
    Scene,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRequest {
    pub kind: ExportKind,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_sides")]
    pub sides: usize,
}

fn default_radius() -> f64 {
    0.1
}

fn default_sides() -> usize {
    8
}

pub struct Session {
    id: String,
    project: Arc<Project>,
    scenario: SwarmScenario,
    sim: SwarmSim,
    trails: TrailSet,
    revision: u64,
    running: bool,
    pending: Vec<Command>,
    log: Vec<LoggedCommand>,
}

impl Session {
    pub fn new(id: impl Into<String>, project: Arc<Project>, scenario: SwarmScenario) -> Result<Self> {
        let sim = project.swarm_sim(&scenario)?;
        let mut trails = TrailSet::with_agents(sim.agents.len());
        append_samples(&sim, &mut trails);
        Ok(Self {
            id: id.into(),
            project,
            scenario,
            sim,
            trails,
            revision: 0,
            running: false,
            pending: Vec::new(),
            log: Vec::new(),
        })
    }

    /// A fresh session with `log` re-applied at the recorded steps.
    pub fn replay(
        id: impl Into<String>,
        project: Arc<Project>,
        scenario: SwarmScenario,
        log: &[LoggedCommand],
        final_step: u64,
    ) -> Result<Self> {
        let mut s = Self::new(id, project, scenario)?;
        for entry in log {
            while s.sim.step_index() < entry.step {
                s.advance();
            }
            s.submit(entry.command.clone())?;
        }
        while s.sim.step_index() < final_step {
            s.advance();
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn sim(&self) -> &SwarmSim {
        &self.sim
    }

    pub fn scenario(&self) -> &SwarmScenario {
        &self.scenario
    }

    pub fn log(&self) -> &[LoggedCommand] {
        &self.log
    }

    pub fn trails(&self) -> &TrailSet {
        &self.trails
    }

    /// Validates and accepts a command. While running it is queued for the
    /// next step boundary; otherwise it applies immediately.
    pub fn submit(&mut self, cmd: Command) -> Result<Ack> {
        let mut track_index = None;
        match &cmd {
            Command::Stroke(s) => {
                validate_stroke(s)?;
                let queued = self
                    .pending
                    .iter()
                    .filter(|c| matches!(c, Command::Stroke(_)))
                    .count();
                track_index = Some(self.sim.tracks.len() + queued);
            }
            Command::Params(patch) => {
                let merged = self
                    .pending
                    .iter()
                    .filter_map(|c| match c {
                        Command::Params(p) => Some(p),
                        _ => None,
                    })
                    .chain(std::iter::once(patch))
                    .fold(self.sim.params, |acc, p| p.apply(&acc));
                let problems = merged.problems();
                if !problems.is_empty() {
                    return Err(Error::Invalid(
                        problems
                            .into_iter()
                            .map(|(f, m)| format!("params.{f}: {m}"))
                            .collect(),
                    ));
                }
            }
        }
        self.revision += 1;
        if self.running {
            self.pending.push(cmd);
        } else {
            self.apply(cmd);
        }
        Ok(Ack {
            revision: self.revision,
            track_index,
        })
    }

    fn apply(&mut self, cmd: Command) {
        match &cmd {
            Command::Stroke(s) => {
                let track = self.lift_stroke(s);
                self.sim.tracks.push(track);
            }
            Command::Params(p) => self.sim.params = p.apply(&self.sim.params),
        }
        self.log.push(LoggedCommand {
            step: self.sim.step_index(),
            command: cmd,
        });
    }

    /// Keyframes at the terrain under each point, lowered by `z_offset`,
    /// spread evenly over `duration_s` from the current time.
    fn lift_stroke(&self, s: &Stroke) -> AttractorTrack {
        let rect = self.project.uv_world_rect();
        let terrain = &self.project.terrain;
        let t0 = self.sim.time();
        let last = (s.points.len() - 1).max(1) as f64;
        let keyframes = s
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let sp = terrain.nearest_uv(world_to_uv(&rect, *p));
                Keyframe {
                    t: t0 + s.duration_s * k as f64 / last,
                    position: terrain.world_position(&sp) - DVec3::Z * s.z_offset,
                }
            })
            .collect();
        AttractorTrack {
            keyframes,
            weight: s.weight,
        }
    }

    /// Marks the session as running; run-exclusive commands now fail.
    pub fn begin_run(&mut self) -> Result<()> {
        if self.running {
            return Err(Error::Busy(format!("session {} is already running", self.id)));
        }
        self.running = true;
        Ok(())
    }

    pub fn end_run(&mut self) {
        self.running = false;
        self.drain();
    }

    fn drain(&mut self) {
        for cmd in std::mem::take(&mut self.pending) {
            self.apply(cmd);
        }
    }

    /// Applies queued commands, then runs one step.
    pub fn advance(&mut self) {
        self.drain();
        self.sim.step();
        append_samples(&self.sim, &mut self.trails);
    }

    /// Runs `steps` steps as one exclusive run.
    pub fn run(&mut self, steps: usize) -> Result<SwarmMetrics> {
        self.begin_run()?;
        for _ in 0..steps {
            self.advance();
        }
        self.end_run();
        Ok(self.sim.metrics())
    }

    pub fn state(&self) -> SessionState {
        let t = self.sim.time();
        let agents = self
            .sim
            .agents
            .iter()
            .zip(self.sim.positions())
            .map(|(a, position)| AgentView {
                id: a.id,
                position,
                velocity: a.velocity,
            })
            .collect();
        let attractors = self
            .sim
            .tracks
            .iter()
            .enumerate()
            .map(|(index, tr)| AttractorView {
                index,
                weight: tr.weight,
                position: attractor_position(tr, t),
                path: tr.keyframes.iter().map(|k| k.position).collect(),
            })
            .collect();
        SessionState {
            session_id: self.id.clone(),
            revision: self.revision,
            running: self.running,
            step_index: self.sim.step_index(),
            time: t,
            params: self.sim.params,
            agents,
            attractors,
            metrics: self.sim.metrics(),
            digest: self.sim.digest(),
        }
    }

    /// Writes the requested geometry under `dir`; returns the files written.
    pub fn export(&self, req: &ExportRequest, dir: &Path) -> Result<Vec<PathBuf>> {
        if self.running {
            return Err(Error::Busy(format!("session {} is running", self.id)));
        }
        let tubes = self.trails.to_tubes(req.radius, req.sides)?;
        if tubes.is_empty() {
            return Err(Error::NothingToExport);
        }
        let step = self.sim.step_index();
        let (scene, name) = match req.kind {
            ExportKind::Trails => (tubes, format!("{}_trails_{step}.obj", self.id)),
            ExportKind::Scene => {
                let mut scene = Scene::default();
                scene.push("terrain", self.project.terrain.mesh().clone());
                scene.extend(tubes);
                (scene, format!("{}_scene_{step}.obj", self.id))
            }
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(name);
        write_obj(&scene, &path)?;
        Ok(vec![path])
    }
}

fn append_samples(sim: &SwarmSim, trails: &mut TrailSet) {
    let t = sim.time();
    for (trail, position) in trails.trails.iter_mut().zip(sim.positions()) {
        trail.samples.push(TrailSample { t, position });
    }
}

fn validate_stroke(s: &Stroke) -> Result<()> {
    let mut errs = Vec::new();
    if s.points.is_empty() {
        errs.push("points: need at least one point".to_string());
    }
    if s.points.iter().any(|p| !p.is_finite()) {
        errs.push("points: must be finite".to_string());
    }
    if !(s.duration_s >= 0.0 && s.duration_s.is_finite()) {
        errs.push(format!("duration_s: must be >= 0, got {}", s.duration_s));
    } else if s.points.len() > 1 && s.duration_s == 0.0 {
        errs.push("duration_s: must be > 0 for strokes with several points".to_string());
    }
    if !s.weight.is_finite() {
        errs.push(format!("weight: must be finite, got {}", s.weight));
    }
    if !s.z_offset.is_finite() {
        errs.push(format!("z_offset: must be finite, got {}", s.z_offset));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(errs))
    }
}
