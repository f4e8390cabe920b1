//! Boids bound to the terrain surface and steered by attractor tracks.

mod metrics;
mod track;

pub use metrics::{mean_height, mean_nn_distance, polarization, SwarmMetrics};
pub use track::{attractor_position, streamline_track, AttractorTrack, Keyframe, StreamlineSpec};

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fieldkit::FieldRaster;
use crate::formout::{TrailSample, TrailSet};
use crate::rng::SplitMix64;
use crate::terrain::{tangent_basis, SurfacePoint, TerrainMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoidParams {
    pub r_sep: f64,
    pub r_align: f64,
    pub r_coh: f64,
    pub w_sep: f64,
    pub w_align: f64,
    pub w_coh: f64,
    pub w_attract: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub dt: f64,
}

impl Default for BoidParams {
    fn default() -> Self {
        Self {
            r_sep: 1.0,
            r_align: 2.5,
            r_coh: 5.0,
            w_sep: 1.5,
            w_align: 1.0,
            w_coh: 1.0,
            w_attract: 1.0,
            v_max: 2.0,
            a_max: 4.0,
            dt: 0.05,
        }
    }
}

impl BoidParams {
    /// Every violated constraint as `(field, message)`.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut check = |name: &'static str, v: f64, positive: bool| {
            let ok = v.is_finite() && if positive { v > 0.0 } else { v >= 0.0 };
            if !ok {
                let rel = if positive { "> 0" } else { ">= 0" };
                out.push((name, format!("must be {rel}, got {v}")));
            }
        };
        check("r_sep", self.r_sep, false);
        check("r_align", self.r_align, false);
        check("r_coh", self.r_coh, false);
        check("w_sep", self.w_sep, false);
        check("w_align", self.w_align, false);
        check("w_coh", self.w_coh, false);
        check("w_attract", self.w_attract, false);
        check("v_max", self.v_max, true);
        check("a_max", self.a_max, true);
        check("dt", self.dt, true);
        if self.r_sep > self.r_align {
            out.push(("r_sep", format!("must be <= r_align ({})", self.r_align)));
        }
        if self.r_align > self.r_coh {
            out.push(("r_align", format!("must be <= r_coh ({})", self.r_coh)));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(
                p.into_iter().map(|(f, m)| format!("{f}: {m}")).collect(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u32,
    pub sp: SurfacePoint,
    pub velocity: DVec3,
}

/// How neighbor candidates are gathered. Both give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborSearch {
    #[default]
    SpatialHash,
    AllPairs,
}

/// UV rectangle `(min, max)` agents spawn in.
pub type UvRect = (DVec2, DVec2);

#[derive(Debug, Clone)]
pub struct SwarmSim {
    pub agents: Vec<AgentState>,
    pub params: BoidParams,
    pub tracks: Vec<AttractorTrack>,
    pub neighbor_search: NeighborSearch,
    terrain: Arc<TerrainMesh>,
    raster: Option<Arc<FieldRaster>>,
    seed: u64,
    step_index: u64,
}

/// Places `n` agents uniformly in `spawn` (UV) with random tangent headings
/// at half the top speed. Draws per agent, in id order: u, v, heading.
pub fn init_swarm(
    n: usize,
    seed: u64,
    spawn: UvRect,
    terrain: Arc<TerrainMesh>,
    params: BoidParams,
) -> Result<SwarmSim> {
    if n < 1 {
        return Err(Error::Swarm("swarm needs at least one agent".into()));
    }
    params.validate()?;
    let (lo, hi) = spawn;
    if !(lo.is_finite() && hi.is_finite() && lo.x <= hi.x && lo.y <= hi.y) {
        return Err(Error::Swarm(format!(
            "spawn region must have min <= max, got {lo} .. {hi}"
        )));
    }
    let (clo, chi) = terrain
        .uvs()
        .iter()
        .fold((DVec2::INFINITY, DVec2::NEG_INFINITY), |(a, b), &uv| {
            (a.min(uv), b.max(uv))
        });
    if hi.x < clo.x || lo.x > chi.x || hi.y < clo.y || lo.y > chi.y {
        return Err(Error::Swarm(format!(
            "spawn region {lo} .. {hi} lies outside the UV chart {clo} .. {chi}"
        )));
    }

    let mut rng = SplitMix64::new(seed);
    let agents = (0..n as u32)
        .map(|id| {
            let u = rng.range(lo.x, hi.x);
            let v = rng.range(lo.y, hi.y);
            let heading = rng.range(0.0, TAU);
            let sp = terrain.nearest_uv(DVec2::new(u, v));
            let (e1, e2) = tangent_basis(terrain.surface_normal(&sp));
            let velocity = (heading.cos() * e1 + heading.sin() * e2) * (params.v_max * 0.5);
            AgentState { id, sp, velocity }
        })
        .collect();
    Ok(SwarmSim {
        agents,
        params,
        tracks: Vec::new(),
        neighbor_search: NeighborSearch::default(),
        terrain,
        raster: None,
        seed,
        step_index: 0,
    })
}

impl SwarmSim {
    pub fn with_raster(mut self, raster: Option<Arc<FieldRaster>>) -> Self {
        self.raster = raster;
        self
    }

    pub fn terrain(&self) -> &TerrainMesh {
        &self.terrain
    }

    pub fn raster(&self) -> Option<&FieldRaster> {
        self.raster.as_deref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.params.dt
    }

    pub fn positions(&self) -> Vec<DVec3> {
        self.agents
            .iter()
            .map(|a| self.terrain.world_position(&a.sp))
            .collect()
    }

    pub fn velocities(&self) -> Vec<DVec3> {
        self.agents.iter().map(|a| a.velocity).collect()
    }

    /// Where the cohesion target of an agent with neighbor mean `mean` lands
    /// once the attractor tracks shift it.
    fn cohesion_target(&self, mean: DVec3, t: f64) -> DVec3 {
        let total: f64 = self.tracks.iter().map(|k| k.weight.abs()).sum();
        if total == 0.0 {
            return mean;
        }
        let shift: DVec3 = self
            .tracks
            .iter()
            .map(|k| k.weight * (attractor_position(k, t) - mean))
            .sum();
        mean + self.params.w_attract * shift / total
    }

    /// Advances one step. Every agent reads the same pre-step snapshot.
    pub fn step(&mut self) {
        let p = self.params;
        let t = self.time();
        let pos = self.positions();
        let vel = self.velocities();
        let grid = match self.neighbor_search {
            NeighborSearch::SpatialHash if p.r_coh > 0.0 => Some(SpatialHash::build(&pos, p.r_coh)),
            _ => None,
        };
        let (r_sep2, r_align2, r_coh2) = (p.r_sep * p.r_sep, p.r_align * p.r_align, p.r_coh * p.r_coh);

        let mut candidates = Vec::new();
        let next: Vec<AgentState> = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, agent)| {
                let me = pos[i];
                candidates.clear();
                match (&grid, self.neighbor_search) {
                    (Some(g), _) => g.candidates(me, &mut candidates),
                    (None, NeighborSearch::AllPairs) => candidates.extend(0..pos.len() as u32),
                    (None, NeighborSearch::SpatialHash) => {}
                }

                let mut sep = DVec3::ZERO;
                let (mut v_sum, mut n_align) = (DVec3::ZERO, 0usize);
                let (mut p_sum, mut n_coh) = (DVec3::ZERO, 0usize);
                for &j in candidates.iter() {
                    let j = j as usize;
                    if j == i {
                        continue;
                    }
                    let d = me - pos[j];
                    let d2 = d.length_squared();
                    if d2 > r_coh2 {
                        continue;
                    }
                    p_sum += pos[j];
                    n_coh += 1;
                    if d2 <= r_align2 {
                        v_sum += vel[j];
                        n_align += 1;
                    }
                    if d2 <= r_sep2 && d2 > 0.0 {
                        sep += d / d2;
                    }
                }

                let sep = sep.normalize_or_zero();
                let align = if n_align > 0 {
                    (v_sum / n_align as f64 - agent.velocity).normalize_or_zero()
                } else {
                    DVec3::ZERO
                };
                let mean = if n_coh > 0 { p_sum / n_coh as f64 } else { me };
                let coh = (self.cohesion_target(mean, t) - me).normalize_or_zero();

                let mut a = (p.w_sep * sep + p.w_align * align + p.w_coh * coh) * p.a_max;
                a = a.clamp_length_max(p.a_max);
                let n = self.terrain.surface_normal(&agent.sp);
                a -= n * a.dot(n);

                let v = (agent.velocity + a * p.dt).clamp_length_max(p.v_max);
                let sp = self.terrain.step_on_surface(&agent.sp, v * p.dt);
                let n2 = self.terrain.surface_normal(&sp);
                AgentState {
                    id: agent.id,
                    sp,
                    velocity: v - n2 * v.dot(n2),
                }
            })
            .collect();
        self.agents = next;
        self.step_index += 1;
    }

    pub fn run(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Runs `steps` steps, sampling every agent's position initially and
    /// after every `stride`-th step.
    pub fn record_trails(&mut self, steps: usize, stride: usize) -> Result<TrailSet> {
        if steps < 1 {
            return Err(Error::Swarm("steps must be ≥ 1".into()));
        }
        if stride < 1 {
            return Err(Error::Swarm("stride must be ≥ 1".into()));
        }
        let mut trails = TrailSet::with_agents(self.agents.len());
        self.append_samples(&mut trails);
        for k in 1..=steps {
            self.step();
            if k % stride == 0 {
                self.append_samples(&mut trails);
            }
        }
        Ok(trails)
    }

    fn append_samples(&self, trails: &mut TrailSet) {
        let t = self.time();
        for (trail, position) in trails.trails.iter_mut().zip(self.positions()) {
            trail.samples.push(TrailSample { t, position });
        }
    }

    pub fn metrics(&self) -> SwarmMetrics {
        let pos = self.positions();
        SwarmMetrics {
            step: self.step_index,
            time: self.time(),
            polarization: polarization(&self.velocities()),
            mean_nn_distance: mean_nn_distance(&pos).ok(),
            mean_height: mean_height(&pos),
        }
    }

    /// SHA-256 over the exact bits of the step counter and every agent.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.step_index.to_le_bytes());
        h.update((self.agents.len() as u64).to_le_bytes());
        for a in &self.agents {
            h.update(a.id.to_le_bytes());
            h.update(a.sp.tri.to_le_bytes());
            for b in a.sp.bary {
                h.update(b.to_bits().to_le_bytes());
            }
            for c in a.velocity.to_array() {
                h.update(c.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Agent ids bucketed by cubic cell of side `cell`.
struct SpatialHash {
    cell: f64,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl SpatialHash {
    fn key(&self, p: DVec3) -> (i64, i64, i64) {
        let c = (p / self.cell).floor();
        (c.x as i64, c.y as i64, c.z as i64)
    }

    fn build(points: &[DVec3], cell: f64) -> Self {
        let mut grid = Self {
            cell,
            cells: HashMap::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            let k = grid.key(p);
            grid.cells.entry(k).or_default().push(i as u32);
        }
        grid
    }

    /// Ids in the 27 cells around `p`, ascending.
    fn candidates(&self, p: DVec3, out: &mut Vec<u32>) {
        let (x, y, z) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&(x + dx, y + dy, z + dz)) {
                        out.extend_from_slice(ids);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}
