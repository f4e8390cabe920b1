use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldkit::FieldRaster;
use crate::terrain::{world_to_uv, TerrainMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    pub position: DVec3,
}

/// Animated attractor (positive weight) or detractor (negative weight).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorTrack {
    pub keyframes: Vec<Keyframe>,
    pub weight: f64,
}

impl AttractorTrack {
    pub fn fixed(position: DVec3, weight: f64) -> Self {
        Self {
            keyframes: vec![Keyframe { t: 0.0, position }],
            weight,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.keyframes.is_empty() {
            return Err("track needs at least one keyframe".into());
        }
        if !self.weight.is_finite() {
            return Err(format!("weight must be finite, got {}", self.weight));
        }
        for k in &self.keyframes {
            if !(k.t.is_finite() && k.position.is_finite()) {
                return Err("keyframes must be finite".into());
            }
        }
        if let Some(w) = self.keyframes.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(format!(
                "keyframe times must increase strictly ({} then {})",
                w[0].t, w[1].t
            ));
        }
        Ok(())
    }

    pub fn position(&self, t: f64) -> DVec3 {
        attractor_position(self, t)
    }
}

/// Linear interpolation between bracketing keys, clamped outside the key
/// range.
pub fn attractor_position(track: &AttractorTrack, t: f64) -> DVec3 {
    let keys = &track.keyframes;
    let first = keys[0];
    if t <= first.t || keys.len() == 1 {
        return first.position;
    }
    let last = keys[keys.len() - 1];
    if t >= last.t {
        return last.position;
    }
    let i = keys.partition_point(|k| k.t <= t);
    let (a, b) = (keys[i - 1], keys[i]);
    if t == a.t {
        return a.position;
    }
    a.position.lerp(b.position, (t - a.t) / (b.t - a.t))
}

/// Streamline through the wind field, used as an animated attractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamlineSpec {
    /// Start point in raster coordinates.
    pub seed: DVec2,
    /// Number of keyframes.
    pub steps: usize,
    /// Advance per step at the raster's maximum speed.
    pub step_len: f64,
    /// Depth of the attractor below the terrain surface.
    #[serde(default)]
    pub z_offset: f64,
    /// Time between keyframes.
    #[serde(default = "default_key_dt")]
    pub key_dt: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_key_dt() -> f64 {
    1.0
}

fn default_weight() -> f64 {
    1.0
}

/// Forward-Euler trace of `spec.seed` through the raster direction field,
/// stepping `step_len * speed / max_speed`. Each sample is placed on the
/// terrain through the UV binding and lowered by `z_offset`.
pub fn streamline_track(
    raster: &FieldRaster,
    terrain: &TerrainMesh,
    spec: &StreamlineSpec,
) -> Result<AttractorTrack> {
    if spec.steps < 1 {
        return Err(Error::Swarm("streamline steps must be >= 1".into()));
    }
    if !(spec.step_len >= 0.0 && spec.step_len.is_finite()) {
        return Err(Error::Swarm(format!(
            "streamline step_len must be >= 0, got {}",
            spec.step_len
        )));
    }
    if !(spec.key_dt > 0.0) {
        return Err(Error::Swarm(format!(
            "streamline key_dt must be > 0, got {}",
            spec.key_dt
        )));
    }
    let (_, max_speed) = raster.speed_range();
    if !(max_speed > 0.0) {
        return Err(Error::Swarm(
            "streamline needs a raster with nonzero speed".into(),
        ));
    }
    let rect = terrain
        .uv_world_rect(Some(raster))
        .expect("raster supplies a rectangle");

    let mut p = spec.seed;
    let mut keyframes = Vec::with_capacity(spec.steps);
    for k in 0..spec.steps {
        let sp = terrain.nearest_uv(world_to_uv(&rect, p));
        let ground = terrain.world_position(&sp);
        keyframes.push(Keyframe {
            t: k as f64 * spec.key_dt,
            position: ground - DVec3::Z * spec.z_offset,
        });
        let s = raster.sample(p.x, p.y);
        p += s.dir * spec.step_len * s.speed / max_speed;
    }
    Ok(AttractorTrack {
        keyframes,
        weight: spec.weight,
    })
}
