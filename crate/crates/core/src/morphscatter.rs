//! Morph-target instances arrayed over the terrain's UV chart.
//!
//! Each instance takes its morph frame from the local wind speed and its yaw
//! from the local wind direction. An optional pivot offset moves the center
//! of the yaw rotation away from the instance origin, so neighbouring
//! instances with different yaws swing through phase-shifted arcs instead of
//! spinning in place.

use glam::{DMat4, DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldkit::FieldRaster;
use crate::formout::{InstanceSet, Placement};
use crate::mesh::Mesh;
use crate::terrain::{uv_to_world, SurfacePoint, TerrainMesh};

/// Topologically identical meshes placed at equally spaced keyframes on a
/// timeline of `frame_count` frames.
#[derive(Debug, Clone)]
pub struct MorphTargetSet {
    targets: Vec<Mesh>,
    frame_count: u32,
}

impl MorphTargetSet {
    pub fn new(targets: Vec<Mesh>, frame_count: u32) -> Result<Self> {
        if targets.len() < 2 {
            return Err(Error::Morph(format!(
                "need at least 2 morph targets, got {}",
                targets.len()
            )));
        }
        if frame_count < 2 {
            return Err(Error::Morph(format!(
                "frame_count must be >= 2, got {frame_count}"
            )));
        }
        if targets.len() > frame_count as usize {
            return Err(Error::Morph(format!(
                "{} targets do not fit in {frame_count} frames",
                targets.len()
            )));
        }
        let first = &targets[0];
        for (k, t) in targets.iter().enumerate().skip(1) {
            if t.vertex_count() != first.vertex_count() || t.triangles != first.triangles {
                return Err(Error::Morph(format!(
                    "target {k} does not share target 0's topology"
                )));
            }
        }
        Ok(Self { targets, frame_count })
    }

    pub fn targets(&self) -> &[Mesh] {
        &self.targets
    }

    pub fn frame_count(&self) -> u32 {
        self.frame_count
    }

    pub fn max_frame(&self) -> f64 {
        (self.frame_count - 1) as f64
    }

    /// Frame at which target `i` sits unblended.
    pub fn keyframe(&self, i: usize) -> f64 {
        i as f64 * self.max_frame() / (self.targets.len() - 1) as f64
    }
}

/// Piecewise-linear blend of the two targets bracketing `frame`.
pub fn morph_evaluate(set: &MorphTargetSet, frame: f64) -> Result<Mesh> {
    if !(0.0..=set.max_frame()).contains(&frame) {
        return Err(Error::Morph(format!(
            "frame {frame} outside [0, {}]",
            set.max_frame()
        )));
    }
    let k = set.targets.len();
    let seg = frame * (k - 1) as f64 / set.max_frame();
    let nearest = seg.round();
    // Keyframes reproduce their target verbatim despite rounding in `seg`.
    if (seg - nearest).abs() <= 1e-9 {
        return Ok(set.targets[nearest as usize].clone());
    }
    let i = (seg.floor() as usize).min(k - 2);
    let t = seg - i as f64;
    let (a, b) = (&set.targets[i], &set.targets[i + 1]);
    let positions = a
        .positions
        .iter()
        .zip(&b.positions)
        .map(|(p, q)| p.lerp(*q, t))
        .collect();
    Ok(Mesh {
        positions,
        triangles: a.triangles.clone(),
        uvs: a.uvs.clone(),
    })
}

/// Speed to scale multiplier: `offset + slope * speed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub offset: f64,
    pub slope: f64,
}

impl LinearMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.offset + self.slope * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterSpec {
    pub nx: usize,
    pub ny: usize,
    pub base_scale: f64,
    pub scale_from_speed: Option<LinearMap>,
    /// Rotation center relative to the instance origin, in instance units.
    pub pivot_offset: DVec3,
    /// Take the morph frame from wind speed (otherwise frame 0).
    pub bind_frame: bool,
    /// Take the yaw from wind direction (otherwise yaw 0).
    pub bind_yaw: bool,
}

impl Default for ScatterSpec {
    fn default() -> Self {
        Self {
            nx: 10,
            ny: 10,
            base_scale: 1.0,
            scale_from_speed: None,
            pivot_offset: DVec3::ZERO,
            bind_frame: true,
            bind_yaw: true,
        }
    }
}

impl ScatterSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.nx == 0 {
            errs.push("scatter.nx: must be >= 1".to_string());
        }
        if self.ny == 0 {
            errs.push("scatter.ny: must be >= 1".to_string());
        }
        if !(self.base_scale > 0.0 && self.base_scale.is_finite()) {
            errs.push(format!(
                "scatter.base_scale: must be > 0, got {}",
                self.base_scale
            ));
        }
        if !self.pivot_offset.is_finite() {
            errs.push("scatter.pivot_offset: must be finite".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub sp: SurfacePoint,
    /// Counter-clockwise rotation about the surface normal, radians. Zero
    /// faces north; a compass bearing θ gives yaw `-θ`.
    pub yaw: f64,
    pub scale: f64,
    pub frame: f64,
    pub pivot_offset: DVec3,
}

/// Yaw (CCW radians from north) that faces a planar `(east, north)` direction.
pub fn yaw_from_direction(dir: DVec2) -> f64 {
    (-dir.x).atan2(dir.y)
}

/// Places one instance per UV grid node that lands on the terrain chart.
/// Output is row-major: `v` outer, `u` inner.
pub fn scatter_instances(
    terrain: &TerrainMesh,
    raster: &FieldRaster,
    set: &MorphTargetSet,
    spec: &ScatterSpec,
) -> Result<Vec<Instance>> {
    spec.validate()?;
    let rect = terrain
        .uv_world_rect(Some(raster))
        .expect("raster provides a fallback rectangle");
    let (rlo, rhi) = raster.grid().extent();
    let (lo, hi) = (rect.0.min(rect.1), rect.0.max(rect.1));
    if lo.x > rhi.x || hi.x < rlo.x || lo.y > rhi.y || hi.y < rlo.y {
        return Err(Error::Scatter(
            "raster/mesh UV mismatch: the UV chart's world rectangle misses the raster".into(),
        ));
    }

    let (smin, smax) = raster.speed_range();
    let span = smax - smin;
    let mut out = Vec::with_capacity(spec.nx * spec.ny);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let uv = DVec2::new(
                (i as f64 + 0.5) / spec.nx as f64,
                (j as f64 + 0.5) / spec.ny as f64,
            );
            let Some(sp) = terrain.locate_uv(uv) else {
                continue;
            };
            let world = uv_to_world(&rect, uv);
            let sample = raster.sample(world.x, world.y);
            let frame = if spec.bind_frame && span > 0.0 {
                ((sample.speed - smin) / span * set.max_frame()).clamp(0.0, set.max_frame())
            } else {
                0.0
            };
            let yaw = if spec.bind_yaw {
                yaw_from_direction(sample.dir)
            } else {
                0.0
            };
            let scale = spec.base_scale * spec.scale_from_speed.map_or(1.0, |m| m.apply(sample.speed));
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Scatter(format!(
                    "scale {scale} at UV ({}, {}) is not positive",
                    uv.x, uv.y
                )));
            }
            out.push(Instance {
                sp,
                yaw,
                scale,
                frame,
                pivot_offset: spec.pivot_offset,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Scatter(
            "raster/mesh UV mismatch: no grid node falls on the UV chart".into(),
        ));
    }
    Ok(out)
}

/// Scale, then yaw about the surface normal through `pivot_offset`, then
/// translate to the instance's surface point.
pub fn instance_transform(terrain: &TerrainMesh, inst: &Instance) -> DMat4 {
    let n = terrain.surface_normal(&inst.sp);
    let p = inst.pivot_offset;
    DMat4::from_translation(terrain.world_position(&inst.sp))
        * DMat4::from_translation(p)
        * DMat4::from_axis_angle(n, inst.yaw)
        * DMat4::from_translation(-p)
        * DMat4::from_scale(DVec3::splat(inst.scale))
}

/// Morphed, transformed instance geometry in world coordinates.
pub fn bake_instances(
    terrain: &TerrainMesh,
    instances: &[Instance],
    set: &MorphTargetSet,
) -> Result<Vec<Mesh>> {
    instances
        .iter()
        .map(|inst| {
            let m = morph_evaluate(set, inst.frame)?;
            Ok(m.transformed(&instance_transform(terrain, inst)))
        })
        .collect()
}

/// Instances as placements over shared morph results; equal frames share
/// one evaluated mesh.
pub fn instance_set(
    terrain: &TerrainMesh,
    instances: &[Instance],
    set: &MorphTargetSet,
) -> Result<InstanceSet> {
    let mut out = InstanceSet::default();
    let mut by_frame: Vec<(u64, usize)> = Vec::new();
    for inst in instances {
        let key = inst.frame.to_bits();
        let mesh = match by_frame.iter().find(|(k, _)| *k == key) {
            Some(&(_, idx)) => idx,
            None => {
                let idx = out.add_mesh(
                    format!("morph_f{:.4}", inst.frame),
                    morph_evaluate(set, inst.frame)?,
                );
                by_frame.push((key, idx));
                idx
            }
        };
        out.instances.push(Placement {
            mesh,
            transform: instance_transform(terrain, inst),
        });
    }
    Ok(out)
}
