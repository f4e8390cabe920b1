//! Solid geometry from trails and instance sets, and mesh file export.

mod export;
mod tube;

pub use export::{obj_text, ply_text, write_obj, write_ply};
pub use tube::{sweep_tube, transport_frames, TubeFrame};

use glam::{DMat4, DVec3};
use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;

/// A named mesh in an export scene; each becomes one OBJ group.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub mesh: Mesh,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn push(&mut self, name: impl Into<String>, mesh: Mesh) {
        self.objects.push(SceneObject {
            name: name.into(),
            mesh,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.objects.iter().all(|o| o.mesh.is_empty())
    }

    pub fn vertex_count(&self) -> usize {
        self.objects.iter().map(|o| o.mesh.vertex_count()).sum()
    }

    pub fn extend(&mut self, other: Scene) {
        self.objects.extend(other.objects);
    }
}

/// One placed copy of a shared mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub mesh: usize,
    pub transform: DMat4,
}

/// Shared meshes plus affine placements of them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstanceSet {
    pub meshes: Vec<SceneObject>,
    pub instances: Vec<Placement>,
}

impl InstanceSet {
    pub fn add_mesh(&mut self, name: impl Into<String>, mesh: Mesh) -> usize {
        self.meshes.push(SceneObject {
            name: name.into(),
            mesh,
        });
        self.meshes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Applies every placement, one scene object per instance.
    pub fn bake(&self) -> Scene {
        let mut scene = Scene::default();
        for (i, inst) in self.instances.iter().enumerate() {
            let src = &self.meshes[inst.mesh];
            scene.push(format!("{}_{i}", src.name), src.mesh.transformed(&inst.transform));
        }
        scene
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrailSample {
    pub t: f64,
    pub position: DVec3,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trail {
    pub agent: u32,
    pub samples: Vec<TrailSample>,
}

/// Time-stamped per-agent polylines.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrailSet {
    pub trails: Vec<Trail>,
}

impl TrailSet {
    pub fn with_agents(n: usize) -> Self {
        Self {
            trails: (0..n as u32)
                .map(|agent| Trail {
                    agent,
                    samples: Vec::new(),
                })
                .collect(),
        }
    }

    /// Sweeps a tube along each trail. Trails that never move are skipped.
    pub fn to_tubes(&self, radius: f64, sides: usize) -> crate::Result<Scene> {
        let mut scene = Scene::default();
        for trail in &self.trails {
            let pts: Vec<DVec3> = trail.samples.iter().map(|s| s.position).collect();
            match sweep_tube(&pts, radius, sides) {
                Ok(mesh) => scene.push(format!("trail_{}", trail.agent), mesh),
                Err(crate::Error::Geometry(msg)) if msg.contains("distinct") => {
                    log::debug!("trail {} skipped: {msg}", trail.agent);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(scene)
    }
}
