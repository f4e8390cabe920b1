//! Procedural height-field terrains used by the reference scenarios.

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use super::TerrainMesh;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relief {
    Flat,
    /// Paraboloid with its minimum (height 0) at the center, rising to
    /// `depth` at the middle of each edge.
    Bowl {
        depth: f64,
    },
    /// Sum of two orthogonal cosine ridges with `waves` periods per side.
    Hills {
        amplitude: f64,
        waves: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTerrain {
    #[serde(flatten)]
    pub relief: Relief,
    /// Side length; the terrain spans `[-size/2, size/2]` in X and Y.
    pub size: f64,
    /// Quads per side.
    pub resolution: usize,
}

impl SyntheticTerrain {
    pub fn flat(size: f64, resolution: usize) -> Self {
        Self {
            relief: Relief::Flat,
            size,
            resolution,
        }
    }

    pub fn bowl(size: f64, resolution: usize, depth: f64) -> Self {
        Self {
            relief: Relief::Bowl { depth },
            size,
            resolution,
        }
    }

    pub fn hills(size: f64, resolution: usize, amplitude: f64, waves: f64) -> Self {
        Self {
            relief: Relief::Hills { amplitude, waves },
            size,
            resolution,
        }
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        let half = 0.5 * self.size;
        match self.relief {
            Relief::Flat => 0.0,
            Relief::Bowl { depth } => depth * (x * x + y * y) / (half * half),
            Relief::Hills { amplitude, waves } => {
                let k = std::f64::consts::TAU * waves / self.size;
                0.5 * amplitude * ((k * x).cos() + (k * y).cos())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.size > 0.0 && self.size.is_finite()) {
            return Err(Error::Mesh(format!(
                "synthetic size must be > 0, got {}",
                self.size
            )));
        }
        if self.resolution == 0 || self.resolution > 2048 {
            return Err(Error::Mesh(format!(
                "synthetic resolution must be in 1..=2048, got {}",
                self.resolution
            )));
        }
        Ok(())
    }

    /// The grid mesh with UVs spanning `[0,1]^2`.
    pub fn mesh(&self) -> Result<Mesh> {
        self.validate()?;
        let n = self.resolution;
        let half = 0.5 * self.size;
        let mut positions = Vec::with_capacity((n + 1) * (n + 1));
        let mut uvs = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let u = i as f64 / n as f64;
                let v = j as f64 / n as f64;
                let x = -half + u * self.size;
                let y = -half + v * self.size;
                positions.push(DVec3::new(x, y, self.height(x, y)));
                uvs.push(DVec2::new(u, v));
            }
        }
        let stride = (n + 1) as u32;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n as u32 {
            for i in 0..n as u32 {
                let a = j * stride + i;
                let (b, c, d) = (a + 1, a + 1 + stride, a + stride);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Ok(Mesh::new(positions, triangles).with_uvs(uvs))
    }

    /// Builds the terrain with its UV chart bound to its own plan extent,
    /// so raster world coordinates coincide with mesh XY.
    pub fn build(&self) -> Result<TerrainMesh> {
        let half = 0.5 * self.size;
        Ok(TerrainMesh::from_mesh(self.mesh()?)?
            .with_uv_bounds_world(Some((DVec2::splat(-half), DVec2::splat(half)))))
    }
}
