//! UV-mapped terrain and surface-bound locomotion.
//!
//! Positions on the terrain are held as a triangle index plus barycentric
//! weights ([`SurfacePoint`]), so anything stored that way is on the surface
//! by construction. Movement projects a displacement into the tangent plane
//! and re-projects the result onto the mesh; this approximates geodesic
//! walking and is adequate at boid step sizes.

mod bvh;
mod geometry;
mod obj;
pub mod synthetic;

pub use geometry::tangent_basis;
pub use obj::parse_obj;

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};

use self::bvh::Bvh;
use self::geometry::{bary_2d, closest_bary, simplex};
use crate::error::{Error, Result};
use crate::fieldkit::FieldRaster;
use crate::mesh::Mesh;

const MIN_TRIANGLE_AREA: f64 = 1e-12;
const UV_EPS: f64 = 1e-12;

/// A point on the terrain: triangle index plus barycentric weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub tri: u32,
    pub bary: [f64; 3],
}

impl SurfacePoint {
    pub fn new(tri: u32, bary: [f64; 3]) -> Self {
        Self { tri, bary }
    }

    /// `b_i >= 0` and `sum(b) == 1` within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.bary.iter().all(|&b| b >= 0.0) && (self.bary.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

/// Axis-aligned world rectangle `(min, max)` that UV space `[0,1]^2` maps
/// onto, used to look up raster values for surface points.
pub type WorldRect = (DVec2, DVec2);

#[derive(Debug, Clone)]
pub struct TerrainMesh {
    mesh: Mesh,
    uvs: Vec<DVec2>,
    normals: Vec<DVec3>,
    bvh: Bvh,
    uv_grid: UvGrid,
    /// Raster world rectangle covered by the UV chart. When absent, the
    /// bound raster's own extent is used.
    pub uv_bounds_world: Option<WorldRect>,
}

/// Parses OBJ text into a terrain.
pub fn load_mesh(obj_text: &str) -> Result<TerrainMesh> {
    TerrainMesh::from_mesh(parse_obj(obj_text)?)
}

impl TerrainMesh {
    /// Validates `mesh` and builds the spatial indices. Triangle winding is
    /// flipped as a whole when the area-weighted normal points down, so
    /// surface normals face +Z on the majority of the terrain.
    pub fn from_mesh(mut mesh: Mesh) -> Result<Self> {
        if mesh.triangles.is_empty() {
            return Err(Error::Mesh("terrain has no triangles".into()));
        }
        let uvs = mesh
            .uvs
            .clone()
            .ok_or_else(|| Error::Mesh("terrain has no UV coordinates".into()))?;
        if uvs.len() != mesh.positions.len() {
            return Err(Error::Mesh(format!(
                "{} UVs for {} vertices",
                uvs.len(),
                mesh.positions.len()
            )));
        }
        let nv = mesh.positions.len() as u32;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::Mesh(format!("triangle {t} has an out-of-range index")));
            }
            if 0.5 * mesh.face_cross(t).length() <= MIN_TRIANGLE_AREA {
                return Err(Error::Mesh(format!("triangle {t} is degenerate")));
            }
        }
        let up: f64 = (0..mesh.triangles.len()).map(|t| mesh.face_cross(t).z).sum();
        if up < 0.0 {
            for tri in &mut mesh.triangles {
                tri.swap(1, 2);
            }
        }

        let normals = (0..mesh.triangles.len())
            .map(|t| mesh.face_cross(t).normalize())
            .collect();
        let corners: Vec<[DVec3; 3]> = (0..mesh.triangles.len()).map(|t| mesh.corners(t)).collect();
        let bvh = Bvh::build(&corners);
        let uv_grid = UvGrid::build(&mesh.triangles, &uvs);
        Ok(Self {
            mesh,
            uvs,
            normals,
            bvh,
            uv_grid,
            uv_bounds_world: None,
        })
    }

    pub fn with_uv_bounds_world(mut self, rect: Option<WorldRect>) -> Self {
        self.uv_bounds_world = rect;
        self
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn triangle_count(&self) -> usize {
        self.mesh.triangles.len()
    }

    pub fn uvs(&self) -> &[DVec2] {
        &self.uvs
    }

    pub fn triangle_normal(&self, tri: u32) -> DVec3 {
        self.normals[tri as usize]
    }

    pub fn world_position(&self, sp: &SurfacePoint) -> DVec3 {
        let [a, b, c] = self.mesh.corners(sp.tri as usize);
        a * sp.bary[0] + b * sp.bary[1] + c * sp.bary[2]
    }

    pub fn surface_normal(&self, sp: &SurfacePoint) -> DVec3 {
        self.normals[sp.tri as usize]
    }

    pub fn surface_uv(&self, sp: &SurfacePoint) -> DVec2 {
        let [a, b, c] = self.mesh.triangles[sp.tri as usize];
        self.uvs[a as usize] * sp.bary[0]
            + self.uvs[b as usize] * sp.bary[1]
            + self.uvs[c as usize] * sp.bary[2]
    }

    /// Closest surface point to `p`; equal distances go to the lower
    /// triangle index.
    pub fn project_to_surface(&self, p: DVec3) -> SurfacePoint {
        let mut best = (f64::INFINITY, u32::MAX, [1.0, 0.0, 0.0]);
        self.bvh.nearest(p, |t| {
            let [a, b, c] = self.mesh.corners(t as usize);
            let bary = closest_bary(p, a, b, c);
            let q = a * bary[0] + b * bary[1] + c * bary[2];
            let d2 = (q - p).length_squared();
            if d2 < best.0 || (d2 == best.0 && t < best.1) {
                best = (d2, t, bary);
            }
            best.0
        });
        SurfacePoint::new(best.1, best.2)
    }

    /// Moves `sp` by the tangential part of `displacement` and re-projects
    /// onto the mesh.
    pub fn step_on_surface(&self, sp: &SurfacePoint, displacement: DVec3) -> SurfacePoint {
        if displacement == DVec3::ZERO {
            return *sp;
        }
        let n = self.surface_normal(sp);
        let tangential = displacement - n * displacement.dot(n);
        self.project_to_surface(self.world_position(sp) + tangential)
    }

    /// Surface point whose UV equals `uv`, or `None` outside the chart.
    /// Points on shared edges go to the lowest triangle index.
    pub fn locate_uv(&self, uv: DVec2) -> Option<SurfacePoint> {
        for &t in self.uv_grid.candidates(uv)? {
            let [a, b, c] = self.mesh.triangles[t as usize].map(|i| self.uvs[i as usize]);
            if let Some(w) = bary_2d(uv, a, b, c) {
                if w.iter().all(|&x| x >= -UV_EPS) {
                    return Some(SurfacePoint::new(t, simplex(w)));
                }
            }
        }
        None
    }

    /// Like [`locate_uv`](Self::locate_uv) but clamps to the nearest chart
    /// point in UV space when `uv` falls outside it.
    pub fn nearest_uv(&self, uv: DVec2) -> SurfacePoint {
        if let Some(sp) = self.locate_uv(uv) {
            return sp;
        }
        let p = uv.extend(0.0);
        let mut best = (f64::INFINITY, 0u32, [1.0, 0.0, 0.0]);
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| self.uvs[i as usize].extend(0.0));
            if (b - a).cross(c - a).length_squared() == 0.0 {
                continue;
            }
            let w = closest_bary(p, a, b, c);
            let d2 = (a * w[0] + b * w[1] + c * w[2] - p).length_squared();
            if d2 < best.0 {
                best = (d2, t as u32, w);
            }
        }
        SurfacePoint::new(best.1, best.2)
    }

    /// The world rectangle UV space maps to: the mesh's own binding when
    /// set, else the raster extent.
    pub fn uv_world_rect(&self, raster: Option<&FieldRaster>) -> Option<WorldRect> {
        self.uv_bounds_world.or_else(|| raster.map(|r| r.grid().extent()))
    }

    /// Planar extent of the mesh vertices.
    pub fn xy_extent(&self) -> WorldRect {
        let (lo, hi) = self.mesh.bounds().expect("terrain has vertices");
        (lo.truncate(), hi.truncate())
    }
}

pub fn uv_to_world(rect: &WorldRect, uv: DVec2) -> DVec2 {
    rect.0 + (rect.1 - rect.0) * uv
}

pub fn world_to_uv(rect: &WorldRect, p: DVec2) -> DVec2 {
    (p - rect.0) / (rect.1 - rect.0)
}

/// Uniform grid over the UV chart listing triangles by UV bounding box.
#[derive(Debug, Clone)]
struct UvGrid {
    lo: DVec2,
    hi: DVec2,
    dims: (usize, usize),
    cells: Vec<Vec<u32>>,
}

impl UvGrid {
    fn build(triangles: &[[u32; 3]], uvs: &[DVec2]) -> Self {
        let mut lo = DVec2::splat(f64::INFINITY);
        let mut hi = DVec2::splat(f64::NEG_INFINITY);
        for tri in triangles {
            for &i in tri {
                lo = lo.min(uvs[i as usize]);
                hi = hi.max(uvs[i as usize]);
            }
        }
        let side = ((triangles.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let dims = (side, side);
        let mut grid = Self {
            lo,
            hi,
            dims,
            cells: vec![Vec::new(); side * side],
        };
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| uvs[i as usize]);
            let (c0, r0) = grid.cell(a.min(b).min(c));
            let (c1, r1) = grid.cell(a.max(b).max(c));
            for r in r0..=r1 {
                for c in c0..=c1 {
                    grid.cells[r * dims.0 + c].push(t as u32);
                }
            }
        }
        grid
    }

    fn cell(&self, uv: DVec2) -> (usize, usize) {
        let span = (self.hi - self.lo).max(DVec2::splat(1e-300));
        let f = (uv - self.lo) / span;
        let c = ((f.x * self.dims.0 as f64).floor().max(0.0) as usize).min(self.dims.0 - 1);
        let r = ((f.y * self.dims.1 as f64).floor().max(0.0) as usize).min(self.dims.1 - 1);
        (c, r)
    }

    fn candidates(&self, uv: DVec2) -> Option<&[u32]> {
        let eps = DVec2::splat(UV_EPS);
        if uv.cmplt(self.lo - eps).any() || uv.cmpgt(self.hi + eps).any() || uv.is_nan() {
            return None;
        }
        let (c, r) = self.cell(uv);
        Some(&self.cells[r * self.dims.0 + c])
    }
}
