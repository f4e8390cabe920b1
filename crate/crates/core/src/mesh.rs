//! Plain indexed triangle meshes shared by the generators and exporters.

use std::collections::HashMap;

use glam::{DMat4, DVec2, DVec3};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub positions: Vec<DVec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Per-vertex texture coordinates, when the mesh has a UV chart.
    pub uvs: Option<Vec<DVec2>>,
}

impl Mesh {
    pub fn new(positions: Vec<DVec3>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            positions,
            triangles,
            uvs: None,
        }
    }

    pub fn with_uvs(mut self, uvs: Vec<DVec2>) -> Self {
        debug_assert_eq!(uvs.len(), self.positions.len());
        self.uvs = Some(uvs);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, tri: usize) -> [DVec3; 3] {
        let [a, b, c] = self.triangles[tri];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Unnormalized face normal (twice the area).
    pub fn face_cross(&self, tri: usize) -> DVec3 {
        let [a, b, c] = self.corners(tri);
        (b - a).cross(c - a)
    }

    /// Area-weighted vertex normals. Vertices with no incident area get +Z.
    pub fn vertex_normals(&self) -> Vec<DVec3> {
        let mut acc = vec![DVec3::ZERO; self.positions.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let n = self.face_cross(t);
            for &v in tri {
                acc[v as usize] += n;
            }
        }
        acc.into_iter()
            .map(|n| n.try_normalize().unwrap_or(DVec3::Z))
            .collect()
    }

    pub fn bounds(&self) -> Option<(DVec3, DVec3)> {
        let first = *self.positions.first()?;
        Some(
            self.positions
                .iter()
                .fold((first, first), |(lo, hi), p| (lo.min(*p), hi.max(*p))),
        )
    }

    /// Applies an affine transform to every position.
    pub fn transformed(&self, m: &DMat4) -> Mesh {
        Mesh {
            positions: self.positions.iter().map(|p| m.transform_point3(*p)).collect(),
            triangles: self.triangles.clone(),
            uvs: self.uvs.clone(),
        }
    }

    /// Counts how many faces use each undirected edge.
    pub fn edge_use_counts(&self) -> HashMap<(u32, u32), usize> {
        let mut counts = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *counts.entry((p.min(q), p.max(q))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// True when every edge is shared by exactly two faces and each shared
    /// edge is traversed in opposite directions (consistent orientation).
    pub fn is_closed_manifold(&self) -> bool {
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *directed.entry((p, q)).or_insert(0) += 1;
            }
        }
        if directed.values().any(|&n| n != 1) {
            return false;
        }
        directed.keys().all(|&(p, q)| directed.contains_key(&(q, p)))
    }
}
