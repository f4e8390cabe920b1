//! Tubes swept along polylines with rotation-minimizing frames.

use glam::{DMat3, DVec2, DVec3};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

const MIN_SEGMENT: f64 = 1e-12;

/// Orthonormal frame at one polyline vertex: `tangent`, `normal` and
/// `binormal = tangent x normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeFrame {
    pub point: DVec3,
    pub tangent: DVec3,
    pub normal: DVec3,
    pub binormal: DVec3,
}

/// Drops points closer than `MIN_SEGMENT` to the previously kept point.
fn dedup(points: &[DVec3]) -> Vec<DVec3> {
    let mut out: Vec<DVec3> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().is_none_or(|q: &DVec3| (p - *q).length() > MIN_SEGMENT) {
            out.push(p);
        }
    }
    out
}

/// Parallel-transport frames along `points` (after dropping zero-length
/// segments). Interior tangents bisect the adjacent segment directions. The
/// first normal is the coordinate axis least aligned with the first segment,
/// orthogonalized against it.
pub fn transport_frames(points: &[DVec3]) -> Result<Vec<TubeFrame>> {
    let pts = dedup(points);
    if pts.len() < 2 {
        return Err(Error::Geometry(format!(
            "tube needs at least 2 distinct points, got {}",
            pts.len()
        )));
    }
    let seg: Vec<DVec3> = pts.windows(2).map(|w| (w[1] - w[0]).normalize()).collect();
    let n = pts.len();
    let tangents: Vec<DVec3> = (0..n)
        .map(|i| {
            if i == 0 {
                seg[0]
            } else if i == n - 1 {
                seg[n - 2]
            } else {
                (seg[i - 1] + seg[i]).try_normalize().unwrap_or(seg[i])
            }
        })
        .collect();

    let t0 = tangents[0];
    let a = t0.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        DVec3::X
    } else if a.y <= a.z {
        DVec3::Y
    } else {
        DVec3::Z
    };
    let mut normal = (axis - t0 * axis.dot(t0)).normalize();

    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            normal = transport(normal, tangents[i - 1], tangents[i]);
        }
        let t = tangents[i];
        // Re-orthogonalize against accumulated drift.
        normal = (normal - t * normal.dot(t)).normalize();
        frames.push(TubeFrame {
            point: pts[i],
            tangent: t,
            normal,
            binormal: t.cross(normal),
        });
    }
    Ok(frames)
}

/// Rotates `v` by the minimal rotation taking unit `from` to unit `to`.
fn transport(v: DVec3, from: DVec3, to: DVec3) -> DVec3 {
    let axis = from.cross(to);
    let s = axis.length();
    let c = from.dot(to);
    // Parallel: nothing to do. Antiparallel: a half-turn about `v` itself
    // maps `from` to `to` and leaves `v` unchanged.
    if s < 1e-15 {
        return v;
    }
    DMat3::from_axis_angle(axis / s, s.atan2(c)) * v
}

/// Capped tube of `radius` with `sides` segments around, swept along
/// `points`. Vertices: `sides` per ring, then the start and end cap centers.
pub fn sweep_tube(points: &[DVec3], radius: f64, sides: usize) -> Result<Mesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Geometry(format!("tube radius must be > 0, got {radius}")));
    }
    if sides < 3 {
        return Err(Error::Geometry(format!("tube needs >= 3 sides, got {sides}")));
    }
    let frames = transport_frames(points)?;
    let rings = frames.len();

    let mut length = vec![0.0; rings];
    for i in 1..rings {
        length[i] = length[i - 1] + (frames[i].point - frames[i - 1].point).length();
    }
    let total = length[rings - 1];

    let mut positions = Vec::with_capacity(rings * sides + 2);
    let mut uvs = Vec::with_capacity(rings * sides + 2);
    for (i, f) in frames.iter().enumerate() {
        for k in 0..sides {
            let theta = std::f64::consts::TAU * k as f64 / sides as f64;
            positions.push(f.point + radius * (theta.cos() * f.normal + theta.sin() * f.binormal));
            uvs.push(DVec2::new(length[i] / total, k as f64 / sides as f64));
        }
    }
    let start_center = positions.len() as u32;
    positions.push(frames[0].point);
    uvs.push(DVec2::new(0.0, 0.5));
    let end_center = positions.len() as u32;
    positions.push(frames[rings - 1].point);
    uvs.push(DVec2::new(1.0, 0.5));

    let s = sides as u32;
    let idx = |ring: usize, k: u32| ring as u32 * s + (k % s);
    let mut triangles = Vec::with_capacity(2 * sides * (rings - 1) + 2 * sides);
    for i in 0..rings - 1 {
        for k in 0..s {
            let (a, b) = (idx(i, k), idx(i, k + 1));
            let (c, d) = (idx(i + 1, k + 1), idx(i + 1, k));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    for k in 0..s {
        triangles.push([start_center, idx(0, k + 1), idx(0, k)]);
        triangles.push([end_center, idx(rings - 1, k), idx(rings - 1, k + 1)]);
    }
    Ok(Mesh::new(positions, triangles).with_uvs(uvs))
}
