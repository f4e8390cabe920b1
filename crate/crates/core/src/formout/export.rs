//! ASCII OBJ and PLY writers. Numbers use the shortest representation that
//! round-trips, so identical scenes produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use super::Scene;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// OBJ text: one `g` group per object, `v`/`vt`/`vn`/`f` records with
/// 1-based indices. `vt` is written only for meshes that carry UVs.
pub fn obj_text(scene: &Scene) -> Result<String> {
    if scene.is_empty() {
        return Err(Error::NothingToExport);
    }
    let mut out = String::from("# windform\n");
    let mut v_base = 1usize;
    let mut vt_base = 1usize;
    for obj in &scene.objects {
        let m = &obj.mesh;
        if m.is_empty() {
            continue;
        }
        let _ = writeln!(out, "g {}", sanitize(&obj.name));
        for p in &m.positions {
            let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
        }
        if let Some(uvs) = &m.uvs {
            for t in uvs {
                let _ = writeln!(out, "vt {} {}", t.x, t.y);
            }
        }
        for n in m.vertex_normals() {
            let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
        }
        for tri in &m.triangles {
            out.push('f');
            for &i in tri {
                let v = v_base + i as usize;
                let t = vt_base + i as usize;
                if m.uvs.is_some() {
                    let _ = write!(out, " {v}/{t}/{v}");
                } else {
                    let _ = write!(out, " {v}//{v}");
                }
            }
            out.push('\n');
        }
        v_base += m.vertex_count();
        if m.uvs.is_some() {
            vt_base += m.vertex_count();
        }
    }
    Ok(out)
}

pub fn write_obj(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = obj_text(scene)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// ASCII PLY with double-precision vertices and triangle faces.
pub fn ply_text(mesh: &Mesh) -> Result<String> {
    if mesh.is_empty() {
        return Err(Error::NothingToExport);
    }
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\ncomment windform\n");
    let _ = writeln!(out, "element vertex {}", mesh.vertex_count());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    let _ = writeln!(out, "element face {}", mesh.triangles.len());
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for p in &mesh.positions {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    for [a, b, c] in &mesh.triangles {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    Ok(out)
}

pub fn write_ply(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = ply_text(mesh)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    if s.is_empty() {
        "object".into()
    } else {
        s
    }
}
