//! Wavefront OBJ subset: `v`, `vt`, and triangle or quad `f` records.

use std::collections::{BTreeSet, HashMap};

use glam::{DVec2, DVec3};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Parses OBJ text into a mesh with per-vertex UVs.
///
/// Every face corner must reference a texture coordinate. A position used
/// with more than one texture coordinate is duplicated; the first use keeps
/// the original index and later variants are appended. Quads are split along
/// their (0, 2) diagonal.
pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut positions: Vec<DVec3> = Vec::new();
    let mut texcoords: Vec<DVec2> = Vec::new();
    // (line, corners as (v, vt) zero-based)
    let mut faces: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    let mut ignored: BTreeSet<String> = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let mut it = l.split_whitespace();
        let kw = it.next().unwrap_or_default();
        let err = |message: String| Error::Obj { line, message };
        match kw {
            "v" => {
                let c = floats(&mut it, 3).map_err(err)?;
                positions.push(DVec3::new(c[0], c[1], c[2]));
            }
            "vt" => {
                let c = floats(&mut it, 2).map_err(err)?;
                texcoords.push(DVec2::new(c[0], c[1]));
            }
            "vn" => {}
            "f" => {
                let mut corners = Vec::with_capacity(4);
                for tok in it {
                    let mut parts = tok.split('/');
                    let v = resolve(parts.next().unwrap_or(""), positions.len(), "vertex").map_err(err)?;
                    let vt = match parts.next() {
                        Some(s) if !s.is_empty() => {
                            resolve(s, texcoords.len(), "texture coordinate").map_err(err)?
                        }
                        _ => {
                            return Err(Error::Obj {
                                line,
                                message: format!("face corner {tok:?} has no vt index"),
                            })
                        }
                    };
                    corners.push((v, vt));
                }
                if !(3..=4).contains(&corners.len()) {
                    return Err(Error::Obj {
                        line,
                        message: format!("faces must be triangles or quads, got {} corners", corners.len()),
                    });
                }
                faces.push((line, corners));
            }
            other => {
                ignored.insert(other.to_string());
            }
        }
    }
    if !ignored.is_empty() {
        log::warn!(
            "ignored unsupported OBJ records: {}",
            ignored.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    if faces.is_empty() {
        return Err(Error::Mesh("OBJ has no faces".into()));
    }

    let mut first_vt: Vec<Option<usize>> = vec![None; positions.len()];
    let mut extra: HashMap<(usize, usize), u32> = HashMap::new();
    let mut out_pos = positions.clone();
    let mut out_uv = vec![DVec2::ZERO; positions.len()];
    let mut triangles = Vec::with_capacity(faces.len() * 2);

    for (line, corners) in &faces {
        let mut idx = Vec::with_capacity(corners.len());
        for &(v, vt) in corners {
            let id = match first_vt[v] {
                None => {
                    first_vt[v] = Some(vt);
                    out_uv[v] = texcoords[vt];
                    v as u32
                }
                Some(f) if f == vt => v as u32,
                Some(_) => *extra.entry((v, vt)).or_insert_with(|| {
                    out_pos.push(positions[v]);
                    out_uv.push(texcoords[vt]);
                    (out_pos.len() - 1) as u32
                }),
            };
            idx.push(id);
        }
        let tris: &[[usize; 3]] = if idx.len() == 4 {
            &[[0, 1, 2], [0, 2, 3]]
        } else {
            &[[0, 1, 2]]
        };
        for t in tris {
            let tri = [idx[t[0]], idx[t[1]], idx[t[2]]];
            let [a, b, c] = tri.map(|k| out_pos[k as usize]);
            if 0.5 * (b - a).cross(c - a).length() <= 1e-12 {
                return Err(Error::Obj {
                    line: *line,
                    message: "degenerate face (zero area)".into(),
                });
            }
            triangles.push(tri);
        }
    }

    Ok(Mesh::new(out_pos, triangles).with_uvs(out_uv))
}

fn floats<'a>(it: &mut impl Iterator<Item = &'a str>, n: usize) -> std::result::Result<Vec<f64>, String> {
    let vals: Vec<&str> = it.collect();
    if vals.len() < n {
        return Err(format!("expected {n} numbers, got {}", vals.len()));
    }
    vals[..n]
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{s:?} is not a number"))
        })
        .collect()
}

/// Resolves a 1-based (or negative, relative) OBJ index to zero-based.
fn resolve(tok: &str, count: usize, what: &str) -> std::result::Result<usize, String> {
    let i: i64 = tok
        .parse()
        .map_err(|_| format!("{what} index {tok:?} is not an integer"))?;
    let resolved = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        return Err(format!("{what} index 0 is invalid (OBJ indices are 1-based)"));
    };
    if resolved < 0 || resolved >= count as i64 {
        return Err(format!("{what} index {i} out of range ({count} defined so far)"));
    }
    Ok(resolved as usize)
}
