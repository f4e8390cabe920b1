use glam::{DVec2, DVec3};

/// Closest point on triangle `abc` to `p`, as barycentric weights.
///
/// Region classification after Ericson, *Real-Time Collision Detection*
/// §5.1.5. The weights are clamped to the simplex and renormalized.
pub(crate) fn closest_bary(p: DVec3, a: DVec3, b: DVec3, c: DVec3) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }

    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return simplex([1.0 - v, v, 0.0]);
    }

    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return simplex([1.0 - w, 0.0, w]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return simplex([0.0, 1.0 - w, w]);
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    simplex([1.0 - v - w, v, w])
}

/// Clamps weights to be non-negative and rescales them to sum to one.
pub(crate) fn simplex(b: [f64; 3]) -> [f64; 3] {
    let b = [b[0].max(0.0), b[1].max(0.0), b[2].max(0.0)];
    let s = b[0] + b[1] + b[2];
    if s == 1.0 {
        b
    } else {
        [b[0] / s, b[1] / s, b[2] / s]
    }
}

/// Barycentric weights of `p` in the planar triangle `abc`, unclamped.
/// `None` for a degenerate triangle.
pub(crate) fn bary_2d(p: DVec2, a: DVec2, b: DVec2, c: DVec2) -> Option<[f64; 3]> {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let den = v0.perp_dot(v1);
    if den.abs() < 1e-300 {
        return None;
    }
    let v = v2.perp_dot(v1) / den;
    let w = v0.perp_dot(v2) / den;
    Some([1.0 - v - w, v, w])
}

/// Unit tangent basis `(e1, e2)` for a unit normal `n`, with `e1` the
/// projection of +X (or +Y when `n` is nearly parallel to X).
pub fn tangent_basis(n: DVec3) -> (DVec3, DVec3) {
    let e1 = (DVec3::X - n * n.x)
        .try_normalize()
        .filter(|_| n.x.abs() < 0.999_999)
        .unwrap_or_else(|| (DVec3::Y - n * n.y).normalize());
    (e1, n.cross(e1))
}
