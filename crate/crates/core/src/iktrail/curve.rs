use std::f64::consts::TAU;

use glam::DVec3;
use serde::{Deserialize, Serialize};

/// Simple parametric paths for the end locator and the chain root, each
/// evaluated on `t ∈ [0, 1]`. Planar kinds lie in the XY plane through
/// their center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamCurve {
    Line {
        start: DVec3,
        end: DVec3,
    },
    /// Counter-clockwise from `start_deg` to `end_deg` (math angles).
    Arc {
        center: DVec3,
        radius: f64,
        start_deg: f64,
        end_deg: f64,
    },
    /// One full counter-clockwise turn starting at `phase_deg`.
    Circle {
        center: DVec3,
        radius: f64,
        #[serde(default)]
        phase_deg: f64,
    },
    /// `center + amplitude * sin(2π·frequency·t + phase)` per axis.
    /// Frequency ratio 1:2 traces the figure-eight of a flapping wing tip.
    Lissajous {
        center: DVec3,
        amplitude: DVec3,
        frequency: DVec3,
        #[serde(default)]
        phase_deg: DVec3,
    },
    /// Arc-length parameterized polyline; a single point is a fixed path.
    Polyline {
        points: Vec<DVec3>,
    },
}

impl ParamCurve {
    pub fn constant(p: DVec3) -> Self {
        ParamCurve::Line { start: p, end: p }
    }

    /// Point at `t`, with `t` clamped to `[0, 1]`.
    pub fn evaluate(&self, t: f64) -> DVec3 {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        match self {
            ParamCurve::Line { start, end } => start.lerp(*end, t),
            ParamCurve::Arc {
                center,
                radius,
                start_deg,
                end_deg,
            } => {
                let a = (start_deg + (end_deg - start_deg) * t).to_radians();
                *center + *radius * DVec3::new(a.cos(), a.sin(), 0.0)
            }
            ParamCurve::Circle {
                center,
                radius,
                phase_deg,
            } => {
                let a = phase_deg.to_radians() + TAU * t;
                *center + *radius * DVec3::new(a.cos(), a.sin(), 0.0)
            }
            ParamCurve::Lissajous {
                center,
                amplitude,
                frequency,
                phase_deg,
            } => {
                let arg = TAU * *frequency * t
                    + DVec3::new(
                        phase_deg.x.to_radians(),
                        phase_deg.y.to_radians(),
                        phase_deg.z.to_radians(),
                    );
                *center + *amplitude * DVec3::new(arg.x.sin(), arg.y.sin(), arg.z.sin())
            }
            ParamCurve::Polyline { points } => polyline_at(points, t),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &DVec3, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be finite"))
            }
        };
        match self {
            ParamCurve::Line { start, end } => {
                finite(start, "start")?;
                finite(end, "end")
            }
            ParamCurve::Arc {
                center,
                radius,
                start_deg,
                end_deg,
            } => {
                finite(center, "center")?;
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(format!("radius must be >= 0, got {radius}"));
                }
                if !(start_deg.is_finite() && end_deg.is_finite()) {
                    return Err("arc angles must be finite".into());
                }
                Ok(())
            }
            ParamCurve::Circle {
                center,
                radius,
                phase_deg,
            } => {
                finite(center, "center")?;
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(format!("radius must be >= 0, got {radius}"));
                }
                if !phase_deg.is_finite() {
                    return Err("phase_deg must be finite".into());
                }
                Ok(())
            }
            ParamCurve::Lissajous {
                center,
                amplitude,
                frequency,
                phase_deg,
            } => {
                finite(center, "center")?;
                finite(amplitude, "amplitude")?;
                finite(frequency, "frequency")?;
                finite(phase_deg, "phase_deg")
            }
            ParamCurve::Polyline { points } => {
                if points.is_empty() {
                    return Err("polyline needs at least one point".into());
                }
                points.iter().try_for_each(|p| finite(p, "points"))
            }
        }
    }
}

fn polyline_at(points: &[DVec3], t: f64) -> DVec3 {
    match points.len() {
        0 => DVec3::ZERO,
        1 => points[0],
        _ => {
            let lengths: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).length()).collect();
            let total: f64 = lengths.iter().sum();
            if total == 0.0 {
                return points[0];
            }
            let mut remaining = t * total;
            for (i, &len) in lengths.iter().enumerate() {
                if remaining <= len && len > 0.0 {
                    return points[i].lerp(points[i + 1], remaining / len);
                }
                remaining -= len;
            }
            *points.last().unwrap()
        }
    }
}
