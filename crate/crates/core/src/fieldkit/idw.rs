//! Shepard inverse distance weighting.

use glam::DVec2;
use serde::{Deserialize, Serialize};

use super::{FieldRaster, GridSpec, StationRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdwParams {
    /// Distance exponent `p` in `w = d^-p`.
    pub power: f64,
    /// Query points closer than this to a station take its value verbatim.
    pub coincidence_radius: f64,
}

impl Default for IdwParams {
    fn default() -> Self {
        Self {
            power: 2.0,
            coincidence_radius: 1e-9,
        }
    }
}

impl IdwParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::Invalid(vec![format!(
                "idw.power: must be > 0, got {}",
                self.power
            )]));
        }
        if !(self.coincidence_radius >= 0.0 && self.coincidence_radius.is_finite()) {
            return Err(Error::Invalid(vec![format!(
                "idw.coincidence_radius: must be >= 0, got {}",
                self.coincidence_radius
            )]));
        }
        Ok(())
    }
}

/// Interpolated values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdwValue {
    pub speed: f64,
    /// Unit `(east, north)` direction.
    pub dir: DVec2,
    /// Set when the weighted direction sum vanished and the nearest
    /// station's direction was used instead.
    pub direction_fallback: bool,
}

/// Evaluates the Shepard interpolant at `(x, y)`.
pub fn idw_at(stations: &[StationRecord], params: &IdwParams, x: f64, y: f64) -> IdwValue {
    debug_assert!(!stations.is_empty());
    let q = DVec2::new(x, y);

    let mut nearest = 0;
    let mut nearest_d2 = f64::INFINITY;
    for (i, s) in stations.iter().enumerate() {
        let d2 = (s.position() - q).length_squared();
        if d2 < nearest_d2 {
            nearest_d2 = d2;
            nearest = i;
        }
    }
    let r = params.coincidence_radius;
    if nearest_d2 == 0.0 || nearest_d2 < r * r {
        let s = &stations[nearest];
        return IdwValue {
            speed: s.speed,
            dir: s.direction(),
            direction_fallback: false,
        };
    }

    let (mut w_sum, mut speed_sum, mut dir_sum) = (0.0, 0.0, DVec2::ZERO);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in stations {
        let d2 = (s.position() - q).length_squared();
        let w = if params.power == 2.0 {
            1.0 / d2
        } else {
            d2.powf(-0.5 * params.power)
        };
        w_sum += w;
        speed_sum += w * s.speed;
        dir_sum += w * s.direction();
        lo = lo.min(s.speed);
        hi = hi.max(s.speed);
    }
    // Rounding may push a convex combination one ulp outside its hull.
    let speed = (speed_sum / w_sum).clamp(lo, hi);
    let len = dir_sum.length();
    if len > 1e-12 * w_sum {
        IdwValue {
            speed,
            dir: dir_sum / len,
            direction_fallback: false,
        }
    } else {
        IdwValue {
            speed,
            dir: stations[nearest].direction(),
            direction_fallback: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdwOutcome {
    pub raster: FieldRaster,
    /// `(col, row)` cells whose direction fell back to the nearest station.
    pub direction_fallbacks: Vec<(usize, usize)>,
}

/// Interpolates the stations at every cell center of `grid`.
pub fn idw_interpolate_detailed(
    stations: &[StationRecord],
    params: &IdwParams,
    grid: &GridSpec,
) -> Result<IdwOutcome> {
    if stations.is_empty() {
        return Err(Error::NoStations);
    }
    params.validate()?;
    grid.validate()?;

    let n = grid.len();
    let mut speed = Vec::with_capacity(n);
    let mut dir_x = Vec::with_capacity(n);
    let mut dir_y = Vec::with_capacity(n);
    let mut fallbacks = Vec::new();
    for row in 0..grid.nrows {
        for col in 0..grid.ncols {
            let c = grid.cell_center(col, row);
            let v = idw_at(stations, params, c.x, c.y);
            if v.direction_fallback {
                fallbacks.push((col, row));
            }
            speed.push(v.speed);
            dir_x.push(v.dir.x);
            dir_y.push(v.dir.y);
        }
    }
    Ok(IdwOutcome {
        raster: FieldRaster::from_channels(*grid, speed, dir_x, dir_y)?,
        direction_fallbacks: fallbacks,
    })
}

/// Interpolates the stations onto `grid`. Cells whose weighted direction
/// cancels out are logged and take the nearest station's direction.
pub fn idw_interpolate(
    stations: &[StationRecord],
    params: &IdwParams,
    grid: &GridSpec,
) -> Result<FieldRaster> {
    let out = idw_interpolate_detailed(stations, params, grid)?;
    if !out.direction_fallbacks.is_empty() {
        log::warn!(
            "direction cancelled out in {} cell(s), first at {:?}; used nearest station",
            out.direction_fallbacks.len(),
            out.direction_fallbacks[0]
        );
    }
    Ok(out.raster)
}
