//! Wind-station ingestion and continuous field rasters.
//!
//! Directions use the compass convention throughout: 0° points north (+Y)
//! and angles grow clockwise, so a direction θ has the planar unit vector
//! `(sin θ, cos θ)`. Rasters store that vector, never the raw angle.

mod ascii_grid;
mod idw;
mod stations;

pub use ascii_grid::{read_raster, write_raster, AsciiGrid, Channel, NODATA_VALUE};
pub use idw::{idw_at, idw_interpolate, idw_interpolate_detailed, IdwOutcome, IdwParams, IdwValue};
pub use stations::{parse_stations, StationRecord};

use glam::DVec2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit vector `(east, north)` for a compass bearing in degrees.
pub fn compass_to_vec(direction_deg: f64) -> DVec2 {
    let r = direction_deg.to_radians();
    DVec2::new(r.sin(), r.cos())
}

/// Compass bearing in `[0, 360)` of a planar direction.
pub fn vec_to_compass(dir: DVec2) -> f64 {
    let deg = dir.x.atan2(dir.y).to_degrees();
    let deg = deg.rem_euclid(360.0);
    if deg >= 360.0 {
        0.0
    } else {
        deg
    }
}

/// Placement of a regular grid in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ncols: usize,
    pub nrows: usize,
    /// Lower-left corner of the grid (not the first cell center).
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
}

impl GridSpec {
    pub const DEFAULT_CELLS: usize = 64;
    pub const DEFAULT_PAD: f64 = 0.1;

    /// A grid covering the stations' bounding box padded by `pad` (a
    /// fraction of the box extent) on every side. Cells are square; the
    /// shorter axis is centered inside the grid.
    pub fn around_stations(stations: &[StationRecord], ncols: usize, nrows: usize, pad: f64) -> Result<Self> {
        if stations.is_empty() {
            return Err(Error::NoStations);
        }
        if ncols == 0 || nrows == 0 {
            return Err(Error::Raster("grid dimensions must be positive".into()));
        }
        if !(pad >= 0.0 && pad.is_finite()) {
            return Err(Error::Raster(format!(
                "pad must be a finite fraction >= 0, got {pad}"
            )));
        }
        let (mut lo, mut hi) = (DVec2::splat(f64::INFINITY), DVec2::splat(f64::NEG_INFINITY));
        for s in stations {
            let p = s.position();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let extent = hi - lo;
        // A single station (or a line of them) still needs a finite cell.
        let extent = DVec2::new(
            if extent.x > 0.0 {
                extent.x
            } else {
                extent.y.max(1.0)
            },
            if extent.y > 0.0 {
                extent.y
            } else {
                extent.x.max(1.0)
            },
        );
        let padded = extent * (1.0 + 2.0 * pad);
        let cell_size = (padded.x / ncols as f64).max(padded.y / nrows as f64);
        let center = (lo + hi) * 0.5;
        Ok(Self {
            ncols,
            nrows,
            origin_x: center.x - cell_size * ncols as f64 * 0.5,
            origin_y: center.y - cell_size * nrows as f64 * 0.5,
            cell_size,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.ncols == 0 || self.nrows == 0 {
            return Err(Error::Raster("grid dimensions must be positive".into()));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::Raster(format!(
                "cell_size must be positive, got {}",
                self.cell_size
            )));
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(Error::Raster("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn cell_center(&self, col: usize, row: usize) -> DVec2 {
        DVec2::new(
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// World-space rectangle `(min, max)` covered by the cells.
    pub fn extent(&self) -> (DVec2, DVec2) {
        let lo = DVec2::new(self.origin_x, self.origin_y);
        let size = DVec2::new(self.ncols as f64, self.nrows as f64) * self.cell_size;
        (lo, lo + size)
    }
}

/// Interpolated wind field: a speed channel and a unit direction vector per
/// cell. Cells are stored row-major with row 0 at the southern edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRaster {
    grid: GridSpec,
    speed: Vec<f64>,
    dir_x: Vec<f64>,
    dir_y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub speed: f64,
    /// Unit `(east, north)` vector.
    pub dir: DVec2,
}

impl FieldSample {
    pub fn compass_deg(&self) -> f64 {
        vec_to_compass(self.dir)
    }
}

impl FieldRaster {
    /// Builds a raster from raw channels. Direction vectors are renormalized;
    /// negative or non-finite speeds and zero-length directions are rejected.
    pub fn from_channels(
        grid: GridSpec,
        speed: Vec<f64>,
        mut dir_x: Vec<f64>,
        mut dir_y: Vec<f64>,
    ) -> Result<Self> {
        grid.validate()?;
        let n = grid.len();
        if speed.len() != n || dir_x.len() != n || dir_y.len() != n {
            return Err(Error::Raster(format!(
                "channel sizes {}/{}/{} do not match a {}x{} grid",
                speed.len(),
                dir_x.len(),
                dir_y.len(),
                grid.ncols,
                grid.nrows
            )));
        }
        for i in 0..n {
            let (col, row) = (i % grid.ncols, i / grid.ncols);
            if !(speed[i] >= 0.0 && speed[i].is_finite()) {
                return Err(Error::Raster(format!(
                    "speed at (col {col}, row {row}) must be finite and >= 0, got {}",
                    speed[i]
                )));
            }
            let d = DVec2::new(dir_x[i], dir_y[i])
                .try_normalize()
                .ok_or_else(|| Error::Raster(format!("zero-length direction at (col {col}, row {row})")))?;
            dir_x[i] = d.x;
            dir_y[i] = d.y;
        }
        Ok(Self {
            grid,
            speed,
            dir_x,
            dir_y,
        })
    }

    /// Assembles a raster from three single-channel grids with equal geometry.
    pub fn from_grids(speed: &AsciiGrid, dir_x: &AsciiGrid, dir_y: &AsciiGrid) -> Result<Self> {
        let spec = speed.grid_spec();
        for (name, g) in [("dir_x", dir_x), ("dir_y", dir_y)] {
            if g.grid_spec() != spec {
                return Err(Error::Raster(format!(
                    "{name} grid geometry differs from the speed grid"
                )));
            }
        }
        Self::from_channels(
            spec,
            speed.values.clone(),
            dir_x.values.clone(),
            dir_y.values.clone(),
        )
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ncols(&self) -> usize {
        self.grid.ncols
    }

    pub fn nrows(&self) -> usize {
        self.grid.nrows
    }

    fn index(&self, col: usize, row: usize) -> usize {
        row * self.grid.ncols + col
    }

    pub fn speed_at(&self, col: usize, row: usize) -> f64 {
        self.speed[self.index(col, row)]
    }

    pub fn dir_at(&self, col: usize, row: usize) -> DVec2 {
        let i = self.index(col, row);
        DVec2::new(self.dir_x[i], self.dir_y[i])
    }

    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::Speed => &self.speed,
            Channel::DirX => &self.dir_x,
            Channel::DirY => &self.dir_y,
        }
    }

    /// `(min, max)` of the speed channel.
    pub fn speed_range(&self) -> (f64, f64) {
        self.speed
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            })
    }

    /// Bilinear sample over the four surrounding cell centers. Positions
    /// outside the raster clamp to the edge cells.
    pub fn sample(&self, x: f64, y: f64) -> FieldSample {
        let g = &self.grid;
        let (c0, c1, tx) = bracket((x - g.origin_x) / g.cell_size - 0.5, g.ncols);
        let (r0, r1, ty) = bracket((y - g.origin_y) / g.cell_size - 0.5, g.nrows);

        let lerp2 = |ch: &[f64]| {
            let v00 = ch[self.index(c0, r0)];
            let v10 = ch[self.index(c1, r0)];
            let v01 = ch[self.index(c0, r1)];
            let v11 = ch[self.index(c1, r1)];
            let bottom = v00 * (1.0 - tx) + v10 * tx;
            let top = v01 * (1.0 - tx) + v11 * tx;
            bottom * (1.0 - ty) + top * ty
        };

        let speed = lerp2(&self.speed);
        let raw = DVec2::new(lerp2(&self.dir_x), lerp2(&self.dir_y));
        let dir = raw.try_normalize().unwrap_or_else(|| {
            // Opposing corners cancel: take the nearest node's direction.
            let col = if tx < 0.5 { c0 } else { c1 };
            let row = if ty < 0.5 { r0 } else { r1 };
            self.dir_at(col, row)
        });
        FieldSample { speed, dir }
    }
}

/// Clamped lower/upper node indices and the blend parameter along one axis.
fn bracket(f: f64, n: usize) -> (usize, usize, f64) {
    let max = (n - 1) as f64;
    let f = if f.is_nan() { 0.0 } else { f.clamp(0.0, max) };
    let i0 = f.floor() as usize;
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, f - i0 as f64)
}

/// Free-function form of [`FieldRaster::sample`].
pub fn sample_field(raster: &FieldRaster, x: f64, y: f64) -> FieldSample {
    raster.sample(x, y)
}
