//! ESRI ASCII grid persistence for single raster channels.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FieldRaster, GridSpec};
use crate::error::{Error, Result};

pub const NODATA_VALUE: f64 = -9999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Speed,
    DirX,
    DirY,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Speed, Channel::DirX, Channel::DirY];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Speed => "speed",
            Channel::DirX => "dir_x",
            Channel::DirY => "dir_y",
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Raster(format!("unknown channel {s:?}")))
    }
}

/// A single-channel grid as stored on disk. `values` is row-major with row 0
/// at the southern edge, matching [`FieldRaster`].
#[derive(Debug, Clone, PartialEq)]
pub struct AsciiGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
    pub nodata: Option<f64>,
    pub values: Vec<f64>,
}

impl AsciiGrid {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            ncols: self.ncols,
            nrows: self.nrows,
            origin_x: self.xllcorner,
            origin_y: self.yllcorner,
            cell_size: self.cellsize,
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncols {}", self.ncols);
        let _ = writeln!(out, "nrows {}", self.nrows);
        let _ = writeln!(out, "xllcorner {}", self.xllcorner);
        let _ = writeln!(out, "yllcorner {}", self.yllcorner);
        let _ = writeln!(out, "cellsize {}", self.cellsize);
        let _ = writeln!(out, "NODATA_value {}", self.nodata.unwrap_or(NODATA_VALUE));
        for row in (0..self.nrows).rev() {
            let line = &self.values[row * self.ncols..(row + 1) * self.ncols];
            for (i, v) in line.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                // Shortest round-trip representation.
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Serializes one channel of `raster` as ASCII grid text.
pub fn write_raster(raster: &FieldRaster, channel: Channel) -> String {
    let g = raster.grid();
    AsciiGrid {
        ncols: g.ncols,
        nrows: g.nrows,
        xllcorner: g.origin_x,
        yllcorner: g.origin_y,
        cellsize: g.cell_size,
        nodata: Some(NODATA_VALUE),
        values: raster.channel(channel).to_vec(),
    }
    .to_text()
}

/// Parses ASCII grid text. Cells holding the NODATA value are rejected.
pub fn read_raster(text: &str) -> Result<AsciiGrid> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut cellsize = None;
    let mut nodata = None;

    while let Some(&(line, l)) = lines.peek() {
        let mut parts = l.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        if key.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
            break;
        }
        let value = parts.next().ok_or_else(|| Error::RasterLine {
            line,
            message: format!("header key {key:?} has no value"),
        })?;
        if parts.next().is_some() {
            return Err(Error::RasterLine {
                line,
                message: "header line has trailing fields".into(),
            });
        }
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::RasterLine {
                    line,
                    message: format!("{key} value {v:?} is not a number"),
                })
        };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::RasterLine {
                    line,
                    message: format!("{key} must be a positive integer, got {v:?}"),
                })
        };
        match key.as_str() {
            "ncols" => ncols = Some(count(value)?),
            "nrows" => nrows = Some(count(value)?),
            "xllcorner" => xll = Some(num(value)?),
            "yllcorner" => yll = Some(num(value)?),
            "cellsize" => cellsize = Some(num(value)?),
            "nodata_value" => nodata = Some(num(value)?),
            _ => {
                return Err(Error::RasterLine {
                    line,
                    message: format!("unknown header key {key:?}"),
                })
            }
        }
        lines.next();
    }

    let missing = |name: &str| Error::Raster(format!("malformed header: missing {name}"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let xllcorner = xll.ok_or_else(|| missing("xllcorner"))?;
    let yllcorner = yll.ok_or_else(|| missing("yllcorner"))?;
    let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
    if cellsize <= 0.0 {
        return Err(Error::Raster(format!(
            "malformed header: cellsize must be positive, got {cellsize}"
        )));
    }

    let mut values = vec![0.0; ncols * nrows];
    let mut text_row = 0;
    for (line, l) in lines {
        if text_row == nrows {
            return Err(Error::RasterLine {
                line,
                message: format!("more than {nrows} data rows"),
            });
        }
        let row = nrows - 1 - text_row;
        let mut n = 0;
        for tok in l.split_whitespace() {
            if n == ncols {
                n += 1;
                break;
            }
            let v = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::RasterLine {
                    line,
                    message: format!("{tok:?} is not a number"),
                })?;
            if nodata == Some(v) {
                return Err(Error::NoData { col: n, row });
            }
            values[row * ncols + n] = v;
            n += 1;
        }
        if n != ncols {
            return Err(Error::RasterLine {
                line,
                message: format!(
                    "row has {} values, expected {ncols}",
                    l.split_whitespace().count()
                ),
            });
        }
        text_row += 1;
    }
    if text_row != nrows {
        return Err(Error::Raster(format!(
            "expected {nrows} data rows, found {text_row}"
        )));
    }

    Ok(AsciiGrid {
        ncols,
        nrows,
        xllcorner,
        yllcorner,
        cellsize,
        nodata,
        values,
    })
}
