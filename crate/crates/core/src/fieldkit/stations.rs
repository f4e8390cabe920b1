use glam::DVec2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const COLUMNS: [&str; 5] = ["station", "utmx", "utmy", "direction", "speed"];

/// One wind observation at a planar (UTM-style) position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub id: String,
    pub easting: f64,
    pub northing: f64,
    /// Compass degrees in `[0, 360)`, clockwise from north.
    pub direction_deg: f64,
    /// Meters per second, `>= 0`.
    pub speed: f64,
}

impl StationRecord {
    pub fn new(id: impl Into<String>, easting: f64, northing: f64, direction_deg: f64, speed: f64) -> Self {
        Self {
            id: id.into(),
            easting,
            northing,
            direction_deg,
            speed,
        }
    }

    pub fn position(&self) -> DVec2 {
        DVec2::new(self.easting, self.northing)
    }

    pub fn direction(&self) -> DVec2 {
        super::compass_to_vec(self.direction_deg)
    }
}

/// Parses the station table (`Station,UTMX,UTMY,Direction,Speed`, header
/// names case-insensitive, any column order). Row numbers in errors count
/// the header as row 1, as a spreadsheet would.
pub fn parse_stations(text: &str) -> Result<Vec<StationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Stations(format!("unreadable header: {e}")))?
        .clone();
    let mut index = [usize::MAX; 5];
    for (pos, name) in headers.iter().enumerate() {
        let lower = name.trim_start_matches('\u{feff}').to_ascii_lowercase();
        match COLUMNS.iter().position(|c| *c == lower) {
            Some(k) if index[k] == usize::MAX => index[k] = pos,
            Some(_) => return Err(Error::Stations(format!("duplicate column {name:?}"))),
            None => return Err(Error::Stations(format!("unknown column {name:?}"))),
        }
    }
    let missing: Vec<&str> = COLUMNS
        .iter()
        .zip(index)
        .filter(|(_, i)| *i == usize::MAX)
        .map(|(c, _)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Stations(format!(
            "missing column(s): {}",
            missing.join(", ")
        )));
    }

    let mut out: Vec<StationRecord> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::StationRow {
            row,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |k: usize| record.get(index[k]).unwrap_or("");
        let number = |k: usize| -> Result<f64> {
            let raw = field(k);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::StationRow {
                    row,
                    message: format!("{} is not a finite number: {raw:?}", COLUMNS[k]),
                })
        };

        let id = field(0).to_string();
        let easting = number(1)?;
        let northing = number(2)?;
        let mut direction_deg = number(3)?;
        let speed = number(4)?;

        if speed < 0.0 {
            return Err(Error::StationRow {
                row,
                message: format!("negative speed {speed}"),
            });
        }
        // 360 is a common spelling of north; everything else must already
        // lie in [0, 360).
        if direction_deg == 360.0 {
            direction_deg = 0.0;
        }
        if !(0.0..360.0).contains(&direction_deg) {
            return Err(Error::StationRow {
                row,
                message: format!("direction {direction_deg} outside [0, 360)"),
            });
        }
        if let Some(other) = out
            .iter()
            .find(|s| s.easting == easting && s.northing == northing)
        {
            return Err(Error::StationRow {
                row,
                message: format!("shares its position with station {:?}", other.id),
            });
        }
        out.push(StationRecord {
            id,
            easting,
            northing,
            direction_deg,
            speed,
        });
    }

    if out.is_empty() {
        return Err(Error::NoStations);
    }
    Ok(out)
}
