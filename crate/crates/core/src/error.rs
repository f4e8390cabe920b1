use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("station data: {0}")]
    Stations(String),

    #[error("station row {row}: {message}")]
    StationRow { row: usize, message: String },

    #[error("no stations")]
    NoStations,

    #[error("raster: {0}")]
    Raster(String),

    #[error("raster line {line}: {message}")]
    RasterLine { line: usize, message: String },

    #[error("raster cell (col {col}, row {row}) holds NODATA")]
    NoData { col: usize, row: usize },

    #[error("obj line {line}: {message}")]
    Obj { line: usize, message: String },

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("morph: {0}")]
    Morph(String),

    #[error("scatter: {0}")]
    Scatter(String),

    #[error("swarm: {0}")]
    Swarm(String),

    #[error("geometry: {0}")]
    Geometry(String),

    /// A run-exclusive command arrived while the session was running.
    #[error("busy: {0}")]
    Busy(String),

    #[error("nothing to export")]
    NothingToExport,

    /// Validation failures, each prefixed by the offending field path.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
