//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use windform_core::fieldkit::{idw_interpolate, parse_stations};
use windform_core::terrain::synthetic::SyntheticTerrain;
use windform_core::{FieldRaster, GridSpec, IdwParams, StationRecord, TerrainMesh};

const FIG1: &str = include_str!("../../../assets/fig1_stations.csv");

pub fn fig1_stations() -> Vec<StationRecord> {
    parse_stations(FIG1).expect("bundled stations parse")
}

pub fn fig1_raster(cells: usize) -> FieldRaster {
    let st = fig1_stations();
    let grid = GridSpec::around_stations(&st, cells, cells, GridSpec::DEFAULT_PAD).unwrap();
    idw_interpolate(&st, &IdwParams::default(), &grid).unwrap()
}

/// The terrain of the reference swarm scenario.
pub fn hills() -> Arc<TerrainMesh> {
    Arc::new(SyntheticTerrain::hills(60.0, 40, 3.0, 2.0).build().unwrap())
}
