use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Emergence measures of one swarm snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmMetrics {
    pub step: u64,
    pub time: f64,
    pub polarization: f64,
    /// `None` with fewer than two agents.
    pub mean_nn_distance: Option<f64>,
    pub mean_height: f64,
}

/// `|Σ v/|v|| / N` over agents with nonzero velocity; 0 when none move.
pub fn polarization(velocities: &[DVec3]) -> f64 {
    let mut sum = DVec3::ZERO;
    let mut n = 0usize;
    for v in velocities {
        if let Some(u) = v.try_normalize() {
            sum += u;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum.length() / n as f64).min(1.0)
    }
}

/// Mean over points of the distance to the nearest other point.
pub fn mean_nn_distance(points: &[DVec3]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Swarm(format!(
            "nearest-neighbor distance needs >= 2 agents, got {}",
            points.len()
        )));
    }
    let total: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| p.distance_squared(*q))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(total / points.len() as f64)
}

pub fn mean_height(points: &[DVec3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().map(|p| p.z).sum::<f64>() / points.len() as f64
}
