use serde::{Deserialize, Serialize};

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Brick rows on each zigzag/bearded side counted as boundary.
pub const EDGE_DEPTH: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    pub energy_window: f64,
    pub boundary_weight_threshold: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams { energy_window: 0.2, boundary_weight_threshold: 0.5 }
    }
}

/// Eigenstates with |E| < window carrying more than `threshold` of their
/// probability on the boundary rows of a sheet.
pub fn edge_state_detection(
    spec: &SpectralDecomposition,
    lat: &Lattice,
    energy_window: f64,
    boundary_weight_threshold: f64,
) -> Result<Vec<usize>> {
    let region = lat.edge_region(EDGE_DEPTH)?;
    if spec.dim() != lat.n_sites {
        return Err(Error::DimensionMismatch { expected: lat.n_sites, got: spec.dim() });
    }
    Ok((0..spec.dim())
        .filter(|&a| spec.eigenvalues[a].abs() < energy_window)
        .filter(|&a| spec.site_weight(a, &region) > boundary_weight_threshold)
        .collect())
}
