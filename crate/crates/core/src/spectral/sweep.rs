use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{eigenvalues, gap::with_gamma};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::operators::{search_hamiltonian, Perturbation};

#[derive(Debug, Clone, Serialize)]
pub struct GammaSweep {
    pub gamma_grid: Vec<f64>,
    /// One ascending spectrum per grid point.
    pub traces: Vec<Vec<f64>>,
    /// Half-width of the energy window around zero used for plots.
    pub tracked_window: f64,
}

/// `n` evenly spaced points on [a, b].
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn gamma_sweep(lat: &Lattice, pert: &Perturbation, gamma_grid: &[f64]) -> Result<GammaSweep> {
    if gamma_grid.is_empty() {
        return Err(Error::InvalidArgument("empty gamma grid".into()));
    }
    if gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("gamma grid must be strictly increasing".into()));
    }
    let pert = pert.resolve(lat)?;
    let traces = gamma_grid
        .par_iter()
        .map(|&g| eigenvalues(&search_hamiltonian(lat, &pert, g)?).map_err(|e| with_gamma(e, g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaSweep { gamma_grid: gamma_grid.to_vec(), traces, tracked_window: 0.5 })
}

impl GammaSweep {
    /// Levels of every trace with |E| ≤ window, as (γ, level index, E).
    pub fn window_points(&self, window: f64) -> Vec<(f64, usize, f64)> {
        self.gamma_grid
            .iter()
            .zip(&self.traces)
            .flat_map(|(&g, t)| t.iter().enumerate().filter(|(_, e)| e.abs() <= window).map(move |(i, &e)| (g, i, e)))
            .collect()
    }

    /// Largest change of any sorted level between neighbouring grid points.
    pub fn max_jump(&self) -> f64 {
        self.traces
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,level_index,eigenvalue")?;
        for (g, t) in self.gamma_grid.iter().zip(&self.traces) {
            for (i, e) in t.iter().enumerate() {
                writeln!(w, "{g},{i},{e}")?;
            }
        }
        Ok(())
    }
}
