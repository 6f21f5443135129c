//! Avoided-crossing gaps around the Dirac energy.
//!
//! Levels count towards the gap only if they overlap the perturber state
//! (|ℓ⟩, the extra site, or the bond parity state). Zero modes that do not
//! see the perturber — Dirac remnants, the decoupled marked site — are
//! therefore skipped, while a zero cluster that does see it means the
//! crossing is exact and Δ = 0.

use rayon::prelude::*;
use serde::Serialize;

use super::{eigendecompose, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Sublattice};
use crate::operators::{c2_rotation, search_hamiltonian, single_bond_sites, HermitianOperator, Perturbation};
use crate::C64;

/// |E| below this counts as zero energy; also the clustering tolerance.
pub const ZERO_TOL: f64 = 1e-9;
/// Minimum perturber weight for a level to take part in the crossing.
const WEIGHT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingGap {
    pub gap: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Gap from a spectrum and per-level perturber weights.
pub fn gap_from_weights(eigenvalues: &[f64], weights: &[f64]) -> Result<CrossingGap> {
    // cluster weights make the rule independent of the basis chosen
    // inside degenerate eigenspaces
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    for a in order {
        match clusters.last_mut() {
            Some((e, w)) if (eigenvalues[a] - *e).abs() < ZERO_TOL => *w += weights[a],
            _ => clusters.push((eigenvalues[a], weights[a])),
        }
    }
    let zero_weight: f64 = clusters.iter().filter(|c| c.0.abs() < ZERO_TOL).map(|c| c.1).sum();
    if zero_weight > WEIGHT_TOL {
        return Ok(CrossingGap { gap: 0.0, lower: 0.0, upper: 0.0 });
    }
    let upper = clusters.iter().filter(|c| c.0 >= ZERO_TOL && c.1 > WEIGHT_TOL).map(|c| c.0).reduce(f64::min);
    let lower = clusters.iter().filter(|c| c.0 <= -ZERO_TOL && c.1 > WEIGHT_TOL).map(|c| c.0).reduce(f64::max);
    match (lower, upper) {
        (Some(lower), Some(upper)) => Ok(CrossingGap { gap: upper - lower, lower, upper }),
        _ => Err(Error::NoGap("no perturber-coupled level on one side of zero".into())),
    }
}

/// The state the perturbation couples the lattice to.
pub fn perturber_state(lat: &Lattice, pert: &Perturbation) -> Result<Vec<C64>> {
    let pert = pert.resolve(lat)?;
    let mut v = vec![C64::new(0.0, 0.0); pert.dim(lat.n_sites)];
    match pert {
        Perturbation::ThreeBond { marked } => {
            let nb = lat.neighbor_indices(marked.linear);
            let a = 1.0 / (nb.len() as f64).sqrt();
            for &j in nb {
                v[j] = C64::new(a, 0.0);
            }
        }
        Perturbation::SingleBond { cell } => {
            // odd combination W_g; the even one is handled by parity_resolved_gaps
            let (a, b) = single_bond_sites(lat, cell)?;
            v[a.linear] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[b.linear] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        }
        Perturbation::ExtraSite { .. } => v[lat.n_sites] = C64::new(1.0, 0.0),
    }
    Ok(v)
}

/// Gap with bounding levels. For single-bond perturbations the smaller of
/// the two parity-sector gaps is returned.
pub fn crossing_gap(lat: &Lattice, pert: &Perturbation, gamma: f64) -> Result<CrossingGap> {
    if let Perturbation::SingleBond { cell } = pert {
        let (even, odd) = parity_resolved_gaps(lat, *cell, gamma)?;
        return Ok(if even.gap <= odd.gap { even } else { odd });
    }
    let h = search_hamiltonian(lat, pert, gamma)?;
    let d = eigendecompose(&h).map_err(|e| with_gamma(e, gamma))?;
    let w = d.weights(&perturber_state(lat, pert)?)?;
    gap_from_weights(&d.eigenvalues, &w)
}

pub fn avoided_crossing_gap(lat: &Lattice, pert: &Perturbation, gamma_c: f64) -> Result<f64> {
    crossing_gap(lat, pert, gamma_c).map(|g| g.gap)
}

pub(crate) fn with_gamma(e: Error, gamma: f64) -> Error {
    match e {
        Error::Eigen { reason, .. } => Error::Eigen { gamma, reason },
        other => other,
    }
}

/// Split H into the C₂-even and C₂-odd blocks of the single-bond problem.
/// Basis of each block: (|i⟩ ± |C₂ i⟩)/√2 over A sites i, in linear order.
pub(crate) fn parity_blocks(lat: &Lattice, cell: (i64, i64), h: &HermitianOperator) -> Result<[HermitianOperator; 2]> {
    let perm = c2_rotation(lat, cell)?;
    let a_sites: Vec<usize> = lat.sites.iter().filter(|s| s.sublattice == Sublattice::A).map(|s| s.linear).collect();
    let block = |sign: f64| {
        HermitianOperator::from_fn(a_sites.len(), |o, p| {
            let (i, j) = (a_sites[o], perm[a_sites[o]]);
            let (k, l) = (a_sites[p], perm[a_sites[p]]);
            (h.get(i, k) + h.get(j, l) + (h.get(i, l) + h.get(j, k)) * sign) * 0.5
        })
    };
    Ok([block(1.0), block(-1.0)])
}

/// Index of the marked cell's orbit inside a parity block.
pub(crate) fn parity_orbit(lat: &Lattice, cell: (i64, i64)) -> Result<usize> {
    let (a, _) = single_bond_sites(lat, cell)?;
    Ok(lat.sites.iter().filter(|s| s.sublattice == Sublattice::A && s.linear < a.linear).count())
}

/// (even, odd) sector gaps for the single-bond perturbation; the perturber
/// in each sector is W_e resp. W_g.
pub fn parity_resolved_gaps(lat: &Lattice, cell: (i64, i64), gamma: f64) -> Result<(CrossingGap, CrossingGap)> {
    let h = search_hamiltonian(lat, &Perturbation::SingleBond { cell }, gamma)?;
    let blocks = parity_blocks(lat, cell, &h)?;
    let o = parity_orbit(lat, cell)?;
    let gap = |b: &HermitianOperator| -> Result<CrossingGap> {
        let d: SpectralDecomposition = eigendecompose(b).map_err(|e| with_gamma(e, gamma))?;
        let w: Vec<f64> = (0..d.dim()).map(|a| d.eigenvectors[(o, a)].norm_sqr()).collect();
        gap_from_weights(&d.eigenvalues, &w)
    };
    Ok((gap(&blocks[0])?, gap(&blocks[1])?))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapProfile {
    pub gamma: Vec<f64>,
    pub gap: Vec<f64>,
}

impl GapProfile {
    /// γ at the smallest gap.
    pub fn argmin(&self) -> f64 {
        let i = (0..self.gap.len()).min_by(|&a, &b| self.gap[a].total_cmp(&self.gap[b])).expect("nonempty profile");
        self.gamma[i]
    }
}

/// Crossing gap across a γ grid. With `per_hopping`, bond-perturbation gaps
/// are divided by γ, i.e. measured in units of the lattice hopping.
pub fn gap_profile(lat: &Lattice, pert: &Perturbation, grid: &[f64], per_hopping: bool) -> Result<GapProfile> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty gamma grid".into()));
    }
    let gap = grid
        .par_iter()
        .map(|&g| {
            let d = crossing_gap(lat, pert, g)?.gap;
            Ok(if per_hopping && pert.is_bond() {
                if g == 0.0 {
                    f64::INFINITY
                } else {
                    d / g.abs()
                }
            } else {
                d
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapProfile { gamma: grid.to_vec(), gap })
}
