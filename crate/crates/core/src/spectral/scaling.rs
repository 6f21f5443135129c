use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::avoided_crossing_gap;
use crate::error::{Error, Result};
use crate::lattice::{build_torus, Sublattice};
use crate::operators::Perturbation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingFamily {
    /// Three-bond perturbation of A(0,0) at γ = 1.
    #[default]
    ThreeBond,
    /// Single-bond perturbation of cell (0,0) at γ = 1/3.
    SingleBond,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapScalingResult {
    pub sizes: Vec<usize>,
    pub gaps: Vec<f64>,
    /// Model c₁/√N.
    pub c1: f64,
    /// Model c₂/√(N ln N).
    pub c2: f64,
    /// Sum of squared residuals of each model.
    pub residual1: f64,
    pub residual2: f64,
}

fn law1(n: f64) -> f64 {
    1.0 / n.sqrt()
}

fn law2(n: f64) -> f64 {
    1.0 / (n * n.ln()).sqrt()
}

/// One-parameter least squares g ≈ c·f: c = Σgf/Σf², residual Σ(g − cf)².
fn fit_one(ns: &[usize], gaps: &[f64], f: fn(f64) -> f64) -> (f64, f64) {
    let fs: Vec<f64> = ns.iter().map(|&n| f(n as f64)).collect();
    let c = gaps.iter().zip(&fs).map(|(g, f)| g * f).sum::<f64>() / fs.iter().map(|f| f * f).sum::<f64>();
    let r = gaps.iter().zip(&fs).map(|(g, f)| (g - c * f).powi(2)).sum();
    (c, r)
}

/// Fit both laws to given (N, Δ) data.
pub fn fit_gap_laws(sizes: &[usize], gaps: &[f64]) -> Result<GapScalingResult> {
    if sizes.len() != gaps.len() || sizes.len() < 2 {
        return Err(Error::InvalidArgument("need at least two (N, gap) pairs".into()));
    }
    if sizes.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument("N must be at least 2".into()));
    }
    let (c1, residual1) = fit_one(sizes, gaps, law1);
    let (c2, residual2) = fit_one(sizes, gaps, law2);
    Ok(GapScalingResult { sizes: sizes.to_vec(), gaps: gaps.to_vec(), c1, c2, residual1, residual2 })
}

pub fn gap_scaling_fit(sizes: &[(i64, i64)]) -> Result<GapScalingResult> {
    gap_scaling_fit_with(sizes, ScalingFamily::ThreeBond)
}

/// Crossing gaps over a family of tori (computed in parallel), then fitted.
pub fn gap_scaling_fit_with(sizes: &[(i64, i64)], family: ScalingFamily) -> Result<GapScalingResult> {
    if sizes.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 sizes, got {}", sizes.len())));
    }
    if let Some(&(m, n)) = sizes.iter().find(|&&(m, n)| m < 3 || n < 3 || m % 3 != 0 || n % 3 != 0) {
        return Err(Error::InvalidArgument(format!("size {m}x{n} is not a multiple of 3")));
    }
    let gaps = sizes
        .par_iter()
        .map(|&(m, n)| {
            let lat = build_torus(m, n)?;
            let (pert, g) = match family {
                ScalingFamily::ThreeBond => {
                    (Perturbation::ThreeBond { marked: lat.site(0, 0, Sublattice::A)? }, 1.0)
                }
                ScalingFamily::SingleBond => (Perturbation::SingleBond { cell: (0, 0) }, 1.0 / 3.0),
            };
            avoided_crossing_gap(&lat, &pert, g)
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<usize> = sizes.iter().map(|&(m, n)| (2 * m * n) as usize).collect();
    fit_gap_laws(&ns, &gaps)
}

impl GapScalingResult {
    pub fn fit1(&self, n: usize) -> f64 {
        self.c1 * law1(n as f64)
    }

    pub fn fit2(&self, n: usize) -> f64 {
        self.c2 * law2(n as f64)
    }

    /// True when the logarithmically corrected law fits better.
    pub fn prefers_log_correction(&self) -> bool {
        self.residual2 < self.residual1
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,gap,fit1,fit2")?;
        for (&n, g) in self.sizes.iter().zip(&self.gaps) {
            writeln!(w, "{n},{g},{},{}", self.fit1(n), self.fit2(n))?;
        }
        Ok(())
    }
}
