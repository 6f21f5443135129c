//! Quantization condition F(E) = 0, lattice sums and their Epstein-zeta
//! continuum limit.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::spectral::{quantized_momenta, SpectralDecomposition, ZERO_TOL};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Positive-branch energies ε(k) ≥ 0 of −A on an m×n torus, one per momentum.
#[derive(Debug, Clone, Serialize)]
pub struct UnperturbedSpectrum {
    pub m: i64,
    pub n: i64,
    pub epsilon: Vec<f64>,
    /// Momenta with ε = 0.
    pub dirac_count: usize,
}

impl UnperturbedSpectrum {
    pub fn torus(m: i64, n: i64) -> Result<Self> {
        let epsilon: Vec<f64> = quantized_momenta(m, n)?.iter().map(|k| k.radicand().max(0.0).sqrt()).collect();
        let dirac_count = epsilon.iter().filter(|&&e| e < ZERO_TOL).count();
        Ok(UnperturbedSpectrum { m, n, epsilon, dirac_count })
    }

    pub fn n_sites(&self) -> usize {
        (2 * self.m * self.n) as usize
    }

    /// Smallest positive non-Dirac energy.
    pub fn epsilon_min(&self) -> Option<f64> {
        self.epsilon.iter().copied().filter(|&e| e >= ZERO_TOL).reduce(f64::min)
    }

    /// Distance from E to the nearest level ±ε.
    pub fn distance_to_spectrum(&self, e: f64) -> f64 {
        self.epsilon.iter().map(|&x| (e - x).abs().min((e + x).abs())).fold(f64::INFINITY, f64::min)
    }
}

/// F(E) = (√3/N) Σ_k [1/(E − ε) + 1/(E + ε)], Dirac momenta included.
pub fn f_of_e(e: f64, spec: &UnperturbedSpectrum, n: usize) -> Result<f64> {
    if spec.distance_to_spectrum(e) <= 1e-12 {
        return Err(Error::PoleProximity(e));
    }
    Ok(SQRT3 / n as f64 * spec.epsilon.iter().map(|&x| 1.0 / (e - x) + 1.0 / (e + x)).sum::<f64>())
}

/// Analytic F′(E).
pub fn f_prime(e: f64, spec: &UnperturbedSpectrum, n: usize) -> Result<f64> {
    if spec.distance_to_spectrum(e) <= 1e-12 {
        return Err(Error::PoleProximity(e));
    }
    Ok(-SQRT3 / n as f64 * spec.epsilon.iter().map(|&x| (e - x).powi(-2) + (e + x).powi(-2)).sum::<f64>())
}

/// Root of F in (0, ε_min) by bisection.
pub fn solve_perturbed_energy(spec: &UnperturbedSpectrum, n: usize) -> Result<f64> {
    if spec.dirac_count == 0 {
        return Err(Error::NoRoot("no Dirac points, F has no pole at zero".into()));
    }
    let top = spec.epsilon_min().ok_or_else(|| Error::NoRoot("spectrum has no positive level".into()))?;
    let (mut lo, mut hi) = (top * 1e-9, top * (1.0 - 1e-9));
    let (flo, fhi) = (f_of_e(lo, spec, n)?, f_of_e(hi, spec, n)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!("no sign change on ({lo}, {hi})")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-15 {
            break;
        }
        if f_of_e(mid, spec, n)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// I_n = (√3/N) Σ_{ε ≠ 0} [ε^{−n} + (−ε)^{−n}]; zero for odd n.
pub fn i_sum(order: u32, spec: &UnperturbedSpectrum, n: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidArgument("order must be >= 1".into()));
    }
    let s: f64 = spec
        .epsilon
        .iter()
        .filter(|&&x| x >= ZERO_TOL)
        .map(|&x| x.powi(-(order as i32)) + (-x).powi(-(order as i32)))
        .sum();
    Ok(SQRT3 / n as f64 * s)
}

/// (E₊_est, F′_est) = (√(4√3/(N·I₂)), −2·I₂).
pub fn e_plus_estimate(n: usize, i2: f64) -> Result<(f64, f64)> {
    if !(i2 > 0.0) {
        return Err(Error::InvalidArgument("I2 must be positive".into()));
    }
    Ok(((4.0 * SQRT3 / (n as f64 * i2)).sqrt(), -2.0 * i2))
}

/// Predicted |⟨ℓ|e^{−iHt}|start⟩| = 3^{−1/4} I₂^{−1/2} |sin(E₊t)|.
pub fn success_amplitude_estimate(i2: f64, e_plus: f64, t: f64) -> f64 {
    3f64.powf(-0.25) / i2.sqrt() * (e_plus * t).sin().abs()
}

/// Positive-definite 2×2 quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsteinForm {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl EpsteinForm {
    pub fn new(s11: f64, s12: f64, s22: f64) -> Result<Self> {
        if !(s11 > 0.0) || s11 * s22 - s12 * s12 <= 0.0 {
            return Err(Error::InvalidArgument("form is not positive definite".into()));
        }
        Ok(EpsteinForm { s11, s12, s22 })
    }

    /// 4π²(2, −1; −1, 2), the form at both Dirac cones.
    pub fn dirac() -> Self {
        let c = 4.0 * PI * PI;
        EpsteinForm { s11: 2.0 * c, s12: -c, s22: 2.0 * c }
    }

    pub fn scaled(&self, c: f64) -> Self {
        EpsteinForm { s11: c * self.s11, s12: c * self.s12, s22: c * self.s22 }
    }

    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.s11 * p * p + 2.0 * self.s12 * p * q + self.s22 * q * q
    }

    fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    fn lambda_min(&self) -> f64 {
        let tr = self.s11 + self.s22;
        0.5 * (tr - (tr * tr - 4.0 * self.det()).sqrt())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsteinValue {
    /// ½ Σ over the cutoff square.
    pub partial: f64,
    /// Continuum estimate of the remainder.
    pub tail_estimate: f64,
    /// Rigorous upper bound on the continuum remainder.
    pub tail_bound: f64,
    pub value: f64,
}

/// Z₂(S, x) = ½ Σ_{(p,q) ≠ 0} S[p,q]^{−x}, for x > 1.
pub fn epstein_zeta(s: &EpsteinForm, x: f64, cutoff: i64) -> Result<EpsteinValue> {
    if !(x > 1.0) {
        return Err(Error::InvalidArgument(format!("Epstein sum diverges for x = {x} <= 1")));
    }
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    let partial = 0.5
        * (-cutoff..=cutoff)
            .into_par_iter()
            .map(|p| {
                (-cutoff..=cutoff)
                    .filter(|&q| p != 0 || q != 0)
                    .map(|q| s.eval(p as f64, q as f64).powf(-x))
                    .sum::<f64>()
            })
            .sum::<f64>();
    // ½∫ outside the square [−c−½, c+½]², in polar form
    let c = cutoff as f64 + 0.5;
    let steps = 20_000;
    let dth = 2.0 * PI / steps as f64;
    let tail_estimate = 0.5
        * (0..steps)
            .map(|i| {
                let th = (i as f64 + 0.5) * dth;
                let (co, si) = (th.cos(), th.sin());
                let r0 = c / co.abs().max(si.abs());
                s.eval(co, si).powf(-x) * r0.powf(2.0 - 2.0 * x) / (2.0 * x - 2.0)
            })
            .sum::<f64>()
        * dth;
    let tail_bound =
        0.5 * PI / s.det().sqrt() * (s.lambda_min() * (cutoff as f64).powi(2)).powf(1.0 - x) / (x - 1.0);
    Ok(EpsteinValue { partial, tail_estimate, tail_bound, value: partial + tail_estimate })
}

#[derive(Debug, Clone, Serialize)]
pub struct LogBoundRow {
    pub m: i64,
    pub n_sites: usize,
    /// Σ_{(p,q) ∈ L} 1/Q(p,q), L the momentum rectangle centred on a cone.
    pub full_sum: f64,
    /// Same sum over the inscribed square |p|,|q| ≤ ⌊m/2⌋ − 1.
    pub square_sum: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogBounds {
    pub rows: Vec<LogBoundRow>,
    pub c1_hat: f64,
    pub c2_hat: f64,
}

/// Restricted lattice sums for an m×m torus.
pub fn restricted_sums(m: i64) -> (f64, f64) {
    let q = EpsteinForm::dirac();
    let half = m / 2;
    let mut full = 0.0;
    let mut square = 0.0;
    for p in -half..(m - half) {
        for r in -half..(m - half) {
            if p == 0 && r == 0 {
                continue;
            }
            let v = 1.0 / q.eval(p as f64, r as f64);
            full += v;
            if p.abs() < half && r.abs() < half {
                square += v;
            }
        }
    }
    (full, square)
}

/// Empirical constants bracketing (restricted sum)/ln N over m×m tori.
pub fn i2_log_bounds(sizes: &[i64]) -> Result<LogBounds> {
    if sizes.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 sizes, got {}", sizes.len())));
    }
    if let Some(m) = sizes.iter().find(|&&m| m < 3 || m % 3 != 0) {
        return Err(Error::InvalidArgument(format!("size {m} is not a multiple of 3")));
    }
    let rows: Vec<LogBoundRow> = sizes
        .iter()
        .map(|&m| {
            let n_sites = (2 * m * m) as usize;
            let (full_sum, square_sum) = restricted_sums(m);
            LogBoundRow { m, n_sites, full_sum, square_sum, ratio: full_sum / (n_sites as f64).ln() }
        })
        .collect();
    let c1_hat = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let c2_hat = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(LogBounds { rows, c1_hat, c2_hat })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverlapReport {
    pub e_plus: f64,
    pub direct: f64,
    pub formula: f64,
}

/// |⟨start|ψ₊⟩| directly and via (1/E₊)·√(√3/|F′(E₊)|)·|⟨start|marked⟩|.
/// ψ₊ is the eigenvector of the smallest positive eigenvalue.
pub fn overlap_start_perturbed(
    spec_of_h: &SpectralDecomposition,
    start: &StateVector,
    marked_index: usize,
    unperturbed: &UnperturbedSpectrum,
) -> Result<OverlapReport> {
    let ev = &spec_of_h.eigenvalues;
    let a = (0..ev.len())
        .filter(|&a| ev[a] > ZERO_TOL)
        .min_by(|&x, &y| ev[x].total_cmp(&ev[y]))
        .ok_or_else(|| Error::Ambiguous("no positive eigenvalue".into()))?;
    if ev.iter().enumerate().any(|(b, &e)| b != a && (e - ev[a]).abs() < ZERO_TOL) {
        return Err(Error::Ambiguous(format!("E = {} is degenerate", ev[a])));
    }
    let c = spec_of_h.coefficients(&start.amplitudes)?;
    let e = ev[a];
    let fp = f_prime(e, unperturbed, unperturbed.n_sites())?;
    let formula = (SQRT3 / fp.abs()).sqrt() / e * start.amplitudes[marked_index].norm();
    Ok(OverlapReport { e_plus: e, direct: c[a].norm(), formula })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeLawFit {
    /// T ≈ c1·√N.
    pub c1: f64,
    pub residual1: f64,
    /// T ≈ c2·√(N ln N).
    pub c2: f64,
    pub residual2: f64,
}

/// Least-squares fit of search times to √N and √(N ln N).
pub fn fit_time_laws(ns: &[usize], times: &[f64]) -> Result<TimeLawFit> {
    if ns.len() != times.len() || ns.len() < 2 {
        return Err(Error::InvalidArgument("need at least two (N, T) pairs".into()));
    }
    let fit = |f: &dyn Fn(f64) -> f64| {
        let fs: Vec<f64> = ns.iter().map(|&n| f(n as f64)).collect();
        let c = times.iter().zip(&fs).map(|(t, f)| t * f).sum::<f64>() / fs.iter().map(|f| f * f).sum::<f64>();
        (c, times.iter().zip(&fs).map(|(t, f)| (t - c * f).powi(2)).sum::<f64>())
    };
    let (c1, residual1) = fit(&|n| n.sqrt());
    let (c2, residual2) = fit(&|n| (n * n.ln()).sqrt());
    Ok(TimeLawFit { c1, residual1, c2, residual2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_torus_has_two_dirac_momenta() {
        let s = UnperturbedSpectrum::torus(12, 12).unwrap();
        assert_eq!(s.dirac_count, 2);
        assert_eq!(s.epsilon.len(), 144);
    }

    #[test]
    fn tail_bound_dominates_estimate() {
        let v = epstein_zeta(&EpsteinForm::dirac(), 2.0, 50).unwrap();
        assert!(v.tail_estimate > 0.0 && v.tail_estimate <= v.tail_bound);
    }
}
