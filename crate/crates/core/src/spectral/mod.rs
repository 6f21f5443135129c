//! Exact diagonalization and everything built on top of it.

mod dispersion;
mod edge;
mod gap;
mod scaling;
mod sweep;

pub use dispersion::{bloch_eigenstate, dirac_states, dispersion, quantized_momenta, Band, BlochState, MomentumPoint};
pub use edge::{edge_state_detection, EdgeParams, EDGE_DEPTH};
pub use gap::{
    avoided_crossing_gap, crossing_gap, gap_from_weights, gap_profile, parity_resolved_gaps, perturber_state,
    CrossingGap, GapProfile, ZERO_TOL,
};
pub use scaling::{fit_gap_laws, gap_scaling_fit, gap_scaling_fit_with, GapScalingResult, ScalingFamily};
pub use sweep::{gamma_sweep, linspace, GammaSweep};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::traits::ComplexField;
use faer::diag::Diag;
use faer::{Mat, MatRef, Par};

use crate::error::{Error, Result};
use crate::operators::HermitianOperator;
use crate::C64;

/// Components smaller than this are skipped when fixing eigenvector phases.
const PHASE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<C64>,
}

fn evd_seq<T: ComplexField>(a: MatRef<'_, T>, vectors: bool) -> std::result::Result<(Diag<T>, Option<Mat<T>>), String> {
    let n = a.nrows();
    let par = Par::Seq;
    let cv = if vectors { ComputeEigenvectors::Yes } else { ComputeEigenvectors::No };
    let mut s = Diag::zeros(n);
    let mut u = if vectors { Some(Mat::zeros(n, n)) } else { None };
    let mut mem = MemBuffer::new(self_adjoint_evd_scratch::<T>(n, cv, par, Default::default()));
    self_adjoint_evd(a, s.as_mut(), u.as_mut().map(|u| u.as_mut()), par, MemStack::new(&mut mem), Default::default())
        .map_err(|e| format!("{e:?}"))?;
    Ok((s, u))
}

fn check_hermitian(h: &HermitianOperator) -> Result<()> {
    let r = h.hermiticity_residual();
    if r > 1e-10 {
        return Err(Error::NotHermitian(r));
    }
    Ok(())
}

fn real_part(h: &HermitianOperator) -> Mat<f64> {
    Mat::from_fn(h.dim(), h.dim(), |i, j| h.get(i, j).re)
}

/// Full decomposition, single-threaded. Eigenvalues ascending; each
/// eigenvector's first non-negligible component is real positive.
pub fn eigendecompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let fail = |reason| Error::Eigen { gamma: f64::NAN, reason };
    let n = h.dim();
    let (eigenvalues, mut vecs) = if h.is_real() {
        let (s, u) = evd_seq(real_part(h).as_ref(), true).map_err(fail)?;
        let u = u.expect("requested");
        let vals = (0..n).map(|i| s[i]).collect::<Vec<_>>();
        (vals, Mat::from_fn(n, n, |i, j| C64::new(u[(i, j)], 0.0)))
    } else {
        let (s, u) = evd_seq(h.mat().as_ref(), true).map_err(fail)?;
        ((0..n).map(|i| s[i].re).collect::<Vec<_>>(), u.expect("requested"))
    };
    for j in 0..n {
        if let Some(z) = (0..n).map(|i| vecs[(i, j)]).find(|z| z.norm() > PHASE_TOL) {
            let ph = z.conj() / z.norm();
            for i in 0..n {
                vecs[(i, j)] *= ph;
            }
        }
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vecs })
}

/// Eigenvalues only (ascending); cheaper than `eigendecompose`.
pub fn eigenvalues(h: &HermitianOperator) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let fail = |reason| Error::Eigen { gamma: f64::NAN, reason };
    let n = h.dim();
    if h.is_real() {
        let (s, _) = evd_seq(real_part(h).as_ref(), false).map_err(fail)?;
        Ok((0..n).map(|i| s[i]).collect())
    } else {
        let (s, _) = evd_seq(h.mat().as_ref(), false).map_err(fail)?;
        Ok((0..n).map(|i| s[i].re).collect())
    }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, a: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.eigenvectors[(i, a)]).collect()
    }

    /// ⟨ψ_a|v⟩ for every a.
    pub fn coefficients(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok((0..n).map(|a| (0..n).map(|i| self.eigenvectors[(i, a)].conj() * v[i]).sum()).collect())
    }

    /// |⟨v|ψ_a⟩|² for every a.
    pub fn weights(&self, v: &[C64]) -> Result<Vec<f64>> {
        Ok(self.coefficients(v)?.iter().map(|c| c.norm_sqr()).collect())
    }

    /// Probability of eigenvector `a` on a set of basis sites.
    pub fn site_weight(&self, a: usize, sites: &[usize]) -> f64 {
        sites.iter().map(|&i| self.eigenvectors[(i, a)].norm_sqr()).sum()
    }

    /// Indices with |E| < tol.
    pub fn zero_modes(&self, tol: f64) -> Vec<usize> {
        (0..self.dim()).filter(|&a| self.eigenvalues[a].abs() < tol).collect()
    }

    /// Orthogonal projection of `v` onto span{ψ_a : a ∈ idx}.
    pub fn project(&self, v: &[C64], idx: &[usize]) -> Result<Vec<C64>> {
        let c = self.coefficients(v)?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for &a in idx {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.eigenvectors[(i, a)] * c[a];
            }
        }
        Ok(out)
    }

    /// max_a ‖H ψ_a − E_a ψ_a‖.
    pub fn max_residual(&self, h: &HermitianOperator) -> f64 {
        let n = self.dim();
        let hv = h.mat() * &self.eigenvectors;
        (0..n)
            .map(|a| (0..n).map(|i| (hv[(i, a)] - self.eigenvectors[(i, a)] * self.eigenvalues[a]).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// max |U†U − I| elementwise.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.adjoint() * &self.eigenvectors;
        let n = self.dim();
        let mut e = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                e = e.max((g[(i, j)] - C64::new(id, 0.0)).norm());
            }
        }
        e
    }
}
