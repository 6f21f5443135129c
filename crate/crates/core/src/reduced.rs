//! Reduced Hamiltonians on the Dirac states plus perturber states.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{SiteId, Sublattice};
use crate::operators::HermitianOperator;
use crate::spectral::eigenvalues;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedKind {
    ThreeBond,
    ExtraSite,
    /// Communication with source and target in the same phase class.
    CommEquivalent,
    CommNonEquivalent,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedModel {
    pub kind: ReducedKind,
    pub n_sites: usize,
    pub basis_labels: Vec<String>,
    /// Phase matrix; the Hamiltonian is `prefactor * matrix`.
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: Vec<Vec<C64>>,
    pub prefactor: f64,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<C64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for row in m {
        let r: Vec<[f64; 2]> = row.iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&r)?;
    }
    seq.end()
}

/// μ = (2π/3)(α + 2β).
pub fn mu(alpha: i64, beta: i64) -> f64 {
    2.0 * PI / 3.0 * (alpha + 2 * beta).rem_euclid(3) as f64
}

/// ν = (2π/3)(2α + β).
pub fn nu(alpha: i64, beta: i64) -> f64 {
    2.0 * PI / 3.0 * (2 * alpha + beta).rem_euclid(3) as f64
}

fn check_n(n: usize) -> Result<()> {
    // N = 2mn with 3 | m and 3 | n
    if n == 0 || !n.is_multiple_of(18) {
        return Err(Error::InvalidArgument(format!("N = {n} is not 2mn with 3 | m, 3 | n")));
    }
    Ok(())
}

fn e(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

fn three_level(n: usize, alpha: i64, beta: i64, prefactor: f64, kind: ReducedKind, last: &str) -> ReducedModel {
    let z = C64::new(0.0, 0.0);
    let (a, b) = (e(-mu(alpha, beta)), e(-nu(alpha, beta)));
    ReducedModel {
        kind,
        n_sites: n,
        basis_labels: vec!["K".into(), "K'".into(), last.into()],
        matrix: vec![vec![z, z, a], vec![z, z, b], vec![a.conj(), b.conj(), z]],
        prefactor,
    }
}

/// √(6/N)·[[0,0,e^{−iμ}],[0,0,e^{−iν}],[e^{iμ},e^{iν},0]] in (|K⟩, |K′⟩, |ℓ⟩).
pub fn reduced_three_bond(n: usize, alpha_o: i64, beta_o: i64) -> Result<ReducedModel> {
    check_n(n)?;
    Ok(three_level(n, alpha_o, beta_o, (6.0 / n as f64).sqrt(), ReducedKind::ThreeBond, "l"))
}

/// Same phase matrix, prefactor √(2/N): the extra site couples to one site only.
pub fn reduced_extra_site(n: usize, alpha_o: i64, beta_o: i64) -> Result<ReducedModel> {
    check_n(n)?;
    Ok(three_level(n, alpha_o, beta_o, (2.0 / n as f64).sqrt(), ReducedKind::ExtraSite, "site"))
}

/// 4×4 model in (|K⟩, |K′⟩, |ℓ_s⟩, |ℓ_t⟩); the pair must share a sublattice.
pub fn reduced_communication(n: usize, src: &SiteId, tgt: &SiteId) -> Result<ReducedModel> {
    check_n(n)?;
    if src.sublattice != tgt.sublattice {
        return Err(Error::InvalidArgument("cross-sublattice pairs have no reduced model".into()));
    }
    let z = C64::new(0.0, 0.0);
    // same orientation as the three-level model: ⟨K|H|ℓ⟩ ∝ e^{−iμ}
    let (ms, ns) = (e(-mu(src.cell_alpha, src.cell_beta)), e(-nu(src.cell_alpha, src.cell_beta)));
    let (mt, nt) = (e(-mu(tgt.cell_alpha, tgt.cell_beta)), e(-nu(tgt.cell_alpha, tgt.cell_beta)));
    let equivalent = (src.cell_alpha - src.cell_beta).rem_euclid(3) == (tgt.cell_alpha - tgt.cell_beta).rem_euclid(3);
    let kind = if equivalent { ReducedKind::CommEquivalent } else { ReducedKind::CommNonEquivalent };
    let s = if src.sublattice == Sublattice::A { "A" } else { "B" };
    Ok(ReducedModel {
        kind,
        n_sites: n,
        basis_labels: vec![format!("K^{s}"), format!("K'^{s}"), "l_s".into(), "l_t".into()],
        matrix: vec![
            vec![z, z, ms, mt],
            vec![z, z, ns, nt],
            vec![ms.conj(), ns.conj(), z, z],
            vec![mt.conj(), nt.conj(), z, z],
        ],
        prefactor: (6.0 / n as f64).sqrt(),
    })
}

impl ReducedModel {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        HermitianOperator::from_fn(self.dim(), |i, j| self.matrix[i][j] * self.prefactor)
    }

    /// Closed-form spectrum, ascending.
    pub fn closed_form_eigenvalues(&self) -> Vec<f64> {
        let p = self.prefactor;
        let s2 = std::f64::consts::SQRT_2;
        let s3 = 3f64.sqrt();
        match self.kind {
            ReducedKind::ThreeBond | ReducedKind::ExtraSite => vec![-s2 * p, 0.0, s2 * p],
            ReducedKind::CommEquivalent => vec![-2.0 * p, 0.0, 0.0, 2.0 * p],
            ReducedKind::CommNonEquivalent => vec![-s3 * p, -p, p, s3 * p],
        }
    }

    /// Numerical spectrum of the constructed matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.hamiltonian())
    }

    /// Positive level setting the search rotation, Ẽ₊ = √2·prefactor.
    pub fn e_plus(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.prefactor
    }

    /// First time the perturber state is fully populated.
    pub fn peak_time(&self) -> f64 {
        match self.kind {
            ReducedKind::ThreeBond | ReducedKind::ExtraSite => PI / (2.0 * self.e_plus()),
            ReducedKind::CommEquivalent => PI / (2.0 * self.prefactor),
            // no full transfer; report the first target maximum of the beat
            ReducedKind::CommNonEquivalent => {
                let f = |t: f64| reduced_comm_evolution(self, t).1;
                let t_hi = 4.0 * PI / self.prefactor;
                let grid = crate::spectral::linspace(0.0, t_hi, 4001);
                let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
                crate::dynamics::refine_peak(&grid, &vals).0
            }
        }
    }

    /// The uniform Dirac superposition phases (e^{−iμ}, e^{−iν})/√2 as the
    /// reduced start vector (three-level models).
    pub fn start_vector(&self) -> Vec<C64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut v: Vec<C64> = (0..self.dim()).map(|_| C64::new(0.0, 0.0)).collect();
        v[0] = self.matrix[0][2] * r;
        v[1] = self.matrix[1][2] * r;
        v
    }
}

/// (p_start, p_perturber) = (cos²(Ẽ₊t), sin²(Ẽ₊t)).
pub fn reduced_search_evolution(model: &ReducedModel, t: f64) -> (f64, f64) {
    let x = model.e_plus() * t;
    (x.cos().powi(2), x.sin().powi(2))
}

/// (p_ℓs, p_ℓt) starting from |ℓ_s⟩.
pub fn reduced_comm_evolution(model: &ReducedModel, t: f64) -> (f64, f64) {
    let p = model.prefactor;
    match model.kind {
        ReducedKind::CommNonEquivalent => {
            let (a, b) = ((3f64.sqrt() * p * t).cos(), (p * t).cos());
            (0.25 * (a + b).powi(2), 0.25 * (a - b).powi(2))
        }
        _ => {
            let c = (2.0 * p * t).cos();
            (0.25 * (c + 1.0).powi(2), 0.25 * (c - 1.0).powi(2))
        }
    }
}
