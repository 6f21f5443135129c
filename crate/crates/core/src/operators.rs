//! Walk, search and communication Hamiltonians.

use std::io::{Read, Write};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{adjacency_matrix, Lattice, SiteId, Sublattice};
use crate::C64;

/// Dense Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    m: Mat<C64>,
}

impl HermitianOperator {
    pub fn zeros(dim: usize) -> Self {
        HermitianOperator { m: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator { m: Mat::identity(dim, dim) }
    }

    /// Wrap a matrix without checking Hermiticity (see `hermiticity_residual`).
    pub fn from_mat(m: Mat<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        HermitianOperator { m }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        HermitianOperator { m: Mat::from_fn(dim, dim, f) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub(crate) fn set_real_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.m[(i, j)] = C64::new(v, 0.0);
        self.m[(j, i)] = C64::new(v, 0.0);
    }

    pub(crate) fn add_real_symmetric(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.m[(i, i)] += C64::new(v, 0.0);
        } else {
            self.m[(i, j)] += C64::new(v, 0.0);
            self.m[(j, i)] += C64::new(v, 0.0);
        }
    }

    /// max |H − H†| elementwise.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut r = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                r = r.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_real(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.m[(i, j)].im == 0.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        HermitianOperator { m: Mat::from_fn(self.dim(), self.dim(), |i, j| self.m[(i, j)] * s) }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(HermitianOperator { m: &self.m + &other.m })
    }

    /// Zero-pad to a larger dimension (appending sites).
    pub fn embedded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim());
        let n = self.dim();
        HermitianOperator {
            m: Mat::from_fn(dim, dim, |i, j| if i < n && j < n { self.m[(i, j)] } else { C64::new(0.0, 0.0) }),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.m[(i, j)] * vj;
            }
        }
        Ok(out)
    }

    /// Largest absolute entry; a cheap scale for residual tolerances.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).map(|(i, j)| self.m[(i, j)].norm()).fold(0.0, f64::max)
    }

    pub fn nonzero_count(&self, tol: f64) -> usize {
        let n = self.dim();
        (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).filter(|&(i, j)| self.m[(i, j)].norm() > tol).count()
    }

    /// CSV export: one matrix row per line, entries as interleaved `re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let row: Vec<String> =
                (0..n).flat_map(|j| [self.m[(i, j)].re, self.m[(i, j)].im]).map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Binary export: u64 LE dimension, then row-major (re, im) f64 LE pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim();
        w.write_all(&(n as u64).to_le_bytes())?;
        for i in 0..n {
            for j in 0..n {
                w.write_all(&self.m[(i, j)].re.to_le_bytes())?;
                w.write_all(&self.m[(i, j)].im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                r.read_exact(&mut b8)?;
                let re = f64::from_le_bytes(b8);
                r.read_exact(&mut b8)?;
                let im = f64::from_le_bytes(b8);
                m[(i, j)] = C64::new(re, im);
            }
        }
        Ok(HermitianOperator { m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    ThreeBond { marked: SiteId },
    SingleBond { cell: (i64, i64) },
    ExtraSite { attach: SiteId, onsite_gamma: f64 },
}

impl Perturbation {
    /// γ at which the avoided crossing closes to its minimum.
    pub fn critical_gamma(&self) -> f64 {
        match self {
            Perturbation::ThreeBond { .. } => 1.0,
            Perturbation::SingleBond { .. } => 1.0 / 3.0,
            Perturbation::ExtraSite { .. } => 0.0,
        }
    }

    pub fn is_bond(&self) -> bool {
        !matches!(self, Perturbation::ExtraSite { .. })
    }

    /// Operator dimension on a lattice of `n` sites.
    pub fn dim(&self, n: usize) -> usize {
        match self {
            Perturbation::ExtraSite { .. } => n + 1,
            _ => n,
        }
    }

    /// Check against the lattice and refresh site ids.
    pub fn resolve(&self, lat: &Lattice) -> Result<Self> {
        Ok(match *self {
            Perturbation::ThreeBond { marked } => Perturbation::ThreeBond { marked: lat.resolve(&marked)? },
            Perturbation::SingleBond { cell } => {
                single_bond_sites(lat, cell)?;
                Perturbation::SingleBond { cell }
            }
            Perturbation::ExtraSite { attach, onsite_gamma } => {
                Perturbation::ExtraSite { attach: lat.resolve(&attach)?, onsite_gamma }
            }
        })
    }
}

pub fn walk_hamiltonian(lat: &Lattice, eps_d: f64, v: f64) -> HermitianOperator {
    let a = adjacency_matrix(lat).scaled(v);
    a.plus(&HermitianOperator::identity(lat.n_sites).scaled(eps_d)).expect("same dimension")
}

/// W = Σ_{j ~ o} (|o⟩⟨j| + |j⟩⟨o|): √k|ℓ⟩⟨o| + h.c. with |ℓ⟩ normalized
/// over the k actual neighbours.
pub fn three_bond_perturbation(lat: &Lattice, marked: &SiteId) -> Result<HermitianOperator> {
    let o = lat.resolve(marked)?;
    let nbrs = lat.neighbor_indices(o.linear);
    if nbrs.is_empty() {
        return Err(Error::InvalidPerturbation(format!("marked site {o} has no neighbours")));
    }
    let mut w = HermitianOperator::zeros(lat.n_sites);
    for &j in nbrs {
        w.set_real_symmetric(o.linear, j, 1.0);
    }
    Ok(w)
}

/// The A and B sites of `cell`, which must share a bond.
pub fn single_bond_sites(lat: &Lattice, cell: (i64, i64)) -> Result<(SiteId, SiteId)> {
    let a = lat
        .site(cell.0, cell.1, Sublattice::A)
        .map_err(|_| Error::InvalidPerturbation(format!("invalid cell {cell:?}")))?;
    let b = lat
        .site(cell.0, cell.1, Sublattice::B)
        .map_err(|_| Error::InvalidPerturbation(format!("invalid cell {cell:?}")))?;
    if !lat.neighbor_indices(a.linear).contains(&b.linear) {
        return Err(Error::InvalidPerturbation(format!("cell {cell:?} has no intra-cell A-B bond")));
    }
    Ok((a, b))
}

pub fn single_bond_perturbation(lat: &Lattice, cell: (i64, i64)) -> Result<HermitianOperator> {
    let (a, b) = single_bond_sites(lat, cell)?;
    let mut w = HermitianOperator::zeros(lat.n_sites);
    w.set_real_symmetric(a.linear, b.linear, 1.0);
    Ok(w)
}

/// W(γ) on N+1 sites; the extra site has index N.
pub fn extra_site_perturbation(lat: &Lattice, attach: &SiteId, gamma: f64) -> Result<HermitianOperator> {
    let a = lat.resolve(attach)?;
    let n = lat.n_sites;
    let mut w = HermitianOperator::zeros(n + 1);
    w.set_real_symmetric(a.linear, n, -1.0);
    w.set_real_symmetric(n, n, gamma);
    Ok(w)
}

pub fn perturbation_operator(lat: &Lattice, pert: &Perturbation, gamma: f64) -> Result<HermitianOperator> {
    match pert {
        Perturbation::ThreeBond { marked } => three_bond_perturbation(lat, marked),
        Perturbation::SingleBond { cell } => single_bond_perturbation(lat, *cell),
        Perturbation::ExtraSite { attach, .. } => extra_site_perturbation(lat, attach, gamma),
    }
}

/// −γA + W for bond perturbations; −A + W(γ) for the extra site.
pub fn search_hamiltonian(lat: &Lattice, pert: &Perturbation, gamma: f64) -> Result<HermitianOperator> {
    let a = adjacency_matrix(lat);
    match pert {
        Perturbation::ExtraSite { .. } => {
            let w = perturbation_operator(lat, pert, gamma)?;
            a.scaled(-1.0).embedded(w.dim()).plus(&w)
        }
        _ => a.scaled(-gamma).plus(&perturbation_operator(lat, pert, gamma)?),
    }
}

/// −A + W_s + W_t. Extra sites (if any) are appended as source, then target.
pub fn communication_hamiltonian(lat: &Lattice, source: &Perturbation, target: &Perturbation) -> Result<HermitianOperator> {
    let n = lat.n_sites;
    match (source, target) {
        (Perturbation::ThreeBond { marked: s }, Perturbation::ThreeBond { marked: t }) => {
            let (s, t) = (lat.resolve(s)?, lat.resolve(t)?);
            check_pair(lat, &s, &t)?;
            let h = adjacency_matrix(lat).scaled(-1.0);
            h.plus(&three_bond_perturbation(lat, &s)?)?.plus(&three_bond_perturbation(lat, &t)?)
        }
        (
            Perturbation::ExtraSite { attach: s, onsite_gamma: gs },
            Perturbation::ExtraSite { attach: t, onsite_gamma: gt },
        ) => {
            let (s, t) = (lat.resolve(s)?, lat.resolve(t)?);
            check_pair(lat, &s, &t)?;
            let mut h = adjacency_matrix(lat).scaled(-1.0).embedded(n + 2);
            h.add_real_symmetric(s.linear, n, -1.0);
            h.add_real_symmetric(n, n, *gs);
            h.add_real_symmetric(t.linear, n + 1, -1.0);
            h.add_real_symmetric(n + 1, n + 1, *gt);
            Ok(h)
        }
        _ => Err(Error::InvalidPerturbation(
            "communication needs two three-bond or two extra-site perturbations".into(),
        )),
    }
}

fn check_pair(lat: &Lattice, s: &SiteId, t: &SiteId) -> Result<()> {
    if s.linear == t.linear {
        return Err(Error::InvalidPerturbation("source and target coincide".into()));
    }
    if lat.neighbor_indices(s.linear).contains(&t.linear) {
        return Err(Error::InvalidPerturbation(format!("source {s} and target {t} are adjacent")));
    }
    Ok(())
}

/// C₂ rotation about the centre of the bond in `cell` on a torus:
/// A(α,β) ↔ B(2α_o − α, 2β_o − β). Returned as a permutation of linear indices.
pub fn c2_rotation(lat: &Lattice, cell: (i64, i64)) -> Result<Vec<usize>> {
    let (m, n) = lat
        .torus_dims()
        .ok_or_else(|| Error::UnsupportedLattice("C2 rotation is implemented for tori".into()))?;
    single_bond_sites(lat, cell)?;
    let perm = lat
        .sites
        .iter()
        .map(|s| {
            let a = (2 * cell.0 - s.cell_alpha).rem_euclid(m);
            let b = (2 * cell.1 - s.cell_beta).rem_euclid(n);
            lat.site(a, b, s.sublattice.other()).map(|t| t.linear)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_torus;

    #[test]
    fn binary_roundtrip() {
        let lat = build_torus(3, 3).unwrap();
        let marked = lat.site(1, 2, Sublattice::A).unwrap();
        let h = search_hamiltonian(&lat, &Perturbation::ThreeBond { marked }, 0.7).unwrap();
        let mut buf = Vec::new();
        h.write_binary(&mut buf).unwrap();
        let back = HermitianOperator::read_binary(&buf[..]).unwrap();
        assert_eq!(back.mat(), h.mat());
    }

    #[test]
    fn c2_is_an_involution() {
        let lat = build_torus(6, 6).unwrap();
        let p = c2_rotation(&lat, (2, 3)).unwrap();
        assert!(p.iter().enumerate().all(|(i, &j)| p[j] == i));
    }
}
