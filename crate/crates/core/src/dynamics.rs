//! Exact time evolution and the search / communication experiments.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoundarySpec, Lattice, SiteId, Sublattice};
use crate::operators::{
    communication_hamiltonian, search_hamiltonian, single_bond_sites, walk_hamiltonian, Perturbation,
};
use crate::spectral::{
    crossing_gap, dirac_states, edge_state_detection, eigendecompose, linspace, EdgeParams, SpectralDecomposition,
    ZERO_TOL,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
    /// Free-form description carried into results.
    pub label: String,
}

impl StateVector {
    /// Normalizes `v`; fails on a (numerically) zero vector.
    pub fn normalized(v: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        let n = norm(&v);
        if n < 1e-12 {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(StateVector { amplitudes: v.into_iter().map(|z| z / n).collect(), label: label.into() })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[i] = C64::new(1.0, 0.0);
        StateVector { amplitudes: v, label: format!("site {i}") }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.amplitudes[i].norm_sqr()
    }

    pub fn probability_on(&self, sites: &[usize]) -> f64 {
        sites.iter().map(|&i| self.probability(i)).sum()
    }

    /// Zero-pad to `dim` (appending extra sites).
    pub fn embedded(&self, dim: usize) -> Self {
        let mut v = self.amplitudes.clone();
        v.resize(dim, C64::new(0.0, 0.0));
        StateVector { amplitudes: v, label: self.label.clone() }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ψ(t) = Σ_a e^{−iE_a t}⟨ψ_a|ψ₀⟩|ψ_a⟩ for one decomposition and start state.
pub struct Propagator<'a> {
    spec: &'a SpectralDecomposition,
    coeffs: Vec<C64>,
}

impl<'a> Propagator<'a> {
    pub fn new(spec: &'a SpectralDecomposition, psi0: &StateVector) -> Result<Self> {
        Ok(Propagator { spec, coeffs: spec.coefficients(&psi0.amplitudes)? })
    }

    fn phased(&self, t: f64) -> Vec<C64> {
        self.spec.eigenvalues.iter().zip(&self.coeffs).map(|(&e, &c)| c * C64::from_polar(1.0, -e * t)).collect()
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        let ph = self.phased(t);
        let n = self.spec.dim();
        let amplitudes = (0..n).map(|i| (0..n).map(|a| self.spec.eigenvectors[(i, a)] * ph[a]).sum()).collect();
        StateVector { amplitudes, label: format!("t = {t}") }
    }

    /// Probabilities on selected sites only, at each time: O(|sites|·N) per sample.
    pub fn site_probabilities(&self, sites: &[usize], times: &[f64]) -> Vec<Vec<f64>> {
        let n = self.spec.dim();
        times
            .iter()
            .map(|&t| {
                let ph = self.phased(t);
                sites
                    .iter()
                    .map(|&i| (0..n).map(|a| self.spec.eigenvectors[(i, a)] * ph[a]).sum::<C64>().norm_sqr())
                    .collect()
            })
            .collect()
    }
}

pub fn evolve(spec: &SpectralDecomposition, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    let p = Propagator::new(spec, psi0)?;
    Ok(times.iter().map(|&t| p.state_at(t)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackedSeries {
    pub label: String,
    /// Sites summed into this series.
    pub sites: Vec<usize>,
    pub probability: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub tracked: Vec<TrackedSeries>,
    pub total: Vec<f64>,
}

impl Trajectory {
    /// Evolve and record the summed probability of each site group.
    pub fn record(
        spec: &SpectralDecomposition,
        psi0: &StateVector,
        groups: &[(String, Vec<usize>)],
        times: &[f64],
    ) -> Result<Self> {
        let p = Propagator::new(spec, psi0)?;
        let flat: Vec<usize> = groups.iter().flat_map(|g| g.1.iter().copied()).collect();
        if let Some(&bad) = flat.iter().find(|&&i| i >= spec.dim()) {
            return Err(Error::DimensionMismatch { expected: spec.dim(), got: bad + 1 });
        }
        let probs = p.site_probabilities(&flat, times);
        let mut tracked = Vec::with_capacity(groups.len());
        let mut offset = 0;
        for (label, sites) in groups {
            let probability = probs.iter().map(|row| row[offset..offset + sites.len()].iter().sum()).collect();
            tracked.push(TrackedSeries { label: label.clone(), sites: sites.clone(), probability });
            offset += sites.len();
        }
        let total = (0..times.len()).map(|k| tracked.iter().map(|s| s.probability[k]).sum()).collect();
        Ok(Trajectory { times: times.to_vec(), tracked, total })
    }

    pub fn series(&self, label: &str) -> Option<&TrackedSeries> {
        self.tracked.iter().find(|s| s.label == label)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["time".to_string()];
        header.extend(self.tracked.iter().map(|s| s.label.clone()));
        header.push("total".into());
        writeln!(w, "{}", header.join(","))?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.tracked.iter().map(|s| s.probability[k].to_string()));
            row.push(self.total[k].to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Global maximum, refined by a parabola through the bracketing samples.
pub fn refine_peak(times: &[f64], values: &[f64]) -> (f64, f64) {
    let k = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty series");
    if k == 0 || k + 1 == values.len() {
        return (times[k], values[k]);
    }
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (times[k], y1);
    }
    let h = times[k + 1] - times[k];
    let off = 0.5 * (y0 - y2) / denom;
    (times[k] + off * h, y1 - 0.25 * (y0 - y2) * off)
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub peak_probability: f64,
    pub peak_time: f64,
    pub trajectory: Trajectory,
    pub start: String,
}

impl SearchResult {
    /// Refined peak of one tracked series.
    pub fn series_peak(&self, label: &str) -> Option<(f64, f64)> {
        self.trajectory.series(label).map(|s| refine_peak(&self.trajectory.times, &s.probability))
    }
}

fn site_group(s: &SiteId) -> (String, Vec<usize>) {
    (s.label(), vec![s.linear])
}

/// Sites watched during a search, one group per site.
pub fn tracked_sites(lat: &Lattice, pert: &Perturbation) -> Result<Vec<(String, Vec<usize>)>> {
    Ok(match pert.resolve(lat)? {
        Perturbation::ThreeBond { marked } => {
            lat.neighbor_indices(marked.linear).iter().map(|&j| site_group(&lat.sites[j])).collect()
        }
        Perturbation::SingleBond { cell } => {
            let (a, b) = single_bond_sites(lat, cell)?;
            let mut g = vec![site_group(&a), site_group(&b)];
            for s in [a, b] {
                for &j in lat.neighbor_indices(s.linear) {
                    if j != a.linear && j != b.linear {
                        g.push(site_group(&lat.sites[j]));
                    }
                }
            }
            g
        }
        Perturbation::ExtraSite { .. } => vec![("extra".into(), vec![lat.n_sites])],
    })
}

fn check_times(t_max: f64, n_steps: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || n_steps < 2 {
        return Err(Error::InvalidArgument(format!("need t_max > 0 and n_steps >= 2 (got {t_max}, {n_steps})")));
    }
    Ok(linspace(0.0, t_max, n_steps))
}

pub fn run_search(
    lat: &Lattice,
    pert: &Perturbation,
    gamma_c: f64,
    t_max: f64,
    n_steps: usize,
    start: &StateVector,
) -> Result<SearchResult> {
    let groups = tracked_sites(lat, pert)?;
    run_search_tracked(lat, pert, gamma_c, t_max, n_steps, start, &groups)
}

/// `run_search` with explicit site groups in place of the default ones.
pub fn run_search_tracked(
    lat: &Lattice,
    pert: &Perturbation,
    gamma_c: f64,
    t_max: f64,
    n_steps: usize,
    start: &StateVector,
    groups: &[(String, Vec<usize>)],
) -> Result<SearchResult> {
    let pert = pert.resolve(lat)?;
    let times = check_times(t_max, n_steps)?;
    let h = search_hamiltonian(lat, &pert, gamma_c)?;
    if start.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: start.dim() });
    }
    let spec = eigendecompose(&h)?;
    let trajectory = Trajectory::record(&spec, start, groups, &times)?;
    let (peak_time, peak_probability) = refine_peak(&trajectory.times, &trajectory.total);
    Ok(SearchResult { peak_probability, peak_time, trajectory, start: start.label.clone() })
}

/// The closed-form time scale used to size default windows: (π/4)√(N/3)
/// for three-bond, (π/4)√N for the extra site, π/Δ(1/3) for single-bond.
pub fn reduced_search_time(lat: &Lattice, pert: &Perturbation) -> Result<f64> {
    let n = lat.n_sites as f64;
    Ok(match pert {
        Perturbation::ThreeBond { .. } => PI / 4.0 * (n / 3.0).sqrt(),
        Perturbation::ExtraSite { .. } => PI / 4.0 * n.sqrt(),
        Perturbation::SingleBond { .. } => {
            let g = crossing_gap(lat, pert, pert.critical_gamma())?.gap;
            if g <= 0.0 {
                return Err(Error::NoGap("single-bond crossing is exact".into()));
            }
            PI / g
        }
    })
}

/// Default window: 600 samples on [0, 2.5·T].
pub fn default_time_grid(lat: &Lattice, pert: &Perturbation) -> Result<(f64, usize)> {
    Ok((2.5 * reduced_search_time(lat, pert)?, 600))
}

/// Marked-site Dirac superposition on a 3|m, 3|n torus:
/// |s⟩ = (e^{−iμ}|K⟩ + e^{−iν}|K′⟩)/√2 on the marked site's sublattice,
/// with e^{iμ}, e^{iν} the Dirac-state phases at the site.
pub fn optimal_start_state(lat: &Lattice, marked: &SiteId) -> Result<StateVector> {
    let o = lat.resolve(marked)?;
    let (k, kp) = dirac_states(lat, o.sublattice)?;
    let (ck, ckp) = (k[o.linear].conj() / k[o.linear].norm(), kp[o.linear].conj() / kp[o.linear].norm());
    let v = k.iter().zip(&kp).map(|(a, b)| (ck * a + ckp * b) * std::f64::consts::FRAC_1_SQRT_2).collect();
    Ok(StateVector { amplitudes: v, label: format!("optimal start for {o}") })
}

/// The three optimal start states of one sublattice, indexed by (α − β) mod 3.
pub fn optimal_start_states(lat: &Lattice, sublattice: Sublattice) -> Result<Vec<StateVector>> {
    (0..3).map(|c| optimal_start_state(lat, &lat.site(c, 0, sublattice)?)).collect()
}

/// Normalized projection of `v` onto the zero-energy eigenspace of −A.
pub fn dirac_projected_start(lat: &Lattice, v: &[C64], label: &str) -> Result<StateVector> {
    let spec = eigendecompose(&walk_hamiltonian(lat, 0.0, -1.0))?;
    let zeros = spec.zero_modes(ZERO_TOL);
    if zeros.is_empty() {
        return Err(Error::UnsupportedLattice("unperturbed lattice has no zero modes".into()));
    }
    StateVector::normalized(spec.project(v, &zeros)?, label)
        .map_err(|_| Error::InvalidArgument(format!("{label}: no overlap with the zero-energy states")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Dirac-space projection of the bond parity state W_e (even) or W_g (odd).
pub fn single_bond_start(lat: &Lattice, cell: (i64, i64), parity: Parity) -> Result<StateVector> {
    let (a, b) = single_bond_sites(lat, cell)?;
    let mut v = vec![C64::new(0.0, 0.0); lat.n_sites];
    v[a.linear] = C64::new(1.0, 0.0);
    v[b.linear] = C64::new(if parity == Parity::Even { 1.0 } else { -1.0 }, 0.0);
    dirac_projected_start(lat, &v, &format!("{parity:?} bond start for cell {cell:?}").to_lowercase())
}

/// Eigenstates of the unperturbed sheet: (first delocalized state above
/// zero, the positive edge state closest to zero).
pub fn sheet_start_states(lat: &Lattice) -> Result<(StateVector, StateVector)> {
    if !matches!(lat.boundary, BoundarySpec::Sheet { .. }) {
        return Err(Error::UnsupportedLattice("sheet start states need a sheet".into()));
    }
    let spec = eigendecompose(&walk_hamiltonian(lat, 0.0, -1.0))?;
    let p = EdgeParams::default();
    let edges = edge_state_detection(&spec, lat, p.energy_window, p.boundary_weight_threshold)?;
    let pick = |want_edge: bool| {
        (0..spec.dim())
            .filter(|&a| spec.eigenvalues[a] > ZERO_TOL && edges.contains(&a) == want_edge)
            .min_by(|&a, &b| spec.eigenvalues[a].total_cmp(&spec.eigenvalues[b]))
    };
    let deloc = pick(false).ok_or_else(|| Error::NoGap("no delocalized state above zero".into()))?;
    let edge = pick(true).ok_or_else(|| Error::NoGap("no positive edge state".into()))?;
    let mk = |a: usize, what: &str| StateVector {
        amplitudes: spec.vector(a),
        label: format!("{what} (E = {:.6})", spec.eigenvalues[a]),
    };
    Ok((mk(deloc, "first delocalized state"), mk(edge, "edge state")))
}

/// Start state appropriate to the lattice and perturbation: the optimal
/// Dirac superposition on tori, the Dirac-space projection of the marked
/// site (or odd bond state) on nanotubes, the first delocalized state on sheets.
pub fn default_start_state(lat: &Lattice, pert: &Perturbation) -> Result<StateVector> {
    let pert = pert.resolve(lat)?;
    let dim = pert.dim(lat.n_sites);
    let site = match pert {
        Perturbation::ThreeBond { marked } => Some(marked),
        Perturbation::ExtraSite { attach, .. } => Some(attach),
        Perturbation::SingleBond { .. } => None,
    };
    let s = match (lat.boundary, site, pert) {
        (BoundarySpec::Sheet { .. }, _, _) => sheet_start_states(lat)?.0,
        (_, _, Perturbation::SingleBond { cell }) => single_bond_start(lat, cell, Parity::Odd)?,
        (BoundarySpec::Torus { .. }, Some(o), _) => optimal_start_state(lat, &o)?,
        (_, Some(o), _) => dirac_projected_start(lat, &StateVector::basis(lat.n_sites, o.linear).amplitudes, &format!("Dirac projection of {o}"))?,
        _ => unreachable!("single-bond handled above"),
    };
    Ok(s.embedded(dim))
}

/// State at the peak of a single-perturbation search over the default window.
pub fn localized_state_snapshot(lat: &Lattice, pert: &Perturbation, gamma_c: f64, start: &StateVector) -> Result<(StateVector, f64)> {
    let (t_max, n) = default_time_grid(lat, pert)?;
    let r = run_search(lat, pert, gamma_c, t_max, n, start)?;
    let spec = eigendecompose(&search_hamiltonian(lat, &pert.resolve(lat)?, gamma_c)?)?;
    let psi = Propagator::new(&spec, start)?.state_at(r.peak_time);
    let psi = StateVector::normalized(psi.amplitudes, format!("snapshot at t = {:.4}", r.peak_time))?;
    Ok((psi, r.peak_time))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// Same sublattice, same optimal start state.
    Equivalent,
    SameSublatticeNonEquivalent,
    CrossSublattice,
}

/// Classify a source/target pair on a 3|m, 3|n torus via the phase class (α − β) mod 3.
pub fn classify_pair(lat: &Lattice, s: &SiteId, t: &SiteId) -> Option<PairClass> {
    if !lat.has_dirac_points() {
        return None;
    }
    Some(if s.sublattice != t.sublattice {
        PairClass::CrossSublattice
    } else if (s.cell_alpha - s.cell_beta).rem_euclid(3) == (t.cell_alpha - t.cell_beta).rem_euclid(3) {
        PairClass::Equivalent
    } else {
        PairClass::SameSublatticeNonEquivalent
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CommResult {
    /// Series "source" and "target": probability on the perturber sites of each.
    pub trajectory: Trajectory,
    pub pair_class: Option<PairClass>,
    pub snapshot_time: f64,
    pub initial_source_probability: f64,
    pub target_peak_probability: f64,
    pub target_peak_time: f64,
}

fn perturber_sites(lat: &Lattice, p: &Perturbation, extra_index: usize) -> Vec<usize> {
    match p {
        Perturbation::ThreeBond { marked } => lat.neighbor_indices(marked.linear).to_vec(),
        _ => vec![extra_index],
    }
}

/// Transfer from source to target. The walker starts in the peak snapshot
/// of the source-only search run from the default start state.
pub fn run_communication(
    lat: &Lattice,
    src: &Perturbation,
    tgt: &Perturbation,
    t_max: f64,
    n_steps: usize,
) -> Result<CommResult> {
    let (src, tgt) = (src.resolve(lat)?, tgt.resolve(lat)?);
    let start = default_start_state(lat, &src)?;
    let (snap, snapshot_time) = localized_state_snapshot(lat, &src, src.critical_gamma(), &start)?;
    run_communication_from(lat, &src, &tgt, t_max, n_steps, &snap, snapshot_time)
}

/// As `run_communication` with an explicit initial state (lattice or
/// lattice+source-extra dimension; padded as needed).
pub fn run_communication_from(
    lat: &Lattice,
    src: &Perturbation,
    tgt: &Perturbation,
    t_max: f64,
    n_steps: usize,
    initial: &StateVector,
    snapshot_time: f64,
) -> Result<CommResult> {
    let (src, tgt) = (src.resolve(lat)?, tgt.resolve(lat)?);
    let times = check_times(t_max, n_steps)?;
    let h = communication_hamiltonian(lat, &src, &tgt)?;
    if initial.dim() > h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: initial.dim() });
    }
    let psi0 = initial.embedded(h.dim());
    let n = lat.n_sites;
    let groups = vec![
        ("source".to_string(), perturber_sites(lat, &src, n)),
        ("target".to_string(), perturber_sites(lat, &tgt, n + 1)),
    ];
    let spec = eigendecompose(&h)?;
    let trajectory = Trajectory::record(&spec, &psi0, &groups, &times)?;
    let pair_class = match (src, tgt) {
        (Perturbation::ThreeBond { marked: s }, Perturbation::ThreeBond { marked: t })
        | (Perturbation::ExtraSite { attach: s, .. }, Perturbation::ExtraSite { attach: t, .. }) => {
            classify_pair(lat, &s, &t)
        }
        _ => None,
    };
    let target = &trajectory.tracked[1].probability;
    let (target_peak_time, target_peak_probability) = refine_peak(&trajectory.times, target);
    Ok(CommResult {
        initial_source_probability: trajectory.tracked[0].probability[0],
        trajectory,
        pair_class,
        snapshot_time,
        target_peak_probability,
        target_peak_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_refinement_recovers_vertex() {
        let times = linspace(0.0, 1.0, 11);
        let vals: Vec<f64> = times.iter().map(|t| 1.0 - (t - 0.43) * (t - 0.43)).collect();
        let (t, p) = refine_peak(&times, &vals);
        assert!((t - 0.43).abs() < 1e-12 && (p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peak_at_the_boundary_is_not_extrapolated() {
        let (t, p) = refine_peak(&[0.0, 1.0, 2.0], &[0.1, 0.2, 0.3]);
        assert_eq!((t, p), (2.0, 0.3));
    }
}
