use diracwalk::lattice::{build_sheet, build_torus, EdgeKind, Sublattice};
use diracwalk::operators::{
    c2_rotation, communication_hamiltonian, extra_site_perturbation, search_hamiltonian, single_bond_perturbation,
    single_bond_sites, three_bond_perturbation, walk_hamiltonian, HermitianOperator, Perturbation,
};
use diracwalk::spectral::{eigenvalues, gap_profile, linspace};
use diracwalk::{Error, C64};
use proptest::prelude::*;

#[test]
fn walk_hamiltonian_extremes() {
    let lat = build_torus(12, 12).unwrap();
    let ev = eigenvalues(&walk_hamiltonian(&lat, 0.0, -1.0)).unwrap();
    assert!((ev[0] + 3.0).abs() < 1e-10 && (ev[287] - 3.0).abs() < 1e-10);
    assert!(ev.iter().filter(|e| e.abs() < 1e-10).count() >= 4);
}

#[test]
fn decoupled_sites() {
    let lat = build_torus(3, 3).unwrap();
    let h = walk_hamiltonian(&lat, 5.0, 0.0);
    for i in 0..18 {
        for j in 0..18 {
            assert_eq!(h.get(i, j), C64::new(if i == j { 5.0 } else { 0.0 }, 0.0));
        }
    }
}

#[test]
fn three_bond_entries() {
    let lat = build_torus(12, 12).unwrap();
    for (a, b) in [(0, 0), (5, 7), (11, 11)] {
        let o = lat.site(a, b, Sublattice::A).unwrap();
        let w = three_bond_perturbation(&lat, &o).unwrap();
        assert_eq!(w.nonzero_count(0.0), 6);
        assert!((0..288).all(|j| w.get(o.linear, j).re == 0.0 || w.get(o.linear, j).re == 1.0));
    }
}

#[test]
fn single_bond_entries() {
    let lat = build_torus(12, 12).unwrap();
    let w = single_bond_perturbation(&lat, (3, 4)).unwrap();
    assert_eq!(w.nonzero_count(0.0), 2);
    let (a, b) = single_bond_sites(&lat, (3, 4)).unwrap();
    assert_eq!(w.get(a.linear, b.linear).re, 1.0);
}

#[test]
fn c2_flips_bond_parity() {
    let lat = build_torus(6, 6).unwrap();
    let perm = c2_rotation(&lat, (2, 1)).unwrap();
    let (a, b) = single_bond_sites(&lat, (2, 1)).unwrap();
    assert_eq!(perm[a.linear], b.linear);
    assert_eq!(perm[b.linear], a.linear);
    // a symmetry of the lattice: adjacency is preserved
    for &(i, j) in &lat.edges {
        assert!(lat.neighbor_indices(perm[i]).contains(&perm[j]));
    }
    // odd bond state changes sign, even stays
    let mut odd = vec![0.0; lat.n_sites];
    odd[a.linear] = 1.0;
    odd[b.linear] = -1.0;
    let mut rotated = vec![0.0; lat.n_sites];
    for i in 0..lat.n_sites {
        rotated[perm[i]] = odd[i];
    }
    assert!(rotated.iter().zip(&odd).all(|(r, o)| *r == -o));
}

#[test]
fn extra_site_layout() {
    let lat = build_torus(12, 12).unwrap();
    let o = lat.site(0, 0, Sublattice::A).unwrap();
    let w = extra_site_perturbation(&lat, &o, 0.0).unwrap();
    assert_eq!(w.dim(), 289);
    assert_eq!(w.nonzero_count(0.0), 2);
    assert_eq!(w.get(o.linear, 288).re, -1.0);
    assert_eq!(w.get(288, 288).re, 0.0);
    assert_eq!(extra_site_perturbation(&lat, &o, 0.4).unwrap().get(288, 288).re, 0.4);
}

#[test]
fn extra_site_gap_closes_at_zero() {
    let lat = build_torus(12, 12).unwrap();
    let o = lat.site(0, 0, Sublattice::A).unwrap();
    let pert = Perturbation::ExtraSite { attach: o, onsite_gamma: 0.0 };
    let prof = gap_profile(&lat, &pert, &linspace(-0.2, 0.2, 21), false).unwrap();
    assert!(prof.argmin().abs() < 1e-12);
}

#[test]
fn critical_three_bond_decouples_marked_site() {
    let lat = build_torus(6, 6).unwrap();
    let o = lat.site(1, 2, Sublattice::B).unwrap();
    let pert = Perturbation::ThreeBond { marked: o };
    let h = search_hamiltonian(&lat, &pert, 1.0).unwrap();
    assert!((0..72).all(|j| h.get(o.linear, j).norm() == 0.0 && h.get(j, o.linear).norm() == 0.0));
    let w = search_hamiltonian(&lat, &pert, 0.0).unwrap();
    let w0 = three_bond_perturbation(&lat, &o).unwrap();
    assert_eq!(w.plus(&w0.scaled(-1.0)).unwrap().max_abs(), 0.0);
}

#[test]
fn single_bond_gap_per_hopping_is_smallest_near_a_third() {
    let lat = build_torus(12, 12).unwrap();
    let pert = Perturbation::SingleBond { cell: (0, 0) };
    let grid = linspace(0.2, 0.5, 31);
    let prof = gap_profile(&lat, &pert, &grid, true).unwrap();
    assert!((prof.argmin() - 1.0 / 3.0).abs() < 0.02, "argmin {}", prof.argmin());
}

#[test]
fn communication_rejects_bad_pairs() {
    let lat = build_torus(12, 12).unwrap();
    let tb = |a, b, s| Perturbation::ThreeBond { marked: lat.site(a, b, s).unwrap() };
    let same = communication_hamiltonian(&lat, &tb(0, 0, Sublattice::A), &tb(0, 0, Sublattice::A));
    assert!(matches!(same, Err(Error::InvalidPerturbation(_))));
    let adjacent = communication_hamiltonian(&lat, &tb(0, 0, Sublattice::A), &tb(0, 0, Sublattice::B));
    assert!(matches!(adjacent, Err(Error::InvalidPerturbation(_))));
    let mixed = communication_hamiltonian(
        &lat,
        &tb(0, 0, Sublattice::A),
        &Perturbation::ExtraSite { attach: lat.site(3, 3, Sublattice::A).unwrap(), onsite_gamma: 0.0 },
    );
    assert!(mixed.is_err());
}

#[test]
fn communication_dimensions() {
    let lat = build_torus(12, 12).unwrap();
    let tb = |a, b| Perturbation::ThreeBond { marked: lat.site(a, b, Sublattice::A).unwrap() };
    assert_eq!(communication_hamiltonian(&lat, &tb(0, 0), &tb(3, 3)).unwrap().dim(), 288);
    let ex = |a, b| Perturbation::ExtraSite { attach: lat.site(a, b, Sublattice::A).unwrap(), onsite_gamma: 0.0 };
    let h = communication_hamiltonian(&lat, &ex(0, 0), &ex(3, 3)).unwrap();
    assert_eq!(h.dim(), 290);
    assert!(h.hermiticity_residual() == 0.0);
}

#[test]
fn sheet_three_bond_uses_actual_neighbours() {
    let lat = build_sheet(4, 4, EdgeKind::Bearded).unwrap();
    let corner = lat.sites.iter().find(|s| lat.neighbor_indices(s.linear).len() == 1).unwrap();
    let w = three_bond_perturbation(&lat, corner).unwrap();
    assert_eq!(w.nonzero_count(0.0), 2);
}

#[test]
fn binary_roundtrip() {
    let lat = build_torus(3, 3).unwrap();
    let o = lat.site(0, 0, Sublattice::A).unwrap();
    let h = search_hamiltonian(&lat, &Perturbation::ExtraSite { attach: o, onsite_gamma: 0.25 }, 0.25).unwrap();
    let mut buf = Vec::new();
    h.write_binary(&mut buf).unwrap();
    let back = HermitianOperator::read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.dim(), 19);
    assert_eq!(back.plus(&h.scaled(-1.0)).unwrap().max_abs(), 0.0);
    let mut csv = Vec::new();
    h.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 19);
}

#[test]
fn perturbation_serde() {
    let lat = build_torus(3, 3).unwrap();
    let p = Perturbation::SingleBond { cell: (1, 2) };
    let s = serde_json::to_string(&p).unwrap();
    assert!(s.contains("\"kind\":\"single_bond\""));
    let back: Perturbation = serde_json::from_str(&s).unwrap();
    assert_eq!(back, p);
    assert_eq!(back.critical_gamma(), 1.0 / 3.0);
    assert!(back.resolve(&lat).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_hamiltonians_are_hermitian(
        m in 3i64..8, n in 3i64..8, a in 0i64..8, b in 0i64..8, sub in any::<bool>(), kind in 0u8..3, gamma in -2.0f64..2.0
    ) {
        let lat = build_torus(m, n).unwrap();
        let site = lat.site(a % m, b % n, if sub { Sublattice::A } else { Sublattice::B }).unwrap();
        let pert = match kind {
            0 => Perturbation::ThreeBond { marked: site },
            1 => Perturbation::SingleBond { cell: (a % m, b % n) },
            _ => Perturbation::ExtraSite { attach: site, onsite_gamma: gamma },
        };
        let h = search_hamiltonian(&lat, &pert, gamma).unwrap();
        prop_assert!(h.hermiticity_residual() <= 1e-12);
        prop_assert_eq!(h.dim(), pert.dim(lat.n_sites));
    }
}
